//! Problem abstraction for `min { f(z) + h(z) : Az = b }` and the dampened
//! augmented Lagrangian evaluations shared by every solver.
//!
//! `f` is smooth with curvature pair `(m, M)`:
//! `-(m/2)|u-z|^2 <= f(u) - f(z) - <grad f(z), u-z> <= (M/2)|u-z|^2`.
//! `h` is convex and exposes its proximal map. All oracles are immutable
//! after construction and are shared through `Arc`.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::error::ProblemError;
use crate::linalg::{self, DenseMatrix};

/// Smooth part `f` of the objective.
pub trait SmoothOracle: Send + Sync {
    fn dim(&self) -> usize;
    /// Weak-convexity modulus `m`.
    fn lower_curvature(&self) -> f64;
    /// Gradient Lipschitz constant `M`.
    fn upper_curvature(&self) -> f64;
    fn value(&self, z: &[f64]) -> f64;
    /// Writes the gradient into `grad` and returns the value.
    fn value_and_gradient(&self, z: &[f64], grad: &mut [f64]) -> f64;

    fn gradient(&self, z: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.dim()];
        self.value_and_gradient(z, &mut g);
        g
    }

    /// Known bound on `sup_{z in dom h} |grad f(z)|`, if any.
    fn gradient_bound(&self) -> Option<f64> {
        None
    }
}

/// Convex, prox-friendly part `h` of the objective.
pub trait ProxOracle: Send + Sync {
    fn dim(&self) -> usize;
    /// `+inf` outside the domain.
    fn value(&self, z: &[f64]) -> f64;
    /// `out = argmin_u { t h(u) + |u - x|^2 / 2 }`.
    fn prox(&self, t: f64, x: &[f64], out: &mut [f64]) -> Result<(), ProblemError>;

    /// Lipschitz constant `K_h` of `h` on its domain.
    fn lipschitz(&self) -> Option<f64> {
        None
    }
    /// Diameter `D_h` of the domain.
    fn diameter(&self) -> Option<f64> {
        None
    }
    /// Distance from `z` to the (relative) boundary of the domain.
    fn boundary_distance(&self, _z: &[f64]) -> Option<f64> {
        None
    }
}

/// Linear operator `A` together with its adjoint.
pub trait LinearMap: Send + Sync {
    fn domain_dim(&self) -> usize;
    fn image_dim(&self) -> usize;
    fn apply(&self, z: &[f64], out: &mut [f64]);
    fn adjoint(&self, p: &[f64], out: &mut [f64]);

    /// Exact operator norm when known analytically.
    fn exact_norm(&self) -> Option<f64> {
        None
    }

    /// Dense matrix of the operator, assembled column by column.
    fn to_dense(&self) -> DenseMatrix {
        let (n, l) = (self.domain_dim(), self.image_dim());
        let mut out = DenseMatrix::zeros(l, n);
        let mut e = vec![0.0; n];
        let mut col = vec![0.0; l];
        for j in 0..n {
            e[j] = 1.0;
            self.apply(&e, &mut col);
            e[j] = 0.0;
            for (i, v) in col.iter().enumerate() {
                out.set(i, j, *v);
            }
        }
        out
    }
}

impl LinearMap for DenseMatrix {
    fn domain_dim(&self) -> usize {
        self.cols
    }
    fn image_dim(&self) -> usize {
        self.rows
    }
    fn apply(&self, z: &[f64], out: &mut [f64]) {
        self.matvec(z, out)
    }
    fn adjoint(&self, p: &[f64], out: &mut [f64]) {
        self.matvec_t(p, out)
    }
    fn to_dense(&self) -> DenseMatrix {
        self.clone()
    }
}

pub const OPNORM_TOL: f64 = 1e-8;
pub const OPNORM_MAX_ITER: usize = 5000;
/// Inflation applied to estimated operator norms; overestimating `|A|` only
/// loosens the curvature bound of the subproblems.
pub const OPNORM_INFLATION: f64 = 1.001;
const OPNORM_SEED: u64 = 0x5eed_0a11_ce00_0001;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpnormEstimate {
    pub value: f64,
    /// `false` when `max_iter` was hit first; `value` is then the best estimate.
    pub converged: bool,
}

/// Power iteration on `A^*A` from a fixed pseudo-random start.
pub fn estimate_opnorm(map: &dyn LinearMap, tol: f64, max_iter: usize) -> OpnormEstimate {
    let (n, l) = (map.domain_dim(), map.image_dim());
    let mut rng = ChaCha20Rng::seed_from_u64(OPNORM_SEED);
    let mut x: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
    let nx = linalg::norm(&x);
    linalg::scale(1.0 / nx, &mut x);
    let mut ax = vec![0.0; l];
    let mut atax = vec![0.0; n];
    let mut estimate = 0.0;
    for _ in 0..max_iter {
        map.apply(&x, &mut ax);
        map.adjoint(&ax, &mut atax);
        // Rayleigh quotient of A^*A at the unit vector x
        let sq = linalg::dot(&ax, &ax);
        let next = sq.sqrt();
        let nrm = linalg::norm(&atax);
        if nrm == 0.0 {
            return OpnormEstimate { value: 0.0, converged: true };
        }
        let rel = (next - estimate).abs() / next.max(f64::MIN_POSITIVE);
        estimate = next;
        x.iter_mut().zip(&atax).for_each(|(xi, yi)| *xi = yi / nrm);
        if rel <= tol {
            return OpnormEstimate { value: estimate, converged: true };
        }
    }
    OpnormEstimate { value: estimate, converged: false }
}

/// The constraint `Az = b` with a cached (upper estimate of) `|A|`.
#[derive(Clone)]
pub struct LinearConstraint {
    map: Arc<dyn LinearMap>,
    rhs: Vec<f64>,
    opnorm: f64,
}

impl std::fmt::Debug for LinearConstraint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LinearConstraint")
            .field("domain_dim", &self.map.domain_dim())
            .field("image_dim", &self.map.image_dim())
            .field("opnorm", &self.opnorm)
            .finish()
    }
}

impl LinearConstraint {
    /// Uses the map's exact norm when available, otherwise a power-iteration
    /// estimate inflated by [`OPNORM_INFLATION`].
    pub fn new(map: Arc<dyn LinearMap>, rhs: Vec<f64>) -> Result<Self, ProblemError> {
        let opnorm = match map.exact_norm() {
            Some(v) => v,
            None => {
                let est = estimate_opnorm(map.as_ref(), OPNORM_TOL, OPNORM_MAX_ITER);
                if !est.converged {
                    log::warn!("operator norm power iteration hit its iteration cap");
                }
                est.value * OPNORM_INFLATION
            }
        };
        Self::with_opnorm(map, rhs, opnorm)
    }

    pub fn with_opnorm(map: Arc<dyn LinearMap>, rhs: Vec<f64>, opnorm: f64) -> Result<Self, ProblemError> {
        if rhs.len() != map.image_dim() {
            return Err(ProblemError::Dimension { what: "rhs", got: rhs.len(), expected: map.image_dim() });
        }
        if !(opnorm > 0.0) {
            return Err(ProblemError::ZeroOperator);
        }
        Ok(Self { map, rhs, opnorm })
    }

    pub fn map(&self) -> &dyn LinearMap {
        self.map.as_ref()
    }
    pub fn rhs(&self) -> &[f64] {
        &self.rhs
    }
    pub fn opnorm(&self) -> f64 {
        self.opnorm
    }
    pub fn domain_dim(&self) -> usize {
        self.map.domain_dim()
    }
    pub fn image_dim(&self) -> usize {
        self.map.image_dim()
    }

    pub fn apply(&self, z: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.image_dim()];
        self.map.apply(z, &mut out);
        out
    }

    pub fn adjoint(&self, p: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.domain_dim()];
        self.map.adjoint(p, &mut out);
        out
    }

    /// `out = Az - b`
    pub fn residual_into(&self, z: &[f64], out: &mut [f64]) {
        self.map.apply(z, out);
        out.iter_mut().zip(&self.rhs).for_each(|(o, b)| *o -= b);
    }
}

/// `min { f(z) + h(z) : Az = b }`.
#[derive(Clone)]
pub struct ConstrainedProblem {
    pub f: Arc<dyn SmoothOracle>,
    pub h: Arc<dyn ProxOracle>,
    pub constraint: LinearConstraint,
}

impl std::fmt::Debug for ConstrainedProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ConstrainedProblem")
            .field("dim", &self.dim())
            .field("m", &self.f.lower_curvature())
            .field("M", &self.f.upper_curvature())
            .field("constraint", &self.constraint)
            .finish()
    }
}

impl ConstrainedProblem {
    pub fn new(
        f: Arc<dyn SmoothOracle>,
        h: Arc<dyn ProxOracle>,
        constraint: LinearConstraint,
    ) -> Result<Self, ProblemError> {
        let n = f.dim();
        if h.dim() != n {
            return Err(ProblemError::Dimension { what: "h", got: h.dim(), expected: n });
        }
        if constraint.domain_dim() != n {
            return Err(ProblemError::Dimension { what: "A", got: constraint.domain_dim(), expected: n });
        }
        let (m, upper) = (f.lower_curvature(), f.upper_curvature());
        if !(m >= 0.0 && upper > 0.0 && m <= upper) {
            return Err(ProblemError::Curvature { m, upper });
        }
        Ok(Self { f, h, constraint })
    }

    pub fn dim(&self) -> usize {
        self.f.dim()
    }

    pub fn image_dim(&self) -> usize {
        self.constraint.image_dim()
    }

    /// `phi(z) = f(z) + h(z)`
    pub fn objective(&self, z: &[f64]) -> Result<f64, ProblemError> {
        let hz = self.h.value(z);
        if !hz.is_finite() {
            return Err(ProblemError::OutsideDomain);
        }
        Ok(self.f.value(z) + hz)
    }
}

/// `Az - b`
pub fn feasibility_residual(prob: &ConstrainedProblem, z: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; prob.image_dim()];
    prob.constraint.residual_into(z, &mut out);
    out
}

/// Dampened augmented Lagrangian
/// `phi(z) + (1-theta)<p, Az-b> + (c/2)|Az-b|^2`.
pub fn aug_lagrangian_value(
    prob: &ConstrainedProblem,
    z: &[f64],
    p: &[f64],
    c: f64,
    theta: f64,
) -> Result<f64, ProblemError> {
    let phi = prob.objective(z)?;
    let r = feasibility_residual(prob, z);
    Ok(phi + (1.0 - theta) * linalg::dot(p, &r) + 0.5 * c * linalg::dot(&r, &r))
}

/// Gradient of the smooth part of the dampened augmented Lagrangian,
/// `grad f(z) + (1-theta) A^*p + c A^*(Az-b)`.
pub fn smooth_al_gradient(prob: &ConstrainedProblem, z: &[f64], p: &[f64], c: f64, theta: f64) -> Vec<f64> {
    let mut grad = prob.f.gradient(z);
    let mut r = feasibility_residual(prob, z);
    r.iter_mut().zip(p).for_each(|(ri, pi)| *ri = (1.0 - theta) * pi + c * *ri);
    let at = prob.constraint.adjoint(&r);
    linalg::axpy(1.0, &at, &mut grad);
    grad
}

/// Prox fixed-point residual certifying `xi in ∂h(z)`.
///
/// Returns `|prox(t, z + t xi) - z|` with `t = min(1, 1/|xi|)`. Since
/// `z = prox(t, z + t xi)` holds for every `t > 0` exactly when
/// `xi ∈ ∂h(z)`, the shrunken step only avoids swamping `z` by a large `xi`
/// in floating point.
pub fn subgradient_residual(h: &dyn ProxOracle, z: &[f64], xi: &[f64]) -> Result<f64, ProblemError> {
    prox_fixed_point_residual(|t, x, out| h.prox(t, x, out), z, xi)
}

/// [`subgradient_residual`] for a prox given as a closure `(t, x, out)`.
pub fn prox_fixed_point_residual<P>(prox: P, z: &[f64], xi: &[f64]) -> Result<f64, ProblemError>
where
    P: FnOnce(f64, &[f64], &mut [f64]) -> Result<(), ProblemError>,
{
    let t = 1.0f64.min(1.0 / linalg::norm(xi).max(f64::MIN_POSITIVE));
    let shifted: Vec<f64> = z.iter().zip(xi).map(|(zi, x)| zi + t * x).collect();
    let mut out = vec![0.0; z.len()];
    prox(t, &shifted, &mut out)?;
    Ok(linalg::dist(&out, z))
}

/// Residual of the inclusion `v ∈ grad f(z) + ∂h(z) + A^*p`.
pub fn stationarity_residual(prob: &ConstrainedProblem, z: &[f64], p: &[f64], v: &[f64]) -> Result<f64, ProblemError> {
    let grad = prob.f.gradient(z);
    let atp = prob.constraint.adjoint(p);
    let xi: Vec<f64> = v.iter().zip(&grad).zip(&atp).map(|((vi, gi), ai)| vi - gi - ai).collect();
    subgradient_residual(prob.h.as_ref(), z, &xi)
}
