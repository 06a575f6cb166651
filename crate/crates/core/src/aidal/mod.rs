//! Accelerated inexact dampened augmented Lagrangian (AIDAL) method.
//!
//! Each outer iteration `k`:
//!
//! 1. approximately solves the proximal subproblem
//!    `min lambda L_c^theta(.; p_{k-1}) + |. - z_{k-1}|^2/2` with ACG;
//! 2. forms the refined pair `(v_hat, p_hat)` and stops when both the
//!    stationarity and feasibility residuals are small;
//! 3. doubles `c` when stationarity is met but feasibility is not;
//! 4. applies the dampened multiplier step
//!    `p_k = (1-theta) p_{k-1} + chi c_k (A z_k - b)`.
//!
//! `(chi, theta)` must satisfy `2(1-theta)(2-theta)chi <= theta^2`.

mod diagnostics;
pub(crate) mod solver;

pub use diagnostics::{
    cycle_length_bound, diagnostic_constants, penalty_threshold, DiagnosticConstants, DiagnosticInputs,
};
pub use solver::{aidal_solve, OuterState, SolveError, SolveFailure, SolveReport, Trial};
pub(crate) use solver::{run_outer_loop, StepsizeRule};

use serde::{Deserialize, Serialize};

use crate::acg::CompositeSubproblem;
use crate::error::{ParamError, ProblemError};
use crate::linalg;
use crate::problem::{aug_lagrangian_value, ConstrainedProblem};

/// Which stopping test the outer loop applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum TerminationMode {
    /// `|v_hat| <= rho` and `|Az - b| <= eta`.
    #[default]
    Absolute,
    /// Tolerances scaled by `|grad f(z0)| + 1` and `|A z0 - b| + 1`.
    Relative,
}

/// Coefficients of the potential function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PotentialWeights {
    /// `a_theta = theta(1-theta)` and `alpha_{chi,theta}` from `(chi, theta)`.
    Theoretical,
    /// Fixed `(a_theta, alpha)` pair.
    Override { a_theta: f64, alpha: f64 },
}

impl PotentialWeights {
    /// The `a_theta = 1`, `alpha = 0` choice used with `(chi, theta) = (1, 0)`.
    pub const HEURISTIC: Self = Self::Override { a_theta: 1.0, alpha: 0.0 };
}

pub const DEFAULT_MAX_OUTER: usize = 100_000;
pub const DEFAULT_MAX_TOTAL_INNER: usize = 10_000_000;

#[derive(Debug, Clone)]
pub struct AidalParams {
    pub sigma: f64,
    pub chi: f64,
    pub theta: f64,
    pub c1: f64,
    pub rho: f64,
    pub eta: f64,
    /// Prox stepsize; the initial stepsize for the adaptive variant.
    pub lambda: f64,
    /// `None` means the zero multiplier.
    pub p0: Option<Vec<f64>>,
    pub z0: Vec<f64>,
    pub max_outer: usize,
    pub max_total_inner: usize,
    pub potential: PotentialWeights,
}

impl AidalParams {
    /// Standard settings: `sigma = 0.3`, `(chi, theta) = (1/6, 1/2)`,
    /// `lambda = 1/(2m)`, `c1 = max(1, M/|A|^2)`, `p0 = 0`.
    pub fn for_problem(prob: &ConstrainedProblem, z0: Vec<f64>) -> Self {
        let m = prob.f.lower_curvature();
        let upper = prob.f.upper_curvature();
        let an = prob.constraint.opnorm();
        Self {
            sigma: 0.3,
            chi: 1.0 / 6.0,
            theta: 0.5,
            c1: default_c1(upper, an),
            rho: 1e-3,
            eta: 1e-3,
            lambda: if m > 0.0 { 0.5 / m } else { f64::INFINITY },
            p0: None,
            z0,
            max_outer: DEFAULT_MAX_OUTER,
            max_total_inner: DEFAULT_MAX_TOTAL_INNER,
            potential: PotentialWeights::Theoretical,
        }
    }

    pub fn with_tolerances(mut self, rho: f64, eta: f64) -> Self {
        self.rho = rho;
        self.eta = eta;
        self
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        if !validate_params(self.chi, self.theta, self.sigma) {
            return Err(ParamError::InvalidChiTheta { chi: self.chi, theta: self.theta, sigma: self.sigma });
        }
        self.validate_common()
    }

    pub(crate) fn validate_common(&self) -> Result<(), ParamError> {
        for (name, value) in
            [("c1", self.c1), ("rho", self.rho), ("eta", self.eta), ("lambda", self.lambda), ("sigma", self.sigma)]
        {
            if !(value > 0.0 && value.is_finite()) {
                return Err(ParamError::Invalid { name, value });
            }
        }
        Ok(())
    }
}

/// `c1 = max(1, M / |A|^2)`
pub fn default_c1(upper: f64, opnorm: f64) -> f64 {
    (upper / (opnorm * opnorm)).max(1.0)
}

/// `chi, theta ∈ (0,1)`, `sigma ∈ (0, 1/2]` and `2(1-theta)(2-theta)chi <= theta^2`.
pub fn validate_params(chi: f64, theta: f64, sigma: f64) -> bool {
    let open = |x: f64| x > 0.0 && x < 1.0;
    open(chi)
        && open(theta)
        && sigma > 0.0
        && sigma <= 0.5
        && 2.0 * (1.0 - theta) * (2.0 - theta) * chi <= theta * theta + 1e-15
}

/// `L_k = lambda (M + c |A|^2) + 1`
pub fn subproblem_curvature(lambda: f64, upper: f64, c: f64, opnorm: f64) -> f64 {
    lambda * (upper + c * opnorm * opnorm) + 1.0
}

/// Strong-convexity modulus handed to ACG.
pub const SUBPROBLEM_MU: f64 = 0.5;

/// Proximal AL subproblem
/// `psi_s = lambda [f + (1-theta)<p, A. - b> + (c/2)|A. - b|^2] + |. - z_prev|^2/2`,
/// `psi_n = lambda h`.
pub struct AlSubproblem<'a> {
    prob: &'a ConstrainedProblem,
    z_prev: &'a [f64],
    p_prev: &'a [f64],
    c: f64,
    theta: f64,
    lambda: f64,
    upper: f64,
}

impl<'a> AlSubproblem<'a> {
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Builds the subproblem without the `lambda <= 1/m` convexity guard.
    pub(crate) fn unchecked(
        prob: &'a ConstrainedProblem,
        z_prev: &'a [f64],
        p_prev: &'a [f64],
        c: f64,
        theta: f64,
        lambda: f64,
    ) -> Self {
        let upper = subproblem_curvature(lambda, prob.f.upper_curvature(), c, prob.constraint.opnorm());
        Self { prob, z_prev, p_prev, c, theta, lambda, upper }
    }
}

/// Builds the step-1 subproblem with curvature pair `(L_k, 1/2)`.
///
/// Refuses `lambda > 1/m`, where the smooth part may be nonconvex.
pub fn build_subproblem<'a>(
    prob: &'a ConstrainedProblem,
    z_prev: &'a [f64],
    p_prev: &'a [f64],
    c: f64,
    theta: f64,
    lambda: f64,
) -> Result<AlSubproblem<'a>, ParamError> {
    let m = prob.f.lower_curvature();
    if m > 0.0 && lambda > 1.0 / m {
        return Err(ParamError::StepsizeTooLarge { lambda, limit: 1.0 / m });
    }
    if !(lambda > 0.0) {
        return Err(ParamError::Invalid { name: "lambda", value: lambda });
    }
    Ok(AlSubproblem::unchecked(prob, z_prev, p_prev, c, theta, lambda))
}

impl CompositeSubproblem for AlSubproblem<'_> {
    fn dim(&self) -> usize {
        self.prob.dim()
    }
    fn upper_curvature(&self) -> f64 {
        self.upper
    }
    fn strong_convexity(&self) -> f64 {
        SUBPROBLEM_MU
    }
    fn smooth_value_grad(&self, z: &[f64], grad: &mut [f64]) -> f64 {
        let fz = self.prob.f.value_and_gradient(z, grad);
        let mut r = vec![0.0; self.prob.image_dim()];
        self.prob.constraint.residual_into(z, &mut r);
        let dual = linalg::dot(self.p_prev, &r);
        let pen = linalg::dot(&r, &r);
        r.iter_mut().zip(self.p_prev).for_each(|(ri, pi)| *ri = (1.0 - self.theta) * pi + self.c * *ri);
        let mut at = vec![0.0; z.len()];
        self.prob.constraint.map().adjoint(&r, &mut at);
        let mut prox_term = 0.0;
        for i in 0..z.len() {
            let d = z[i] - self.z_prev[i];
            prox_term += d * d;
            grad[i] = self.lambda * (grad[i] + at[i]) + d;
        }
        self.lambda * (fz + (1.0 - self.theta) * dual + 0.5 * self.c * pen) + 0.5 * prox_term
    }
    fn nonsmooth_value(&self, z: &[f64]) -> f64 {
        self.lambda * self.prob.h.value(z)
    }
    fn nonsmooth_prox(&self, t: f64, x: &[f64], out: &mut [f64]) -> Result<(), ProblemError> {
        self.prob.h.prox(t * self.lambda, x, out)
    }
}

/// `v_hat = (v + z_prev - z)/lambda`, `p_hat = (1-theta) p_prev + c (A z - b)`.
#[allow(clippy::too_many_arguments)]
pub fn refined_residuals(
    v: &[f64],
    z: &[f64],
    z_prev: &[f64],
    p_prev: &[f64],
    c: f64,
    theta: f64,
    lambda: f64,
    prob: &ConstrainedProblem,
) -> (Vec<f64>, Vec<f64>) {
    let vhat = v.iter().zip(z_prev).zip(z).map(|((vi, zp), zi)| (vi + zp - zi) / lambda).collect();
    let r = crate::problem::feasibility_residual(prob, z);
    let phat = p_prev.iter().zip(&r).map(|(pi, ri)| (1.0 - theta) * pi + c * ri).collect();
    (vhat, phat)
}

/// Doubles `c` iff `|v_hat| <= rho` and `|Az - b| > eta`.
pub fn penalty_update(c: f64, vhat_norm: f64, feas_norm: f64, rho: f64, eta: f64) -> f64 {
    if vhat_norm <= rho && feas_norm > eta {
        2.0 * c
    } else {
        c
    }
}

/// `p = (1-theta) p_prev + chi c feas`
pub fn multiplier_update(p_prev: &[f64], c: f64, feas: &[f64], chi: f64, theta: f64) -> Vec<f64> {
    p_prev.iter().zip(feas).map(|(pi, fi)| (1.0 - theta) * pi + chi * c * fi).collect()
}

/// `(a_theta, b_theta, alpha_{chi,theta})`
pub fn potential_constants(chi: f64, theta: f64) -> (f64, f64, f64) {
    let a = theta * (1.0 - theta);
    let b = (2.0 - theta) * (1.0 - theta);
    let alpha = ((1.0 - 2.0 * chi * b) - (1.0 - theta) * (1.0 - theta)) / (2.0 * chi);
    (a, b, alpha)
}

/// Potential
/// `Psi = L_c^theta(z; p) - a_theta/(2 chi c) |p|^2 + alpha/(4 chi c) |p - p_prev|^2`.
#[allow(clippy::too_many_arguments)]
pub fn potential(
    prob: &ConstrainedProblem,
    z: &[f64],
    p: &[f64],
    p_prev: &[f64],
    c: f64,
    chi: f64,
    theta: f64,
    weights: PotentialWeights,
) -> Result<f64, ProblemError> {
    let (a, alpha) = match weights {
        PotentialWeights::Theoretical => {
            let (a, _, alpha) = potential_constants(chi, theta);
            (a, alpha)
        }
        PotentialWeights::Override { a_theta, alpha } => (a_theta, alpha),
    };
    let al = aug_lagrangian_value(prob, z, p, c, theta)?;
    let dp = linalg::dist(p, p_prev);
    let pn = linalg::norm(p);
    Ok(al - a / (2.0 * chi * c) * pn * pn + alpha / (4.0 * chi * c) * dp * dp)
}

/// Output triple with residual norms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub z_hat: Vec<f64>,
    pub p_hat: Vec<f64>,
    pub v_hat: Vec<f64>,
    pub vhat_norm: f64,
    pub feas_norm: f64,
}

impl Certificate {
    /// Prox fixed-point residual of `v_hat ∈ grad f(z) + ∂h(z) + A^* p_hat`.
    pub fn inclusion_residual(&self, prob: &ConstrainedProblem) -> Result<f64, ProblemError> {
        crate::problem::stationarity_residual(prob, &self.z_hat, &self.p_hat, &self.v_hat)
    }
}

/// One outer iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OuterRecord {
    pub k: usize,
    pub c: f64,
    pub lambda: f64,
    /// ACG iterations charged to this outer iteration, failed trials included.
    pub inner_iters: usize,
    /// ACG iterations of the accepted call.
    pub accepted_inner_iters: usize,
    /// Worst-case ACG bound at the accepted `(L_k, 1/2, sigma)`.
    pub inner_bound: usize,
    pub curvature: f64,
    pub vhat_norm: f64,
    pub feas_norm: f64,
    pub psi: f64,
    pub p_norm: f64,
    pub dp_norm: f64,
    pub cycle: usize,
    /// Stepsize trials; 1 when the first candidate is accepted.
    pub trials: usize,
    pub v_norm: f64,
    pub dz_norm: f64,
    /// `|v_k + z_{k-1} - z_k|^2`.
    pub step_residual_sq: f64,
}
