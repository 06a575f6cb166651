//! Linearly constrained quadratic programs over the simplex:
//!
//! ```text
//! min (alpha1/2)|Cz - d|^2 - (alpha2/2)|DBz|^2   s.t.  Az = b,  z ∈ simplex
//! ```

use std::sync::Arc;

use super::prox::SimplexIndicator;
use super::quadratic::{calibrate, QuadraticDifference};
use super::rng::{self, DATA, INTERIOR, START};
use crate::error::BenchmarkError;
use crate::linalg::{self, singular_values, DenseMatrix};
use crate::problem::{ConstrainedProblem, LinearConstraint};

pub const LCQP_ROWS: usize = 10;
pub const LCQP_COLS: usize = 50;
/// `M / m` of the generated Hessian.
pub const LCQP_CURVATURE_RATIO: f64 = 3.0;
pub const MAX_ATTEMPTS: u64 = 10;

#[derive(Debug, Clone)]
pub struct LcqpInstance {
    pub seed: u64,
    /// Regeneration round that produced the instance.
    pub attempt: u64,
    /// `l x n` constraint matrix.
    pub a: DenseMatrix,
    /// `n x n`.
    pub b_mat: DenseMatrix,
    /// `l x n`.
    pub c: DenseMatrix,
    /// Diagonal of `D`.
    pub d_diag: Vec<f64>,
    pub b: Vec<f64>,
    pub d: Vec<f64>,
    pub alpha1: f64,
    pub alpha2: f64,
    pub upper: f64,
    pub lower: f64,
    pub z0: Vec<f64>,
    /// Relative-interior point of the simplex with `A z = b`.
    pub slater_point: Vec<f64>,
}

impl LcqpInstance {
    /// `alpha1 C^T C - alpha2 B^T D^2 B`.
    pub fn hessian(&self) -> DenseMatrix {
        let g = self.scaled_b();
        let mut h = self.c.gram();
        let gg = g.gram();
        for (hv, gv) in h.data.iter_mut().zip(&gg.data) {
            *hv = self.alpha1 * *hv - self.alpha2 * gv;
        }
        h
    }

    fn scaled_b(&self) -> DenseMatrix {
        let mut g = self.b_mat.clone();
        for i in 0..g.rows {
            let s = self.d_diag[i];
            for v in &mut g.data[i * g.cols..(i + 1) * g.cols] {
                *v *= s;
            }
        }
        g
    }
}

fn uniform_matrix(rng: &mut impl rand::Rng, rows: usize, cols: usize) -> DenseMatrix {
    DenseMatrix::from_rows(rows, cols, rng::uniform_vec(rng, rows * cols, 0.0, 1.0))
}

/// Draws the instance for `seed` with `lambda_max(grad^2 f) = upper` and
/// `lambda_min(grad^2 f) = -upper/3`.
///
/// The right-hand side is `b = A z_bar` for a random relative-interior point
/// `z_bar` of the simplex, so the feasible set is nonempty.
pub fn gen_lcqp(seed: u64, upper: f64) -> Result<(ConstrainedProblem, LcqpInstance), BenchmarkError> {
    if !(upper > 0.0 && upper.is_finite()) {
        return Err(BenchmarkError::Parameter(format!("curvature target must be positive, got {upper}")));
    }
    let (l, n) = (LCQP_ROWS, LCQP_COLS);
    for attempt in 0..MAX_ATTEMPTS {
        let mut data = rng::stream(seed, attempt, DATA);
        let a = uniform_matrix(&mut data, l, n);
        let b_mat = uniform_matrix(&mut data, n, n);
        let c = uniform_matrix(&mut data, l, n);
        let d = rng::uniform_vec(&mut data, l, 0.0, 1.0);
        let d_diag = rng::uniform_vec(&mut data, n, 1.0, 1000.0);

        let mut interior = rng::stream(seed, attempt, INTERIOR);
        let w = rng::uniform_vec(&mut interior, n, 0.0, 1.0);
        let total: f64 = w.iter().sum();
        let slater_point: Vec<f64> = w.iter().map(|v| v / total).collect();
        let mut b = vec![0.0; l];
        a.matvec(&slater_point, &mut b);

        let mut start = rng::stream(seed, attempt, START);
        let mut z0 = rng::uniform_vec(&mut start, n, 0.0, 1.0);
        let z0_norm = linalg::norm(&z0);
        linalg::scale(1.0 / z0_norm, &mut z0);

        let mut inst = LcqpInstance {
            seed,
            attempt,
            a,
            b_mat,
            c,
            d_diag,
            b,
            d,
            alpha1: 0.0,
            alpha2: 0.0,
            upper,
            lower: upper / LCQP_CURVATURE_RATIO,
            z0,
            slater_point,
        };
        let g = inst.scaled_b();
        let mut stacked = DenseMatrix::zeros(l + n, n);
        stacked.data[..l * n].copy_from_slice(&inst.c.data);
        stacked.data[l * n..].copy_from_slice(&g.data);
        let cal = match calibrate(&stacked, l, LCQP_CURVATURE_RATIO, upper) {
            Ok(cal) => cal,
            Err(BenchmarkError::Unreachable { .. }) => {
                log::warn!("LCQP seed {seed}: curvature ratio unreachable on attempt {attempt}, regenerating");
                continue;
            }
            Err(e) => return Err(e),
        };
        inst.alpha1 = cal.alpha1;
        inst.alpha2 = cal.alpha2;

        let opnorm = singular_values(&inst.a)?[0];
        let f = QuadraticDifference::new(
            Arc::new(inst.c.clone()),
            Arc::new(g),
            inst.d.clone(),
            inst.alpha1,
            inst.alpha2,
            inst.lower,
            inst.upper,
        );
        let cons = LinearConstraint::with_opnorm(Arc::new(inst.a.clone()), inst.b.clone(), opnorm)?;
        let prob = ConstrainedProblem::new(Arc::new(f), Arc::new(SimplexIndicator::new(n)), cons)?;
        return Ok((prob, inst));
    }
    Err(BenchmarkError::Unreachable { target: LCQP_CURVATURE_RATIO, attempts: MAX_ATTEMPTS as usize })
}
