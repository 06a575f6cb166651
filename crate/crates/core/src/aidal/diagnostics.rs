use serde::Serialize;

use super::AidalParams;
use crate::linalg::singular_values;
use crate::problem::ConstrainedProblem;

/// Largest `rows * cols` for which the dense SVD of `A` is attempted.
const DENSE_SVD_LIMIT: usize = 250_000;
/// Singular values below this fraction of the largest count as zero.
const RANK_TOL: f64 = 1e-10;

/// Quantities that the bound constants need but the problem cannot supply.
#[derive(Debug, Clone, Default)]
pub struct DiagnosticInputs {
    /// Point `z_bar` in the relative interior of `dom h` with `A z_bar = b`.
    pub slater_point: Option<Vec<f64>>,
    /// `G_f = sup |grad f|` over `dom h`.
    pub grad_bound: Option<f64>,
    /// `phi^* - phi_*` over the feasible set.
    pub objective_gap: Option<f64>,
}

/// Bound constants of the convergence analysis. A field is `None` when one
/// of its ingredients is unavailable.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct DiagnosticConstants {
    pub sigma_a_plus: Option<f64>,
    pub d_bar: Option<f64>,
    pub k_h: Option<f64>,
    pub d_h: Option<f64>,
    pub g_f: Option<f64>,
    pub beta_lambda: Option<f64>,
    pub b_p: Option<f64>,
    pub b_psi: Option<f64>,
    pub c_bar_eta: Option<f64>,
    pub t_rho: Option<f64>,
}

impl DiagnosticConstants {
    /// `10 T_rho` outer iterations when `T_rho` is known.
    pub fn outer_budget(&self) -> Option<usize> {
        self.t_rho.filter(|t| t.is_finite()).map(|t| (10.0 * t).min(usize::MAX as f64 / 2.0) as usize)
    }
}

/// `T_rho = ceil(1 + 32 B_Psi / (lambda rho^2))`
pub fn cycle_length_bound(b_psi: f64, lambda: f64, rho: f64) -> f64 {
    (1.0 + 32.0 * b_psi / (lambda * rho * rho)).ceil()
}

/// `c_bar_eta = 2 B_p / (chi eta)`
pub fn penalty_threshold(b_p: f64, chi: f64, eta: f64) -> f64 {
    2.0 * b_p / (chi * eta)
}

/// Smallest positive singular value of `A`, from a dense SVD.
fn smallest_positive_singular_value(prob: &ConstrainedProblem) -> Option<f64> {
    let map = prob.constraint.map();
    if map.domain_dim() * map.image_dim() > DENSE_SVD_LIMIT {
        return None;
    }
    let sv = singular_values(&map.to_dense()).ok()?;
    let top = sv.iter().cloned().fold(0.0, f64::max);
    sv.into_iter().filter(|s| *s > RANK_TOL * top).fold(None, |acc: Option<f64>, s| Some(acc.map_or(s, |a| a.min(s))))
}

pub fn diagnostic_constants(
    prob: &ConstrainedProblem,
    params: &AidalParams,
    inputs: &DiagnosticInputs,
) -> DiagnosticConstants {
    let sigma_a_plus = smallest_positive_singular_value(prob);
    let d_bar = inputs.slater_point.as_deref().and_then(|z| prob.h.boundary_distance(z));
    let k_h = prob.h.lipschitz();
    let d_h = prob.h.diameter();
    let g_f = inputs.grad_bound.or_else(|| prob.f.gradient_bound());
    let (lambda, sigma, theta, chi) = (params.lambda, params.sigma, params.theta, params.chi);

    let beta_lambda = match (d_bar, d_h, k_h, g_f) {
        (Some(d), Some(dh), Some(kh), Some(gf)) => Some((d + dh) * (kh + gf + (1.0 + sigma) * dh / lambda)),
        _ => None,
    };
    let p0_norm = params.p0.as_deref().map_or(0.0, crate::linalg::norm);
    let b_p = match (beta_lambda, d_bar, sigma_a_plus) {
        (Some(beta), Some(d), Some(sa)) => Some(p0_norm.max(beta) / (d * sa * (1.0 - theta)).min(1.0)),
        _ => None,
    };
    let b_psi = match (inputs.objective_gap, d_h, b_p) {
        (Some(gap), Some(dh), Some(bp)) => {
            let w = (2.0 - theta + 2.0 * (2.0 - theta) * (1.0 - theta)) / (2.0 * chi * chi * params.c1);
            Some(gap + dh * dh / lambda + w * bp * bp)
        }
        _ => None,
    };
    DiagnosticConstants {
        sigma_a_plus,
        d_bar,
        k_h,
        d_h,
        g_f,
        beta_lambda,
        b_p,
        b_psi,
        c_bar_eta: b_p.map(|bp| penalty_threshold(bp, chi, params.eta)),
        t_rho: b_psi.map(|bpsi| cycle_length_bound(bpsi, lambda, params.rho)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    use crate::benchmarks::prox::SimplexIndicator;
    use crate::linalg::DenseMatrix;
    use crate::oracles::QuadraticFunction;
    use crate::problem::LinearConstraint;

    fn fixture() -> ConstrainedProblem {
        let f = Arc::new(QuadraticFunction::half_squared_norm(2));
        let h = Arc::new(SimplexIndicator::new(2));
        let a = DenseMatrix::from_rows(1, 2, vec![1.0, 1.0]);
        let cons = LinearConstraint::new(Arc::new(a), vec![1.0]).unwrap();
        ConstrainedProblem::new(f, h, cons).unwrap()
    }

    #[test]
    fn formula_examples() {
        assert_eq!(cycle_length_bound(1.0, 0.5, 1.0), 65.0);
        assert!((penalty_threshold(3.0, 1.0 / 6.0, 1.0) - 36.0).abs() < 1e-12);
    }

    #[test]
    fn sigma_plus_of_row_vector() {
        let prob = fixture();
        let params = AidalParams::for_problem(&prob, vec![1.0, 0.0]);
        let d = diagnostic_constants(&prob, &params, &DiagnosticInputs::default());
        assert!((d.sigma_a_plus.unwrap() - 2f64.sqrt()).abs() < 1e-12);
        assert!(d.b_p.is_none() && d.t_rho.is_none());
    }

    #[test]
    fn multiplier_bound_with_slater_point() {
        let prob = fixture();
        let params = AidalParams::for_problem(&prob, vec![1.0, 0.0]);
        let inputs =
            DiagnosticInputs { slater_point: Some(vec![0.5, 0.5]), grad_bound: Some(1.0), objective_gap: Some(0.25) };
        let d = diagnostic_constants(&prob, &params, &inputs);
        let dbar = 0.5f64.sqrt();
        assert!((d.d_bar.unwrap() - dbar).abs() < 1e-12);
        let beta = (dbar + 2f64.sqrt()) * (1.0 + 1.3 * 2f64.sqrt() / 0.5);
        assert!((d.beta_lambda.unwrap() - beta).abs() < 1e-12);
        let bp = beta / (dbar * 2f64.sqrt() * 0.5).min(1.0);
        assert!((d.b_p.unwrap() - bp).abs() < 1e-10);
        assert!(d.t_rho.is_some() && d.outer_budget().is_some());
    }
}
