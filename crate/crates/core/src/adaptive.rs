//! AIDAL with a backtracking prox stepsize.
//!
//! At outer iteration `k` the stepsizes `gamma^{-beta} lambda_{k-1}`,
//! `beta = 0, 1, ...`, are tried in turn. A trial is accepted when its ACG
//! output satisfies
//!
//! * `|v_k| <= sigma |z_k - z_{k-1}|`, and
//! * `|v_k + z_{k-1} - z_k|^2 <= 32 lambda (Psi_{k-1} - Psi_k)` for `k >= 2`.
//!
//! The remaining steps are those of the fixed-stepsize method.

use crate::acg::{acg_iteration_bound, acg_solve, CompositeSubproblem};
use crate::aidal::solver::{evaluate_trial, Accepted, OuterState};
use crate::aidal::{
    run_outer_loop, AidalParams, AlSubproblem, PotentialWeights, SolveError, SolveFailure, SolveReport, StepsizeRule,
    TerminationMode, SUBPROBLEM_MU,
};
use crate::error::{AcgError, ParamError};
use crate::problem::ConstrainedProblem;

/// Absolute slack on the descent test.
pub const DESCENT_SLACK: f64 = 1e-12;
/// Stepsizes below `FLOOR_FACTOR / (2 gamma m)` abort the run.
pub const FLOOR_FACTOR: f64 = 1e-3;

#[derive(Debug, Clone)]
pub struct AdaptiveParams {
    /// `base.lambda` is the initial stepsize.
    pub base: AidalParams,
    pub gamma: f64,
    /// Use `a_theta = 1`, `alpha = 0` in the potential.
    pub heuristic_potential: bool,
}

impl AdaptiveParams {
    /// `lambda_0 = 10`, `gamma = 2`, `(chi, theta) = (1/6, 1/2)`.
    pub fn radl1(prob: &ConstrainedProblem, z0: Vec<f64>) -> Self {
        let mut base = AidalParams::for_problem(prob, z0);
        base.lambda = 10.0;
        Self { base, gamma: 2.0, heuristic_potential: false }
    }

    /// `lambda_0 = 10`, `gamma = 2`, `(chi, theta) = (1, 0)` with the
    /// heuristic potential.
    pub fn radl0(prob: &ConstrainedProblem, z0: Vec<f64>) -> Self {
        let mut base = AidalParams::for_problem(prob, z0);
        base.lambda = 10.0;
        base.chi = 1.0;
        base.theta = 0.0;
        base.potential = PotentialWeights::HEURISTIC;
        Self { base, gamma: 2.0, heuristic_potential: true }
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        if !(self.gamma > 1.0 && self.gamma.is_finite()) {
            return Err(ParamError::Invalid { name: "gamma", value: self.gamma });
        }
        if self.heuristic_potential {
            let b = &self.base;
            let ok = (0.0..=1.0).contains(&b.chi)
                && b.chi > 0.0
                && (0.0..1.0).contains(&b.theta)
                && b.sigma > 0.0
                && b.sigma <= 0.5;
            if !ok {
                return Err(ParamError::InvalidChiTheta { chi: b.chi, theta: b.theta, sigma: b.sigma });
            }
            self.base.validate_common()
        } else {
            self.base.validate()
        }
    }

    fn effective_base(&self) -> AidalParams {
        let mut base = self.base.clone();
        if self.heuristic_potential {
            base.potential = PotentialWeights::HEURISTIC;
        }
        base
    }
}

/// Smallest admissible stepsize, `1e-3 / (2 gamma m)` with `m` replaced by
/// `M` when the lower curvature is zero.
pub fn stepsize_floor(prob: &ConstrainedProblem, gamma: f64) -> f64 {
    let m = prob.f.lower_curvature();
    let m_cap = if m > 0.0 { m } else { prob.f.upper_curvature().max(f64::MIN_POSITIVE) };
    FLOOR_FACTOR / (2.0 * gamma * m_cap)
}

/// Backtracks from `lambda_prev` until a trial passes both acceptance tests.
///
/// Returns the accepted trial, the number of trials and the ACG iterations
/// spent across all of them. Errors carry the iterations spent so far.
pub(crate) fn stepsize_search(
    prob: &ConstrainedProblem,
    state: &OuterState,
    lambda_prev: f64,
    gamma: f64,
    floor: f64,
    params: &AidalParams,
    remaining: usize,
) -> Result<Accepted, (SolveError, usize)> {
    let mut lambda = lambda_prev;
    let mut spent = 0usize;
    for beta in 0.. {
        if beta > 0 {
            lambda /= gamma;
        }
        if lambda < floor {
            return Err((SolveError::StepsizeCollapse { k: state.k, lambda, floor }, spent));
        }
        if spent >= remaining {
            return Err((SolveError::InnerBudget { max_total_inner: params.max_total_inner }, spent));
        }
        let sub = AlSubproblem::unchecked(prob, &state.z_prev, &state.p_prev, state.c, params.theta, lambda);
        let cap = acg_iteration_bound(sub.upper_curvature(), SUBPROBLEM_MU, params.sigma);
        let acg = match acg_solve(&sub, params.sigma, &state.z_prev, cap.min(remaining - spent)) {
            Ok(r) => r,
            Err(AcgError::NumericalBreakdown { iter }) => {
                log::debug!("k={} beta={beta}: ACG breakdown after {iter} iterations", state.k);
                spent += iter + 1;
                continue;
            }
            Err(e) => return Err((e.into(), spent)),
        };
        spent += acg.inner_iters;
        if !acg.converged {
            log::debug!("k={} beta={beta}: ACG cap {cap} reached at lambda={lambda:.3e}", state.k);
            continue;
        }
        let trial = evaluate_trial(prob, state, params, &sub, acg).map_err(|e| (e.into(), spent))?;
        let descent_ok = match state.psi_prev {
            Some(psi_prev) if state.k >= 2 && state.same_cycle => {
                trial.step_residual_sq <= 32.0 * lambda * (psi_prev - trial.psi) + DESCENT_SLACK
            }
            _ => true,
        };
        if descent_ok {
            return Ok(Accepted { trial, trials: beta + 1, spent });
        }
        log::debug!(
            "k={} beta={beta}: descent test failed at lambda={lambda:.3e} (psi {:.6e} -> {:.6e}, step {:.3e})",
            state.k,
            state.psi_prev.unwrap_or(f64::NAN),
            trial.psi,
            trial.step_residual_sq
        );
    }
    unreachable!("stepsize search loop exits through the floor check")
}

/// Runs AIDAL with backtracking on the prox stepsize.
pub fn adaptive_solve(
    prob: &ConstrainedProblem,
    params: &AdaptiveParams,
    mode: TerminationMode,
) -> Result<SolveReport, SolveFailure> {
    if let Err(e) = params.validate() {
        return Err(SolveFailure { error: e.into(), best: None, trace: Vec::new(), total_inner_iters: 0 });
    }
    let base = params.effective_base();
    let rule = StepsizeRule::Adaptive { gamma: params.gamma, floor: stepsize_floor(prob, params.gamma) };
    run_outer_loop(prob, &base, mode, rule)
}
