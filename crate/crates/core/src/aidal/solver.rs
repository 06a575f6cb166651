use thiserror::Error;

use super::{
    build_subproblem, multiplier_update, penalty_update, potential, refined_residuals, AidalParams, AlSubproblem,
    Certificate, OuterRecord, TerminationMode, SUBPROBLEM_MU,
};
use crate::acg::{acg_iteration_bound, acg_solve, default_max_iter, AcgResult};
use crate::error::{AcgError, ParamError, ProblemError};
use crate::linalg;
use crate::problem::{feasibility_residual, ConstrainedProblem};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error(transparent)]
    InvalidParams(#[from] ParamError),
    #[error("outer iteration budget of {max_outer} exhausted")]
    OuterBudget { max_outer: usize },
    #[error("inner iteration budget of {max_total_inner} exhausted")]
    InnerBudget { max_total_inner: usize },
    #[error("ACG failed to reach its residual test at outer iteration {k} after {iters} iterations")]
    InnerNotConverged { k: usize, iters: usize },
    #[error("stepsize collapse at outer iteration {k}: lambda = {lambda:e} fell below {floor:e}")]
    StepsizeCollapse { k: usize, lambda: f64, floor: f64 },
    #[error(transparent)]
    Acg(#[from] AcgError),
    #[error(transparent)]
    Problem(#[from] ProblemError),
}

/// Failed run together with everything computed before the failure.
#[derive(Debug, Error, Clone)]
#[error("solve failed after {} outer iterations: {error}", trace.len())]
pub struct SolveFailure {
    pub error: SolveError,
    /// Iterate with the smallest scaled residual seen so far.
    pub best: Option<Certificate>,
    pub trace: Vec<OuterRecord>,
    pub total_inner_iters: usize,
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub certificate: Certificate,
    pub trace: Vec<OuterRecord>,
    pub total_inner_iters: usize,
    /// Stationarity tolerance actually applied.
    pub rho_eff: f64,
    /// Feasibility tolerance actually applied.
    pub eta_eff: f64,
}

impl SolveReport {
    pub fn outer_iters(&self) -> usize {
        self.trace.len()
    }
}

/// State carried into outer iteration `k`.
#[derive(Debug, Clone)]
pub struct OuterState {
    pub k: usize,
    pub z_prev: Vec<f64>,
    pub p_prev: Vec<f64>,
    pub c: f64,
    /// `Psi_{k-1}`, absent at `k = 1`.
    pub psi_prev: Option<f64>,
    /// Whether `c_{k-1} = c_k`.
    pub same_cycle: bool,
}

/// ACG output at a candidate stepsize, with the quantities the outer loop
/// needs if the candidate is accepted.
#[derive(Debug, Clone)]
pub struct Trial {
    pub lambda: f64,
    pub curvature: f64,
    pub inner_bound: usize,
    pub acg: AcgResult,
    pub v_hat: Vec<f64>,
    pub p_hat: Vec<f64>,
    pub feas_norm: f64,
    pub p_next: Vec<f64>,
    pub psi: f64,
    pub dz_norm: f64,
    pub step_residual_sq: f64,
}

pub(crate) struct Accepted {
    pub trial: Trial,
    pub trials: usize,
    pub spent: usize,
}

#[derive(Debug, Clone, Copy)]
pub(crate) enum StepsizeRule {
    Fixed,
    Adaptive { gamma: f64, floor: f64 },
}

pub(crate) fn evaluate_trial(
    prob: &ConstrainedProblem,
    state: &OuterState,
    params: &AidalParams,
    sub: &AlSubproblem<'_>,
    acg: AcgResult,
) -> Result<Trial, ProblemError> {
    use crate::acg::CompositeSubproblem;
    let lambda = sub.lambda();
    let curvature = sub.upper_curvature();
    let (v_hat, p_hat) =
        refined_residuals(&acg.v, &acg.z, &state.z_prev, &state.p_prev, state.c, params.theta, lambda, prob);
    let feas = feasibility_residual(prob, &acg.z);
    let p_next = multiplier_update(&state.p_prev, state.c, &feas, params.chi, params.theta);
    let psi = potential(prob, &acg.z, &p_next, &state.p_prev, state.c, params.chi, params.theta, params.potential)?;
    let step_residual_sq: f64 =
        acg.v.iter().zip(&state.z_prev).zip(&acg.z).map(|((v, zp), z)| (v + zp - z).powi(2)).sum();
    Ok(Trial {
        lambda,
        curvature,
        inner_bound: acg_iteration_bound(curvature, SUBPROBLEM_MU, params.sigma),
        dz_norm: linalg::dist(&acg.z, &state.z_prev),
        feas_norm: linalg::norm(&feas),
        acg,
        v_hat,
        p_hat,
        p_next,
        psi,
        step_residual_sq,
    })
}

fn fixed_step(
    prob: &ConstrainedProblem,
    state: &OuterState,
    params: &AidalParams,
    remaining: usize,
) -> Result<Accepted, (SolveError, usize)> {
    let sub = build_subproblem(prob, &state.z_prev, &state.p_prev, state.c, params.theta, params.lambda)
        .map_err(|e| (e.into(), 0))?;
    let cap = {
        use crate::acg::CompositeSubproblem;
        default_max_iter(sub.upper_curvature(), SUBPROBLEM_MU, params.sigma)
    };
    let acg = acg_solve(&sub, params.sigma, &state.z_prev, cap.min(remaining)).map_err(|e| (e.into(), 0))?;
    let spent = acg.inner_iters;
    if !acg.converged {
        if cap > remaining {
            return Err((SolveError::InnerBudget { max_total_inner: params.max_total_inner }, spent));
        }
        return Err((SolveError::InnerNotConverged { k: state.k, iters: spent }, spent));
    }
    let trial = evaluate_trial(prob, state, params, &sub, acg).map_err(|e| (e.into(), spent))?;
    Ok(Accepted { trial, trials: 1, spent })
}

/// `(rho, eta)` after the optional relative scaling.
pub(crate) fn effective_tolerances(
    prob: &ConstrainedProblem,
    params: &AidalParams,
    mode: TerminationMode,
) -> (f64, f64) {
    match mode {
        TerminationMode::Absolute => (params.rho, params.eta),
        TerminationMode::Relative => {
            let g0 = linalg::norm(&prob.f.gradient(&params.z0));
            let r0 = linalg::norm(&feasibility_residual(prob, &params.z0));
            (params.rho * (g0 + 1.0), params.eta * (r0 + 1.0))
        }
    }
}

/// Runs AIDAL with the fixed stepsize `params.lambda`.
pub fn aidal_solve(
    prob: &ConstrainedProblem,
    params: &AidalParams,
    mode: TerminationMode,
) -> Result<SolveReport, SolveFailure> {
    if let Err(e) = params.validate() {
        return Err(SolveFailure { error: e.into(), best: None, trace: Vec::new(), total_inner_iters: 0 });
    }
    run_outer_loop(prob, params, mode, StepsizeRule::Fixed)
}

pub(crate) fn run_outer_loop(
    prob: &ConstrainedProblem,
    params: &AidalParams,
    mode: TerminationMode,
    rule: StepsizeRule,
) -> Result<SolveReport, SolveFailure> {
    let mut trace: Vec<OuterRecord> = Vec::new();
    let mut best: Option<(f64, Certificate)> = None;
    let mut total_inner = 0usize;

    macro_rules! fail {
        ($err:expr) => {
            return Err(SolveFailure {
                error: $err.into(),
                best: best.map(|(_, c)| c),
                trace,
                total_inner_iters: total_inner,
            })
        };
    }

    let n = prob.dim();
    let l = prob.image_dim();
    if params.z0.len() != n {
        fail!(ProblemError::Dimension { what: "z0", got: params.z0.len(), expected: n });
    }
    let p0 = params.p0.clone().unwrap_or_else(|| vec![0.0; l]);
    if p0.len() != l {
        fail!(ProblemError::Dimension { what: "p0", got: p0.len(), expected: l });
    }
    if !prob.h.value(&params.z0).is_finite() {
        log::warn!("starting point lies outside the domain of h");
    }
    let (rho, eta) = effective_tolerances(prob, params, mode);

    let mut state =
        OuterState { k: 1, z_prev: params.z0.clone(), p_prev: p0, c: params.c1, psi_prev: None, same_cycle: true };
    let mut lambda = params.lambda;
    let mut cycle = 1usize;

    for k in 1..=params.max_outer {
        state.k = k;
        if total_inner >= params.max_total_inner {
            fail!(SolveError::InnerBudget { max_total_inner: params.max_total_inner });
        }
        let remaining = params.max_total_inner - total_inner;
        let step = match rule {
            StepsizeRule::Fixed => fixed_step(prob, &state, params, remaining),
            StepsizeRule::Adaptive { gamma, floor } => {
                crate::adaptive::stepsize_search(prob, &state, lambda, gamma, floor, params, remaining)
            }
        };
        let Accepted { trial, trials, spent } = match step {
            Ok(a) => a,
            Err((err, spent)) => {
                total_inner += spent;
                fail!(err)
            }
        };
        total_inner += spent;
        lambda = trial.lambda;

        let vhat_norm = linalg::norm(&trial.v_hat);
        let certificate = Certificate {
            z_hat: trial.acg.z.clone(),
            p_hat: trial.p_hat.clone(),
            v_hat: trial.v_hat.clone(),
            vhat_norm,
            feas_norm: trial.feas_norm,
        };
        trace.push(OuterRecord {
            k,
            c: state.c,
            lambda,
            inner_iters: spent,
            accepted_inner_iters: trial.acg.inner_iters,
            inner_bound: trial.inner_bound,
            curvature: trial.curvature,
            vhat_norm,
            feas_norm: trial.feas_norm,
            psi: trial.psi,
            p_norm: linalg::norm(&trial.p_next),
            dp_norm: linalg::dist(&trial.p_next, &state.p_prev),
            cycle,
            trials,
            v_norm: linalg::norm(&trial.acg.v),
            dz_norm: trial.dz_norm,
            step_residual_sq: trial.step_residual_sq,
        });
        log::debug!(
            "k={k} c={:.3e} lambda={lambda:.3e} inner={spent} |vhat|={vhat_norm:.3e} |Az-b|={:.3e} psi={:.6e}",
            state.c,
            trial.feas_norm,
            trial.psi
        );

        if vhat_norm <= rho && trial.feas_norm <= eta {
            return Ok(SolveReport { certificate, trace, total_inner_iters: total_inner, rho_eff: rho, eta_eff: eta });
        }
        let score = (vhat_norm / rho).max(trial.feas_norm / eta);
        if best.as_ref().is_none_or(|(s, _)| score < *s) {
            best = Some((score, certificate));
        }

        let c_next = penalty_update(state.c, vhat_norm, trial.feas_norm, rho, eta);
        state.same_cycle = c_next == state.c;
        if !state.same_cycle {
            cycle += 1;
        }
        state.c = c_next;
        state.psi_prev = Some(trial.psi);
        state.p_prev = trial.p_next;
        state.z_prev = trial.acg.z;
    }
    fail!(SolveError::OuterBudget { max_outer: params.max_outer })
}
