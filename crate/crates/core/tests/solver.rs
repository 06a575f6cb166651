mod common;

use std::time::Instant;

use aidal_core::acg::{acg_solve, CompositeSubproblem};
use aidal_core::aidal::{build_subproblem, diagnostic_constants, DiagnosticInputs};
use aidal_core::benchmarks::{Family, InstanceSpec};
use aidal_core::linalg;
use aidal_core::{aidal_solve, AidalParams, OuterRecord, SolveReport, TerminationMode};
use common::{rng, simplex_fixture};
use rand::Rng;

fn fixture_report() -> (aidal_core::ConstrainedProblem, AidalParams, SolveReport) {
    let prob = simplex_fixture();
    let params = AidalParams::for_problem(&prob, vec![1.0, 0.0]).with_tolerances(1e-6, 1e-6);
    let report = aidal_solve(&prob, &params, TerminationMode::Absolute).unwrap();
    (prob, params, report)
}

fn lcqp_run(seed: u64) -> (aidal_core::ConstrainedProblem, SolveReport) {
    let inst = InstanceSpec::new(Family::Lcqp, seed, 1e2).generate().unwrap();
    let params = AidalParams::for_problem(&inst.problem, inst.z0.clone()).with_tolerances(1e-3, 1e-3);
    let report = aidal_solve(&inst.problem, &params, TerminationMode::Relative).unwrap();
    (inst.problem, report)
}

/// Checks the cycle structure of a converged trace against `rho`.
fn assert_penalty_structure(trace: &[OuterRecord], rho: f64) {
    for w in trace.windows(2) {
        let ratio = w[1].c / w[0].c;
        assert!(ratio == 1.0 || ratio == 2.0, "penalty jumped by {ratio}");
        assert_eq!(w[1].cycle, w[0].cycle + (ratio == 2.0) as usize);
        if ratio == 2.0 {
            assert!(w[0].vhat_norm <= rho, "cycle {} closed with |vhat| = {:e}", w[0].cycle, w[0].vhat_norm);
        }
    }
    assert!(trace.last().unwrap().cycle <= 60);
}

#[test]
fn fixture_converges_to_symmetric_point() {
    let start = Instant::now();
    let (prob, _, report) = fixture_report();
    assert!(start.elapsed().as_secs_f64() < 1.0);
    let cert = &report.certificate;
    assert!(linalg::dist(&cert.z_hat, &[0.5, 0.5]) <= 1e-4);
    assert!(cert.vhat_norm <= 1e-6 && cert.feas_norm <= 1e-6);
    assert!(cert.inclusion_residual(&prob).unwrap() <= 1e-7);
}

#[test]
fn stationary_start_stops_after_one_iteration() {
    let prob = simplex_fixture();
    let params = AidalParams::for_problem(&prob, vec![0.5, 0.5]).with_tolerances(1e-6, 1e-6);
    let report = aidal_solve(&prob, &params, TerminationMode::Absolute).unwrap();
    assert_eq!(report.outer_iters(), 1);
    assert_eq!(report.trace[0].c, params.c1);
}

#[test]
fn multiplier_stays_below_bound_on_fixture() {
    let (prob, params, report) = fixture_report();
    // |grad f| = |z| <= 1 on the simplex
    let inputs = DiagnosticInputs { slater_point: Some(vec![0.5, 0.5]), grad_bound: Some(1.0), objective_gap: None };
    let bp = diagnostic_constants(&prob, &params, &inputs).b_p.expect("bound computable on the fixture");
    for r in &report.trace {
        assert!(r.p_norm <= bp, "|p_{}| = {} exceeds {bp}", r.k, r.p_norm);
    }
}

#[test]
fn lcqp_trajectories_satisfy_invariants() {
    for seed in 1..=5 {
        let (prob, report) = lcqp_run(seed);
        let trace = &report.trace;
        for w in trace.windows(2) {
            let (prev, cur) = (&w[0], &w[1]);
            if prev.c != cur.c {
                continue;
            }
            let drop = prev.psi - cur.psi;
            let need = cur.lambda / 32.0 * cur.vhat_norm.powi(2) - 1e-8 * (1.0 + prev.psi.abs());
            assert!(drop >= need, "seed {seed}, k = {}: potential drop {drop:e} < {need:e}", cur.k);
        }
        assert_penalty_structure(trace, report.rho_eff);
        for r in trace {
            assert!(r.accepted_inner_iters <= r.inner_bound, "seed {seed}, k = {}: ACG over its bound", r.k);
        }
        let last = trace.last().unwrap();
        assert!(last.vhat_norm <= report.rho_eff && last.feas_norm <= report.eta_eff);
        assert!(report.certificate.inclusion_residual(&prob).unwrap() <= 1e-7);
    }
}

#[test]
fn subproblem_is_half_strongly_convex_at_half_inverse_curvature() {
    let inst = InstanceSpec::new(Family::Lcqp, 3, 1e2).generate().unwrap();
    let prob = &inst.problem;
    let lambda = 0.5 / prob.f.lower_curvature();
    let mut r = rng(99);
    let n = prob.dim();
    let z_prev = inst.z0.clone();
    let p_prev: Vec<f64> = (0..prob.image_dim()).map(|_| r.random_range(-1.0..1.0)).collect();
    let sub = build_subproblem(prob, &z_prev, &p_prev, 4.0, 0.5, lambda).unwrap();
    for _ in 0..50 {
        let z: Vec<f64> = (0..n).map(|_| r.random_range(-1.0..1.0)).collect();
        let w: Vec<f64> = (0..n).map(|_| r.random_range(-1.0..1.0)).collect();
        let mut g = vec![0.0; n];
        let fz = sub.smooth_value_grad(&z, &mut g);
        let gap = sub.smooth_value(&w) - fz - linalg::dot(&g, &linalg::sub(&w, &z));
        let d2 = linalg::dist(&w, &z).powi(2);
        let slack = 1e-9 * (1.0 + fz.abs());
        assert!(gap >= 0.25 * d2 - slack, "modulus below 1/2");
        assert!(gap <= 0.5 * sub.upper_curvature() * d2 + slack);
    }
    assert!(build_subproblem(prob, &z_prev, &p_prev, 4.0, 0.5, 2.0 / prob.f.lower_curvature()).is_err());
}

#[test]
fn exact_subproblem_solution_at_stationary_point_is_prox_center() {
    let prob = simplex_fixture();
    let z = [0.5, 0.5];
    // grad f(z) + A^T p = 0 with p = -0.5 and theta = 0
    let p = [-0.5];
    let sub = build_subproblem(&prob, &z, &p, 1.0, 0.0, 0.5).unwrap();
    let res = acg_solve(&sub, 0.3, &z, 100).unwrap();
    assert!(res.converged);
    assert!(linalg::dist(&res.z, &z) <= 1e-12);
}
