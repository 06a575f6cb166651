//! Acceptance criteria. Each test prints one `criterion N: PASS|FAIL` line
//! to stderr, bypassing the test harness capture, and then asserts.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::io::Write;
use std::sync::OnceLock;
use std::time::Instant;

use aidal_cli::harness::{c_max, c_wavg, instance_spec};
use aidal_cli::{run_experiment, sweep, ExperimentConfig, Method, RunStats};
use aidal_core::acg::{acg_iteration_bound, acg_residual_inclusion_check, acg_solve, CompositeSubproblem};
use aidal_core::benchmarks::prox::{project_fantope, project_simplex, project_spectraplex};
use aidal_core::benchmarks::Family;
use aidal_core::linalg;
use aidal_core::{
    aidal_solve, diagnostic_constants, AidalParams, DiagnosticInputs, OuterRecord, SolveReport, TerminationMode,
};
use common::{clip_eigenvalues, dykstra, project_sum, project_trace, random_symmetric, rng, simplex_fixture};
use common::{Nonsmooth, RandomComposite};
use rand::Rng;

const SEEDS: [u64; 5] = [1, 2, 3, 4, 5];
const INCLUSION_TOL: f64 = 1e-7;

fn report(n: usize, ok: bool, detail: &str) {
    let verdict = if ok { "PASS" } else { "FAIL" };
    let _ = writeln!(std::io::stderr(), "criterion {n}: {verdict} ({detail})");
    assert!(ok, "criterion {n} failed: {detail}");
}

fn fixture_run() -> &'static (SolveReport, f64) {
    static RUN: OnceLock<(SolveReport, f64)> = OnceLock::new();
    RUN.get_or_init(|| {
        let prob = simplex_fixture();
        let params = AidalParams::for_problem(&prob, vec![1.0, 0.0]).with_tolerances(1e-6, 1e-6);
        let start = Instant::now();
        let rep = aidal_solve(&prob, &params, TerminationMode::Absolute).expect("fixture solve");
        (rep, start.elapsed().as_secs_f64())
    })
}

fn lcqp_runs() -> &'static [RunStats] {
    static RUNS: OnceLock<Vec<RunStats>> = OnceLock::new();
    RUNS.get_or_init(|| {
        let mut cfgs = Vec::new();
        for m in [1e2, 1e6] {
            for seed in SEEDS {
                cfgs.push(ExperimentConfig::new(Method::Tadl1, Family::Lcqp, m, seed));
            }
        }
        for seed in SEEDS {
            cfgs.push(ExperimentConfig::new(Method::Radl0, Family::Lcqp, 1e2, seed));
        }
        sweep(&cfgs).expect("LCQP sweep")
    })
}

fn smoke_runs() -> &'static [RunStats] {
    static RUNS: OnceLock<Vec<RunStats>> = OnceLock::new();
    RUNS.get_or_init(|| {
        let mut cfgs: Vec<_> =
            [5.0, 10.0, 15.0].into_iter().map(|s| ExperimentConfig::new(Method::Radl0, Family::Spca, s, 1)).collect();
        cfgs.push(ExperimentConfig::new(Method::Radl0, Family::Lcqm, 1e2, 1));
        sweep(&cfgs).expect("smoke sweep")
    })
}

/// rADL1 runs, and (tADL1, rADL1 started at `1/(2m)`) pairs.
type AdaptiveRuns = (Vec<RunStats>, Vec<(RunStats, RunStats)>);

fn adaptive_runs() -> &'static AdaptiveRuns {
    static RUNS: OnceLock<AdaptiveRuns> = OnceLock::new();
    RUNS.get_or_init(|| {
        let radl1: Vec<_> = SEEDS
            .iter()
            .map(|&s| run_experiment(&ExperimentConfig::new(Method::Radl1, Family::Lcqp, 1e2, s)).unwrap())
            .collect();
        let pairs = SEEDS[..2]
            .iter()
            .map(|&s| {
                let tadl1 = ExperimentConfig::new(Method::Tadl1, Family::Lcqp, 1e2, s);
                let inst = instance_spec(&tadl1).generate().unwrap();
                let mut matched = ExperimentConfig::new(Method::Radl1, Family::Lcqp, 1e2, s);
                matched.lambda0 = 0.5 / inst.problem.f.lower_curvature();
                (run_experiment(&tadl1).unwrap(), run_experiment(&matched).unwrap())
            })
            .collect();
        (radl1, pairs)
    })
}

fn label(s: &RunStats) -> String {
    format!("{} {} param={} seed={}", s.method, s.problem, s.param, s.seed)
}

fn family_lcqp(s: &RunStats, m: f64, method: Method) -> bool {
    s.problem == Family::Lcqp && s.param == m && s.method == method
}

#[test]
fn criterion_01_fixture_solution() {
    let (rep, secs) = fixture_run();
    let err = linalg::dist(&rep.certificate.z_hat, &[0.5, 0.5]);
    report(1, err <= 1e-4 && *secs < 1.0, &format!("|z - z*| = {err:.2e}, {secs:.3} s"));
}

#[test]
fn criterion_02_potential_descent() {
    let mut checked = 0usize;
    let mut violations = Vec::new();
    for s in lcqp_runs().iter().filter(|s| family_lcqp(s, 1e2, Method::Tadl1)) {
        for w in s.trace.windows(2) {
            let (prev, cur) = (&w[0], &w[1]);
            if prev.c != cur.c {
                continue;
            }
            checked += 1;
            let need = cur.lambda / 32.0 * cur.vhat_norm.powi(2) - 1e-8 * (1.0 + prev.psi.abs());
            if prev.psi - cur.psi < need {
                violations.push(format!("{} k={}", label(s), cur.k));
            }
        }
    }
    let ok = violations.is_empty() && checked > 0;
    report(2, ok, &format!("{checked} within-cycle steps, violations: {violations:?}"));
}

#[test]
fn criterion_03_certificate_inclusion() {
    let mut worst = 0f64;
    let mut count = 0usize;
    let fixture = simplex_fixture();
    worst = worst.max(fixture_run().0.certificate.inclusion_residual(&fixture).unwrap());
    count += 1;
    let (radl1, pairs) = adaptive_runs();
    let pair_runs = pairs.iter().flat_map(|(a, b)| [a, b]);
    for s in lcqp_runs().iter().chain(smoke_runs()).chain(radl1).chain(pair_runs) {
        let Some(cert) = &s.certificate else { continue };
        let cfg = ExperimentConfig::new(s.method, s.problem, s.param, s.seed);
        let inst = instance_spec(&cfg).generate().unwrap();
        let r = cert.inclusion_residual(&inst.problem).unwrap();
        assert!(r.is_finite(), "{}", label(s));
        worst = worst.max(r);
        count += 1;
    }
    report(3, worst <= INCLUSION_TOL, &format!("{count} certificates, worst residual {worst:.2e}"));
}

#[test]
fn criterion_04_acg_iteration_cap() {
    let mut r = rng(4);
    let sigmas = [0.5, 0.1, 0.01];
    let mut failures = Vec::new();
    for i in 0..50 {
        let n = r.random_range(2..=20);
        let cond = 10f64.powf(r.random_range(2f64.log10()..=4.0));
        let mu = 10f64.powf(r.random_range(-2.0..1.0));
        let kind = [Nonsmooth::Zero, Nonsmooth::L1(0.5), Nonsmooth::Simplex][i % 3];
        let sub = RandomComposite::sample(&mut r, n, mu, mu * cond, kind);
        let x0 = if kind == Nonsmooth::Simplex {
            vec![1.0 / n as f64; n]
        } else {
            (0..n).map(|_| r.random_range(-1.0..1.0)).collect()
        };
        let sigma = sigmas[i % 3];
        let bound = acg_iteration_bound(sub.upper_curvature(), sub.strong_convexity(), sigma);
        let res = acg_solve(&sub, sigma, &x0, bound).unwrap();
        let ok = res.converged
            && res.inner_iters <= bound
            && acg_residual_inclusion_check(&sub, &res.z, &res.v, INCLUSION_TOL).unwrap();
        if !ok {
            failures.push(i);
        }
    }
    report(4, failures.is_empty(), &format!("50 problems, failures: {failures:?}"));
}

/// Returns a description of the first penalty-structure violation.
fn penalty_violation(trace: &[OuterRecord], rho: f64) -> Option<String> {
    for w in trace.windows(2) {
        let ratio = w[1].c / w[0].c;
        if ratio != 1.0 && ratio != 2.0 {
            return Some(format!("k={}: c ratio {ratio}", w[1].k));
        }
        if ratio == 2.0 && w[0].vhat_norm > rho {
            return Some(format!("k={}: cycle closed with |vhat| = {:e} > {rho:e}", w[0].k, w[0].vhat_norm));
        }
    }
    let cycles = trace.last().map_or(0, |r| r.cycle);
    (cycles > 60).then(|| format!("{cycles} cycles"))
}

#[test]
fn criterion_05_penalty_behavior() {
    let (radl1, pairs) = adaptive_runs();
    let pair_runs = pairs.iter().flat_map(|(a, b)| [a, b]);
    let mut runs = 0usize;
    let mut max_cycles = 0usize;
    let mut problems = Vec::new();
    if let Some(v) = penalty_violation(&fixture_run().0.trace, 1e-6) {
        problems.push(format!("fixture {v}"));
    }
    for s in lcqp_runs().iter().chain(smoke_runs()).chain(radl1).chain(pair_runs).filter(|s| s.converged) {
        runs += 1;
        max_cycles = max_cycles.max(s.trace.last().map_or(0, |r| r.cycle));
        if let Some(v) = penalty_violation(&s.trace, s.rho_eff.unwrap()) {
            problems.push(format!("{} {v}", label(s)));
        }
    }
    report(
        5,
        problems.is_empty(),
        &format!("{runs} converged runs, max {max_cycles} cycles, violations: {problems:?}"),
    );
}

#[test]
fn criterion_06_lcqp_order_of_magnitude() {
    let runs = lcqp_runs();
    let mut notes = Vec::new();
    let mut ok = true;
    for s in runs.iter().filter(|s| s.method == Method::Tadl1) {
        let in_range = s.converged && (700..=70_000).contains(&s.total_inner_iters) && s.runtime_s < 120.0;
        ok &= in_range;
        if !in_range {
            notes.push(format!("{}: converged={} inner={}", label(s), s.converged, s.total_inner_iters));
        }
    }
    let mut wins = 0;
    for seed in SEEDS {
        let find = |m: Method| runs.iter().find(|s| family_lcqp(s, 1e2, m) && s.seed == seed).unwrap();
        let (t, r) = (find(Method::Tadl1), find(Method::Radl0));
        ok &= r.runtime_s < 120.0;
        if r.converged && r.total_inner_iters < t.total_inner_iters {
            wins += 1;
        } else {
            notes.push(format!(
                "seed {seed}: rADL0 {} ({}) vs tADL1 {}",
                r.total_inner_iters,
                r.error.as_deref().unwrap_or("converged"),
                t.total_inner_iters
            ));
        }
    }
    ok &= wins >= 4;
    let tadl1: Vec<_> = runs.iter().filter(|s| s.method == Method::Tadl1).map(|s| s.total_inner_iters).collect();
    report(6, ok, &format!("tADL1 inner {tadl1:?}; rADL0 fewer on {wins}/5 seeds; {notes:?}"));
}

#[test]
fn criterion_07_spca_lcqm_smoke() {
    let mut ok = true;
    let mut lines = Vec::new();
    for s in smoke_runs() {
        let ratio = s.c_wavg_ratio.unwrap_or(f64::NAN);
        let good = s.converged && s.runtime_s < 300.0 && ratio > 0.0 && ratio <= 1.0;
        ok &= good;
        lines.push(format!(
            "{}: converged={} inner={} {:.1} s c_wavg/c_max={ratio:.3}",
            label(s),
            s.converged,
            s.total_inner_iters,
            s.runtime_s
        ));
    }
    report(7, ok, &lines.join("; "));
}

#[test]
fn criterion_08_projection_oracles() {
    let mut r = rng(8);
    let mut worst = 0f64;
    for _ in 0..100 {
        let n = r.random_range(1..=6);
        let x: Vec<f64> = (0..n).map(|_| r.random_range(-3.0..3.0)).collect();
        let oracle = dykstra(&x, |y| project_sum(y, 1.0), |y| y.iter().map(|v| v.max(0.0)).collect(), 1e-15, 200_000);
        worst = worst.max(linalg::dist(&project_simplex(&x), &oracle));

        let mut m = random_symmetric(&mut r, n);
        linalg::scale(2.0, &mut m.data);
        let spectral = |trace: f64, hi: f64| {
            dykstra(&m.data, |y| project_trace(y, n, trace), |y| clip_eigenvalues(y, n, 0.0, hi), 1e-15, 200_000)
        };
        worst = worst.max(linalg::dist(&project_spectraplex(&m).unwrap().data, &spectral(1.0, f64::INFINITY)));
        let k = r.random_range(1..=n);
        worst = worst.max(linalg::dist(&project_fantope(&m, k).unwrap().data, &spectral(k as f64, 1.0)));
    }
    report(8, worst <= 1e-6, &format!("300 projections, worst deviation {worst:.2e}"));
}

#[test]
fn criterion_09_multiplier_bound() {
    let prob = simplex_fixture();
    let params = AidalParams::for_problem(&prob, vec![1.0, 0.0]).with_tolerances(1e-6, 1e-6);
    let inputs = DiagnosticInputs { slater_point: Some(vec![0.5, 0.5]), grad_bound: Some(1.0), objective_gap: None };
    let bp = diagnostic_constants(&prob, &params, &inputs).b_p.expect("B_p on the fixture");
    let trace = &fixture_run().0.trace;
    let worst = trace.iter().map(|r| r.p_norm).fold(0.0, f64::max);
    report(9, worst <= bp, &format!("max |p_k| = {worst:.4} over {} iterations, B_p = {bp:.4}", trace.len()));
}

#[test]
fn criterion_10_adaptive_stepsize() {
    let (radl1, pairs) = adaptive_runs();
    let mut problems = Vec::new();
    for s in radl1 {
        let cfg = ExperimentConfig::new(s.method, s.problem, s.param, s.seed);
        let m = instance_spec(&cfg).generate().unwrap().problem.f.lower_curvature();
        let floor = 1.0 / (2.0 * cfg.gamma * m);
        if !s.converged {
            problems.push(format!("{} did not converge", label(s)));
        }
        if s.trace.windows(2).any(|w| w[1].lambda > w[0].lambda) {
            problems.push(format!("{}: lambda increased", label(s)));
        }
        if s.trace.iter().any(|r| r.lambda < floor) {
            problems.push(format!("{}: lambda below 1/(2 gamma m)", label(s)));
        }
    }
    for (fixed, adaptive) in pairs {
        let same = fixed.trace == adaptive.trace
            && fixed.certificate == adaptive.certificate
            && fixed.total_inner_iters == adaptive.total_inner_iters;
        if !same {
            problems.push(format!("seed {}: trajectories differ", fixed.seed));
        }
    }
    let lambdas: Vec<String> =
        radl1.iter().map(|s| format!("{:.3e}", s.trace.last().map_or(f64::NAN, |r| r.lambda))).collect();
    report(10, problems.is_empty(), &format!("final lambdas {lambdas:?}; {problems:?}"));
}

#[test]
fn penalty_statistics_follow_trace() {
    for s in lcqp_runs() {
        assert_eq!(s.c_max, Some(c_max(&s.trace)));
        assert_eq!(s.c_wavg, Some(c_wavg(&s.trace)));
    }
}
