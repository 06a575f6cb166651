//! Running configured experiments and reporting their statistics.

use std::fs::File;
use std::io::BufWriter;
use std::path::Path;
use std::time::Instant;

use aidal_core::adaptive::{adaptive_solve, AdaptiveParams};
use aidal_core::aidal::{
    aidal_solve, AidalParams, Certificate, OuterRecord, SolveFailure, SolveReport, TerminationMode,
};
use aidal_core::benchmarks::{Family, GeneratedInstance, InstanceSpec};
use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, Method, OutputFormat};

/// Summary of one run, with its trace.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunStats {
    pub method: Method,
    pub problem: Family,
    pub param: f64,
    pub seed: u64,
    pub outer_iters: usize,
    pub total_inner_iters: usize,
    pub runtime_s: f64,
    pub c_max: Option<f64>,
    pub c_wavg: Option<f64>,
    pub c_wavg_ratio: Option<f64>,
    pub vhat_norm: Option<f64>,
    pub feas_norm: Option<f64>,
    pub converged: bool,
    /// Tolerances after relative scaling.
    pub rho_eff: Option<f64>,
    pub eta_eff: Option<f64>,
    pub error: Option<String>,
    pub trace: Vec<OuterRecord>,
    #[serde(skip)]
    pub certificate: Option<Certificate>,
}

/// One CSV row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub method: Method,
    pub problem: Family,
    pub param: f64,
    pub seed: u64,
    pub outer_iters: usize,
    pub total_inner_iters: usize,
    pub runtime_s: f64,
    pub c_max: Option<f64>,
    pub c_wavg_ratio: Option<f64>,
    pub vhat_norm: Option<f64>,
    pub feas_norm: Option<f64>,
    pub converged: bool,
}

impl From<&RunStats> for CsvRow {
    fn from(s: &RunStats) -> Self {
        Self {
            method: s.method,
            problem: s.problem,
            param: s.param,
            seed: s.seed,
            outer_iters: s.outer_iters,
            total_inner_iters: s.total_inner_iters,
            runtime_s: s.runtime_s,
            c_max: s.c_max,
            c_wavg_ratio: s.c_wavg_ratio,
            vhat_norm: s.vhat_norm,
            feas_norm: s.feas_norm,
            converged: s.converged,
        }
    }
}

/// Largest penalty parameter in the trace.
pub fn c_max(trace: &[OuterRecord]) -> f64 {
    trace.iter().map(|r| r.c).fold(0.0, f64::max)
}

/// Iteration-weighted mean penalty `sum_i n_i c_i / sum_i n_i`, where `n_i`
/// counts the outer iterations spent at penalty `c_i`.
pub fn c_wavg(trace: &[OuterRecord]) -> f64 {
    if trace.is_empty() {
        return 0.0;
    }
    trace.iter().map(|r| r.c).sum::<f64>() / trace.len() as f64
}

/// Weighted mean from explicit cycle lengths `n_i` with `c_i = c0 2^i`.
pub fn c_wavg_from_cycles(c0: f64, counts: &[usize]) -> f64 {
    let total: usize = counts.iter().sum();
    let weighted: f64 = counts.iter().enumerate().map(|(i, n)| *n as f64 * c0 * 2f64.powi(i as i32)).sum();
    weighted / total as f64
}

/// Solver inputs for a method on a generated instance.
pub enum Solver {
    Fixed(AidalParams),
    Adaptive(AdaptiveParams),
}

impl Solver {
    pub fn for_method(cfg: &ExperimentConfig, inst: &GeneratedInstance) -> Self {
        let prob = &inst.problem;
        let z0 = inst.z0.clone();
        let finish = |p: &mut AidalParams| {
            p.rho = cfg.rho;
            p.eta = cfg.eta;
            p.max_outer = cfg.max_outer;
            p.max_total_inner = cfg.max_total_inner;
        };
        match cfg.method {
            Method::Tadl1 => {
                let mut p = AidalParams::for_problem(prob, z0);
                finish(&mut p);
                Solver::Fixed(p)
            }
            Method::Radl0 | Method::Radl1 => {
                let mut p = if cfg.method == Method::Radl0 {
                    AdaptiveParams::radl0(prob, z0)
                } else {
                    AdaptiveParams::radl1(prob, z0)
                };
                p.base.lambda = cfg.lambda0;
                p.gamma = cfg.gamma;
                finish(&mut p.base);
                Solver::Adaptive(p)
            }
        }
    }

    pub fn solve(&self, inst: &GeneratedInstance, mode: TerminationMode) -> Result<SolveReport, SolveFailure> {
        match self {
            Solver::Fixed(p) => aidal_solve(&inst.problem, p, mode),
            Solver::Adaptive(p) => adaptive_solve(&inst.problem, p, mode),
        }
    }
}

pub fn instance_spec(cfg: &ExperimentConfig) -> InstanceSpec {
    InstanceSpec { family: cfg.problem, seed: cfg.seed, param: cfg.param, n: cfg.n }
}

fn stats_shell(cfg: &ExperimentConfig) -> RunStats {
    RunStats {
        method: cfg.method,
        problem: cfg.problem,
        param: cfg.param,
        seed: cfg.seed,
        outer_iters: 0,
        total_inner_iters: 0,
        runtime_s: 0.0,
        c_max: None,
        c_wavg: None,
        c_wavg_ratio: None,
        vhat_norm: None,
        feas_norm: None,
        converged: false,
        rho_eff: None,
        eta_eff: None,
        error: None,
        trace: Vec::new(),
        certificate: None,
    }
}

fn fill_trace_stats(stats: &mut RunStats) {
    stats.outer_iters = stats.trace.len();
    if !stats.trace.is_empty() {
        let (cm, cw) = (c_max(&stats.trace), c_wavg(&stats.trace));
        stats.c_max = Some(cm);
        stats.c_wavg = Some(cw);
        stats.c_wavg_ratio = Some(cw / cm);
    }
}

/// Runs one configuration in relative termination mode. Solver failures are
/// reported through `converged = false`; only instance generation errors
/// are returned as `Err`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunStats> {
    let inst = instance_spec(cfg)
        .generate()
        .with_context(|| format!("generating {} instance (seed {}, param {})", cfg.problem, cfg.seed, cfg.param))?;
    let solver = Solver::for_method(cfg, &inst);
    let start = Instant::now();
    let outcome = solver.solve(&inst, TerminationMode::Relative);
    let runtime_s = (start.elapsed().as_secs_f64() * 1e3).round() / 1e3;

    let mut stats = stats_shell(cfg);
    stats.runtime_s = runtime_s;
    match outcome {
        Ok(report) => {
            stats.converged = true;
            stats.total_inner_iters = report.total_inner_iters;
            stats.vhat_norm = Some(report.certificate.vhat_norm);
            stats.feas_norm = Some(report.certificate.feas_norm);
            stats.rho_eff = Some(report.rho_eff);
            stats.eta_eff = Some(report.eta_eff);
            stats.trace = report.trace;
            stats.certificate = Some(report.certificate);
        }
        Err(failure) => {
            log::warn!(
                "{} on {} (seed {}, param {}) failed: {}",
                cfg.method,
                cfg.problem,
                cfg.seed,
                cfg.param,
                failure
            );
            stats.error = Some(failure.error.to_string());
            stats.total_inner_iters = failure.total_inner_iters;
            if let Some(best) = &failure.best {
                stats.vhat_norm = Some(best.vhat_norm);
                stats.feas_norm = Some(best.feas_norm);
            }
            stats.trace = failure.trace;
            stats.certificate = failure.best;
        }
    }
    fill_trace_stats(&mut stats);
    Ok(stats)
}

/// Writes the runs as CSV (summary columns) or JSON (with traces).
pub fn emit_results(stats: &[RunStats], format: OutputFormat, path: &Path) -> Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let writer = BufWriter::new(file);
    match format {
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(writer);
            for s in stats {
                w.serialize(CsvRow::from(s)).with_context(|| format!("writing {}", path.display()))?;
            }
            w.flush().with_context(|| format!("writing {}", path.display()))?;
        }
        OutputFormat::Json => {
            serde_json::to_writer_pretty(writer, stats).with_context(|| format!("writing {}", path.display()))?;
        }
    }
    Ok(())
}

pub fn read_csv(path: &Path) -> Result<Vec<CsvRow>> {
    let mut r = csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    r.deserialize().collect::<Result<Vec<CsvRow>, _>>().with_context(|| format!("parsing {}", path.display()))
}

pub fn read_json(path: &Path) -> Result<Vec<RunStats>> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    serde_json::from_reader(std::io::BufReader::new(file)).with_context(|| format!("parsing {}", path.display()))
}

/// Worker count: `AIDAL_THREADS` when set to a positive integer, else the
/// rayon default.
pub fn sweep_threads() -> Option<usize> {
    std::env::var("AIDAL_THREADS").ok().and_then(|v| v.trim().parse::<usize>().ok()).filter(|n| *n > 0)
}

/// Runs every configuration, in parallel across configurations, and returns
/// the results in input order. A failing configuration yields a row with
/// `converged = false` and does not stop the sweep.
pub fn sweep(configs: &[ExperimentConfig]) -> Result<Vec<RunStats>> {
    if configs.is_empty() {
        bail!("sweep has no configurations to run");
    }
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = sweep_threads() {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().context("building sweep thread pool")?;
    let results = pool.install(|| {
        configs
            .par_iter()
            .map(|cfg| {
                run_experiment(cfg).unwrap_or_else(|e| {
                    log::error!("{e:#}");
                    let mut s = stats_shell(cfg);
                    s.error = Some(format!("{e:#}"));
                    s
                })
            })
            .collect()
    });
    Ok(results)
}
