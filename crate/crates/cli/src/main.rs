use std::path::PathBuf;
use std::process::ExitCode;

use aidal_cli::{emit_results, run_experiment, sweep, KeyValues, OutputFormat, RunStats};
use aidal_core::benchmarks::{Family, InstanceSpec};
use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "aidal", version, about = "Run AIDAL experiments on the benchmark families")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a single configuration.
    Run(RunArgs),
    /// Run every configuration listed in a key=value config file.
    Sweep(SweepArgs),
    /// Print the text descriptor of a generated instance.
    Instance(InstanceArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Config file whose keys the flags below override.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    method: Option<String>,
    #[arg(long)]
    problem: Option<String>,
    /// Curvature target for lcqp and lcqm.
    #[arg(long = "M")]
    m_target: Option<String>,
    /// Sparsity for spca.
    #[arg(long = "s")]
    sparsity: Option<String>,
    /// Problem parameter (`M` or `s`).
    #[arg(long)]
    param: Option<String>,
    #[arg(long)]
    rho: Option<String>,
    #[arg(long)]
    eta: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// SPCA order.
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    lambda0: Option<String>,
    #[arg(long)]
    gamma: Option<String>,
    #[arg(long)]
    max_outer: Option<String>,
    #[arg(long)]
    max_total_inner: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv or json.
    #[arg(long)]
    format: Option<String>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    format: Option<String>,
}

#[derive(Args)]
struct InstanceArgs {
    #[arg(long)]
    problem: Family,
    #[arg(long)]
    param: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    n: Option<usize>,
    /// Also generate the instance to check that it is valid.
    #[arg(long)]
    check: bool,
}

fn single(v: &str) -> Vec<String> {
    vec![v.to_string()]
}

fn run_keys(args: &RunArgs) -> Result<KeyValues> {
    let mut kv = match &args.config {
        Some(path) => KeyValues::from_file(path)?,
        None => KeyValues::default(),
    };
    let flags: [(&str, &Option<String>); 13] = [
        ("method", &args.method),
        ("problem", &args.problem),
        ("param", &args.param),
        ("M", &args.m_target),
        ("s", &args.sparsity),
        ("rho", &args.rho),
        ("eta", &args.eta),
        ("seed", &args.seed),
        ("n", &args.n),
        ("lambda0", &args.lambda0),
        ("gamma", &args.gamma),
        ("max_outer", &args.max_outer),
        ("max_total_inner", &args.max_total_inner),
    ];
    for (key, value) in flags {
        if let Some(v) = value {
            kv.set(key, single(v))?;
        }
    }
    if let Some(out) = &args.out {
        kv.set("out", single(&out.to_string_lossy()))?;
    }
    if let Some(f) = &args.format {
        kv.set("format", single(f))?;
    }
    Ok(kv)
}

fn output_format(kv: &KeyValues, path: Option<&PathBuf>) -> Result<OutputFormat> {
    if let Some(f) = kv.format()? {
        return Ok(f);
    }
    let is_json = path.and_then(|p| p.extension()).is_some_and(|e| e.eq_ignore_ascii_case("json"));
    Ok(if is_json { OutputFormat::Json } else { OutputFormat::Csv })
}

fn report(stats: &[RunStats], kv: &KeyValues) -> Result<bool> {
    let fmt_opt = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |x| format!("{x:.3e}"));
    for s in stats {
        println!(
            "{:<6} {:<5} param={:<8} seed={:<4} outer={:<6} inner={:<8} c_max={} c_ratio={} time={:.3}s {}",
            s.method,
            s.problem,
            s.param,
            s.seed,
            s.outer_iters,
            s.total_inner_iters,
            fmt_opt(s.c_max),
            s.c_wavg_ratio.map_or_else(|| "-".to_string(), |x| format!("{x:.3}")),
            s.runtime_s,
            if s.converged { "converged".to_string() } else { format!("FAILED: {}", s.error.as_deref().unwrap_or("")) },
        );
    }
    if let Some(path) = kv.out_path()? {
        let format = output_format(kv, Some(&path))?;
        emit_results(stats, format, &path)?;
        log::info!("wrote {}", path.display());
    }
    Ok(stats.iter().all(|s| s.converged))
}

fn main_inner() -> Result<bool> {
    let cli = Cli::parse();
    match cli.command {
        Command::Run(args) => {
            let kv = run_keys(&args)?;
            let configs = kv.expand()?;
            if configs.len() != 1 {
                bail!("`run` needs exactly one configuration, got {}; use `sweep` for lists", configs.len());
            }
            let stats = run_experiment(&configs[0])?;
            report(&[stats], &kv)
        }
        Command::Sweep(args) => {
            let mut kv = KeyValues::from_file(&args.config)?;
            if let Some(out) = &args.out {
                kv.set("out", single(&out.to_string_lossy()))?;
            }
            if let Some(f) = &args.format {
                kv.set("format", single(f))?;
            }
            let configs = kv.expand().with_context(|| format!("expanding {}", args.config.display()))?;
            let stats = sweep(&configs)?;
            report(&stats, &kv)
        }
        Command::Instance(args) => {
            let spec = InstanceSpec { family: args.problem, seed: args.seed, param: args.param, n: args.n };
            if args.check {
                let inst = spec.generate()?;
                log::info!("generated instance with {} variables", inst.problem.dim());
            }
            print!("{}", spec.to_text());
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match main_inner() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
