mod bench;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use cholqr::matgen::{self, MatrixSpec, PRNG_NAME};
use cholqr::metrics::{quality_report, Norm};
use cholqr::varray::mm::MatrixMarket;
use cholqr::{
    AlgoConfig, DenseArray, FlopLedger, ListArray, QrError, Registry, Tolerance, VectorArray,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use bench::{Axis, Sweep};

#[derive(Parser)]
#[command(name = "cholqr", version, about = "Shifted Cholesky QR toolbox")]
struct Cli {
    /// Worker threads for the list backend's inner products.
    #[arg(long, global = true, env = "CHOLQR_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a test matrix with prescribed condition number.
    Gen(GenArgs),
    /// Factorize a Matrix Market file.
    Qr(QrArgs),
    /// Time algorithms over a parameter sweep and emit raw CSV records.
    Bench(BenchArgs),
    /// Compare measured and predicted flop counts over a sweep.
    Flops(FlopsArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Backend {
    Dense,
    List,
}

impl Backend {
    pub fn name(self) -> &'static str {
        match self {
            Backend::Dense => "dense",
            Backend::List => "list",
        }
    }
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum NormArg {
    Spectral,
    Frobenius,
}

impl From<NormArg> for Norm {
    fn from(n: NormArg) -> Self {
        match n {
            NormArg::Spectral => Norm::Spectral,
            NormArg::Frobenius => Norm::Frobenius,
        }
    }
}

#[derive(Args)]
struct GenArgs {
    #[arg(short)]
    m: usize,
    #[arg(short)]
    n: usize,
    #[arg(long, default_value_t = 0.0)]
    log10_cond: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output Matrix Market file; metadata goes to `<output>.json`.
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args)]
struct QrArgs {
    /// Algorithm name, e.g. rscholqr or pncholqr:4.
    algorithm: String,
    input: PathBuf,
    #[arg(long, value_enum, default_value = "dense")]
    backend: Backend,
    /// Where to write Q (default `<input stem>.q.mtx`).
    #[arg(long)]
    q_out: Option<PathBuf>,
    /// Where to write R (default `<input stem>.r.mtx`).
    #[arg(long)]
    r_out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "spectral")]
    norm: NormArg,
    #[command(flatten)]
    algo: AlgoArgs,
}

#[derive(Args, Clone)]
pub struct AlgoArgs {
    /// Stopping tolerance on ||X - I||_F; `u` selects u * sqrt(n).
    #[arg(long, default_value = "1e-13")]
    tol: String,
    #[arg(long, default_value_t = 10)]
    max_iter: usize,
}

impl AlgoArgs {
    pub fn config(&self) -> Result<AlgoConfig> {
        let tol = if self.tol == "u" {
            Tolerance::RoundoffSqrtN
        } else {
            Tolerance::Fixed(
                self.tol
                    .parse()
                    .with_context(|| format!("bad tolerance {:?}", self.tol))?,
            )
        };
        let cfg = AlgoConfig {
            tol,
            max_iter: self.max_iter,
            ..AlgoConfig::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args)]
pub struct SweepArgs {
    #[arg(long, value_enum, default_value = "cond")]
    axis: Axis,
    #[arg(long, default_value_t = 1000)]
    m: usize,
    #[arg(long, default_value_t = 20)]
    n: usize,
    #[arg(long, default_value_t = 0.0)]
    log10_cond: f64,
    /// `start:stop:count`, inclusive and evenly spaced, along the axis.
    #[arg(long, default_value = "0:20:21")]
    points: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "dense")]
    backend: Backend,
    #[arg(long, value_delimiter = ',', default_value = "rscholqr")]
    algs: Vec<String>,
    #[command(flatten)]
    algo: AlgoArgs,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    sweep: SweepArgs,
    #[arg(long, default_value_t = 10)]
    reps: usize,
    /// CSV output file (default stdout).
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Also write a gnuplot script plotting runtime along the axis.
    #[arg(long)]
    plot: Option<PathBuf>,
}

#[derive(Args)]
struct FlopsArgs {
    #[command(flatten)]
    sweep: SweepArgs,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Serialize)]
struct Sidecar<'a> {
    spec: &'a MatrixSpec,
    singular_values: &'a [f64],
    prng: &'a str,
    effective_seed: u64,
    seed_mix: &'a str,
}

pub const SEED_MIX: &str =
    "seed ^ splitmix64(splitmix64(splitmix64(m) ^ n) ^ round(10 * log10_cond))";

fn cmd_gen(args: &GenArgs) -> Result<()> {
    let spec = MatrixSpec {
        m: args.m,
        n: args.n,
        log10_cond: args.log10_cond,
        seed: args.seed,
    };
    let generated = matgen::generate::<DenseArray>(&spec)?;
    let comments = vec![
        format!(
            "m={} n={} log10_cond={} seed={}",
            spec.m, spec.n, spec.log10_cond, spec.seed
        ),
        format!(
            "prng={PRNG_NAME} effective_seed={}",
            generated.effective_seed
        ),
    ];
    generated
        .a
        .save(&args.output, &comments)
        .with_context(|| format!("writing {}", args.output.display()))?;
    let sidecar = Sidecar {
        spec: &spec,
        singular_values: &generated.singular_values,
        prng: PRNG_NAME,
        effective_seed: generated.effective_seed,
        seed_mix: SEED_MIX,
    };
    let meta = sidecar_path(&args.output);
    fs::write(&meta, serde_json::to_string_pretty(&sidecar)? + "\n")
        .with_context(|| format!("writing {}", meta.display()))?;
    Ok(())
}

fn sidecar_path(p: &Path) -> PathBuf {
    let mut s = p.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

fn derived_path(input: &Path, suffix: &str) -> PathBuf {
    let stem = input
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    input.with_file_name(format!("{stem}.{suffix}.mtx"))
}

/// Outcome of `qr`: `Ok(false)` when the algorithm itself failed.
fn cmd_qr(args: &QrArgs) -> Result<bool> {
    match args.backend {
        Backend::Dense => run_qr::<DenseArray>(args, &Registry::dense()),
        Backend::List => run_qr::<ListArray>(args, &Registry::builtin()),
    }
}

fn run_qr<V: VectorArray + MatrixMarket + 'static>(
    args: &QrArgs,
    registry: &Registry<V>,
) -> Result<bool> {
    let algo = registry.get(&args.algorithm)?;
    let cfg = args.algo.config()?;
    let a = V::load(&args.input).with_context(|| format!("reading {}", args.input.display()))?;
    let mut ledger = FlopLedger::new();
    let res = match algo.factorize(&a, &cfg, &mut ledger) {
        Ok(res) => res,
        Err(e) => {
            eprintln!("{}: {}", algo.name(), diagnostic(&e));
            return Ok(false);
        }
    };
    let coeffs = res.coefficients();
    let report = quality_report(&a, &res.q, &coeffs, args.norm.into())?;
    let q_path = args
        .q_out
        .clone()
        .unwrap_or_else(|| derived_path(&args.input, "q"));
    let r_path = args
        .r_out
        .clone()
        .unwrap_or_else(|| derived_path(&args.input, "r"));
    res.q.save(&q_path, &[format!("Q from {}", algo.name())])?;
    coeffs.save(&r_path, &[format!("R from {}", algo.name())])?;
    println!(
        "algorithm={} backend={} loo={:.3e} rrr={:.3e} rcr={:.3e} norm={:?} iterations={} shifts={} dropped={} flops={}",
        algo.name(),
        args.backend.name(),
        report.loo,
        report.rrr,
        report.rcr,
        report.norm_used,
        res.iterations,
        res.shifts_applied.len(),
        res.dropped.len(),
        ledger.total()
    );
    Ok(true)
}

pub fn diagnostic(e: &QrError) -> String {
    let msg = e.to_string();
    match e.root() {
        QrError::ShiftAttemptLimitExceeded { .. } => format!("cholesky breakdown: {msg}"),
        _ => msg,
    }
}

fn output_writer(path: &Option<PathBuf>) -> Result<Box<dyn std::io::Write>> {
    Ok(match path {
        Some(p) => {
            Box::new(fs::File::create(p).with_context(|| format!("creating {}", p.display()))?)
        }
        None => Box::new(std::io::stdout().lock()),
    })
}

fn run(cli: Cli) -> Result<bool> {
    if let Some(t) = cli.threads {
        if t == 0 {
            bail!("--threads must be positive");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()?;
    }
    match &cli.command {
        Command::Gen(args) => cmd_gen(args).map(|()| true),
        Command::Qr(args) => cmd_qr(args),
        Command::Bench(args) => {
            let sweep = Sweep::from_args(&args.sweep)?;
            if args.reps == 0 {
                bail!("--reps must be at least 1");
            }
            let out = output_writer(&args.output)?;
            bench::bench(&sweep, args.reps, out)?;
            if let Some(plot) = &args.plot {
                let csv = args.output.as_deref().unwrap_or(Path::new("bench.csv"));
                fs::write(plot, bench::gnuplot_script(&sweep, csv))?;
            }
            Ok(true)
        }
        Command::Flops(args) => {
            let sweep = Sweep::from_args(&args.sweep)?;
            bench::flops(&sweep, output_writer(&args.output)?)?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
