//! Parameter sweeps for the `bench` and `flops` subcommands.

use std::io::Write;
use std::path::Path;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use cholqr::algorithms::panel_widths;
use cholqr::flops::{panel_ledger, predict_panel, ratio_table, rscholqr_ledger};
use cholqr::matgen::{self, MatrixSpec, PRNG_NAME};
use cholqr::metrics::{quality_report, Norm};
use cholqr::{
    AlgoConfig, Category, DenseArray, FlopLedger, ListArray, QrError, QrResult, Registry,
    VectorArray,
};
use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use crate::{Backend, SweepArgs, SEED_MIX};

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Axis {
    Cond,
    M,
    N,
    Backend,
}

impl Axis {
    fn label(self) -> &'static str {
        match self {
            Axis::Cond => "log10 condition number",
            Axis::M => "rows m",
            Axis::N => "columns n",
            Axis::Backend => "backend",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub m: usize,
    pub n: usize,
    pub log10_cond: f64,
    pub backend: Backend,
}

#[derive(Debug, Clone)]
pub struct Sweep {
    pub axis: Axis,
    pub points: Vec<Point>,
    pub algs: Vec<String>,
    pub seed: u64,
    pub cfg: AlgoConfig,
}

/// Parses `start:stop:count` into `count` evenly spaced values.
pub fn parse_points(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    let [a, b, k] = parts[..] else {
        bail!("points must look like start:stop:count, got {s:?}");
    };
    let (a, b): (f64, f64) = (a.trim().parse()?, b.trim().parse()?);
    let k: usize = k.trim().parse()?;
    if k == 0 {
        bail!("point count must be positive");
    }
    if k == 1 {
        return Ok(vec![a]);
    }
    Ok((0..k)
        .map(|i| a + (b - a) * i as f64 / (k - 1) as f64)
        .collect())
}

impl Sweep {
    pub fn from_args(args: &SweepArgs) -> Result<Self> {
        let base = Point {
            m: args.m,
            n: args.n,
            log10_cond: args.log10_cond,
            backend: args.backend,
        };
        let points = match args.axis {
            Axis::Backend => vec![
                Point {
                    backend: Backend::Dense,
                    ..base
                },
                Point {
                    backend: Backend::List,
                    ..base
                },
            ],
            axis => parse_points(&args.points)?
                .into_iter()
                .map(|v| match axis {
                    Axis::Cond => Point {
                        log10_cond: v,
                        ..base
                    },
                    Axis::M => Point {
                        m: v.round() as usize,
                        ..base
                    },
                    _ => Point {
                        n: v.round() as usize,
                        ..base
                    },
                })
                .collect(),
        };
        for p in &points {
            MatrixSpec {
                m: p.m,
                n: p.n,
                log10_cond: p.log10_cond,
                seed: args.seed,
            }
            .validate()?;
        }
        let dense = Registry::<DenseArray>::dense();
        let list = Registry::<ListArray>::builtin();
        for alg in &args.algs {
            if points.iter().any(|p| p.backend == Backend::Dense) {
                dense.get(alg)?;
            }
            if points.iter().any(|p| p.backend == Backend::List) {
                list.get(alg)?;
            }
        }
        Ok(Self {
            axis: args.axis,
            points,
            algs: args.algs.clone(),
            seed: args.seed,
            cfg: args.algo.config()?,
        })
    }

    fn spec(&self, p: &Point) -> MatrixSpec {
        MatrixSpec {
            m: p.m,
            n: p.n,
            log10_cond: p.log10_cond,
            seed: self.seed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    /// Finished, but with loss of orthogonality above `sqrt(n) * tol`.
    Inaccurate,
    Breakdown,
    IterLimit,
    Oom,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub algorithm: String,
    pub backend: String,
    pub m: usize,
    pub n: usize,
    pub log10_cond: f64,
    pub rep: usize,
    pub runtime_s: Option<f64>,
    pub loo: Option<f64>,
    pub rrr: Option<f64>,
    pub rcr: Option<f64>,
    pub iters: Option<usize>,
    pub shifts: Option<usize>,
    pub flops: Option<u64>,
    pub status: Status,
}

fn status_of(e: &QrError) -> Status {
    match e.root() {
        QrError::IterationLimitExceeded { .. } => Status::IterLimit,
        _ => Status::Breakdown,
    }
}

/// Rough working set of one run: input, copy, result and one temporary.
fn fits_in_memory(p: &Point) -> bool {
    let bytes = p.m.checked_mul(p.n).and_then(|e| e.checked_mul(4 * 8));
    match bytes {
        Some(b) => Vec::<u8>::new().try_reserve_exact(b).is_ok(),
        None => false,
    }
}

fn metadata_lines(sweep: &Sweep) -> Vec<String> {
    vec![
        format!(
            "# cholqr {} bench, axis {:?}",
            env!("CARGO_PKG_VERSION"),
            sweep.axis
        ),
        format!(
            "# prng {PRNG_NAME}, seed {}, effective seed = {SEED_MIX}",
            sweep.seed
        ),
        format!("# tol {:?}, max_iter {}", sweep.cfg.tol, sweep.cfg.max_iter),
    ]
}

fn csv_writer(sweep: &Sweep, mut out: Box<dyn Write>) -> Result<csv::Writer<Box<dyn Write>>> {
    for line in metadata_lines(sweep) {
        writeln!(out, "{line}")?;
    }
    Ok(csv::Writer::from_writer(out))
}

pub fn bench(sweep: &Sweep, reps: usize, out: Box<dyn Write>) -> Result<()> {
    let mut w = csv_writer(sweep, out)?;
    for p in &sweep.points {
        let records = if !fits_in_memory(p) {
            oom_records(sweep, p, reps)
        } else {
            match p.backend {
                Backend::Dense => time_point::<DenseArray>(sweep, p, reps, &Registry::dense())?,
                Backend::List => time_point::<ListArray>(sweep, p, reps, &Registry::builtin())?,
            }
        };
        for r in records {
            w.serialize(r)?;
        }
        w.flush()?;
    }
    Ok(())
}

fn oom_records(sweep: &Sweep, p: &Point, reps: usize) -> Vec<BenchRecord> {
    let mut out = Vec::new();
    for alg in &sweep.algs {
        for rep in 0..reps {
            out.push(BenchRecord {
                algorithm: alg.clone(),
                backend: p.backend.name().into(),
                m: p.m,
                n: p.n,
                log10_cond: p.log10_cond,
                rep,
                runtime_s: None,
                loo: None,
                rrr: None,
                rcr: None,
                iters: None,
                shifts: None,
                flops: None,
                status: Status::Oom,
            });
        }
    }
    out
}

fn time_point<V: VectorArray + 'static>(
    sweep: &Sweep,
    p: &Point,
    reps: usize,
    registry: &Registry<V>,
) -> Result<Vec<BenchRecord>> {
    let a = matgen::generate::<V>(&sweep.spec(p))?.a;
    let bound = (p.n as f64).sqrt() * sweep.cfg.threshold(p.n);
    let mut out = Vec::new();
    for alg in &sweep.algs {
        let algo = registry.get(alg)?;
        // Warm-up, not recorded.
        let _ = algo.factorize(&a, &sweep.cfg, &mut FlopLedger::new());
        for rep in 0..reps {
            let mut ledger = FlopLedger::new();
            let start = Instant::now();
            let res = algo.factorize(&a, &sweep.cfg, &mut ledger);
            let runtime = start.elapsed().as_secs_f64();
            let mut rec = BenchRecord {
                algorithm: alg.clone(),
                backend: p.backend.name().into(),
                m: p.m,
                n: p.n,
                log10_cond: p.log10_cond,
                rep,
                runtime_s: Some(runtime),
                loo: None,
                rrr: None,
                rcr: None,
                iters: None,
                shifts: None,
                flops: Some(ledger.total()),
                status: Status::Ok,
            };
            match res {
                Ok(res) => {
                    let q = quality_report(&a, &res.q, &res.coefficients(), Norm::Spectral)?;
                    rec.loo = Some(q.loo);
                    rec.rrr = Some(q.rrr);
                    rec.rcr = Some(q.rcr);
                    rec.iters = Some(res.iterations);
                    rec.shifts = Some(res.shifts_applied.len());
                    if q.loo > bound {
                        rec.status = Status::Inaccurate;
                    }
                }
                Err(e) => rec.status = status_of(&e),
            }
            out.push(rec);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlopRow {
    pub algorithm: String,
    pub m: usize,
    pub n: usize,
    pub log10_cond: f64,
    pub iters: usize,
    pub category: String,
    pub measured: u64,
    pub predicted: u64,
    /// Table 6 closed form, where its assumptions hold (total rows only).
    pub closed_form: Option<u64>,
    /// Panel-to-iterated ratio, measured and predicted (panel total rows only).
    pub ratio_measured: Option<f64>,
    pub ratio_table: Option<f64>,
}

fn panel_count(alg: &str) -> Option<usize> {
    alg.strip_prefix("pncholqr:").and_then(|r| r.parse().ok())
}

pub fn flops(sweep: &Sweep, out: Box<dyn Write>) -> Result<()> {
    for alg in &sweep.algs {
        if alg != "rscholqr" && panel_count(alg).is_none() {
            bail!("no flop model for {alg:?}; use rscholqr or pncholqr:<r>");
        }
    }
    let mut w = csv_writer(sweep, out)?;
    for p in &sweep.points {
        let rows = match p.backend {
            Backend::Dense => flop_point::<DenseArray>(sweep, p)?,
            Backend::List => flop_point::<ListArray>(sweep, p)?,
        };
        for r in rows {
            w.serialize(r)?;
        }
        w.flush()?;
    }
    Ok(())
}

fn flop_point<V: VectorArray + 'static>(sweep: &Sweep, p: &Point) -> Result<Vec<FlopRow>> {
    let a = matgen::generate::<V>(&sweep.spec(p))?.a;
    let registry = Registry::<V>::builtin();
    let run = |alg: &str| -> Result<(QrResult<V>, FlopLedger)> {
        let mut ledger = FlopLedger::new();
        let res = registry
            .get(alg)?
            .factorize(&a, &sweep.cfg, &mut ledger)
            .with_context(|| format!("{alg} at m={} n={} log10_cond={}", p.m, p.n, p.log10_cond))?;
        Ok((res, ledger))
    };
    let (rs, rs_ledger) = run("rscholqr")?;
    let mut rows = Vec::new();
    for alg in &sweep.algs {
        let (res, measured, predicted, closed, ratio) = match panel_count(alg) {
            None => {
                let predicted = rscholqr_ledger(p.m, p.n, &rs.profiles[0]);
                (rs.clone(), rs_ledger, predicted, None, None)
            }
            Some(r) => {
                let (res, ledger) = run(alg)?;
                let widths = panel_widths(p.n, r)?;
                let predicted = panel_ledger(p.m, &widths, &res.profiles);
                let closed = uniform_profile(&res).and_then(|(x, y)| {
                    (x == 0 || y >= 1)
                        .then(|| predict_panel(p.m, p.n, r, x, y).ok())
                        .flatten()
                });
                let ratio = (
                    ledger.total() as f64 / rs_ledger.total() as f64,
                    ratio_table(p.n, r, rs.iterations),
                );
                (res, ledger, predicted, closed, Some(ratio))
            }
        };
        for c in Category::ALL {
            rows.push(FlopRow {
                algorithm: alg.clone(),
                m: p.m,
                n: p.n,
                log10_cond: p.log10_cond,
                iters: res.iterations,
                category: c.name().into(),
                measured: measured.get(c),
                predicted: predicted.get(c),
                closed_form: None,
                ratio_measured: None,
                ratio_table: None,
            });
        }
        rows.push(FlopRow {
            algorithm: alg.clone(),
            m: p.m,
            n: p.n,
            log10_cond: p.log10_cond,
            iters: res.iterations,
            category: "total".into(),
            measured: measured.total(),
            predicted: predicted.total(),
            closed_form: closed,
            ratio_measured: ratio.map(|r| r.0),
            ratio_table: ratio.map(|r| r.1),
        });
    }
    Ok(rows)
}

/// `(x, y)` if every panel iterated `x` times with `y` shift attempts each.
fn uniform_profile<V>(res: &QrResult<V>) -> Option<(usize, usize)> {
    let first = res.profiles.first()?;
    let x = first.outer();
    let y = first.shift_attempts.first().copied().unwrap_or(0);
    res.profiles
        .iter()
        .all(|p| p.outer() == x && p.shift_attempts.iter().all(|&v| v == y))
        .then_some((x, y))
}

pub fn gnuplot_script(sweep: &Sweep, csv: &Path) -> String {
    let x = match sweep.axis {
        Axis::Cond => "column(5)".to_string(),
        Axis::M => "column(3)".to_string(),
        Axis::N => "column(4)".to_string(),
        Axis::Backend => "(strcol(2) eq \"dense\" ? 0 : 1)".to_string(),
    };
    let mut s = format!(
        "set datafile separator ','\nset datafile commentschars '#'\nset logscale y\nset xlabel '{}'\nset ylabel 'runtime [s]'\n",
        sweep.axis.label()
    );
    if sweep.axis == Axis::M {
        s.push_str("set logscale x\n");
    }
    if sweep.axis == Axis::Backend {
        s.push_str("set xtics ('dense' 0, 'list' 1)\nset xrange [-0.5:1.5]\n");
    }
    let plots: Vec<String> = sweep
        .algs
        .iter()
        .map(|alg| {
            format!(
                "'{}' using (strcol(1) eq \"{alg}\" && strcol(14) eq \"ok\" ? {x} : NaN):7 with points title '{alg}'",
                csv.display()
            )
        })
        .collect();
    s.push_str(&format!("plot {}\n", plots.join(", \\\n     ")));
    s
}
