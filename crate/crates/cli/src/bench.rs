//! `pdd bench`: one solve per seed, run on a thread pool, summarised as a
//! CSV with one row per seed followed by aggregate rows.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::Instant;

use anyhow::{anyhow, Context, Result};
use rayon::prelude::*;

use crate::app::{self, extra_name, RunOptions, RunOutcome};
use crate::args::{App, BenchArgs};
use crate::config;

/// Aggregate statistics, in output order.
pub const AGGREGATES: [&str; 6] = ["mean", "median", "p10", "p90", "min", "max"];

#[derive(Debug, Clone)]
pub struct SeedRow {
    pub seed: u64,
    pub outcome: std::result::Result<SeedMetrics, String>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeedMetrics {
    pub converged: bool,
    pub objective: f64,
    pub feasibility_gap: f64,
    pub iterations: usize,
    pub wall_ms: f64,
    pub extra: Option<f64>,
}

impl SeedMetrics {
    fn from_outcome(o: &RunOutcome, wall_ms: f64) -> Self {
        Self {
            converged: o.converged,
            objective: o.objective,
            feasibility_gap: o.feasibility_gap,
            iterations: o.iterations,
            wall_ms,
            extra: o.extra,
        }
    }

    /// Numeric columns in output order; `converged` counts as 0 or 1.
    fn columns(&self) -> [Option<f64>; 6] {
        [
            Some(f64::from(u8::from(self.converged))),
            Some(self.objective),
            Some(self.feasibility_gap),
            Some(self.iterations as f64),
            Some(self.wall_ms),
            self.extra,
        ]
    }
}

fn header(app: App) -> [&'static str; 9] {
    ["seed", "status", "converged", "objective", "feasibility_gap", "iterations", "wall_ms", extra_name(app), "error"]
}

fn solve_seed(args: &BenchArgs, seed: u64) -> Result<SeedMetrics> {
    let start = Instant::now();
    let inst = app::resolve(args.app, args.instance.as_deref(), &args.gen, args.truth.as_deref(), seed)?;
    let cfg = config::build(inst.default_config(), &args.config, seed)?;
    let opts = RunOptions { restarts: args.config.restarts, prescale: args.config.prescale };
    let out = app::run(&inst, &cfg, opts, |_, _| {})?;
    Ok(SeedMetrics::from_outcome(&out, start.elapsed().as_secs_f64() * 1e3))
}

/// Runs every seed; a failing or panicking seed becomes an error row.
pub fn run_seeds(args: &BenchArgs) -> Result<Vec<SeedRow>> {
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(j) = args.jobs {
        pool = pool.num_threads(j.max(1));
    }
    let pool = pool.build()?;
    Ok(pool.install(|| {
        args.seeds
            .0
            .par_iter()
            .map(|&seed| {
                let outcome = match catch_unwind(AssertUnwindSafe(|| solve_seed(args, seed))) {
                    Ok(Ok(m)) => Ok(m),
                    Ok(Err(e)) => Err(format!("{e:#}")),
                    Err(p) => Err(panic_message(p.as_ref())),
                };
                if let Err(e) = &outcome {
                    log::warn!("seed {seed} failed: {e}");
                }
                SeedRow { seed, outcome }
            })
            .collect()
    }))
}

fn panic_message(p: &(dyn std::any::Any + Send)) -> String {
    let msg = p.downcast_ref::<&str>().map(|s| s.to_string()).or_else(|| p.downcast_ref::<String>().cloned());
    format!("panic: {}", msg.unwrap_or_else(|| "unknown".into()))
}

/// Percentile by linear interpolation between closest ranks; `q ∈ [0, 1]`.
pub fn percentile(sorted: &[f64], q: f64) -> f64 {
    match sorted.len() {
        0 => f64::NAN,
        1 => sorted[0],
        n => {
            let pos = q * (n - 1) as f64;
            let lo = pos.floor() as usize;
            let hi = (lo + 1).min(n - 1);
            sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
        }
    }
}

fn aggregate(name: &str, values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    match name {
        "mean" if !v.is_empty() => v.iter().sum::<f64>() / v.len() as f64,
        "median" => percentile(&v, 0.5),
        "p10" => percentile(&v, 0.1),
        "p90" => percentile(&v, 0.9),
        "min" | "max" if v.is_empty() => f64::NAN,
        "min" => v[0],
        "max" => v[v.len() - 1],
        _ => f64::NAN,
    }
}

fn fmt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:e}")).unwrap_or_default()
}

/// Writes the per-seed rows followed by one aggregate row per statistic,
/// computed over the successful seeds.
pub fn write_summary(app: App, rows: &[SeedRow], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    w.write_record(header(app))?;
    for row in rows {
        match &row.outcome {
            Ok(m) => {
                let c = m.columns();
                w.write_record([
                    row.seed.to_string(),
                    "ok".into(),
                    u8::from(m.converged).to_string(),
                    fmt(c[1]),
                    fmt(c[2]),
                    m.iterations.to_string(),
                    format!("{:.3}", m.wall_ms),
                    fmt(c[5]),
                    String::new(),
                ])?;
            }
            Err(e) => {
                let mut rec = vec![row.seed.to_string(), "error".into()];
                rec.extend(std::iter::repeat_n(String::new(), 6));
                rec.push(e.clone());
                w.write_record(rec)?;
            }
        }
    }
    let ok: Vec<[Option<f64>; 6]> = rows.iter().filter_map(|r| r.outcome.as_ref().ok()).map(SeedMetrics::columns).collect();
    for name in AGGREGATES {
        let mut rec = vec![name.to_string(), "aggregate".into()];
        for col in 0..6 {
            let values: Vec<f64> = ok.iter().filter_map(|c| c[col]).collect();
            rec.push(if values.is_empty() { String::new() } else { fmt(Some(aggregate(name, &values))) });
        }
        rec.push(String::new());
        w.write_record(rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn run(args: &BenchArgs) -> Result<Vec<SeedRow>> {
    let rows = run_seeds(args)?;
    write_summary(args.app, &rows, &args.out)?;
    let failed = rows.iter().filter(|r| r.outcome.is_err()).count();
    if failed == rows.len() {
        return Err(anyhow!("all {failed} seeds failed"));
    }
    Ok(rows)
}
