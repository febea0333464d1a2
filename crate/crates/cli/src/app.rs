//! Instance loading and generation plus a uniform wrapper around the three
//! application solvers.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use pdd_core::io::{real_mat_from_json, real_mat_to_json};
use pdd_core::multicast::{self, MulticastInstance, MulticastInstanceFile};
use pdd_core::relay::{self, RelayInstance, RelayInstanceFile};
use pdd_core::volmin::{self, GroundTruth, VolMinInstance, DEFAULT_EPS};
use pdd_core::{OuterRecord, PddConfig, PddTrace};

use crate::args::{App, GeneratorArgs};

#[derive(Debug, Clone)]
pub enum Instance {
    Multicast(MulticastInstance),
    Relay(RelayInstance),
    Volmin(VolMinInstance, Option<GroundTruth>),
}

impl Instance {
    pub fn default_config(&self) -> PddConfig {
        match self {
            Instance::Multicast(i) => multicast::default_config(i),
            Instance::Relay(i) => relay::default_config(i),
            Instance::Volmin(i, _) => volmin::default_config(i),
        }
    }
}

/// On-disk form of a VolMin ground truth.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TruthFile {
    #[serde(rename = "X")]
    pub x: Vec<Vec<f64>>,
    #[serde(rename = "S")]
    pub s: Vec<Vec<f64>>,
    pub gamma: f64,
    /// `null` for noiseless data.
    pub snr_db: Option<f64>,
}

impl TruthFile {
    pub fn from_truth(t: &GroundTruth) -> Self {
        Self {
            x: real_mat_to_json(&t.x),
            s: real_mat_to_json(&t.s),
            gamma: t.gamma,
            snr_db: t.snr_db.is_finite().then_some(t.snr_db),
        }
    }

    pub fn into_truth(self) -> Result<GroundTruth> {
        Ok(GroundTruth {
            x: real_mat_from_json(&self.x)?,
            s: real_mat_from_json(&self.s)?,
            gamma: self.gamma,
            snr_db: self.snr_db.unwrap_or(f64::INFINITY),
        })
    }
}

/// Ground-truth path written next to a generated VolMin data file.
pub fn truth_path(data: &Path) -> PathBuf {
    let mut name = data.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".truth.json");
    data.with_file_name(name)
}

fn dims3(app: App, gen: &GeneratorArgs) -> Result<(usize, usize, usize)> {
    match gen.dims.as_deref() {
        Some(&[a, b, c]) => Ok((a, b, c)),
        Some(d) => bail!("{} needs three dimensions, got {}", app.name(), d.len()),
        None => bail!("either --instance or --dims is required"),
    }
}

pub fn generate(app: App, gen: &GeneratorArgs, seed: u64) -> Result<Instance> {
    let (a, b, c) = dims3(app, gen)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let power = 10f64.powf(gen.power_db / 10.0);
    Ok(match app {
        App::Multicast => Instance::Multicast(MulticastInstance::random(a, b, c, power, &mut rng)?),
        App::Relay => Instance::Relay(RelayInstance::random(a, b, c, gen.power_db, &mut rng)?),
        App::Volmin => {
            let (inst, truth) = volmin::gen_data(a, b, c, gen.gamma, gen.snr_db, seed)?;
            Instance::Volmin(inst, Some(truth))
        }
    })
}

/// Reads an instance file; VolMin needs the rank `k` from `--dims` or
/// the ground truth.
pub fn load(app: App, path: &Path, truth: Option<&Path>, dims: Option<&[usize]>) -> Result<Instance> {
    let ctx = || format!("reading {}", path.display());
    Ok(match app {
        App::Multicast => {
            let file: MulticastInstanceFile = serde_json::from_slice(&fs::read(path).with_context(ctx)?).with_context(ctx)?;
            Instance::Multicast(MulticastInstance::from_file(file)?)
        }
        App::Relay => {
            let file: RelayInstanceFile = serde_json::from_slice(&fs::read(path).with_context(ctx)?).with_context(ctx)?;
            Instance::Relay(RelayInstance::from_file(file)?)
        }
        App::Volmin => {
            let a = VolMinInstance::read_data(path).with_context(ctx)?;
            let truth = match truth {
                Some(p) => {
                    let file: TruthFile = serde_json::from_slice(&fs::read(p).with_context(|| format!("reading {}", p.display()))?)?;
                    Some(file.into_truth()?)
                }
                None => None,
            };
            let k = match (dims, &truth) {
                (Some(d), _) if d.len() == 1 => d[0],
                (Some(&[_, k, _]), _) => k,
                (_, Some(t)) => t.x.ncols(),
                _ => bail!("volmin needs the number of vertices: pass --dims K or --truth"),
            };
            Instance::Volmin(VolMinInstance::new(a, k, DEFAULT_EPS)?, truth)
        }
    })
}

/// The instance named by `--instance`, or a fresh one generated from
/// `--dims` and `seed`.
pub fn resolve(app: App, instance: Option<&Path>, gen: &GeneratorArgs, truth: Option<&Path>, seed: u64) -> Result<Instance> {
    match instance {
        Some(path) => {
            ensure!(app == App::Volmin || gen.dims.is_none(), "--dims cannot be combined with --instance for {}", app.name());
            load(app, path, truth, gen.dims.as_deref())
        }
        None => {
            ensure!(truth.is_none(), "--truth needs --instance");
            generate(app, gen, seed)
        }
    }
}

/// Writes `inst` in its application's file format; the same seed always
/// produces the same bytes.
pub fn write_instance(inst: &Instance, out: &Path) -> Result<()> {
    match inst {
        Instance::Multicast(i) => fs::write(out, serde_json::to_string_pretty(&i.to_file())? + "\n")?,
        Instance::Relay(i) => fs::write(out, serde_json::to_string_pretty(&i.to_file())? + "\n")?,
        Instance::Volmin(i, truth) => {
            if out.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
                VolMinInstance::write_csv(&i.a, out)?;
            } else {
                VolMinInstance::write_binary(&i.a, out)?;
            }
            if let Some(t) = truth {
                fs::write(truth_path(out), serde_json::to_string_pretty(&TruthFile::from_truth(t))? + "\n")?;
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy)]
pub struct RunOptions {
    pub restarts: usize,
    pub prescale: bool,
}

/// Application-independent view of a finished solve.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub converged: bool,
    /// Multicast min-rate (bits), relay sum-rate (nats) or VolMin `f_ε`.
    pub objective: f64,
    pub feasibility_gap: f64,
    pub iterations: usize,
    /// Multicast KKT residual, relay smallest repair scale or VolMin MSE (dB).
    pub extra: Option<f64>,
    pub result: serde_json::Value,
    pub trace: PddTrace,
}

/// Name of the [`RunOutcome::extra`] column.
pub fn extra_name(app: App) -> &'static str {
    match app {
        App::Multicast => "kkt_residual",
        App::Relay => "min_repair_scale",
        App::Volmin => "mse_db",
    }
}

/// Runs the application solver. The observer sees every outer record,
/// tagged with the VolMin restart index (always `0` otherwise).
pub fn run<F: FnMut(usize, &OuterRecord)>(inst: &Instance, cfg: &PddConfig, opts: RunOptions, mut observer: F) -> Result<RunOutcome> {
    cfg.validate()?;
    Ok(match inst {
        Instance::Multicast(i) => {
            let sol = multicast::solve_with_observer(i, cfg, |r| observer(0, r))?;
            RunOutcome {
                converged: sol.converged(),
                objective: sol.min_rate_bits,
                feasibility_gap: sol.feasibility_gap,
                iterations: sol.iterations(),
                extra: Some(sol.kkt_residual),
                result: serde_json::to_value(sol.to_result())?,
                trace: sol.trace,
            }
        }
        Instance::Relay(i) => {
            let sol = relay::solve_with_observer(i, cfg, |r| observer(0, r))?;
            RunOutcome {
                converged: sol.converged(),
                objective: sol.sum_rate_nats,
                feasibility_gap: sol.feasibility_gap,
                iterations: sol.iterations(),
                extra: Some(sol.repair_scale[0].min(sol.repair_scale[1])),
                result: serde_json::to_value(sol.to_result())?,
                trace: sol.trace,
            }
        }
        Instance::Volmin(i, truth) => {
            ensure!(opts.restarts >= 1, "--restarts must be at least 1");
            let scale = if opts.prescale { volmin::prescale_factor(i)? } else { 1.0 };
            let scaled;
            let work = if scale != 1.0 {
                log::info!("volmin: pre-scaling data by {scale:.4e}");
                scaled = VolMinInstance::new(&i.a * scale, i.k, i.eps)?;
                &scaled
            } else {
                i
            };
            let mut sol = volmin::solve_with_observer(work, cfg, opts.restarts, observer)?;
            if scale != 1.0 {
                sol.iterate.x /= scale;
                sol.iterate.y /= scale;
                sol.feasibility_gap /= scale;
                sol.f_eps = volmin::f_eps(&sol.iterate.x, i.eps)?;
            }
            let result = sol.to_result(truth.as_ref())?;
            RunOutcome {
                converged: sol.converged(),
                objective: sol.f_eps,
                feasibility_gap: sol.feasibility_gap,
                iterations: sol.iterations(),
                extra: result.mse_db,
                result: serde_json::to_value(result)?,
                trace: sol.trace,
            }
        }
    })
}
