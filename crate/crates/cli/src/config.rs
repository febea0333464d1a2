//! Solver settings: application defaults, then the `--config` file, then
//! individual flags.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde_json::Value;

use pdd_core::{Mode, PddConfig};

use crate::args::{ConfigArgs, ModeArg};

/// Overlays the keys of a JSON object onto `base`. Unknown keys are an
/// error so that typos do not silently fall back to defaults.
pub fn merge_json(base: &PddConfig, overlay: &Value) -> Result<PddConfig> {
    let Value::Object(over) = overlay else { bail!("solver config must be a JSON object") };
    let mut merged = serde_json::to_value(base)?;
    let fields = merged.as_object_mut().expect("PddConfig serializes to an object");
    for (key, value) in over {
        match fields.get_mut(key) {
            Some(slot) => *slot = value.clone(),
            None => bail!("unknown solver setting {key:?}"),
        }
    }
    Ok(serde_json::from_value(merged)?)
}

pub fn build(base: PddConfig, args: &ConfigArgs, seed: u64) -> Result<PddConfig> {
    let mut cfg = match &args.config {
        Some(path) => merge_json(&base, &read_json(path)?)?,
        None => base,
    };
    if let Some(v) = args.rho0 {
        cfg.rho0 = v;
    }
    if let Some(v) = args.c {
        cfg.c = v;
    }
    if let Some(v) = args.tau {
        cfg.tau = v;
    }
    if let Some(v) = args.eps0 {
        cfg.eps0 = v;
    }
    if let Some(v) = args.max_outer {
        cfg.max_outer = v;
    }
    if let Some(v) = args.max_inner {
        cfg.max_inner = v;
    }
    if let Some(v) = args.outer_tol {
        cfg.outer_tol = v;
    }
    if let Some(m) = args.mode {
        cfg.mode = match m {
            ModeArg::Pdd => Mode::Pdd,
            ModeArg::Ipdd => Mode::Ipdd,
        };
    }
    cfg.seed = seed;
    cfg.validate()?;
    Ok(cfg)
}

fn read_json(path: &Path) -> Result<Value> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}
