use std::io::Write;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Branch {
    DualUpdate,
    PenaltyDecrease,
    /// IPDD: dual update and penalty decrease in the same step.
    Both,
}

impl Branch {
    pub fn as_str(self) -> &'static str {
        match self {
            Branch::DualUpdate => "dual-update",
            Branch::PenaltyDecrease => "penalty-decrease",
            Branch::Both => "both",
        }
    }
}

/// One completed outer iteration. `rho` and `eta` are the values in force
/// during the iteration, before the branch update.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OuterRecord {
    pub k: usize,
    pub al_value: f64,
    pub objective: f64,
    pub h_inf: f64,
    pub rho: f64,
    pub eta: f64,
    pub branch: Branch,
    pub inner_iters: usize,
    pub inner_converged: bool,
    pub descent_violations: usize,
    pub rho_floored: bool,
    pub time_ms: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PddTrace {
    pub records: Vec<OuterRecord>,
    pub converged: bool,
}

pub const CSV_HEADER: &str = "k,objective,al_value,h_inf,rho,eta,branch,inner_iters,time_ms";

impl OuterRecord {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{:e},{:e},{:e},{:e},{:e},{},{},{:.3}",
            self.k,
            self.objective,
            self.al_value,
            self.h_inf,
            self.rho,
            self.eta,
            self.branch.as_str(),
            self.inner_iters,
            self.time_ms
        )
    }
}

impl PddTrace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn last(&self) -> Option<&OuterRecord> {
        self.records.last()
    }

    pub fn final_h_inf(&self) -> f64 {
        self.last().map_or(f64::NAN, |r| r.h_inf)
    }

    pub fn total_descent_violations(&self) -> usize {
        self.records.iter().map(|r| r.descent_violations).sum()
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{CSV_HEADER}")?;
        for r in &self.records {
            writeln!(out, "{}", r.csv_row())?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(self)
    }
}
