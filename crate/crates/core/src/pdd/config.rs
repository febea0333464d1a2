use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Switch between a dual update and a penalty decrease on each outer step.
    Pdd,
    /// Update the dual and decrease the penalty on every outer step.
    Ipdd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InnerRule {
    /// `|L_k − L_{k−1}| / (1 + |L_{k−1}|) ≤ ε_k`.
    ObjectiveProgress,
    /// `max(‖e‖∞, ‖Δ‖∞) ≤ ε_k`; needs block gradients.
    Residual,
    /// Always run `max_inner` sweeps.
    IterationCap,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepOrder {
    /// Random leading block, the rest in natural order.
    Randomized,
    /// Natural block order every sweep.
    Cyclic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PddConfig {
    pub mode: Mode,
    /// Initial penalty ρ₀ (the AL penalty weight is `1/(2ρ)`).
    pub rho0: f64,
    /// Penalty shrink factor `c ∈ (0,1)`.
    pub c: f64,
    /// η shrink factor `τ ∈ (0,1)`.
    pub tau: f64,
    /// Initial violation threshold; `None` means `max(1, ‖h(z⁰)‖∞)`.
    pub eta0: Option<f64>,
    /// Initial inner tolerance.
    pub eps0: f64,
    /// Inner tolerance shrink factor; `None` means `c`.
    pub eps_shrink: Option<f64>,
    /// Floor on the inner tolerance (capped at `eps0`). Without it `ε_k` eventually drops
    /// below what floating point can resolve and the inner stop can no
    /// longer be met.
    pub eps_min: f64,
    pub max_outer: usize,
    pub max_inner: usize,
    /// Outer stop tolerance on `‖h‖∞`.
    pub outer_tol: f64,
    pub inner_rule: InnerRule,
    pub sweep: SweepOrder,
    pub seed: u64,
    /// Penalty floor as a fraction of ρ₀; `0` disables the floor.
    pub rho_min_ratio: f64,
}

impl Default for PddConfig {
    fn default() -> Self {
        Self {
            mode: Mode::Pdd,
            rho0: 1.0,
            c: 0.6,
            tau: 0.9,
            eta0: None,
            eps0: 1e-3,
            eps_shrink: None,
            eps_min: 1e-10,
            max_outer: 100,
            max_inner: 100,
            outer_tol: 1e-4,
            inner_rule: InnerRule::ObjectiveProgress,
            sweep: SweepOrder::Randomized,
            seed: 0,
            rho_min_ratio: 1e-8,
        }
    }
}

impl PddConfig {
    pub fn eps_shrink(&self) -> f64 {
        self.eps_shrink.unwrap_or(self.c)
    }

    pub fn rho_min(&self) -> f64 {
        self.rho0 * self.rho_min_ratio
    }

    pub fn validate(&self) -> Result<()> {
        let open_unit = |x: f64| x > 0.0 && x < 1.0;
        let checks: [(bool, &str); 10] = [
            (self.rho0 > 0.0 && self.rho0.is_finite(), "rho0 must be positive"),
            (open_unit(self.c), "c must lie in (0, 1)"),
            (open_unit(self.tau), "tau must lie in (0, 1)"),
            (self.eta0.is_none_or(|e| e > 0.0), "eta0 must be positive"),
            (self.eps0 > 0.0, "eps0 must be positive"),
            (self.eps_min >= 0.0, "eps_min must be non-negative"),
            (self.eps_shrink.is_none_or(|s| s > 0.0 && s <= 1.0), "eps shrink must lie in (0, 1]"),
            (self.max_outer >= 1 && self.max_inner >= 1, "iteration limits must be at least 1"),
            (self.outer_tol >= 0.0, "outer tolerance must be non-negative"),
            ((0.0..1.0).contains(&self.rho_min_ratio), "rho_min_ratio must lie in [0, 1)"),
        ];
        match checks.iter().find(|(ok, _)| !ok) {
            Some((_, msg)) => Err(Error::invalid(*msg)),
            None => Ok(()),
        }
    }
}
