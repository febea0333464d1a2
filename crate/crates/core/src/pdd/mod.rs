//! Penalty dual decomposition outer loop and the randomized BSUM inner loop.
//!
//! [`pdd_run`] alternates an approximate minimisation of the augmented
//! Lagrangian (delegated to [`rbsum_run`]) with either a multiplier update
//! `λ ← λ + h(z)/ρ` (when `‖h(z)‖∞ ≤ η`) or a penalty decrease `ρ ← c·ρ`.
//! In [`Mode::Ipdd`] both updates happen on every outer step.

mod config;
mod problem;
mod rbsum;
pub mod toy;
mod trace;

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use config::{InnerRule, Mode, PddConfig, SweepOrder};
pub use problem::{BlockGeometry, BlockProblem};
pub use rbsum::{rbsum_run, stationarity_residuals, sweep_order, InnerReport, InnerStop, DESCENT_SLACK};
pub use trace::{Branch, OuterRecord, PddTrace, CSV_HEADER};

use crate::error::{Error, Result};
use crate::numerics::RealVector;

/// Iterate, multipliers and schedule values between outer steps.
#[derive(Debug, Clone)]
pub struct PddState<Z> {
    pub z: Z,
    pub dual: RealVector,
    pub rho: f64,
    pub eta: f64,
    pub eps: f64,
    /// Number of completed outer iterations.
    pub k: usize,
}

#[derive(Debug, Clone)]
pub struct PddOutcome<Z> {
    pub state: PddState<Z>,
    pub trace: PddTrace,
}

impl<Z> PddOutcome<Z> {
    pub fn converged(&self) -> bool {
        self.trace.converged
    }
}

pub fn pdd_run<P: BlockProblem + ?Sized>(
    problem: &P,
    z0: P::Iterate,
    dual0: RealVector,
    config: &PddConfig,
) -> Result<PddOutcome<P::Iterate>> {
    pdd_run_with_observer(problem, z0, dual0, config, |_| {})
}

/// [`pdd_run`] with a callback invoked after every completed outer iteration
/// (used for streaming traces to disk).
pub fn pdd_run_with_observer<P, F>(
    problem: &P,
    z0: P::Iterate,
    dual0: RealVector,
    config: &PddConfig,
    mut observer: F,
) -> Result<PddOutcome<P::Iterate>>
where
    P: BlockProblem + ?Sized,
    F: FnMut(&OuterRecord),
{
    config.validate()?;
    let h0 = problem.constraint(&z0);
    if h0.len() != dual0.len() {
        return Err(Error::invalid(format!(
            "dual has length {} but h(z) has length {}",
            dual0.len(),
            h0.len()
        )));
    }
    let h0_inf = if h0.is_empty() { 0.0 } else { h0.amax() };

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let rho_min = config.rho_min();
    let mut state = PddState {
        z: z0,
        dual: dual0,
        rho: config.rho0,
        eta: config.eta0.unwrap_or(h0_inf.max(1.0)),
        eps: config.eps0,
        k: 0,
    };
    let mut trace = PddTrace::default();

    for k in 1..=config.max_outer {
        let started = Instant::now();
        let stop = InnerStop {
            rule: config.inner_rule,
            tol: state.eps,
            max_iters: config.max_inner,
        };
        let report = rbsum_run(problem, &mut state.z, &state.dual, state.rho, &stop, config.sweep, &mut rng)
            .map_err(|e| match e {
                Error::Inner { inner, source, .. } => Error::Inner { outer: k, inner, source },
                other => Error::Inner { outer: k, inner: 0, source: Box::new(other) },
            })?;

        let h = problem.constraint(&state.z);
        let h_inf = if h.is_empty() { 0.0 } else { h.amax() };
        let al_value = problem.augmented_lagrangian(&state.z, &state.dual, state.rho);
        if !al_value.is_finite() || !h_inf.is_finite() {
            return Err(Error::Inner {
                outer: k,
                inner: report.iterations,
                source: Box::new(Error::numerical("augmented Lagrangian", al_value)),
            });
        }
        let objective = problem.objective(&state.z);
        let (rho_used, eta_used) = (state.rho, state.eta);

        let mut floored = false;
        let mut shrink = |rho: f64| {
            let next = config.c * rho;
            if next < rho_min {
                floored = true;
                rho_min.max(rho.min(rho_min))
            } else {
                next
            }
        };
        let branch = match config.mode {
            Mode::Pdd if h_inf <= state.eta => {
                state.dual.axpy(1.0 / state.rho, &h, 1.0);
                Branch::DualUpdate
            }
            Mode::Pdd => {
                state.rho = shrink(state.rho);
                Branch::PenaltyDecrease
            }
            Mode::Ipdd => {
                state.dual.axpy(1.0 / state.rho, &h, 1.0);
                state.rho = shrink(state.rho);
                Branch::Both
            }
        };
        if floored && !trace.records.last().is_some_and(|r: &OuterRecord| r.rho_floored) {
            log::warn!("penalty reached its floor {rho_min:.3e} at outer iteration {k}");
        }

        state.eta = config.tau * state.eta.min(h_inf);
        state.eps = (state.eps * config.eps_shrink()).max(config.eps_min.min(config.eps0));
        state.k = k;

        let record = OuterRecord {
            k,
            al_value,
            objective,
            h_inf,
            rho: rho_used,
            eta: eta_used,
            branch,
            inner_iters: report.iterations,
            inner_converged: report.stopped_by_rule,
            descent_violations: report.descent_violations,
            rho_floored: floored,
            time_ms: started.elapsed().as_secs_f64() * 1e3,
        };
        log::debug!(
            "outer {k}: h_inf={h_inf:.3e} rho={rho_used:.3e} eta={eta_used:.3e} inner={} {}",
            report.iterations,
            branch.as_str()
        );
        observer(&record);
        trace.records.push(record);

        if h_inf <= config.outer_tol && report.stopped_by_rule {
            trace.converged = true;
            break;
        }
    }
    Ok(PddOutcome { state, trace })
}
