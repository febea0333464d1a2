use rand::Rng;

use super::config::{InnerRule, SweepOrder};
use super::problem::{BlockGeometry, BlockProblem};
use crate::error::{Error, Result};
use crate::numerics::RealVector;

/// Relative slack allowed before an AL increase counts as a descent violation.
pub const DESCENT_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy)]
pub struct InnerStop {
    pub rule: InnerRule,
    pub tol: f64,
    pub max_iters: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InnerReport {
    pub iterations: usize,
    /// The configured rule fired before the iteration cap.
    pub stopped_by_rule: bool,
    /// Sweeps whose AL rose by more than [`DESCENT_SLACK`] (relative).
    pub descent_violations: usize,
    pub al_value: f64,
}

/// Block visit order for one sweep: `(lead, 0, 1, …, lead−1, lead+1, …)`.
pub fn sweep_order(n_blocks: usize, lead: usize) -> Vec<usize> {
    std::iter::once(lead).chain((0..n_blocks).filter(|&i| i != lead)).collect()
}

/// Randomized block successive upper-bound minimisation of the AL at fixed
/// `(λ, ρ)`. Each sweep draws the leading block uniformly (or uses block 0
/// for [`SweepOrder::Cyclic`]) and updates every block once on the running
/// iterate.
#[allow(clippy::too_many_arguments)]
pub fn rbsum_run<P, R>(
    problem: &P,
    z: &mut P::Iterate,
    dual: &RealVector,
    rho: f64,
    stop: &InnerStop,
    order: SweepOrder,
    rng: &mut R,
) -> Result<InnerReport>
where
    P: BlockProblem + ?Sized,
    R: Rng + ?Sized,
{
    let n = problem.num_blocks();
    if n == 0 {
        return Err(Error::invalid("block problem has no blocks"));
    }
    let mut prev = problem.augmented_lagrangian(z, dual, rho);
    if !prev.is_finite() {
        return Err(Error::numerical("augmented Lagrangian at inner start", prev));
    }
    let mut report = InnerReport {
        iterations: 0,
        stopped_by_rule: false,
        descent_violations: 0,
        al_value: prev,
    };
    let wrap = |inner: usize| move |e: Error| Error::Inner { outer: 0, inner, source: Box::new(e) };

    for it in 1..=stop.max_iters {
        problem.begin_sweep(z, dual, rho).map_err(wrap(it))?;
        let lead = match order {
            SweepOrder::Randomized => rng.random_range(0..n),
            SweepOrder::Cyclic => 0,
        };
        for i in sweep_order(n, lead) {
            problem.update_block(i, z, dual, rho).map_err(wrap(it))?;
        }
        let cur = problem.augmented_lagrangian(z, dual, rho);
        if !cur.is_finite() {
            return Err(wrap(it)(Error::numerical("augmented Lagrangian", cur)));
        }
        if cur > prev + DESCENT_SLACK * (1.0 + prev.abs()) {
            report.descent_violations += 1;
        }
        report.iterations = it;
        report.al_value = cur;

        let done = match stop.rule {
            InnerRule::ObjectiveProgress => (cur - prev).abs() / (1.0 + prev.abs()) <= stop.tol,
            InnerRule::Residual => {
                let (e, d) = stationarity_residuals(problem, z, dual, rho).map_err(wrap(it))?;
                inf_norm(&e).max(inf_norm(&d)) <= stop.tol
            }
            InnerRule::IterationCap => false,
        };
        prev = cur;
        if done {
            report.stopped_by_rule = true;
            break;
        }
    }
    if stop.rule == InnerRule::IterationCap {
        report.stopped_by_rule = true;
    }
    Ok(report)
}

fn inf_norm(v: &RealVector) -> f64 {
    if v.is_empty() {
        0.0
    } else {
        v.amax()
    }
}

/// First-order residuals of the AL subproblem at `z`.
///
/// `e` stacks `P_X(x − ∇L) − x` over convex-set blocks and `−∇L` over free
/// blocks; `Δ` stacks `y − prox(y − ∇L)` over nonsmooth blocks.
pub fn stationarity_residuals<P>(
    problem: &P,
    z: &P::Iterate,
    dual: &RealVector,
    rho: f64,
) -> Result<(RealVector, RealVector)>
where
    P: BlockProblem + ?Sized,
{
    let mut e = Vec::new();
    let mut delta = Vec::new();
    for block in 0..problem.num_blocks() {
        let g = problem.block_gradient(block, z, dual, rho)?;
        match problem.block_geometry(block) {
            BlockGeometry::Free => e.extend(g.iter().map(|x| -x)),
            BlockGeometry::ConvexSet => {
                let x = problem.block_point(block, z)?;
                let p = problem.project_block(block, &x - &g)?;
                e.extend((p - x).iter());
            }
            BlockGeometry::Nonsmooth => {
                let y = problem.block_point(block, z)?;
                let p = problem.prox_block(block, &y, &y - &g)?;
                delta.extend((y - p).iter());
            }
        }
    }
    Ok((RealVector::from_vec(e), RealVector::from_vec(delta)))
}
