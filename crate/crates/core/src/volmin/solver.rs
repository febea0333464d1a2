use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::instance::{GroundTruth, VolMinInstance};
use super::metrics::mse_db;
use super::updates::{
    default_beta, f_eps, f_eps_gradient, update_s, update_x, update_y, VolMinDuals, VolMinIterate,
};
use crate::error::{Error, Result};
use crate::io::real_mat_to_json;
use crate::numerics::{project_simplex_columns, RealMatrix, RealVector};
use crate::pdd::{pdd_run_with_observer, BlockGeometry, BlockProblem, OuterRecord, PddConfig, PddTrace, SweepOrder};

/// `min f_ε(XᵀX)` s.t. `A = YS`, `X = Y`, simplex columns of `S`.
///
/// Blocks: `0` is `Y`, `1` is `S`, `2` is `X`.
#[derive(Debug, Clone, Copy)]
pub struct VolMinProblem<'a> {
    pub inst: &'a VolMinInstance,
}

pub const Y_BLOCK: usize = 0;
pub const S_BLOCK: usize = 1;
pub const X_BLOCK: usize = 2;

impl VolMinProblem<'_> {
    fn duals(&self, dual: &RealVector) -> VolMinDuals {
        VolMinDuals::from_vector(dual, self.inst.n(), self.inst.k, self.inst.l())
    }

    /// `(P + (A − YS)/ρ, Q + (X − Y)/ρ)`.
    fn shifted_duals(&self, z: &VolMinIterate, dual: &RealVector, rho: f64) -> (RealMatrix, RealMatrix) {
        let d = self.duals(dual);
        (d.p + (&self.inst.a - &z.y * &z.s) / rho, d.q + (&z.x - &z.y) / rho)
    }
}

fn flat(m: RealMatrix) -> RealVector {
    RealVector::from_column_slice(m.as_slice())
}

impl BlockProblem for VolMinProblem<'_> {
    type Iterate = VolMinIterate;

    fn num_blocks(&self) -> usize {
        3
    }

    fn constraint(&self, z: &VolMinIterate) -> RealVector {
        let r1 = &self.inst.a - &z.y * &z.s;
        let r2 = &z.x - &z.y;
        RealVector::from_iterator(r1.len() + r2.len(), r1.iter().chain(r2.iter()).copied())
    }

    /// `f_ε(XᵀX)`; an SVD failure is reported as `+∞`.
    fn objective(&self, z: &VolMinIterate) -> f64 {
        f_eps(&z.x, self.inst.eps).unwrap_or(f64::INFINITY)
    }

    fn update_block(&self, block: usize, z: &mut VolMinIterate, dual: &RealVector, rho: f64) -> Result<()> {
        let d = self.duals(dual);
        match block {
            Y_BLOCK => z.y = update_y(&self.inst.a, z, &d, rho)?,
            S_BLOCK => z.s = update_s(&self.inst.a, z, &d, rho, default_beta(&z.y)?)?,
            X_BLOCK => z.x = update_x(z, &d, rho, self.inst.eps)?,
            _ => return Err(Error::invalid(format!("volmin has no block {block}"))),
        }
        Ok(())
    }

    fn block_geometry(&self, block: usize) -> BlockGeometry {
        if block == S_BLOCK {
            BlockGeometry::ConvexSet
        } else {
            BlockGeometry::Free
        }
    }

    fn block_point(&self, block: usize, z: &VolMinIterate) -> Result<RealVector> {
        match block {
            Y_BLOCK => Ok(flat(z.y.clone())),
            S_BLOCK => Ok(flat(z.s.clone())),
            X_BLOCK => Ok(flat(z.x.clone())),
            _ => Err(Error::invalid(format!("volmin has no block {block}"))),
        }
    }

    fn block_gradient(&self, block: usize, z: &VolMinIterate, dual: &RealVector, rho: f64) -> Result<RealVector> {
        let (mp, mq) = self.shifted_duals(z, dual, rho);
        match block {
            Y_BLOCK => Ok(flat(-(mp * z.s.transpose()) - mq)),
            S_BLOCK => Ok(flat(-(z.y.transpose() * mp))),
            X_BLOCK => Ok(flat(f_eps_gradient(&z.x, self.inst.eps)? + mq)),
            _ => Err(Error::invalid(format!("volmin has no block {block}"))),
        }
    }

    fn project_block(&self, block: usize, point: RealVector) -> Result<RealVector> {
        if block != S_BLOCK {
            return Ok(point);
        }
        let s = RealMatrix::from_column_slice(self.inst.k, self.inst.l(), point.as_slice());
        Ok(flat(project_simplex_columns(&s)?))
    }
}

/// Solver defaults: `ρ₀ = L/100`, at most 30 outer iterations of up to 300
/// cyclic sweeps.
pub fn default_config(inst: &VolMinInstance) -> PddConfig {
    PddConfig {
        rho0: inst.l() as f64 / 100.0,
        c: 0.5,
        eps0: 1e-3,
        outer_tol: 1e-5,
        max_inner: 300,
        max_outer: 30,
        sweep: SweepOrder::Cyclic,
        ..PddConfig::default()
    }
}

/// `X` from `K` distinct random data columns plus a small jitter, `S` the
/// simplex-projected least-squares coefficients, `Y = X`.
pub fn initial_iterate(inst: &VolMinInstance, seed: u64) -> Result<VolMinIterate> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x766f_6c6d);
    let (n, k, l) = (inst.n(), inst.k, inst.l());
    let scale = 1e-6 * inst.a.amax().max(1.0);
    let mut x = RealMatrix::zeros(n, k);
    if l >= k {
        for (j, c) in sample(&mut rng, l, k).into_iter().enumerate() {
            x.set_column(j, &inst.a.column(c));
        }
    }
    x.iter_mut().for_each(|v| *v += scale * Distribution::<f64>::sample(&StandardNormal, &mut rng));
    let coeffs = x
        .clone()
        .svd(true, true)
        .solve(&inst.a, 1e-12)
        .map_err(|e| Error::numerical(format!("initial least squares: {e}"), f64::NAN))?;
    let s = project_simplex_columns(&coeffs)?;
    Ok(VolMinIterate { y: x.clone(), x, s })
}

/// Factor `s ≥ 1` such that `s·A` has `σ_K(sA) ≥ 2√ε·√(L/K)`, the typical
/// spectral norm of a simplex coefficient matrix. Keeping the vertices'
/// singular values above `√ε` makes `f_ε` coincide with the log-determinant.
pub fn prescale_factor(inst: &VolMinInstance) -> Result<f64> {
    let sigma = crate::numerics::thin_svd(&if inst.n() >= inst.l() { inst.a.clone() } else { inst.a.transpose() })?.sigma;
    let sk = sigma[inst.k - 1];
    let target = 2.0 * inst.eps.sqrt() * (inst.l() as f64 / inst.k as f64).sqrt();
    Ok(if sk > 0.0 { (target / sk).max(1.0) } else { 1.0 })
}

/// Outcome of one restart.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestartSummary {
    pub seed: u64,
    pub f_eps: f64,
    pub feasibility_gap: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone)]
pub struct VolMinSolution {
    pub iterate: VolMinIterate,
    pub duals: VolMinDuals,
    /// Trace of the selected restart.
    pub trace: PddTrace,
    pub f_eps: f64,
    pub feasibility_gap: f64,
    /// `‖A − XS‖_F / ‖A‖_F`.
    pub relative_reconstruction: f64,
    pub restarts: Vec<RestartSummary>,
    pub selected: usize,
}

impl VolMinSolution {
    pub fn x(&self) -> &RealMatrix {
        &self.iterate.x
    }

    pub fn s(&self) -> &RealMatrix {
        &self.iterate.s
    }

    pub fn converged(&self) -> bool {
        self.trace.converged
    }

    pub fn iterations(&self) -> usize {
        self.trace.len()
    }

    pub fn mse_db(&self, truth: &GroundTruth) -> Result<f64> {
        mse_db(&self.iterate.x, &truth.x)
    }

    pub fn to_result(&self, truth: Option<&GroundTruth>) -> Result<VolMinResult> {
        Ok(VolMinResult {
            x: real_mat_to_json(&self.iterate.x),
            s: real_mat_to_json(&self.iterate.s),
            mse_db: truth.map(|t| self.mse_db(t)).transpose()?,
            feasibility_gap: self.feasibility_gap,
            f_eps: self.f_eps,
            restarts_used: self.restarts.len(),
            iterations: self.iterations(),
            converged: self.converged(),
        })
    }
}

/// Results file contents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VolMinResult {
    #[serde(rename = "X")]
    pub x: Vec<Vec<f64>>,
    #[serde(rename = "S")]
    pub s: Vec<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub mse_db: Option<f64>,
    pub feasibility_gap: f64,
    pub f_eps: f64,
    pub restarts_used: usize,
    pub iterations: usize,
    pub converged: bool,
}

/// Restart `r` of a run seeded with `seed`.
pub fn restart_seed(seed: u64, r: usize) -> u64 {
    seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(r as u64)
}

pub fn solve(inst: &VolMinInstance, config: &PddConfig, restarts: usize) -> Result<VolMinSolution> {
    solve_with_observer(inst, config, restarts, |_, _| {})
}

/// Runs `restarts` independent starts and keeps the smallest `f_ε` among
/// the runs whose final `‖h‖∞` is within ten times the outer tolerance,
/// or the least infeasible run if none is. The observer receives the
/// restart index with every outer record.
pub fn solve_with_observer<F: FnMut(usize, &OuterRecord)>(
    inst: &VolMinInstance,
    config: &PddConfig,
    restarts: usize,
    mut observer: F,
) -> Result<VolMinSolution> {
    if restarts == 0 {
        return Err(Error::invalid("need at least one restart"));
    }
    let problem = VolMinProblem { inst };
    let (n, k, l) = (inst.n(), inst.k, inst.l());
    let mut runs = Vec::with_capacity(restarts);
    for r in 0..restarts {
        let seed = restart_seed(config.seed, r);
        let z0 = initial_iterate(inst, seed)?;
        let dual0 = VolMinDuals::zeros(n, k, l).to_vector();
        let out = pdd_run_with_observer(&problem, z0, dual0, config, |rec| observer(r, rec))?;
        let gap = problem.constraint(&out.state.z).amax();
        let summary = RestartSummary {
            seed,
            f_eps: problem.objective(&out.state.z),
            feasibility_gap: gap,
            iterations: out.trace.len(),
            converged: out.trace.converged,
        };
        log::debug!("volmin restart {r}: f_eps {:.6e}, gap {:.3e}", summary.f_eps, gap);
        runs.push((summary, out));
    }
    let summaries: Vec<RestartSummary> = runs.iter().map(|(s, _)| s.clone()).collect();
    let selected = select_restart(&summaries, config.outer_tol);
    let (summary, out) = runs.swap_remove(selected);
    let z = out.state.z;
    let relative_reconstruction = (&inst.a - &z.x * &z.s).norm() / inst.a.norm().max(f64::MIN_POSITIVE);
    Ok(VolMinSolution {
        duals: VolMinDuals::from_vector(&out.state.dual, n, k, l),
        iterate: z,
        trace: out.trace,
        f_eps: summary.f_eps,
        feasibility_gap: summary.feasibility_gap,
        relative_reconstruction,
        restarts: summaries,
        selected,
    })
}

fn select_restart(runs: &[RestartSummary], outer_tol: f64) -> usize {
    let feasible = |s: &RestartSummary| s.feasibility_gap <= 10.0 * outer_tol;
    let pick = if runs.iter().any(feasible) {
        runs.iter().enumerate().filter(|(_, s)| feasible(s)).min_by(|a, b| a.1.f_eps.total_cmp(&b.1.f_eps))
    } else {
        runs.iter().enumerate().min_by(|a, b| a.1.feasibility_gap.total_cmp(&b.1.feasibility_gap))
    };
    pick.map_or(0, |(i, _)| i)
}
