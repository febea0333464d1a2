use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::blocks::{
    al_gradient, constraint_h, project_pair, push_embedded, take_embedded, update_bars, update_f, update_v, update_x,
    wmmse_weights, RelayDuals, RelayIterate,
};
use super::instance::RelayInstance;
use crate::error::{Error, Result};
use crate::io::{complex_mat_to_json, ComplexJson};
use crate::numerics::{complex_gaussian_matrix, project_ball, random_orthonormal_columns, ComplexMatrix, RealVector, C64};
use crate::pdd::{pdd_run_with_observer, BlockGeometry, BlockProblem, OuterRecord, PddConfig, PddTrace, SweepOrder};

/// Sum-rate maximisation for the relay channel with the split
/// `X = FHV`, `F = F̄`, `X = X̄`, `V = V̄`, where the power budgets act on the
/// barred copies only.
///
/// Blocks: `0` is `F`, `1` is `(V̄, X̄, F̄)`, `2` is `X`, `3` is `V`. Each sweep
/// starts by refreshing the WMMSE receivers and weights at `(X, F)`.
#[derive(Debug, Clone, Copy)]
pub struct RelayProblem<'a> {
    pub inst: &'a RelayInstance,
}

pub const F_BLOCK: usize = 0;
pub const BAR_BLOCK: usize = 1;
pub const X_BLOCK: usize = 2;
pub const V_BLOCK: usize = 3;

fn embed(m: &ComplexMatrix) -> Vec<f64> {
    let mut out = Vec::with_capacity(2 * m.len());
    push_embedded(&mut out, m);
    out
}

impl BlockProblem for RelayProblem<'_> {
    type Iterate = RelayIterate;

    fn num_blocks(&self) -> usize {
        4
    }

    fn constraint(&self, z: &RelayIterate) -> RealVector {
        constraint_h(self.inst, z)
    }

    fn objective(&self, z: &RelayIterate) -> f64 {
        -self.inst.weighted_rate(&self.inst.sinr_x(&z.x, &z.f))
    }

    fn begin_sweep(&self, z: &mut RelayIterate, _dual: &RealVector, _rho: f64) -> Result<()> {
        let (u, w) = wmmse_weights(self.inst, &z.x, &z.f);
        z.u = u;
        z.w = w;
        Ok(())
    }

    fn update_block(&self, block: usize, z: &mut RelayIterate, dual: &RealVector, rho: f64) -> Result<()> {
        let duals = RelayDuals::from_vector(self.inst, dual);
        match block {
            F_BLOCK => z.f = update_f(self.inst, z, &duals, rho)?,
            BAR_BLOCK => {
                let (vbar, xbar, fbar) = update_bars(self.inst, z, &duals, rho)?;
                z.vbar = vbar;
                z.xbar = xbar;
                z.fbar = fbar;
            }
            X_BLOCK => z.x = update_x(self.inst, z, &duals, rho)?,
            V_BLOCK => z.v = update_v(self.inst, z, &duals, rho)?,
            _ => return Err(Error::invalid(format!("relay has no block {block}"))),
        }
        Ok(())
    }

    fn block_geometry(&self, block: usize) -> BlockGeometry {
        if block == BAR_BLOCK {
            BlockGeometry::ConvexSet
        } else {
            BlockGeometry::Free
        }
    }

    /// The barred block uses `(V̄, X̄, σ_R F̄)` so that its feasible set is a
    /// product of two balls.
    fn block_point(&self, block: usize, z: &RelayIterate) -> Result<RealVector> {
        let v = match block {
            F_BLOCK => embed(&z.f),
            BAR_BLOCK => [embed(&z.vbar), embed(&z.xbar), embed(&(&z.fbar * C64::from(self.inst.sigma_r())))].concat(),
            X_BLOCK => embed(&z.x),
            V_BLOCK => embed(&z.v),
            _ => return Err(Error::invalid(format!("relay has no block {block}"))),
        };
        Ok(RealVector::from_vec(v))
    }

    fn block_gradient(&self, block: usize, z: &RelayIterate, dual: &RealVector, rho: f64) -> Result<RealVector> {
        let g = al_gradient(self.inst, z, &RelayDuals::from_vector(self.inst, dual), rho);
        let v = match block {
            F_BLOCK => embed(&g.f),
            BAR_BLOCK => [embed(&g.vbar), embed(&g.xbar), embed(&g.fbar.unscale(self.inst.sigma_r()))].concat(),
            X_BLOCK => embed(&g.x),
            V_BLOCK => embed(&g.v),
            _ => return Err(Error::invalid(format!("relay has no block {block}"))),
        };
        Ok(RealVector::from_vec(v))
    }

    fn project_block(&self, block: usize, point: RealVector) -> Result<RealVector> {
        if block != BAR_BLOCK {
            return Ok(point);
        }
        let (n_s, n_r, k) = (self.inst.n_s(), self.inst.n_r(), self.inst.k());
        let s = point.as_slice();
        let vbar = take_embedded(s, n_s, k);
        let xbar = take_embedded(&s[2 * n_s * k..], n_r, k);
        let fbar = take_embedded(&s[2 * (n_s + n_r) * k..], n_r, n_r);
        let vbar = project_ball(&vbar, self.inst.p_s.sqrt())?;
        let (xbar, fbar) = project_pair(&xbar, &fbar, self.inst.p_r.sqrt());
        Ok(RealVector::from_vec([embed(&vbar), embed(&xbar), embed(&fbar)].concat()))
    }
}

/// Solver defaults: `ρ₀ = 500K/(2KN_r + N_s² + KN_s)`, `c = 0.6`, cyclic
/// sweeps, outer tolerance `10⁻⁴`.
pub fn default_config(inst: &RelayInstance) -> PddConfig {
    let (n_s, n_r, k) = (inst.n_s() as f64, inst.n_r() as f64, inst.k() as f64);
    PddConfig {
        rho0: 500.0 * k / (2.0 * k * n_r + n_s * n_s + k * n_s),
        c: 0.6,
        eps0: 1e-3,
        outer_tol: 1e-4,
        max_inner: 100,
        max_outer: 100,
        sweep: SweepOrder::Cyclic,
        ..PddConfig::default()
    }
}

/// Source precoder on the source budget (orthonormal columns when
/// `K ≤ N_s`), a scaled identity relay precoder on the relay budget, and
/// every split copy consistent with them.
pub fn initial_iterate(inst: &RelayInstance, seed: u64) -> RelayIterate {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x7265_6c61);
    let (n_s, n_r, k) = (inst.n_s(), inst.n_r(), inst.k());
    let v = if k <= n_s {
        random_orthonormal_columns(n_s, k, &mut rng) * C64::from((inst.p_s / k as f64).sqrt())
    } else {
        let g = complex_gaussian_matrix(n_s, k, &mut rng);
        let n = g.norm();
        g * C64::from(inst.p_s.sqrt() / n)
    };
    let hv = &inst.h * &v;
    let beta = (inst.p_r / (hv.norm_squared() + inst.sigma_r2 * n_r as f64)).sqrt();
    let f = ComplexMatrix::identity(n_r, n_r) * C64::from(beta);
    let x = &f * &hv;
    let (u, w) = wmmse_weights(inst, &x, &f);
    RelayIterate { vbar: v.clone(), fbar: f.clone(), xbar: x.clone(), v, f, x, u, w }
}

#[derive(Debug, Clone)]
pub struct RelaySolution {
    /// Repaired, budget-feasible source precoder.
    pub v: ComplexMatrix,
    /// Repaired, budget-feasible relay precoder.
    pub f: ComplexMatrix,
    pub iterate: RelayIterate,
    pub duals: RelayDuals,
    pub trace: PddTrace,
    pub sum_rate_nats: f64,
    pub feasibility_gap: f64,
    /// Scale factors `[s_V, s_F]` applied by the repair.
    pub repair_scale: [f64; 2],
}

impl RelaySolution {
    pub fn converged(&self) -> bool {
        self.trace.converged
    }

    pub fn iterations(&self) -> usize {
        self.trace.len()
    }

    pub fn to_result(&self) -> RelayResult {
        RelayResult {
            v: complex_mat_to_json(&self.v),
            f: complex_mat_to_json(&self.f),
            sum_rate_nats: self.sum_rate_nats,
            feasibility_gap: self.feasibility_gap,
            repair_scale: self.repair_scale,
            iterations: self.iterations(),
            converged: self.converged(),
        }
    }
}

/// Results file contents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelayResult {
    #[serde(rename = "V")]
    pub v: Vec<Vec<ComplexJson>>,
    #[serde(rename = "F")]
    pub f: Vec<Vec<ComplexJson>>,
    pub sum_rate_nats: f64,
    pub feasibility_gap: f64,
    pub repair_scale: [f64; 2],
    pub iterations: usize,
    pub converged: bool,
}

pub fn solve(inst: &RelayInstance, config: &PddConfig) -> Result<RelaySolution> {
    solve_with_observer(inst, config, |_| {})
}

pub fn solve_with_observer<F: FnMut(&OuterRecord)>(
    inst: &RelayInstance,
    config: &PddConfig,
    observer: F,
) -> Result<RelaySolution> {
    let problem = RelayProblem { inst };
    let z0 = initial_iterate(inst, config.seed);
    let dual0 = RelayDuals::zeros(inst).to_vector();
    let out = pdd_run_with_observer(&problem, z0, dual0, config, observer)?;
    let z = out.state.z;
    let feasibility_gap = problem.constraint(&z).amax();
    let (v, f, repair_scale) = inst.repair(&z.v, &z.f);
    Ok(RelaySolution {
        sum_rate_nats: inst.sum_rate(&v, &f),
        v,
        f,
        duals: RelayDuals::from_vector(inst, &out.state.dual),
        iterate: z,
        trace: out.trace,
        feasibility_gap,
        repair_scale,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::relay::blocks::surrogate_value;
    use rand::Rng;

    fn perturbed_start(seed: u64, dims: (usize, usize, usize)) -> (RelayInstance, RelayIterate, RelayDuals, f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = RelayInstance::random(dims.0, dims.1, dims.2, 10.0, &mut rng).unwrap();
        let mut z = initial_iterate(&inst, seed);
        z.vbar += complex_gaussian_matrix(dims.0, dims.2, &mut rng) * C64::from(0.1);
        z.xbar += complex_gaussian_matrix(dims.1, dims.2, &mut rng) * C64::from(0.1);
        let mut duals = RelayDuals::zeros(&inst);
        duals.z = complex_gaussian_matrix(dims.1, dims.2, &mut rng) * C64::from(0.05);
        duals.z_v = complex_gaussian_matrix(dims.0, dims.2, &mut rng) * C64::from(0.05);
        let rho = rng.random_range(0.5..2.0);
        (inst, z, duals, rho)
    }

    #[test]
    fn initial_point_is_feasible_and_consistent() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for (n_s, k) in [(4, 4), (2, 3)] {
            let inst = RelayInstance::random(n_s, 3, k, 10.0, &mut rng).unwrap();
            let z = initial_iterate(&inst, 1);
            assert!(constraint_h(&inst, &z).amax() < 1e-12);
            assert!((inst.source_power(&z.v) - inst.p_s).abs() < 1e-9);
            assert!((inst.relay_power(&z.v, &z.f) - inst.p_r).abs() < 1e-9);
        }
    }

    #[test]
    fn sweeps_do_not_increase_al_or_surrogate() {
        for seed in 0..10 {
            let (inst, mut z, duals, rho) = perturbed_start(seed, (2, 2, 2));
            let p = RelayProblem { inst: &inst };
            let dual = duals.to_vector();
            for _ in 0..10 {
                let before = p.augmented_lagrangian(&z, &dual, rho);
                p.begin_sweep(&mut z, &dual, rho).unwrap();
                let mut sur = surrogate_value(&inst, &z, &duals, rho);
                for b in 0..4 {
                    p.update_block(b, &mut z, &dual, rho).unwrap();
                    let next = surrogate_value(&inst, &z, &duals, rho);
                    assert!(next <= sur + 1e-9 * (1.0 + sur.abs()), "block {b}: {next} > {sur}");
                    sur = next;
                }
                let after = p.augmented_lagrangian(&z, &dual, rho);
                assert!(after <= before + 1e-9 * (1.0 + before.abs()), "{after} > {before}");
            }
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let (inst, z, duals, rho) = perturbed_start(3, (2, 3, 2));
        let p = RelayProblem { inst: &inst };
        let dual = duals.to_vector();
        let step = 1e-6;
        for block in 0..4 {
            let g = p.block_gradient(block, &z, &dual, rho).unwrap();
            let x0 = p.block_point(block, &z).unwrap();
            for i in 0..x0.len() {
                let eval = |delta: f64| {
                    let mut x = x0.clone();
                    x[i] += delta;
                    let mut zz = z.clone();
                    set_block(&inst, block, &mut zz, &x);
                    p.augmented_lagrangian(&zz, &dual, rho)
                };
                let fd = (eval(step) - eval(-step)) / (2.0 * step);
                assert!((fd - g[i]).abs() <= 1e-5 * (1.0 + g[i].abs()), "block {block}[{i}]: {fd} vs {}", g[i]);
            }
        }
    }

    fn set_block(inst: &RelayInstance, block: usize, z: &mut RelayIterate, x: &RealVector) {
        let (n_s, n_r, k) = (inst.n_s(), inst.n_r(), inst.k());
        let s = x.as_slice();
        match block {
            F_BLOCK => z.f = take_embedded(s, n_r, n_r),
            BAR_BLOCK => {
                z.vbar = take_embedded(s, n_s, k);
                z.xbar = take_embedded(&s[2 * n_s * k..], n_r, k);
                z.fbar = take_embedded(&s[2 * (n_s + n_r) * k..], n_r, n_r).unscale(inst.sigma_r());
            }
            X_BLOCK => z.x = take_embedded(s, n_r, k),
            _ => z.v = take_embedded(s, n_s, k),
        }
    }

    #[test]
    fn projection_lands_in_both_balls() {
        let (inst, z, _, _) = perturbed_start(4, (2, 2, 2));
        let p = RelayProblem { inst: &inst };
        let x = p.block_point(BAR_BLOCK, &z).unwrap() * 10.0;
        let y = p.project_block(BAR_BLOCK, x).unwrap();
        let mut zz = z.clone();
        set_block(&inst, BAR_BLOCK, &mut zz, &y);
        assert!((zz.vbar.norm_squared() - inst.p_s).abs() < 1e-9);
        assert!((zz.xbar.norm_squared() + inst.sigma_r2 * zz.fbar.norm_squared() - inst.p_r).abs() < 1e-9);
    }

    #[test]
    fn scalar_channel_matches_magnitude_grid() {
        let one = |c: f64| ComplexMatrix::from_element(1, 1, C64::new(c, 0.0));
        let g = vec![crate::numerics::ComplexVector::from_element(1, C64::new(0.8, 0.3))];
        let inst = RelayInstance::new(one(1.2), g, 1.0, vec![1.0], 10.0, 10.0, vec![1.0]).unwrap();
        let sol = solve(&inst, &default_config(&inst)).unwrap();
        let mut best = 0.0f64;
        let vmax = inst.p_s.sqrt();
        let steps = (vmax / 1e-3) as usize;
        for i in 0..=steps + 1 {
            let v = (i as f64 * 1e-3).min(vmax);
            // The best relay gain for a given |v| uses the whole relay budget.
            let fmax = (inst.p_r / (1.44 * v * v + 1.0)).sqrt();
            best = best.max(inst.sum_rate(&one(v), &one(fmax)));
        }
        assert!(sol.sum_rate_nats >= 0.98 * best, "{} vs {best}", sol.sum_rate_nats);
        assert!(sol.sum_rate_nats <= best * (1.0 + 1e-6));
    }
}
