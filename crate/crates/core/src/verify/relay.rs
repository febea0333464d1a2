use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{check_schedule, ensure, gradient_agrees, ok, Property};
use crate::numerics::{complex_gaussian_matrix, ComplexMatrix, C64};
use crate::pdd::BlockProblem;
use crate::relay::blocks::take_embedded;
use crate::relay::{
    default_config, initial_iterate, mse, solve, surrogate_value, wmmse_weights, RelayDuals, RelayInstance,
    RelayIterate, RelayProblem, BAR_BLOCK, F_BLOCK, V_BLOCK, X_BLOCK,
};

pub(super) const PROPERTIES: &[Property] = &[
    Property { id: "relay.wmmse-weight-bounds", check: weight_bounds },
    Property { id: "relay.rate-lower-bound", check: rate_lower_bound },
    Property { id: "relay.block-stationarity", check: block_stationarity },
    Property { id: "relay.bar-feasibility", check: bar_feasibility },
    Property { id: "relay.al-gradient-fd", check: gradient_fd },
    Property { id: "relay.inner-monotone", check: inner_monotone },
    Property { id: "relay.schedule", check: schedule },
];

const DIMS: (usize, usize, usize) = (3, 3, 2);

fn instance(seed: u64, dims: (usize, usize, usize)) -> Result<RelayInstance, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ok(RelayInstance::random(dims.0, dims.1, dims.2, 10.0, &mut rng))
}

/// Feasible start with perturbed split copies and random multipliers.
fn random_state(seed: u64, inst: &RelayInstance) -> (RelayIterate, RelayDuals, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let (n_s, n_r, k) = (inst.n_s(), inst.n_r(), inst.k());
    let mut m = |r, c, s: f64| complex_gaussian_matrix(r, c, &mut rng) * C64::from(s);
    let mut z = initial_iterate(inst, seed);
    z.vbar += m(n_s, k, 0.1);
    z.xbar += m(n_r, k, 0.1);
    z.fbar += m(n_r, n_r, 0.05);
    let duals = RelayDuals { z: m(n_r, k, 0.05), z_f: m(n_r, n_r, 0.05), z_x: m(n_r, k, 0.05), z_v: m(n_s, k, 0.05) };
    let rho = rng.random_range(0.5..2.0);
    (z, duals, rho)
}

/// Inverse of `RelayProblem::block_point`.
fn set_block(inst: &RelayInstance, block: usize, z: &mut RelayIterate, x: &[f64]) {
    let (n_s, n_r, k) = (inst.n_s(), inst.n_r(), inst.k());
    match block {
        F_BLOCK => z.f = take_embedded(x, n_r, n_r),
        BAR_BLOCK => {
            z.vbar = take_embedded(x, n_s, k);
            z.xbar = take_embedded(&x[2 * n_s * k..], n_r, k);
            z.fbar = take_embedded(&x[2 * (n_s + n_r) * k..], n_r, n_r).unscale(inst.sigma_r());
        }
        X_BLOCK => z.x = take_embedded(x, n_r, k),
        _ => z.v = take_embedded(x, n_s, k),
    }
}

fn in_budgets(inst: &RelayInstance, z: &RelayIterate) -> bool {
    let tol = 1e-9;
    z.vbar.norm_squared() <= inst.p_s * (1.0 + tol)
        && z.xbar.norm_squared() + inst.sigma_r2 * z.fbar.norm_squared() <= inst.p_r * (1.0 + tol)
}

fn weight_bounds() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(51);
    for seed in 0..200 {
        let inst = instance(seed, DIMS)?;
        let scale = 10f64.powf(rng.random_range(-2.0..2.0));
        let x = complex_gaussian_matrix(inst.n_r(), inst.k(), &mut rng) * C64::from(scale);
        let f = complex_gaussian_matrix(inst.n_r(), inst.n_r(), &mut rng) * C64::from(scale);
        let (u, w) = wmmse_weights(&inst, &x, &f);
        for k in 0..inst.k() {
            ensure(w[k] >= 1.0, || format!("seed {seed}: w[{k}] = {} < 1", w[k]))?;
            // |u| = |g_kᴴx_k| / T with T ≥ |g_kᴴx_k|² + σ_k², so |u| ≤ 1/(2σ_k).
            let bound = 0.5 / inst.sigma2[k].sqrt();
            ensure(u[k].norm() <= bound * (1.0 + 1e-12), || format!("seed {seed}: |u[{k}]| = {} > {bound}", u[k].norm()))?;
        }
    }
    Ok("200 random (X, F) over four decades of scale".into())
}

fn rate_lower_bound() -> Result<String, String> {
    let mut worst_slack = f64::INFINITY;
    for seed in 0..20 {
        let inst = instance(seed, DIMS)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x1e33a);
        let (n_r, k_users) = (inst.n_r(), inst.k());
        let xt = complex_gaussian_matrix(n_r, k_users, &mut rng);
        let ft = complex_gaussian_matrix(n_r, n_r, &mut rng);
        let (u, w) = wmmse_weights(&inst, &xt, &ft);
        let bound = |k: usize, x: &ComplexMatrix, f: &ComplexMatrix| w[k].ln() - w[k] * mse(&inst, k, u[k], x, f) + 1.0;
        let rates = inst.sinr_x(&xt, &ft);
        for k in 0..k_users {
            let gap = (rates[k].ln_1p() - bound(k, &xt, &ft)).abs();
            ensure(gap <= 1e-8, || format!("seed {seed}: bound not tight at the anchor ({gap:.3e})"))?;
        }
        for _ in 0..100 {
            let x = complex_gaussian_matrix(n_r, k_users, &mut rng);
            let f = complex_gaussian_matrix(n_r, n_r, &mut rng);
            let rates = inst.sinr_x(&x, &f);
            for k in 0..k_users {
                let slack = rates[k].ln_1p() - bound(k, &x, &f);
                worst_slack = worst_slack.min(slack);
                ensure(slack >= -1e-8, || format!("seed {seed}: rate below its lower bound by {:.3e}", -slack))?;
            }
        }
    }
    Ok(format!("2000 random points, smallest slack {worst_slack:.2e}"))
}

/// Central-difference gradient of `f` at `x0`.
fn central_fd(x0: &[f64], step: f64, mut f: impl FnMut(&[f64]) -> f64) -> Vec<f64> {
    (0..x0.len())
        .map(|i| {
            let mut x = x0.to_vec();
            x[i] = x0[i] + step;
            let up = f(&x);
            x[i] = x0[i] - step;
            (up - f(&x)) / (2.0 * step)
        })
        .collect()
}

fn block_stationarity() -> Result<String, String> {
    let mut worst = 0.0f64;
    for seed in 0..10 {
        let inst = instance(seed, DIMS)?;
        let (mut z, duals, rho) = random_state(seed, &inst);
        let p = RelayProblem { inst: &inst };
        let dual = duals.to_vector();
        ok(p.begin_sweep(&mut z, &dual, rho))?;
        for block in [F_BLOCK, BAR_BLOCK, X_BLOCK, V_BLOCK] {
            ok(p.update_block(block, &mut z, &dual, rho))?;
            let x0 = ok(p.block_point(block, &z))?;
            if block == BAR_BLOCK {
                // Projection optimality: P(x − t∇) = x for every step t > 0.
                let g = ok(p.block_gradient(block, &z, &dual, rho))?;
                for t in [0.1 * rho, rho, 10.0 * rho] {
                    let back = ok(p.project_block(block, &x0 - &g * t))?;
                    let err = (&back - &x0).amax() / (1.0 + x0.amax());
                    worst = worst.max(err);
                    ensure(err <= 1e-10, || format!("seed {seed}: barred block not optimal (step {t}, {err:.3e})"))?;
                }
                continue;
            }
            let value = surrogate_value(&inst, &z, &duals, rho);
            let fd = central_fd(x0.as_slice(), 1e-6, |x| {
                let mut zz = z.clone();
                set_block(&inst, block, &mut zz, x);
                surrogate_value(&inst, &zz, &duals, rho)
            });
            let err = fd.iter().fold(0.0f64, |m, v| m.max(v.abs())) / (1.0 + value.abs());
            worst = worst.max(err);
            ensure(err <= 1e-6, || format!("seed {seed}, block {block}: surrogate gradient {err:.3e} after update"))?;
        }
    }
    Ok(format!("40 block updates, worst scaled residual {worst:.2e}"))
}

fn bar_feasibility() -> Result<String, String> {
    let mut steps = 0;
    for seed in 0..10 {
        let inst = instance(seed, DIMS)?;
        let (mut z, duals, rho) = random_state(seed, &inst);
        // Large multipliers push the projected points well outside the balls.
        let duals = RelayDuals {
            z: &duals.z * C64::from(20.0),
            z_f: &duals.z_f * C64::from(20.0),
            z_x: &duals.z_x * C64::from(20.0),
            z_v: &duals.z_v * C64::from(20.0),
        };
        let p = RelayProblem { inst: &inst };
        let dual = duals.to_vector();
        for _ in 0..10 {
            ok(p.begin_sweep(&mut z, &dual, rho))?;
            for block in 0..p.num_blocks() {
                ok(p.update_block(block, &mut z, &dual, rho))?;
                if block >= BAR_BLOCK {
                    ensure(in_budgets(&inst, &z), || format!("seed {seed}: barred copies left the power budgets"))?;
                }
                steps += 1;
            }
        }
    }
    Ok(format!("{steps} block steps"))
}

fn gradient_fd() -> Result<String, String> {
    let mut worst = 0.0f64;
    for seed in 0..5 {
        let inst = instance(seed, DIMS)?;
        let (z, duals, rho) = random_state(seed, &inst);
        let p = RelayProblem { inst: &inst };
        let dual = duals.to_vector();
        for block in 0..p.num_blocks() {
            let g = ok(p.block_gradient(block, &z, &dual, rho))?;
            let x0 = ok(p.block_point(block, &z))?;
            let fd = central_fd(x0.as_slice(), 1e-5, |x| {
                let mut zz = z.clone();
                set_block(&inst, block, &mut zz, x);
                p.augmented_lagrangian(&zz, &dual, rho)
            });
            let err = gradient_agrees(&fd, g.as_slice(), 1e-4).map_err(|e| format!("seed {seed}, block {block}: {e}"))?;
            worst = worst.max(err);
        }
    }
    Ok(format!("worst relative error {worst:.2e}"))
}

fn inner_monotone() -> Result<String, String> {
    let mut sweeps = 0;
    for seed in 0..10 {
        let inst = instance(seed, DIMS)?;
        let (mut z, duals, rho) = random_state(seed, &inst);
        let p = RelayProblem { inst: &inst };
        let dual = duals.to_vector();
        let mut prev = p.augmented_lagrangian(&z, &dual, rho);
        for it in 0..20 {
            ok(p.begin_sweep(&mut z, &dual, rho))?;
            let mut sur = surrogate_value(&inst, &z, &duals, rho);
            for block in 0..p.num_blocks() {
                ok(p.update_block(block, &mut z, &dual, rho))?;
                let next = surrogate_value(&inst, &z, &duals, rho);
                ensure(next <= sur + 1e-9 * (1.0 + sur.abs()), || format!("seed {seed}: block {block} raised the surrogate"))?;
                sur = next;
            }
            let next = p.augmented_lagrangian(&z, &dual, rho);
            ensure(next <= prev + 1e-9 * (1.0 + prev.abs()), || format!("seed {seed}, sweep {it}: {next} > {prev}"))?;
            prev = next;
            sweeps += 1;
        }
    }
    Ok(format!("{sweeps} sweeps"))
}

fn schedule() -> Result<String, String> {
    for seed in 0..5 {
        let inst = instance(seed, (4, 4, 4))?;
        let cfg = default_config(&inst);
        let sol = ok(solve(&inst, &cfg))?;
        check_schedule(&sol.trace, cfg.tau).map_err(|e| format!("seed {seed}: {e}"))?;
        let h = sol.trace.final_h_inf();
        ensure(h.is_finite(), || format!("seed {seed}: non-finite residual"))?;
    }
    Ok("5 solves on (4,4,4)".into())
}
