use itertools::Itertools;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{check_schedule, ensure, gradient_agrees, ok, Property};
use crate::numerics::{project_simplex_columns, thin_svd, RealMatrix, RealVector};
use crate::pdd::BlockProblem;
use crate::volmin::{
    default_beta, default_config, g_eps, g_eps_derivative, gen_data, sigma_objective, solve, solve_sigma, update_s,
    update_x, VolMinDuals, VolMinInstance, VolMinIterate, VolMinProblem, DEFAULT_EPS, S_BLOCK, X_BLOCK, Y_BLOCK,
};

pub(super) const PROPERTIES: &[Property] = &[
    Property { id: "volmin.inner-monotone", check: inner_monotone },
    Property { id: "volmin.g-eps-c1", check: g_eps_c1 },
    Property { id: "volmin.s-majorization", check: s_majorization },
    Property { id: "volmin.x-sigma-grid", check: sigma_grid },
    Property { id: "volmin.x-alignment", check: x_alignment },
    Property { id: "volmin.al-gradient-fd", check: gradient_fd },
    Property { id: "volmin.schedule", check: schedule },
];

/// Random data, iterate and multipliers of the given shape.
fn random_state(seed: u64, n: usize, k: usize, l: usize) -> Result<(VolMinInstance, VolMinIterate, VolMinDuals, f64), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = |r, c| RealMatrix::from_fn(r, c, |_, _| rng.random_range(-1.0..1.0));
    let inst = ok(VolMinInstance::new(m(n, l), k, DEFAULT_EPS))?;
    let s = ok(project_simplex_columns(&m(k, l)))?;
    let z = VolMinIterate { x: m(n, k), s, y: m(n, k) };
    let duals = VolMinDuals { p: m(n, l) * 0.1, q: m(n, k) * 0.1 };
    let rho = rng.random_range(0.1..2.0);
    Ok((inst, z, duals, rho))
}

fn inner_monotone() -> Result<String, String> {
    let mut sweeps = 0;
    for seed in 0..20 {
        let (inst, mut z, duals, rho) = random_state(seed, 5, 3, 40)?;
        let p = VolMinProblem { inst: &inst };
        let dual = duals.to_vector();
        let mut prev = p.augmented_lagrangian(&z, &dual, rho);
        for it in 0..20 {
            for block in [Y_BLOCK, S_BLOCK, X_BLOCK] {
                ok(p.update_block(block, &mut z, &dual, rho))?;
            }
            let next = p.augmented_lagrangian(&z, &dual, rho);
            ensure(next <= prev + 1e-9 * (1.0 + prev.abs()), || format!("seed {seed}, sweep {it}: {next} > {prev}"))?;
            prev = next;
            sweeps += 1;
        }
    }
    Ok(format!("{sweeps} sweeps"))
}

/// Derivative check on a grid crossing the breakpoint `x = ε`, plus value
/// and slope continuity there.
fn g_eps_c1() -> Result<String, String> {
    let mut worst = 0.0f64;
    for eps in [1e-3, 1e-2, 1e-1] {
        let h = eps * 1e-4;
        for i in 0..=400 {
            let x = eps * (i as f64) / 200.0;
            let fd = (g_eps(x + h, eps) - g_eps(x - h, eps)) / (2.0 * h);
            let err = (fd - g_eps_derivative(x, eps)).abs();
            // The one-sided kink of g'' at ε costs O(h/ε) in a central difference.
            let tol = if (x - eps).abs() < h { 1e-4 } else { 1e-6 };
            worst = worst.max(err);
            ensure(err <= tol, || format!("ε = {eps}, x = {x}: derivative error {err:.3e}"))?;
        }
        let jump = (g_eps(eps * (1.0 - 1e-12), eps) - g_eps(eps, eps)).abs();
        let slope = (g_eps_derivative(eps * (1.0 - 1e-12), eps) - g_eps_derivative(eps, eps)).abs();
        ensure(jump <= 1e-12 && slope <= 1e-10, || format!("ε = {eps}: jump {jump:.1e}, slope jump {slope:.1e}"))?;
    }
    Ok(format!("1203 grid points, worst derivative error {worst:.2e}"))
}

fn s_majorization() -> Result<String, String> {
    let mut calls = 0;
    for seed in 0..20 {
        let (inst, mut z, duals, rho) = random_state(seed, 5, 3, 30)?;
        let target = &inst.a + &duals.p * rho;
        let fit = |s: &RealMatrix, y: &RealMatrix| 0.5 * (&target - y * s).norm_squared();
        for _ in 0..5 {
            let beta = ok(default_beta(&z.y))?;
            let anchor = z.s.clone();
            let grad = -(z.y.transpose() * (&target - &z.y * &anchor));
            let major = |s: &RealMatrix| fit(&anchor, &z.y) + grad.dot(&(s - &anchor)) + 0.5 * beta * (s - &anchor).norm_squared();
            let s = ok(update_s(&inst.a, &z, &duals, rho, beta))?;
            let (m_new, m_old) = (major(&s), major(&anchor));
            ensure(m_new <= m_old + 1e-12 * (1.0 + m_old.abs()), || format!("seed {seed}: majorizer rose {m_old} → {m_new}"))?;
            ensure(fit(&s, &z.y) <= m_new + 1e-12 * (1.0 + m_new.abs()), || format!("seed {seed}: majorizer below the fit"))?;
            ensure(fit(&s, &z.y) <= fit(&anchor, &z.y) + 1e-12 * (1.0 + m_old.abs()), || format!("seed {seed}: fit increased"))?;
            z.s = s;
            calls += 1;
        }
    }
    Ok(format!("{calls} S updates"))
}

fn sigma_grid() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(61);
    let mut cases = 0;
    for _ in 0..300 {
        let eps = 10f64.powf(rng.random_range(-3.0..-1.0));
        let sigma_bar = rng.random_range(0.0..2.0);
        let g_tilde = rng.random_range(0.5 * eps..3.0);
        let rho = 10f64.powf(rng.random_range(-2.0..0.7));
        let s = ok(solve_sigma(sigma_bar, g_tilde, rho, eps))?;
        let value = sigma_objective(s, sigma_bar, g_tilde, rho, eps);
        let upper = sigma_bar + 3.0 * eps.sqrt();
        let steps = (upper / 1e-3).ceil() as usize;
        let grid = (0..=steps).map(|i| sigma_objective(i as f64 * 1e-3, sigma_bar, g_tilde, rho, eps)).fold(f64::INFINITY, f64::min);
        ensure(s >= 0.0 && value <= grid + 1e-12 * (1.0 + grid.abs()), || {
            format!("σ̄ = {sigma_bar}, g̃ = {g_tilde}, ρ = {rho}, ε = {eps}: {value} above grid minimum {grid}")
        })?;
        cases += 1;
    }
    Ok(format!("{cases} scalar problems"))
}

fn x_alignment() -> Result<String, String> {
    let mut worst = 0.0f64;
    for seed in 0..20 {
        let (inst, z, duals, rho) = random_state(seed, 6, 4, 10)?;
        let x = ok(update_x(&z, &duals, rho, inst.eps))?;
        let xbar = &z.y - &duals.q * rho;
        let bar = ok(thin_svd(&xbar))?;
        let prev = ok(thin_svd(&z.x))?.sigma;
        let sigma = RealVector::from_iterator(
            bar.sigma.len(),
            (0..bar.sigma.len()).map(|i| solve_sigma(bar.sigma[i], g_eps(prev[i] * prev[i], inst.eps), rho, inst.eps).unwrap_or(f64::NAN)),
        );
        let rebuilt = &bar.u * RealMatrix::from_diagonal(&sigma) * bar.v.transpose();
        let err = (&x - &rebuilt).norm();
        worst = worst.max(err);
        ensure(err <= 1e-10, || format!("seed {seed}: X differs from Ū diag(σ) V̄ᵀ by {err:.3e}"))?;
        let quad = |s: &[f64]| (&bar.u * RealMatrix::from_diagonal(&RealVector::from_column_slice(s)) * bar.v.transpose() - &xbar).norm_squared();
        let base = quad(sigma.as_slice());
        for perm in sigma.iter().copied().permutations(sigma.len()) {
            let q = quad(&perm);
            ensure(q >= base - 1e-10 * (1.0 + base), || format!("seed {seed}: permuted σ lowers the quadratic term {base} → {q}"))?;
        }
    }
    Ok(format!("20 updates, 24 permutations each, worst reconstruction {worst:.2e}"))
}

fn gradient_fd() -> Result<String, String> {
    let step = 1e-5;
    let mut worst = 0.0f64;
    for seed in 0..10 {
        let (inst, z, duals, rho) = random_state(seed, 5, 3, 12)?;
        let p = VolMinProblem { inst: &inst };
        let dual = duals.to_vector();
        for block in [Y_BLOCK, S_BLOCK, X_BLOCK] {
            let g = ok(p.block_gradient(block, &z, &dual, rho))?;
            let x0 = ok(p.block_point(block, &z))?;
            let fd: Vec<f64> = (0..x0.len())
                .map(|i| {
                    let eval = |d: f64| {
                        let mut zz = z.clone();
                        let m = match block {
                            Y_BLOCK => &mut zz.y,
                            S_BLOCK => &mut zz.s,
                            _ => &mut zz.x,
                        };
                        m[i] += d;
                        p.augmented_lagrangian(&zz, &dual, rho)
                    };
                    (eval(step) - eval(-step)) / (2.0 * step)
                })
                .collect();
            let err = gradient_agrees(&fd, g.as_slice(), 1e-4).map_err(|e| format!("seed {seed}, block {block}: {e}"))?;
            worst = worst.max(err);
        }
    }
    Ok(format!("worst relative error {worst:.2e}"))
}

fn schedule() -> Result<String, String> {
    for seed in 0..3 {
        let (inst, _) = ok(gen_data(10, 3, 200, 0.8, f64::INFINITY, 7000 + seed))?;
        let cfg = default_config(&inst);
        let sol = ok(solve(&inst, &cfg, 1))?;
        check_schedule(&sol.trace, cfg.tau).map_err(|e| format!("seed {seed}: {e}"))?;
        let violations = sol.trace.total_descent_violations();
        ensure(violations == 0, || format!("seed {seed}: {violations} descent violations"))?;
    }
    Ok("3 solves on (10,3,200)".into())
}
