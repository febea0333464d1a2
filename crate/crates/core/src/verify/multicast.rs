use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{check_schedule, ensure, gradient_agrees, ok, Property};
use crate::multicast::{
    bsum_inner_step, build_surrogate, default_config, initial_iterate, penalty_gradient, solve, solve_t_subproblem,
    vartheta, MulticastInstance, MulticastIterate, MulticastProblem,
};
use crate::numerics::{complex_from_embedded, complex_gaussian_vector, real_embed_vec, RealVector, C64};
use crate::pdd::{BlockProblem, Branch, PddConfig};

pub(super) const PROPERTIES: &[Property] = &[
    Property { id: "multicast.surrogate-dominance", check: surrogate_dominance },
    Property { id: "multicast.t-subproblem-form", check: t_subproblem },
    Property { id: "multicast.inner-monotone", check: inner_monotone },
    Property { id: "multicast.al-gradient-fd", check: gradient_fd },
    Property { id: "multicast.scale-equivariance", check: scale_equivariance },
    Property { id: "multicast.schedule", check: schedule },
    Property { id: "multicast.dual-branch-feasibility", check: dual_branch_feasibility },
];

const P_BS: f64 = 10.0;

fn instance(seed: u64, n_t: usize, n_g: usize, m_g: usize) -> Result<MulticastInstance, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ok(MulticastInstance::random(n_t, n_g, m_g, P_BS, &mut rng))
}

/// A perturbed iterate with random multipliers, so both multiplier signs
/// and infeasible `t` are exercised.
fn random_state(seed: u64, inst: &MulticastInstance) -> (MulticastIterate, RealVector, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let mut z = initial_iterate(inst, seed);
    z.t.iter_mut().for_each(|t| *t *= rng.random_range(0.3..1.7));
    let dual = RealVector::from_fn(inst.n_users(), |_, _| rng.random_range(-1.0..1.0));
    let rho = rng.random_range(0.2..3.0);
    (z, dual, rho)
}

fn surrogate_dominance() -> Result<String, String> {
    let mut worst_gap = f64::NEG_INFINITY;
    let mut samples = 0;
    for seed in 0..20 {
        let inst = instance(seed, 3, 2, 2)?;
        let (z, dual, rho) = random_state(seed, &inst);
        let sur = ok(build_surrogate(&inst, &z.w, &z.t, &dual, rho))?;
        let at_anchor = vartheta(&inst, &z.w, &z.t, &dual, rho);
        let tight = (sur.value(&z.w) - at_anchor).abs();
        ensure(tight <= 1e-8 * (1.0 + at_anchor.abs()), || format!("seed {seed}: not tight, gap {tight:.3e}"))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..200 {
            let w = complex_gaussian_vector(inst.dim(), &mut rng).normalize();
            let v = vartheta(&inst, &w, &z.t, &dual, rho);
            let gap = v - sur.value(&w);
            worst_gap = worst_gap.max(gap);
            ensure(gap <= 1e-8 * (1.0 + v.abs()), || format!("seed {seed}: surrogate below ϑ by {gap:.3e}"))?;
            samples += 1;
        }
    }
    Ok(format!("{samples} unit samples, largest ϑ − u = {worst_gap:.2e}"))
}

fn t_subproblem() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..500 {
        let k = rng.random_range(1..9);
        let a: Vec<f64> = (0..k).map(|_| 10f64.powf(rng.random_range(-2.0..2.0))).collect();
        let b: Vec<f64> = (0..k).map(|_| rng.random_range(-2.0..3.0)).collect();
        let (t, s) = ok(solve_t_subproblem(&a, &b))?;
        ensure(s >= 0.0, || format!("s = {s} is negative"))?;
        for i in 0..k {
            ensure(t[i] == b[i].max(s), || format!("t[{i}] = {} but max(b, s) = {}", t[i], b[i].max(s)))?;
        }
        // Grid oracle on the reduced concave objective.
        let phi = |s: f64| s - a.iter().zip(&b).map(|(ak, &bk)| ak * (s - bk).max(0.0).powi(2)).sum::<f64>();
        let best_grid = (0..=4000).map(|i| phi(i as f64 * 1e-3)).fold(f64::NEG_INFINITY, f64::max);
        ensure(phi(s) >= best_grid - 1e-12, || format!("φ(s) = {} below grid best {best_grid}", phi(s)))?;
    }
    Ok("500 random subproblems".into())
}

fn inner_monotone() -> Result<String, String> {
    let mut sweeps = 0;
    for seed in 0..20 {
        let inst = instance(seed, 4, 2, 2)?;
        let (mut z, dual, rho) = random_state(seed, &inst);
        let p = MulticastProblem { inst: &inst };
        let mut prev = p.augmented_lagrangian(&z, &dual, rho);
        for it in 0..20 {
            ok(bsum_inner_step(&inst, &mut z, &dual, rho))?;
            let next = p.augmented_lagrangian(&z, &dual, rho);
            ensure(next <= prev + 1e-9 * (1.0 + prev.abs()), || format!("seed {seed}, sweep {it}: {next} > {prev}"))?;
            prev = next;
            sweeps += 1;
        }
    }
    Ok(format!("{sweeps} sweeps"))
}

fn gradient_fd() -> Result<String, String> {
    let step = 1e-5;
    let mut worst = 0.0f64;
    for seed in 0..10 {
        let inst = instance(seed, 3, 2, 2)?;
        let (z, dual, rho) = random_state(seed, &inst);
        let p = MulticastProblem { inst: &inst };
        let pen = |z: &MulticastIterate| {
            let h = p.constraint(z);
            dual.dot(&h) + h.norm_squared() / (2.0 * rho)
        };
        let (gw, gt) = penalty_gradient(&inst, &z, &dual, rho);
        let we = real_embed_vec(&z.w);
        let fd_w: Vec<f64> = (0..we.len())
            .map(|i| {
                let eval = |d: f64| {
                    let mut v = we.clone();
                    v[i] += d;
                    pen(&MulticastIterate { w: complex_from_embedded(&v), t: z.t.clone() })
                };
                (eval(step) - eval(-step)) / (2.0 * step)
            })
            .collect();
        let fd_t: Vec<f64> = (0..z.t.len())
            .map(|i| {
                let eval = |d: f64| {
                    let mut zz = z.clone();
                    zz.t[i] += d;
                    pen(&zz)
                };
                (eval(step) - eval(-step)) / (2.0 * step)
            })
            .collect();
        let e1 = gradient_agrees(&fd_w, gw.as_slice(), 1e-4).map_err(|e| format!("seed {seed}, w: {e}"))?;
        let e2 = gradient_agrees(&fd_t, gt.as_slice(), 1e-4).map_err(|e| format!("seed {seed}, t: {e}"))?;
        worst = worst.max(e1).max(e2);
    }
    Ok(format!("worst relative error {worst:.2e}"))
}

/// Channels scaled by `α` with noise powers scaled by `α²` (so that
/// `σ²/P_BS` tracks the channel gain) scale every `A_k`, `B_k` by `α²` and
/// leave the SINRs unchanged.
fn scale_equivariance() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for seed in 0..20 {
        let inst = instance(seed, 3, 2, 2)?;
        let alpha: f64 = rng.random_range(0.1..10.0);
        let a2 = alpha * alpha;
        let channels = inst.channels().iter().map(|h| h * C64::from(alpha)).collect();
        let sigma2 = inst.sigma2().iter().map(|s| s * a2).collect();
        let scaled = ok(MulticastInstance::new(inst.n_t(), inst.groups().to_vec(), channels, sigma2, inst.p_bs()))?;
        for k in 0..inst.n_users() {
            let ea = (scaled.a(k) - inst.a(k) * C64::from(a2)).norm() / (a2 * inst.a(k).norm());
            let eb = (scaled.b(k) - inst.b(k) * C64::from(a2)).norm() / (a2 * inst.b(k).norm());
            ensure(ea <= 1e-12 && eb <= 1e-12, || format!("seed {seed}, user {k}: A/B not scaled by α²"))?;
        }
        let w = complex_gaussian_vector(inst.dim(), &mut rng).normalize();
        for (s0, s1) in inst.sinr(&w).iter().zip(scaled.sinr(&w)) {
            ensure((s0 - s1).abs() <= 1e-10 * (1.0 + s0), || format!("seed {seed}: SINR {s0} vs {s1}"))?;
        }
    }
    Ok("20 instances, α ∈ [0.1, 10]".into())
}

fn schedule() -> Result<String, String> {
    for seed in 0..10 {
        let inst = instance(seed, 4, 2, 2)?;
        let cfg = default_config(&inst);
        let sol = ok(solve(&inst, &cfg))?;
        check_schedule(&sol.trace, cfg.tau).map_err(|e| format!("seed {seed}: {e}"))?;
    }
    Ok("10 solves".into())
}

/// Soft statistic: the fraction of dual-branch steps on which `‖h‖∞` did not
/// grow. Reported only; it never fails the suite.
fn dual_branch_feasibility() -> Result<String, String> {
    let (mut held, mut total) = (0usize, 0usize);
    for seed in 0..5 {
        let inst = instance(1000 + seed, 8, 4, 2)?;
        let cfg = PddConfig { seed, ..default_config(&inst) };
        let sol = ok(solve(&inst, &cfg))?;
        for w in sol.trace.records.windows(2) {
            if w[1].branch == Branch::DualUpdate {
                total += 1;
                held += usize::from(w[1].h_inf <= w[0].h_inf);
            }
        }
    }
    let frac = if total == 0 { 1.0 } else { held as f64 / total as f64 };
    let verdict = if frac >= 0.95 { "meets" } else { "below" };
    Ok(format!("‖h‖∞ non-increasing on {held}/{total} dual steps ({:.1}%, {verdict} the 95% target; soft)", 100.0 * frac))
}
