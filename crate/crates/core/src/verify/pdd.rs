use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{check_schedule, ensure, ok, Property};
use crate::numerics::{RealMatrix, RealVector};
use crate::pdd::toy::QuadraticToy;
use crate::pdd::{pdd_run, BlockProblem, Branch, InnerRule, Mode, PddConfig, PddOutcome, SweepOrder};

pub(super) const PROPERTIES: &[Property] = &[
    Property { id: "pdd-core.monotone-inner-descent", check: monotone_descent },
    Property { id: "pdd-core.schedule-monotonicity", check: schedule },
    Property { id: "pdd-core.dual-update-identity", check: dual_identity },
    Property { id: "pdd-core.ipdd-virtual-multiplier", check: ipdd_identity },
    Property { id: "pdd-core.rbsum-seeded-reproducibility", check: reproducibility },
    Property { id: "pdd-core.toy-kkt-oracle", check: toy_oracle },
];

const INSTANCES: u64 = 20;

/// Random strongly convex QP with two equality constraints, blocks
/// `{0,1}, {2}, {3}, {4}`, a box on coordinate 3 and an ℓ₁ term on 4.
fn random_toy(seed: u64) -> QuadraticToy {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = 5;
    let g = RealMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    let q = g.transpose() * &g + RealMatrix::identity(n, n);
    let q_vec = RealVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
    let m = RealMatrix::from_fn(2, n, |_, _| rng.random_range(-1.0..1.0));
    let d = RealVector::from_fn(2, |_, _| rng.random_range(-1.0..1.0));
    QuadraticToy::new(q, q_vec, m, d, vec![vec![0, 1], vec![2], vec![3], vec![4]])
        .expect("valid toy")
        .with_bounds(3, -0.5, 0.5)
        .with_l1(4, 0.1)
}

fn config(mode: Mode, seed: u64) -> PddConfig {
    PddConfig {
        mode,
        rho0: 1.0,
        c: 0.5,
        max_outer: 40,
        max_inner: 200,
        outer_tol: 1e-8,
        eps0: 1e-4,
        sweep: SweepOrder::Randomized,
        seed,
        ..PddConfig::default()
    }
}

fn run(toy: &QuadraticToy, cfg: &PddConfig) -> Result<PddOutcome<RealVector>, String> {
    ok(pdd_run(toy, RealVector::zeros(toy.dim()), RealVector::zeros(2), cfg))
}

fn monotone_descent() -> Result<String, String> {
    let mut sweeps = 0;
    for seed in 0..INSTANCES {
        let toy = random_toy(seed);
        for mode in [Mode::Pdd, Mode::Ipdd] {
            let out = run(&toy, &config(mode, seed))?;
            let violations: usize = out.trace.records.iter().map(|r| r.descent_violations).sum();
            ensure(violations == 0, || format!("{violations} descent violations (seed {seed}, {mode:?})"))?;
            sweeps += out.trace.records.iter().map(|r| r.inner_iters).sum::<usize>();
        }
    }
    Ok(format!("{sweeps} sweeps without an AL increase"))
}

fn schedule() -> Result<String, String> {
    for seed in 0..INSTANCES {
        let toy = random_toy(seed);
        for mode in [Mode::Pdd, Mode::Ipdd] {
            let cfg = config(mode, seed);
            let out = run(&toy, &cfg)?;
            check_schedule(&out.trace, cfg.tau).map_err(|e| format!("seed {seed}, {mode:?}: {e}"))?;
        }
    }
    Ok(format!("{} runs", 2 * INSTANCES))
}

/// Reruns with `max_outer = 1, 2, …` reproduce the prefix of a single run,
/// so the state after step `k` can be compared with the state after `k − 1`.
fn multiplier_identity(mode: Mode) -> Result<String, String> {
    let mut checked = 0;
    for seed in 0..5 {
        let toy = random_toy(100 + seed);
        let mut cfg = config(mode, seed);
        cfg.sweep = SweepOrder::Cyclic;
        let mut prev: Option<PddOutcome<RealVector>> = None;
        for k in 1..=15 {
            cfg.max_outer = k;
            let out = run(&toy, &cfg)?;
            if out.trace.len() < k {
                break;
            }
            let rec = &out.trace.records[k - 1];
            let dual_prev = prev.as_ref().map_or_else(|| RealVector::zeros(2), |p| p.state.dual.clone());
            let mut expect = dual_prev.clone();
            let updates = rec.branch != Branch::PenaltyDecrease;
            if updates {
                let h = toy.constraint(&out.state.z);
                expect.axpy(1.0 / rec.rho, &h, 1.0);
            }
            ensure(out.state.dual == expect, || {
                format!("seed {seed}, k={k}: dual {:?} vs λ + h/ρ {:?}", out.state.dual.as_slice(), expect.as_slice())
            })?;
            if mode == Mode::Ipdd {
                ensure(rec.branch == Branch::Both, || "IPDD step did not update both".into())?;
            }
            checked += usize::from(updates);
            prev = Some(out);
        }
    }
    Ok(format!("{checked} multiplier updates reproduced exactly"))
}

fn dual_identity() -> Result<String, String> {
    multiplier_identity(Mode::Pdd)
}

fn ipdd_identity() -> Result<String, String> {
    multiplier_identity(Mode::Ipdd)
}

fn reproducibility() -> Result<String, String> {
    for seed in 0..INSTANCES {
        let toy = random_toy(seed);
        let cfg = config(Mode::Pdd, seed);
        let a = run(&toy, &cfg)?;
        let b = run(&toy, &cfg)?;
        ensure(a.state.z == b.state.z && a.state.dual == b.state.dual, || format!("seed {seed} not reproducible"))?;
        let strip = |o: &PddOutcome<RealVector>| {
            o.trace.records.iter().map(|r| (r.al_value, r.h_inf, r.rho, r.inner_iters)).collect::<Vec<_>>()
        };
        ensure(strip(&a) == strip(&b), || format!("seed {seed}: traces differ"))?;
    }
    Ok(format!("{INSTANCES} randomized-sweep runs repeated bit-for-bit"))
}

fn toy_oracle() -> Result<String, String> {
    // min ½‖z‖² − 1ᵀz s.t. Σz = 1: z = 1/4, λ = 3/4.
    let n = 4;
    let toy = ok(QuadraticToy::new(
        RealMatrix::identity(n, n),
        RealVector::from_element(n, 1.0),
        RealMatrix::from_element(1, n, 1.0),
        RealVector::from_element(1, 1.0),
        vec![vec![0, 1], vec![2], vec![3]],
    ))?;
    let cfg = PddConfig {
        rho0: 1.0,
        max_outer: 200,
        max_inner: 1000,
        outer_tol: 1e-7,
        inner_rule: InnerRule::Residual,
        eps0: 1e-6,
        eps_shrink: Some(1.0),
        ..PddConfig::default()
    };
    let out = ok(pdd_run(&toy, RealVector::zeros(n), RealVector::zeros(1), &cfg))?;
    let zerr = out.state.z.iter().map(|v| (v - 0.25).abs()).fold(0.0, f64::max);
    let lerr = (out.state.dual[0] - 0.75).abs();
    ensure(out.converged() && zerr < 1e-5 && lerr < 1e-4, || format!("z error {zerr:.2e}, λ error {lerr:.2e}"))?;
    Ok(format!("z error {zerr:.1e}, λ error {lerr:.1e}"))
}
