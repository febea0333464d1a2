use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{ensure, ok, Property};
use crate::numerics::{
    complex_gaussian_matrix, complex_gaussian_vector, max_generalized_eig_hermitian, min_eigvec_sym, project_ball,
    project_simplex, real_embed_matrix, real_embed_vec, solve_monotone_cubic, solve_sylvester, thin_svd,
    ComplexMatrix, RealMatrix, RealVector, C64,
};

pub(super) const PROPERTIES: &[Property] = &[
    Property { id: "numerics.embedding-isometry", check: embedding_isometry },
    Property { id: "numerics.projection-idempotent", check: projection_idempotent },
    Property { id: "numerics.simplex-projection-kkt", check: simplex_kkt },
    Property { id: "numerics.sylvester-residual", check: sylvester_residual },
    Property { id: "numerics.svd-residual", check: svd_residual },
    Property { id: "numerics.eigen-residual", check: eigen_residual },
    Property { id: "numerics.cubic-root", check: cubic_root },
];

const SAMPLES: usize = 1000;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn real_matrix(r: usize, c: usize, rng: &mut ChaCha8Rng) -> RealMatrix {
    RealMatrix::from_fn(r, c, |_, _| rng.random_range(-1.0..1.0))
}

fn embedding_isometry() -> Result<String, String> {
    let mut rng = rng(1);
    for _ in 0..SAMPLES {
        let n = rng.random_range(1..7);
        let g = complex_gaussian_matrix(n, n, &mut rng);
        let m = &g + g.adjoint();
        let w = complex_gaussian_vector(n, &mut rng);
        let we = real_embed_vec(&w);
        let me = real_embed_matrix(&m);
        let direct = w.dotc(&(&m * &w)).re;
        let embedded = we.dot(&(&me * &we));
        ensure((direct - embedded).abs() <= 1e-10 * (1.0 + direct.abs()), || {
            format!("quadratic forms differ: {direct} vs {embedded}")
        })?;
        ensure((we.norm() - w.norm()).abs() <= 1e-12 * (1.0 + w.norm()), || "norm not preserved".into())?;
    }
    Ok(format!("{SAMPLES} Hermitian forms"))
}

fn projection_idempotent() -> Result<String, String> {
    let mut rng = rng(2);
    for _ in 0..SAMPLES {
        let n = rng.random_range(1..9);
        let v = RealVector::from_fn(n, |_, _| rng.random_range(-3.0..3.0));
        let p = ok(project_simplex(&v))?;
        let pp = ok(project_simplex(&p))?;
        ensure((&pp - &p).amax() <= 1e-12, || "simplex projection is not idempotent".into())?;

        let m = complex_gaussian_matrix(n, 2, &mut rng) * C64::from(rng.random_range(0.1..3.0));
        let r = rng.random_range(0.1..2.0);
        let b = ok(project_ball(&m, r))?;
        let bb = ok(project_ball(&b, r))?;
        ensure((&bb - &b).norm() <= 1e-12 * (1.0 + r), || "ball projection is not idempotent".into())?;
        ensure(b.norm() <= r * (1.0 + 1e-12), || "ball projection left the ball".into())?;
    }
    Ok(format!("{SAMPLES} simplex and ball projections"))
}

fn simplex_kkt() -> Result<String, String> {
    let mut rng = rng(3);
    for _ in 0..SAMPLES {
        let n = rng.random_range(1..12);
        let v = RealVector::from_fn(n, |_, _| rng.random_range(-2.0..2.0));
        let s = ok(project_simplex(&v))?;
        ensure((s.sum() - 1.0).abs() <= 1e-12, || format!("sum is {}", s.sum()))?;
        ensure(s.min() >= 0.0, || "negative entry".into())?;
        // Threshold from the support; every entry must equal max(v_i − θ, 0).
        let support: Vec<usize> = (0..n).filter(|&i| s[i] > 0.0).collect();
        let theta = support.iter().map(|&i| v[i] - s[i]).sum::<f64>() / support.len() as f64;
        for i in 0..n {
            let expect = (v[i] - theta).max(0.0);
            ensure((s[i] - expect).abs() <= 1e-12, || format!("entry {i}: {} vs max(v−θ,0) = {expect}", s[i]))?;
        }
    }
    Ok(format!("{SAMPLES} projections"))
}

fn sylvester_residual() -> Result<String, String> {
    let mut rng = rng(4);
    let mut worst = 0.0f64;
    for &(m, n) in &[(2usize, 3usize), (4, 4)] {
        for _ in 0..SAMPLES {
            // Shifted blocks keep the spectra of A and −B apart.
            let a = real_matrix(m, m, &mut rng) + RealMatrix::identity(m, m) * 3.0;
            let b = real_matrix(n, n, &mut rng) + RealMatrix::identity(n, n) * 3.0;
            let c = real_matrix(m, n, &mut rng);
            let f = ok(solve_sylvester(&a, &b, &c))?;
            let res = (&a * &f + &f * &b - &c).norm() / ((a.norm() + b.norm()) * f.norm() + c.norm());
            worst = worst.max(res);

            let ac = complex_gaussian_matrix(m, m, &mut rng) + ComplexMatrix::identity(m, m) * C64::from(4.0);
            let bc = complex_gaussian_matrix(n, n, &mut rng) + ComplexMatrix::identity(n, n) * C64::from(4.0);
            let cc = complex_gaussian_matrix(m, n, &mut rng);
            let fc = ok(solve_sylvester(&ac, &bc, &cc))?;
            let res = (&ac * &fc + &fc * &bc - &cc).norm() / ((ac.norm() + bc.norm()) * fc.norm() + cc.norm());
            worst = worst.max(res);
        }
    }
    ensure(worst <= 1e-12, || format!("relative residual {worst:.3e}"))?;
    Ok(format!("worst relative residual {worst:.2e}"))
}

fn svd_residual() -> Result<String, String> {
    let mut rng = rng(5);
    let mut worst = 0.0f64;
    for &(n, k) in &[(3usize, 3usize), (10, 3), (50, 3)] {
        for _ in 0..SAMPLES {
            let m = real_matrix(n, k, &mut rng);
            let svd = ok(thin_svd(&m))?;
            let res = (svd.reconstruct() - &m).norm() / m.norm().max(1e-300);
            let orth_u = (svd.u.transpose() * &svd.u - RealMatrix::identity(k, k)).amax();
            let orth_v = (svd.v.transpose() * &svd.v - RealMatrix::identity(k, k)).amax();
            worst = worst.max(res).max(orth_u).max(orth_v);
            ensure(svd.sigma.iter().zip(svd.sigma.iter().skip(1)).all(|(a, b)| a >= b), || "unsorted σ".into())?;
        }
    }
    ensure(worst <= 1e-9, || format!("residual {worst:.3e}"))?;
    Ok(format!("worst residual {worst:.2e}"))
}

fn eigen_residual() -> Result<String, String> {
    let mut rng = rng(6);
    let mut worst = 0.0f64;
    for _ in 0..SAMPLES {
        let n = rng.random_range(2..9);
        let g = real_matrix(n, n, &mut rng);
        let c = &g + g.transpose();
        let (v, lambda) = ok(min_eigvec_sym(&c))?;
        worst = worst.max((&c * &v - &v * lambda).norm() / c.norm());
        ensure((v.norm() - 1.0).abs() <= 1e-12, || "eigenvector not unit".into())?;
        let probe = RealVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
        ensure(probe.dot(&(&c * &probe)) / probe.norm_squared() >= lambda - 1e-12, || "not the minimum".into())?;

        let m = rng.random_range(1..5);
        let ga = complex_gaussian_matrix(m, m, &mut rng);
        let gb = complex_gaussian_matrix(m, m, &mut rng);
        let a = &ga * ga.adjoint();
        let b = &gb * gb.adjoint() + ComplexMatrix::identity(m, m);
        let (mu, x) = ok(max_generalized_eig_hermitian(&a, &b))?;
        worst = worst.max((&a * &x - &b * &x * C64::from(mu)).norm() / (a.norm() + mu.abs() * b.norm()));
    }
    ensure(worst <= 1e-9, || format!("residual {worst:.3e}"))?;
    Ok(format!("worst residual {worst:.2e}"))
}

fn cubic_root() -> Result<String, String> {
    let mut rng = rng(7);
    for _ in 0..SAMPLES {
        let a = 10f64.powf(rng.random_range(-3.0..4.0));
        let b = 10f64.powf(rng.random_range(-3.0..3.0));
        let d = rng.random_range(0.0..10.0);
        let s = ok(solve_monotone_cubic(a, b, d))?;
        let res = (a * s * s * s + b * s - d).abs();
        ensure(s >= 0.0 && res <= 1e-10 * (1.0 + d), || format!("root {s} residual {res:.3e}"))?;
    }
    Ok(format!("{SAMPLES} roots"))
}
