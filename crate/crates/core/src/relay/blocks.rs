use super::instance::RelayInstance;
use crate::error::{Error, Result};
use crate::numerics::{project_ball, solve_sylvester, ComplexMatrix, ComplexVector, RealVector, C64};

/// Primal variables of the split relay problem plus the WMMSE receive
/// scalars `u` and weights `w` of the current sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct RelayIterate {
    pub v: ComplexMatrix,
    pub f: ComplexMatrix,
    pub x: ComplexMatrix,
    pub vbar: ComplexMatrix,
    pub fbar: ComplexMatrix,
    pub xbar: ComplexMatrix,
    pub u: ComplexVector,
    pub w: RealVector,
}

/// Multipliers of `X = FHV`, `σ_R F = σ_R F̄`, `X = X̄` and `V = V̄`.
#[derive(Debug, Clone, PartialEq)]
pub struct RelayDuals {
    pub z: ComplexMatrix,
    pub z_f: ComplexMatrix,
    pub z_x: ComplexMatrix,
    pub z_v: ComplexMatrix,
}

/// Appends the real embedding of `m`: real parts column-major, then
/// imaginary parts column-major.
pub(crate) fn push_embedded(out: &mut Vec<f64>, m: &ComplexMatrix) {
    out.extend(m.iter().map(|c| c.re));
    out.extend(m.iter().map(|c| c.im));
}

pub(crate) fn take_embedded(src: &[f64], rows: usize, cols: usize) -> ComplexMatrix {
    let n = rows * cols;
    ComplexMatrix::from_fn(rows, cols, |i, j| C64::new(src[i + j * rows], src[n + i + j * rows]))
}

impl RelayDuals {
    pub fn zeros(inst: &RelayInstance) -> Self {
        let (n_s, n_r, k) = (inst.n_s(), inst.n_r(), inst.k());
        Self {
            z: ComplexMatrix::zeros(n_r, k),
            z_f: ComplexMatrix::zeros(n_r, n_r),
            z_x: ComplexMatrix::zeros(n_r, k),
            z_v: ComplexMatrix::zeros(n_s, k),
        }
    }

    /// Reads the multipliers from the stacked real layout of [`constraint_h`].
    pub fn from_vector(inst: &RelayInstance, v: &RealVector) -> Self {
        let (n_s, n_r, k) = (inst.n_s(), inst.n_r(), inst.k());
        let s = v.as_slice();
        let mut off = 0;
        let mut next = |r: usize, c: usize| {
            let m = take_embedded(&s[off..], r, c);
            off += 2 * r * c;
            m
        };
        Self {
            z: next(n_r, k),
            z_f: next(n_r, n_r),
            z_x: next(n_r, k),
            z_v: next(n_s, k),
        }
    }

    pub fn to_vector(&self) -> RealVector {
        let mut out = Vec::new();
        for m in [&self.z, &self.z_f, &self.z_x, &self.z_v] {
            push_embedded(&mut out, m);
        }
        RealVector::from_vec(out)
    }
}

/// `(X − FHV, σ_R(F − F̄), X − X̄, V − V̄)`.
pub fn residuals(inst: &RelayInstance, z: &RelayIterate) -> [ComplexMatrix; 4] {
    [
        &z.x - &z.f * &inst.h * &z.v,
        (&z.f - &z.fbar) * C64::from(inst.sigma_r()),
        &z.x - &z.xbar,
        &z.v - &z.vbar,
    ]
}

/// Stacked real embedding of the four equality residuals.
pub fn constraint_h(inst: &RelayInstance, z: &RelayIterate) -> RealVector {
    let mut out = Vec::new();
    for m in residuals(inst, z).iter() {
        push_embedded(&mut out, m);
    }
    RealVector::from_vec(out)
}

/// MMSE receive scalars and MSE weights `w_k = 1 + SINR_k` at `(X, F)`.
pub fn wmmse_weights(inst: &RelayInstance, x: &ComplexMatrix, f: &ComplexMatrix) -> (ComplexVector, RealVector) {
    let k_users = inst.k();
    let mut u = ComplexVector::zeros(k_users);
    let mut w = RealVector::zeros(k_users);
    for k in 0..k_users {
        let gk = &inst.g[k];
        let own = gk.dotc(&x.column(k));
        let total: f64 = (0..k_users).map(|j| gk.dotc(&x.column(j)).norm_sqr()).sum::<f64>()
            + inst.sigma_r2 * (f.adjoint() * gk).norm_squared()
            + inst.sigma2[k];
        u[k] = own / C64::from(total);
        w[k] = total / (total - own.norm_sqr());
    }
    (u, w)
}

/// MSE of user `k` with receive scalar `u_k`.
pub fn mse(inst: &RelayInstance, k: usize, u: C64, x: &ComplexMatrix, f: &ComplexMatrix) -> f64 {
    let gk = &inst.g[k];
    let mut e = 0.0;
    for j in 0..inst.k() {
        let y = u.conj() * gk.dotc(&x.column(j));
        e += if j == k { (C64::new(1.0, 0.0) - y).norm_sqr() } else { y.norm_sqr() };
    }
    e + u.norm_sqr() * (inst.sigma_r2 * (f.adjoint() * gk).norm_squared() + inst.sigma2[k])
}

/// `G_w = Σ w_k α_k |u_k|² g_k g_kᴴ` and `D_w = diag(w_k α_k u_k)`.
pub fn weighted_matrices(inst: &RelayInstance, u: &ComplexVector, w: &RealVector) -> (ComplexMatrix, ComplexMatrix) {
    let n_r = inst.n_r();
    let mut gw = ComplexMatrix::zeros(n_r, n_r);
    for k in 0..inst.k() {
        let s = w[k] * inst.alpha[k] * u[k].norm_sqr();
        gw += &inst.g[k] * inst.g[k].adjoint() * C64::from(s);
    }
    let dw = ComplexMatrix::from_diagonal(&ComplexVector::from_fn(inst.k(), |k, _| u[k] * (w[k] * inst.alpha[k])));
    (gw, dw)
}

/// Majorizer minimised by the block updates: `Σ w_k α_k e_k + P_ρ` with
/// `P_ρ = ‖h + ρZ‖²/(2ρ)` summed over the four residuals.
pub fn surrogate_value(inst: &RelayInstance, z: &RelayIterate, duals: &RelayDuals, rho: f64) -> f64 {
    let wmse: f64 = (0..inst.k())
        .map(|k| z.w[k] * inst.alpha[k] * mse(inst, k, z.u[k], &z.x, &z.f))
        .sum();
    let r = residuals(inst, z);
    let zs = [&duals.z, &duals.z_f, &duals.z_x, &duals.z_v];
    let pen: f64 = r.iter().zip(zs).map(|(ri, zi)| (ri + zi * C64::from(rho)).norm_squared()).sum();
    wmse + pen / (2.0 * rho)
}

fn hermitian_solve(a: ComplexMatrix, b: &ComplexMatrix, what: &str) -> Result<ComplexMatrix> {
    let chol = a
        .cholesky()
        .ok_or_else(|| Error::numerical(format!("{what}: operator is not positive definite"), f64::NAN))?;
    Ok(chol.solve(b))
}

/// Exact `F` minimiser of the majorizer: the Sylvester equation
/// `σ_R²(2ρG_w + I)F + F·HVVᴴHᴴ = σ_R(σ_R F̄ − ρZ_f) + (X + ρZ)VᴴHᴴ`.
pub fn update_f(inst: &RelayInstance, z: &RelayIterate, duals: &RelayDuals, rho: f64) -> Result<ComplexMatrix> {
    let n_r = inst.n_r();
    let (gw, _) = weighted_matrices(inst, &z.u, &z.w);
    let sr = C64::from(inst.sigma_r());
    let hv = &inst.h * &z.v;
    let a = (gw * C64::from(2.0 * rho) + ComplexMatrix::identity(n_r, n_r)) * C64::from(inst.sigma_r2);
    let b = &hv * hv.adjoint();
    let c = (&z.fbar * sr - &duals.z_f * C64::from(rho)) * sr + (&z.x + &duals.z * C64::from(rho)) * hv.adjoint();
    solve_sylvester(&a, &b, &c)
}

/// Projections `V̄ = P(V + ρZ_v)` onto the source ball and
/// `[X̄, σ_R F̄] = P([X + ρZ_x, σ_R F + ρZ_f])` onto the relay ball.
/// Returns `(V̄, X̄, F̄)`.
pub fn update_bars(
    inst: &RelayInstance,
    z: &RelayIterate,
    duals: &RelayDuals,
    rho: f64,
) -> Result<(ComplexMatrix, ComplexMatrix, ComplexMatrix)> {
    let r = C64::from(rho);
    let vbar = project_ball(&(&z.v + &duals.z_v * r), inst.p_s.sqrt())?;
    let px = &z.x + &duals.z_x * r;
    let pf = &z.f * C64::from(inst.sigma_r()) + &duals.z_f * r;
    let (xbar, fbar_scaled) = project_pair(&px, &pf, inst.p_r.sqrt());
    Ok((vbar, xbar, fbar_scaled.unscale(inst.sigma_r())))
}

/// Projection of the concatenation `[a, b]` onto the Frobenius ball of radius `r`.
pub(crate) fn project_pair(a: &ComplexMatrix, b: &ComplexMatrix, r: f64) -> (ComplexMatrix, ComplexMatrix) {
    let norm = (a.norm_squared() + b.norm_squared()).sqrt();
    if norm <= r {
        (a.clone(), b.clone())
    } else {
        let s = r / norm;
        (a.scale(s), b.scale(s))
    }
}

/// `X = ½(ρG_w + I)⁻¹(2ρ G D_w + (FHV − ρZ) + (X̄ − ρZ_x))`.
pub fn update_x(inst: &RelayInstance, z: &RelayIterate, duals: &RelayDuals, rho: f64) -> Result<ComplexMatrix> {
    let n_r = inst.n_r();
    let r = C64::from(rho);
    let (gw, dw) = weighted_matrices(inst, &z.u, &z.w);
    let lhs = gw * r + ComplexMatrix::identity(n_r, n_r);
    let rhs = inst.g_matrix() * dw * C64::from(2.0 * rho) + (&z.f * &inst.h * &z.v - &duals.z * r) + (&z.xbar - &duals.z_x * r);
    Ok(hermitian_solve(lhs, &rhs, "X update")? * C64::from(0.5))
}

/// `V = (I + HᴴFᴴFH)⁻¹(V̄ − ρZ_v + HᴴFᴴ(X + ρZ))`.
pub fn update_v(inst: &RelayInstance, z: &RelayIterate, duals: &RelayDuals, rho: f64) -> Result<ComplexMatrix> {
    let n_s = inst.n_s();
    let r = C64::from(rho);
    let fh = &z.f * &inst.h;
    let lhs = fh.adjoint() * &fh + ComplexMatrix::identity(n_s, n_s);
    let rhs = &z.vbar - &duals.z_v * r + fh.adjoint() * (&z.x + &duals.z * r);
    hermitian_solve(lhs, &rhs, "V update")
}

/// Real gradient (`∂/∂Re + i ∂/∂Im`) of the augmented Lagrangian with respect
/// to each primal matrix.
#[derive(Debug, Clone)]
pub struct RelayGradient {
    pub v: ComplexMatrix,
    pub f: ComplexMatrix,
    pub x: ComplexMatrix,
    pub vbar: ComplexMatrix,
    pub fbar: ComplexMatrix,
    pub xbar: ComplexMatrix,
}

/// Gradient of `−Σ α_k log(1 + γ_k(X, F)) + Re⟨Z, h⟩ + ‖h‖²/(2ρ)`.
pub fn al_gradient(inst: &RelayInstance, z: &RelayIterate, duals: &RelayDuals, rho: f64) -> RelayGradient {
    let k_users = inst.k();
    let mut gx = ComplexMatrix::zeros(inst.n_r(), k_users);
    let mut gf = ComplexMatrix::zeros(inst.n_r(), inst.n_r());
    for k in 0..k_users {
        let gk = &inst.g[k];
        let proj: Vec<C64> = (0..k_users).map(|j| gk.dotc(&z.x.column(j))).collect();
        let gf_k = z.f.adjoint() * gk;
        let relay = inst.sigma_r2 * gf_k.norm_squared() + inst.sigma2[k];
        let total: f64 = proj.iter().map(|p| p.norm_sqr()).sum::<f64>() + relay;
        let interf = total - proj[k].norm_sqr();
        // d/dX of −α(log T − log I), where T includes user k's own signal.
        for j in 0..k_users {
            let coef = if j == k { 1.0 / total } else { 1.0 / total - 1.0 / interf };
            let col = gk * (proj[j] * C64::from(-2.0 * inst.alpha[k] * coef));
            let mut target = gx.column_mut(j);
            target += col;
        }
        let coef = -2.0 * inst.alpha[k] * inst.sigma_r2 * (1.0 / total - 1.0 / interf);
        gf += gk * gf_k.adjoint() * C64::from(coef);
    }

    let r = residuals(inst, z);
    let inv = C64::from(1.0 / rho);
    let m1 = &duals.z + &r[0] * inv;
    let m2 = &duals.z_f + &r[1] * inv;
    let m3 = &duals.z_x + &r[2] * inv;
    let m4 = &duals.z_v + &r[3] * inv;
    let sr = C64::from(inst.sigma_r());
    let hv = &inst.h * &z.v;
    let fh = &z.f * &inst.h;
    RelayGradient {
        x: gx + &m1 + &m3,
        f: gf - &m1 * hv.adjoint() + &m2 * sr,
        v: -(fh.adjoint() * &m1) + &m4,
        xbar: -m3,
        fbar: -(m2 * sr),
        vbar: -m4,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::complex_gaussian_matrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    pub(crate) fn random_point(seed: u64, dims: (usize, usize, usize)) -> (RelayInstance, RelayIterate, RelayDuals, f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (n_s, n_r, k) = dims;
        let inst = RelayInstance::random(n_s, n_r, k, 10.0, &mut rng).unwrap();
        let mut m = |r, c| complex_gaussian_matrix(r, c, &mut rng);
        let (v, f, x) = (m(n_s, k), m(n_r, n_r), m(n_r, k));
        let (vbar, fbar, xbar) = (m(n_s, k), m(n_r, n_r), m(n_r, k));
        let duals = RelayDuals { z: m(n_r, k), z_f: m(n_r, n_r), z_x: m(n_r, k), z_v: m(n_s, k) };
        let (u, w) = wmmse_weights(&inst, &x, &f);
        (inst, RelayIterate { v, f, x, vbar, fbar, xbar, u, w }, duals, 0.7)
    }

    #[test]
    fn scalar_wmmse_weights() {
        let one = ComplexMatrix::identity(1, 1);
        let inst = RelayInstance::new(one.clone(), vec![ComplexVector::from_element(1, C64::new(1.0, 0.0))], 1.0, vec![1.0], 1.0, 1.0, vec![1.0]).unwrap();
        let (u, w) = wmmse_weights(&inst, &one, &ComplexMatrix::zeros(1, 1));
        assert!((u[0] - C64::new(0.5, 0.0)).norm() < 1e-15);
        assert!((w[0] - 2.0).abs() < 1e-15);
        let (u, w) = wmmse_weights(&inst, &ComplexMatrix::zeros(1, 1), &one);
        assert_eq!(u[0], C64::new(0.0, 0.0));
        assert_eq!(w[0], 1.0);
    }

    #[test]
    fn weights_match_rate_and_lower_bound_is_tight() {
        let (inst, z, _, _) = random_point(1, (3, 3, 2));
        let sinr = inst.sinr_x(&z.x, &z.f);
        for k in 0..inst.k() {
            assert!((z.w[k].ln() - sinr[k].ln_1p()).abs() < 1e-10);
            let bound = z.w[k].ln() - z.w[k] * mse(&inst, k, z.u[k], &z.x, &z.f) + 1.0;
            assert!((bound - sinr[k].ln_1p()).abs() < 1e-10);
        }
    }

    #[test]
    fn dual_layout_round_trips() {
        let (inst, _, duals, _) = random_point(2, (2, 3, 2));
        assert_eq!(RelayDuals::from_vector(&inst, &duals.to_vector()), duals);
    }

    #[test]
    fn dual_inner_product_matches_embedding() {
        let (inst, z, duals, _) = random_point(3, (2, 2, 2));
        let r = residuals(&inst, &z);
        let direct: f64 = r.iter().zip([&duals.z, &duals.z_f, &duals.z_x, &duals.z_v]).map(|(ri, zi)| zi.dotc(ri).re).sum();
        assert!((duals.to_vector().dot(&constraint_h(&inst, &z)) - direct).abs() < 1e-10);
    }

    fn block_updates_are_stationary_for(seed: u64) {
        let (inst, mut z, duals, rho) = random_point(seed, (3, 2, 2));
        z.f = update_f(&inst, &z, &duals, rho).unwrap();
        // Surrogate F-gradient: σ_R²G_w F·2 + (1/ρ)(−(X − FHV + ρZ)(HV)ᴴ + σ_R(σ_R F − σ_R F̄ + ρZ_f)).
        let (gw, dw) = weighted_matrices(&inst, &z.u, &z.w);
        let sr = C64::from(inst.sigma_r());
        let r = C64::from(rho);
        let hv = &inst.h * &z.v;
        let res1 = &z.x - &z.f * &hv + &duals.z * r;
        let grad_f = &gw * &z.f * C64::from(2.0 * inst.sigma_r2)
            + (-(&res1 * hv.adjoint()) + ((&z.f - &z.fbar) * sr + &duals.z_f * r) * sr) * C64::from(1.0 / rho);
        assert!(grad_f.norm() < 1e-7, "F gradient {}", grad_f.norm());

        z.x = update_x(&inst, &z, &duals, rho).unwrap();
        let res1 = &z.x - &z.f * &hv + &duals.z * r;
        let res3 = &z.x - &z.xbar + &duals.z_x * r;
        let grad_x = (&gw * &z.x - inst.g_matrix() * &dw) * C64::from(2.0) + (res1 + res3) * C64::from(1.0 / rho);
        assert!(grad_x.norm() < 1e-8, "X gradient {}", grad_x.norm());

        z.v = update_v(&inst, &z, &duals, rho).unwrap();
        let fh = &z.f * &inst.h;
        let res1 = &z.x - &fh * &z.v + &duals.z * r;
        let res4 = &z.v - &z.vbar + &duals.z_v * r;
        let grad_v = (-(fh.adjoint() * res1) + res4) * C64::from(1.0 / rho);
        assert!(grad_v.norm() < 1e-8, "V gradient {}", grad_v.norm());
    }

    #[test]
    fn closed_form_blocks_zero_their_gradients() {
        for seed in 0..10 {
            block_updates_are_stationary_for(seed);
        }
    }

    #[test]
    fn specialisations_of_block_updates() {
        let (inst, mut z, duals, rho) = random_point(4, (2, 2, 2));
        let r = C64::from(rho);
        // V = 0 decouples F.
        z.v = ComplexMatrix::zeros(2, 2);
        let (gw, _) = weighted_matrices(&inst, &z.u, &z.w);
        let expect = (gw * C64::from(2.0 * rho) + ComplexMatrix::identity(2, 2)).try_inverse().unwrap()
            * (&z.fbar - &duals.z_f * C64::from(rho / inst.sigma_r()));
        assert!((update_f(&inst, &z, &duals, rho).unwrap() - expect).norm() < 1e-10);
        // F = 0 gives V = V̄ − ρZ_v.
        z.f = ComplexMatrix::zeros(2, 2);
        assert!((update_v(&inst, &z, &duals, rho).unwrap() - (&z.vbar - &duals.z_v * r)).norm() < 1e-12);
        // u = 0 removes the WMMSE terms from the X update.
        z.u = ComplexVector::zeros(2);
        let expect = ((&z.f * &inst.h * &z.v - &duals.z * r) + (&z.xbar - &duals.z_x * r)) * C64::from(0.5);
        assert!((update_x(&inst, &z, &duals, rho).unwrap() - expect).norm() < 1e-12);
    }

    #[test]
    fn bars_stay_in_budget_and_fix_interior_points() {
        let (inst, z, duals, rho) = random_point(5, (2, 2, 2));
        let (vbar, xbar, fbar) = update_bars(&inst, &z, &duals, rho).unwrap();
        assert!(vbar.norm_squared() <= inst.p_s + 1e-8);
        assert!(xbar.norm_squared() + inst.sigma_r2 * fbar.norm_squared() <= inst.p_r + 1e-8);
        let zero = RelayDuals::zeros(&inst);
        let mut small = z.clone();
        small.v = &z.v * C64::from(1e-3);
        small.x = &z.x * C64::from(1e-3);
        small.f = &z.f * C64::from(1e-3);
        let (vbar, xbar, fbar) = update_bars(&inst, &small, &zero, rho).unwrap();
        assert!((vbar - &small.v).norm() < 1e-15 && (xbar - &small.x).norm() < 1e-15);
        assert!((fbar - &small.f).norm() < 1e-12);
    }
}
