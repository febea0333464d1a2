use nalgebra::SVD;

use super::{all_finite, RealMatrix, RealVector, Tolerances};
use crate::error::{Error, Result};

/// Thin SVD `M = U·diag(σ)·Vᵀ` with `σ` sorted in descending order.
#[derive(Debug, Clone)]
pub struct ThinSvd {
    /// `N×K`, orthonormal columns.
    pub u: RealMatrix,
    pub sigma: RealVector,
    /// `K×K`, orthonormal columns.
    pub v: RealMatrix,
}

impl ThinSvd {
    pub fn reconstruct(&self) -> RealMatrix {
        &self.u * RealMatrix::from_diagonal(&self.sigma) * self.v.transpose()
    }
}

pub fn thin_svd(m: &RealMatrix) -> Result<ThinSvd> {
    thin_svd_with(m, &Tolerances::default())
}

pub fn thin_svd_with(m: &RealMatrix, tol: &Tolerances) -> Result<ThinSvd> {
    let (n, k) = m.shape();
    if n < k || k == 0 {
        return Err(Error::invalid(format!("thin SVD needs rows >= cols > 0, got {n}x{k}")));
    }
    if !all_finite(m) {
        return Err(Error::invalid("SVD input has non-finite entries"));
    }
    let svd = SVD::try_new(m.clone(), true, true, f64::EPSILON, 10_000)
        .ok_or_else(|| Error::numerical("SVD did not converge", f64::NAN))?;
    let out = arrange(svd.u.expect("requested U"), &svd.singular_values, &svd.v_t.expect("requested Vᵀ").transpose());
    if check(&out, m, tol).is_ok() {
        return Ok(out);
    }
    // Nearly repeated singular values can leave the QR sweep at ~1e-9 accuracy.
    let (u, sigma, v) = jacobi_svd(m);
    let out = arrange(u, &sigma, &v);
    check(&out, m, tol)?;
    Ok(out)
}

/// Sorts by descending `σ` and fixes signs so that the first significant
/// entry of every right singular vector is positive.
fn arrange(u_raw: RealMatrix, sv: &RealVector, v_raw: &RealMatrix) -> ThinSvd {
    let (n, k) = (u_raw.nrows(), sv.len());
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| sv[b].total_cmp(&sv[a]));

    let mut u = RealMatrix::zeros(n, k);
    let mut v = RealMatrix::zeros(k, k);
    let mut sigma = RealVector::zeros(k);
    for (dst, &src) in order.iter().enumerate() {
        sigma[dst] = sv[src];
        let mut vc = v_raw.column(src).into_owned();
        let mut uc = u_raw.column(src).into_owned();
        let scale = vc.amax();
        if let Some(x) = vc.iter().copied().find(|x| x.abs() > 1e-12 * scale) {
            if x < 0.0 {
                vc.neg_mut();
                uc.neg_mut();
            }
        }
        v.set_column(dst, &vc);
        u.set_column(dst, &uc);
    }
    ThinSvd { u, sigma, v }
}

fn check(out: &ThinSvd, m: &RealMatrix, tol: &Tolerances) -> Result<()> {
    let k = out.sigma.len();
    let recon = (out.reconstruct() - m).norm();
    let ortho_u = (out.u.transpose() * &out.u - RealMatrix::identity(k, k)).norm();
    let ortho_v = (out.v.transpose() * &out.v - RealMatrix::identity(k, k)).norm();
    if !(recon <= tol.svd_residual * m.norm().max(1e-300)) {
        return Err(Error::numerical("SVD reconstruction", recon));
    }
    if !(ortho_u <= tol.svd_residual && ortho_v <= tol.svd_residual) {
        return Err(Error::numerical("SVD orthonormality", ortho_u.max(ortho_v)));
    }
    Ok(())
}

/// One-sided (Hestenes) Jacobi SVD of a tall matrix. Returns unsorted
/// `(U, σ, V)`; columns of `U` for zero `σ` complete an orthonormal set.
fn jacobi_svd(m: &RealMatrix) -> (RealMatrix, RealVector, RealMatrix) {
    let (n, k) = m.shape();
    let mut w = m.clone();
    let mut v = RealMatrix::identity(k, k);
    for _ in 0..60 {
        let mut rotated = false;
        for p in 0..k {
            for q in p + 1..k {
                let alpha = w.column(p).norm_squared();
                let beta = w.column(q).norm_squared();
                let gamma = w.column(p).dot(&w.column(q));
                if gamma == 0.0 || gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for mat in [&mut w, &mut v] {
                    for i in 0..mat.nrows() {
                        let (a, b) = (mat[(i, p)], mat[(i, q)]);
                        mat[(i, p)] = c * a - s * b;
                        mat[(i, q)] = s * a + c * b;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let sigma = RealVector::from_fn(k, |j, _| w.column(j).norm());
    let smax = sigma.max();
    let mut u = RealMatrix::zeros(n, k);
    let mut missing = Vec::new();
    for j in 0..k {
        if sigma[j] > f64::EPSILON * smax * n as f64 && sigma[j] > 0.0 {
            u.set_column(j, &(w.column(j) / sigma[j]));
        } else {
            missing.push(j);
        }
    }
    // Complete with standard basis vectors orthogonalised against the rest.
    let mut e = 0;
    for j in missing {
        loop {
            let mut cand = RealVector::zeros(n);
            cand[e % n] = 1.0;
            e += 1;
            for i in 0..k {
                if i != j {
                    let ui = u.column(i).into_owned();
                    cand.axpy(-ui.dot(&cand), &ui, 1.0);
                }
            }
            let nrm = cand.norm();
            if nrm > 0.5 || e > 2 * n {
                u.set_column(j, &(cand / nrm));
                break;
            }
        }
    }
    (u, sigma, v)
}
