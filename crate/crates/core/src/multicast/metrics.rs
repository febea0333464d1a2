use super::instance::MulticastInstance;
use crate::numerics::{project_simplex, real_embed_vec, ComplexVector, RealMatrix, RealVector};

/// Minimum user rate in bits per channel use for power-scaled beamformers.
pub fn min_rate(w_scaled: &ComplexVector, inst: &MulticastInstance) -> f64 {
    inst.sinr(w_scaled)
        .into_iter()
        .map(|s| (1.0 + s).log2())
        .fold(f64::INFINITY, f64::min)
}

/// Real-embedded gradients `f_k` of the ratios `wᴴA_k w / wᴴB_k w`, as columns.
pub fn ratio_gradients(w: &ComplexVector, inst: &MulticastInstance) -> RealMatrix {
    let we = real_embed_vec(w);
    let mut f = RealMatrix::zeros(we.len(), inst.n_users());
    for k in 0..inst.n_users() {
        let aw = inst.a_eq(k) * &we;
        let bw = inst.b_eq(k) * &we;
        let den = we.dot(&bw);
        let ratio = we.dot(&aw) / den;
        f.set_column(k, &((aw - bw * ratio) * (2.0 / den)));
    }
    f
}

/// Distance to stationarity of the max-min ratio problem on the unit sphere:
/// `min_{λ ∈ simplex, λ₀ ∈ ℝ} ‖Σ λ_k f_k + λ₀ w‖`.
///
/// `λ₀` is eliminated by projecting out `w`; the simplex problem is solved by
/// accelerated projected gradient.
pub fn kkt_residual(w: &ComplexVector, inst: &MulticastInstance) -> f64 {
    let we = real_embed_vec(w);
    let f = ratio_gradients(w, inst);
    let m = &f - &we * (we.transpose() * &f);
    simplex_least_norm(&m).1
}

/// `argmin_{λ ∈ simplex} ‖Mλ‖` and its value.
pub(crate) fn simplex_least_norm(m: &RealMatrix) -> (RealVector, f64) {
    let k = m.ncols();
    let gram = m.transpose() * m;
    let lip = 2.0 * gram.norm().max(1e-300);
    let mut lam = RealVector::from_element(k, 1.0 / k as f64);
    let mut y = lam.clone();
    let mut theta = 1.0_f64;
    for _ in 0..200_000 {
        let grad = &gram * &y * 2.0;
        let next = project_simplex(&(&y - grad / lip)).expect("finite simplex iterate");
        let step = (&next - &lam).amax();
        let theta_next = 0.5 * (1.0 + (1.0 + 4.0 * theta * theta).sqrt());
        y = &next + (&next - &lam) * ((theta - 1.0) / theta_next);
        // Restart momentum whenever the objective would increase.
        if next.dot(&(&gram * &next)) > lam.dot(&(&gram * &lam)) {
            y = next.clone();
            theta = 1.0;
        } else {
            theta = theta_next;
        }
        lam = next;
        if step <= 1e-12 {
            break;
        }
    }
    let value = lam.dot(&(&gram * &lam)).max(0.0).sqrt();
    (lam, value)
}
