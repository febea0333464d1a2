use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::instance::{complex_gaussian, MulticastInstance};
use crate::error::{Error, Result};
use crate::numerics::{real_embed_vec, ComplexVector, RealMatrix, RealVector};

/// Below this value `‖A_k^{1/2} w̃‖` is treated as zero in the surrogate.
pub const DEGENERATE_NORM: f64 = 1e-10;

const JITTER: f64 = 1e-8;

/// Global maximiser of `s − Σ a_k (t_k − b_k)²` over `t_k ≥ s ≥ 0`.
///
/// Returns `(t, s)` with `t_k = max(b_k, s)`. The reduced objective
/// `φ(s) = s − Σ_{b_k < s} a_k (s − b_k)²` is concave, so its maximiser is
/// either `s = 0` or the stationary point of the piece on which the users with
/// the `m` smallest `b_k` are tied to `s`; every such candidate is evaluated.
pub fn solve_t_subproblem(a: &[f64], b: &[f64]) -> Result<(RealVector, f64)> {
    if a.len() != b.len() || a.is_empty() {
        return Err(Error::invalid("t-subproblem needs matching non-empty a and b"));
    }
    if a.iter().any(|&x| !(x > 0.0 && x.is_finite())) || b.iter().any(|x| !x.is_finite()) {
        return Err(Error::invalid("t-subproblem needs positive finite a and finite b"));
    }
    let phi = |s: f64| s - a.iter().zip(b).filter(|(_, &bk)| bk < s).map(|(ak, bk)| ak * (s - bk).powi(2)).sum::<f64>();

    let mut order: Vec<usize> = (0..a.len()).collect();
    order.sort_by(|&i, &j| b[i].total_cmp(&b[j]));
    let mut best_s = 0.0;
    let mut best = phi(0.0);
    let (mut sum_a, mut sum_ab) = (0.0, 0.0);
    for &k in &order {
        sum_a += a[k];
        sum_ab += a[k] * b[k];
        let s = ((1.0 + 2.0 * sum_ab) / (2.0 * sum_a)).max(0.0);
        let v = phi(s);
        if v > best {
            best = v;
            best_s = s;
        }
    }
    let t = RealVector::from_iterator(b.len(), b.iter().map(|&bk| bk.max(best_s)));
    Ok((t, best_s))
}

/// Quadratic upper bound `w_eqᵀ C w_eq + constant` of
/// `ϑ(w) = Σ_k (‖A_k^{1/2}w‖ − t_k‖B_k^{1/2}w‖ + ρλ_k)²` on the unit sphere,
/// tight at the expansion point.
#[derive(Debug, Clone)]
pub struct Surrogate {
    pub c: RealMatrix,
    pub constant: f64,
}

impl Surrogate {
    pub fn value(&self, w: &ComplexVector) -> f64 {
        let v = real_embed_vec(w);
        v.dot(&(&self.c * &v)) + self.constant
    }
}

/// `ϑ(w)`, the `w`-dependent part of the multicast AL scaled by `2ρ`.
pub fn vartheta(inst: &MulticastInstance, w: &ComplexVector, t: &RealVector, dual: &RealVector, rho: f64) -> f64 {
    let (alpha, beta) = root_forms(inst, w);
    (0..inst.n_users())
        .map(|k| (alpha[k] - t[k] * beta[k] + rho * dual[k]).powi(2))
        .sum()
}

/// `(‖A_k^{1/2}w‖, ‖B_k^{1/2}w‖)` for every user.
pub fn root_forms(inst: &MulticastInstance, w: &ComplexVector) -> (Vec<f64>, Vec<f64>) {
    let form = |m: &crate::numerics::ComplexMatrix| w.dotc(&(m * w)).re.max(0.0).sqrt();
    (0..inst.n_users()).map(|k| (form(inst.a(k)), form(inst.b(k)))).unzip()
}

/// Surrogate matrix built from Cauchy–Schwarz minorants of the product terms
/// and the concavity bound `‖x‖ ≤ ‖x‖²/(2‖x̃‖) + ‖x̃‖/2`, split on the sign of
/// each multiplier.
pub fn build_surrogate(
    inst: &MulticastInstance,
    w_tilde: &ComplexVector,
    t: &RealVector,
    dual: &RealVector,
    rho: f64,
) -> Result<Surrogate> {
    let k_users = inst.n_users();
    if t.len() != k_users || dual.len() != k_users || w_tilde.len() != inst.dim() {
        return Err(Error::invalid("surrogate inputs do not match the instance"));
    }
    let wn = w_tilde.norm();
    if !(wn > 0.0) {
        return Err(Error::invalid("surrogate expansion point must be non-zero"));
    }
    let we = real_embed_vec(w_tilde);
    let n2 = we.len();
    let mut c = RealMatrix::zeros(n2, n2);
    let mut constant = 0.0;

    for k in 0..k_users {
        let (aeq, beq) = (inst.a_eq(k), inst.b_eq(k));
        let a_vec = aeq * &we;
        let b_vec = beq * &we;
        let alpha = we.dot(&a_vec).max(0.0).sqrt();
        let beta = we.dot(&b_vec).max(0.0).sqrt();
        let (tk, lk) = (t[k], dual[k]);
        let degenerate = alpha < DEGENERATE_NORM;

        c += aeq;
        c += beq * (tk * tk);
        constant += (rho * lk).powi(2);
        if !degenerate && tk != 0.0 {
            sym_rank2(&mut c, -tk / (alpha * beta), &a_vec, &b_vec);
        }

        if lk >= 0.0 {
            let rl = rho * lk;
            if rl > 0.0 {
                // Upper bound of 2ρλ‖A^{1/2}w‖, expanded at a jittered point
                // when the natural one sits in the null space of A.
                let anchor = if degenerate { jittered_root_form(inst, k, w_tilde) } else { alpha };
                if anchor > 0.0 {
                    c += aeq * (rl / anchor);
                    constant += rl * anchor;
                }
                if tk != 0.0 {
                    sym_rank2(&mut c, -rl * tk / (wn * beta), &we, &b_vec);
                }
            }
        } else {
            let rm = -rho * lk;
            c += beq * (rm * tk / beta);
            constant += rm * tk * beta;
            if !degenerate {
                sym_rank2(&mut c, -rm / (wn * alpha), &we, &a_vec);
            }
        }
    }
    Ok(Surrogate { c, constant })
}

/// `c += s (x yᵀ + y xᵀ)`.
fn sym_rank2(c: &mut RealMatrix, s: f64, x: &RealVector, y: &RealVector) {
    c.ger(s, x, y, 1.0);
    c.ger(s, y, x, 1.0);
}

fn jittered_root_form(inst: &MulticastInstance, k: usize, w: &ComplexVector) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(k as u64);
    let jitter = complex_gaussian(w.len(), &mut rng).normalize() * crate::numerics::C64::from(JITTER);
    let wj = (w + jitter).normalize();
    let v = wj.dotc(&(inst.a(k) * &wj)).re;
    if v > 0.0 {
        v.sqrt()
    } else {
        0.0
    }
}
