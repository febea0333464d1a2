use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::instance::{complex_gaussian, MulticastInstance};
use super::metrics::{kkt_residual, min_rate};
use super::subproblem::{build_surrogate, root_forms, solve_t_subproblem};
use crate::error::{Error, Result};
use crate::io::{complex_vec_to_json, ComplexJson};
use crate::numerics::{complex_from_embedded, min_eigvec_sym, real_embed_vec, ComplexVector, RealVector, C64};
use crate::pdd::{pdd_run_with_observer, BlockProblem, OuterRecord, PddConfig, PddTrace, SweepOrder};

#[derive(Debug, Clone, PartialEq)]
pub struct MulticastIterate {
    /// Unit-norm stacked beamformer.
    pub w: ComplexVector,
    pub t: RealVector,
}

/// `max min_k t_k` subject to `‖A_k^{1/2}w‖ = t_k‖B_k^{1/2}w‖` and `‖w‖ = 1`,
/// written as a minimisation. Only the ratio constraints are dualised; the
/// unit-norm constraint is kept exactly by the `w` update.
///
/// Blocks: `0` is `t`, `1` is `w`.
#[derive(Debug, Clone, Copy)]
pub struct MulticastProblem<'a> {
    pub inst: &'a MulticastInstance,
}

pub const T_BLOCK: usize = 0;
pub const W_BLOCK: usize = 1;

/// All `K + 1` equality residuals, the last one being `‖w‖² − 1`.
pub fn constraint_h(inst: &MulticastInstance, z: &MulticastIterate) -> RealVector {
    let k = inst.n_users();
    let (alpha, beta) = root_forms(inst, &z.w);
    RealVector::from_fn(k + 1, |i, _| {
        if i < k {
            alpha[i] - z.t[i] * beta[i]
        } else {
            z.w.norm_squared() - 1.0
        }
    })
}

/// Gradient of `λᵀh + ‖h‖²/(2ρ)` (dualised part) with respect to the
/// real-embedded `w` and to `t`.
pub fn penalty_gradient(
    inst: &MulticastInstance,
    z: &MulticastIterate,
    dual: &RealVector,
    rho: f64,
) -> (RealVector, RealVector) {
    let we = real_embed_vec(&z.w);
    let mut gw = RealVector::zeros(we.len());
    let mut gt = RealVector::zeros(inst.n_users());
    for k in 0..inst.n_users() {
        let aw = inst.a_eq(k) * &we;
        let bw = inst.b_eq(k) * &we;
        let alpha = we.dot(&aw).sqrt();
        let beta = we.dot(&bw).sqrt();
        let coef = dual[k] + (alpha - z.t[k] * beta) / rho;
        if alpha > 0.0 {
            gw.axpy(coef / alpha, &aw, 1.0);
        }
        gw.axpy(-coef * z.t[k] / beta, &bw, 1.0);
        gt[k] = -coef * beta;
    }
    (gw, gt)
}

impl MulticastProblem<'_> {
    fn update_t(&self, z: &mut MulticastIterate, dual: &RealVector, rho: f64) -> Result<()> {
        let (alpha, beta) = root_forms(self.inst, &z.w);
        let a: Vec<f64> = beta.iter().map(|b| b * b / (2.0 * rho)).collect();
        let b: Vec<f64> = (0..alpha.len()).map(|k| (alpha[k] + rho * dual[k]) / beta[k]).collect();
        z.t = solve_t_subproblem(&a, &b)?.0;
        Ok(())
    }

    fn update_w(&self, z: &mut MulticastIterate, dual: &RealVector, rho: f64) -> Result<()> {
        let sur = build_surrogate(self.inst, &z.w, &z.t, dual, rho)?;
        let (v, _) = min_eigvec_sym(&sur.c)?;
        let w = complex_from_embedded(&v);
        let n = w.norm();
        if !(n > 0.0) {
            return Err(Error::numerical("beamformer update", n));
        }
        z.w = w.unscale(n);
        Ok(())
    }
}

impl BlockProblem for MulticastProblem<'_> {
    type Iterate = MulticastIterate;

    fn num_blocks(&self) -> usize {
        2
    }

    fn constraint(&self, z: &MulticastIterate) -> RealVector {
        let full = constraint_h(self.inst, z);
        full.rows(0, self.inst.n_users()).into_owned()
    }

    fn objective(&self, z: &MulticastIterate) -> f64 {
        -z.t.min()
    }

    fn update_block(&self, block: usize, z: &mut MulticastIterate, dual: &RealVector, rho: f64) -> Result<()> {
        match block {
            T_BLOCK => self.update_t(z, dual, rho),
            W_BLOCK => self.update_w(z, dual, rho),
            _ => Err(Error::invalid(format!("multicast has no block {block}"))),
        }
    }
}

/// One BSUM sweep: `t` update followed by the eigenvector `w` update.
pub fn bsum_inner_step(
    inst: &MulticastInstance,
    z: &mut MulticastIterate,
    dual: &RealVector,
    rho: f64,
) -> Result<()> {
    let p = MulticastProblem { inst };
    p.update_block(T_BLOCK, z, dual, rho)?;
    p.update_block(W_BLOCK, z, dual, rho)
}

/// Solver defaults: `ρ₀ = K/2`, `c = 0.6`, `ε₀ = 10⁻¹²` shrinking with `c`,
/// outer tolerance `10⁻⁴`, at most 100 inner sweeps.
///
/// The inner rule measures relative objective progress, which is quadratic
/// in the distance to the stationary beamformer while the KKT residual is
/// linear in it; a looser `ε₀` reaches feasibility just as fast but leaves
/// `w` visibly short of stationarity.
pub fn default_config(inst: &MulticastInstance) -> PddConfig {
    PddConfig {
        rho0: 0.5 * inst.n_users() as f64,
        c: 0.6,
        eps0: 1e-12,
        outer_tol: 1e-4,
        max_inner: 100,
        max_outer: 100,
        sweep: SweepOrder::Cyclic,
        ..PddConfig::default()
    }
}

/// Random unit `w` with `t` set so that every ratio constraint holds.
pub fn initial_iterate(inst: &MulticastInstance, seed: u64) -> MulticastIterate {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6d75_6c74);
    let w = complex_gaussian(inst.dim(), &mut rng).normalize();
    let (alpha, beta) = root_forms(inst, &w);
    let t = RealVector::from_iterator(alpha.len(), alpha.iter().zip(&beta).map(|(a, b)| a / b));
    MulticastIterate { w, t }
}

#[derive(Debug, Clone)]
pub struct MulticastSolution {
    /// Beamformer scaled to the power budget.
    pub w_scaled: ComplexVector,
    pub iterate: MulticastIterate,
    pub dual: RealVector,
    pub trace: PddTrace,
    pub min_rate_bits: f64,
    pub kkt_residual: f64,
    pub feasibility_gap: f64,
}

impl MulticastSolution {
    pub fn converged(&self) -> bool {
        self.trace.converged
    }

    pub fn iterations(&self) -> usize {
        self.trace.len()
    }

    /// Per-group beamformers `w_i` (scaled).
    pub fn group_beamformers(&self, inst: &MulticastInstance) -> Vec<ComplexVector> {
        let n_t = inst.n_t();
        (0..inst.n_groups()).map(|i| self.w_scaled.rows(i * n_t, n_t).into_owned()).collect()
    }

    pub fn to_result(&self) -> MulticastResult {
        MulticastResult {
            w: complex_vec_to_json(&self.w_scaled),
            min_rate_bits: self.min_rate_bits,
            kkt_residual: self.kkt_residual,
            feasibility_gap: self.feasibility_gap,
            iterations: self.iterations(),
            converged: self.converged(),
        }
    }
}

/// Results file contents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MulticastResult {
    pub w: Vec<ComplexJson>,
    pub min_rate_bits: f64,
    pub kkt_residual: f64,
    pub feasibility_gap: f64,
    pub iterations: usize,
    pub converged: bool,
}

pub fn solve(inst: &MulticastInstance, config: &PddConfig) -> Result<MulticastSolution> {
    solve_with_observer(inst, config, |_| {})
}

pub fn solve_with_observer<F: FnMut(&OuterRecord)>(
    inst: &MulticastInstance,
    config: &PddConfig,
    observer: F,
) -> Result<MulticastSolution> {
    let problem = MulticastProblem { inst };
    let z0 = initial_iterate(inst, config.seed);
    let out = pdd_run_with_observer(&problem, z0, RealVector::zeros(inst.n_users()), config, observer)?;
    let z = out.state.z;
    let w_scaled = &z.w * C64::from(inst.p_bs().sqrt());
    let feasibility_gap = problem.constraint(&z).amax();
    Ok(MulticastSolution {
        min_rate_bits: min_rate(&w_scaled, inst),
        kkt_residual: kkt_residual(&z.w, inst),
        feasibility_gap,
        w_scaled,
        iterate: z,
        dual: out.state.dual,
        trace: out.trace,
    })
}
