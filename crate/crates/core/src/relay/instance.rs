use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{complex_mat_from_json, complex_mat_to_json, complex_vec_from_json, complex_vec_to_json, ComplexJson};
use crate::numerics::{ComplexMatrix, ComplexVector, C64};

/// Multi-antenna amplify-and-forward relay broadcast channel: an `N_s`-antenna
/// source reaches `K` single-antenna users through an `N_r`-antenna relay.
#[derive(Debug, Clone)]
pub struct RelayInstance {
    /// Source-to-relay channel, `N_r × N_s`.
    pub h: ComplexMatrix,
    /// Conjugated relay-to-user channels, one `N_r` vector per user.
    pub g: Vec<ComplexVector>,
    pub sigma_r2: f64,
    pub sigma2: Vec<f64>,
    pub p_s: f64,
    pub p_r: f64,
    pub alpha: Vec<f64>,
}

/// On-disk form of [`RelayInstance`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelayInstanceFile {
    #[serde(rename = "N_s")]
    pub n_s: usize,
    #[serde(rename = "N_r")]
    pub n_r: usize,
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "H")]
    pub h: Vec<Vec<ComplexJson>>,
    pub g: Vec<Vec<ComplexJson>>,
    #[serde(rename = "sigma_R2")]
    pub sigma_r2: f64,
    pub sigma2: Vec<f64>,
    #[serde(rename = "P_S")]
    pub p_s: f64,
    #[serde(rename = "P_R")]
    pub p_r: f64,
    pub alpha: Vec<f64>,
}

fn positive(x: f64) -> bool {
    x > 0.0 && x.is_finite()
}

impl RelayInstance {
    pub fn new(
        h: ComplexMatrix,
        g: Vec<ComplexVector>,
        sigma_r2: f64,
        sigma2: Vec<f64>,
        p_s: f64,
        p_r: f64,
        alpha: Vec<f64>,
    ) -> Result<Self> {
        let (n_r, n_s) = h.shape();
        let k = g.len();
        if n_r == 0 || n_s == 0 || k == 0 {
            return Err(Error::invalid("relay instance needs N_s, N_r, K >= 1"));
        }
        if g.iter().any(|gk| gk.len() != n_r) {
            return Err(Error::invalid(format!("every user channel must have length N_r = {n_r}")));
        }
        if !positive(sigma_r2) {
            return Err(Error::invalid("relay noise power sigma_R2 must be positive"));
        }
        if sigma2.len() != k || !sigma2.iter().all(|&s| positive(s)) {
            return Err(Error::invalid("need one positive noise power per user"));
        }
        if alpha.len() != k || !alpha.iter().all(|&a| positive(a)) {
            return Err(Error::invalid("need one positive weight per user"));
        }
        if !positive(p_s) || !positive(p_r) {
            return Err(Error::invalid("power budgets must be positive"));
        }
        let finite = |m: &ComplexMatrix| m.iter().all(|c| c.re.is_finite() && c.im.is_finite());
        if !finite(&h) || g.iter().any(|gk| gk.iter().any(|c| !c.re.is_finite() || !c.im.is_finite())) {
            return Err(Error::invalid("channels must be finite"));
        }
        Ok(Self { h, g, sigma_r2, sigma2, p_s, p_r, alpha })
    }

    /// I.i.d. `CN(0, 1)` channels, unit noise, unit weights and
    /// `P_S = P_R = 10^{snr_db/10}`.
    pub fn random<R: Rng + ?Sized>(n_s: usize, n_r: usize, k: usize, snr_db: f64, rng: &mut R) -> Result<Self> {
        let p = 10f64.powf(snr_db / 10.0);
        let h = crate::numerics::complex_gaussian_matrix(n_r, n_s, rng);
        let g = (0..k).map(|_| crate::numerics::complex_gaussian_vector(n_r, rng)).collect();
        Self::new(h, g, 1.0, vec![1.0; k], p, p, vec![1.0; k])
    }

    pub fn from_file(file: RelayInstanceFile) -> Result<Self> {
        let h = complex_mat_from_json(&file.h)?;
        if h.shape() != (file.n_r, file.n_s) || file.g.len() != file.k {
            return Err(Error::invalid("relay instance dimensions do not match N_s, N_r, K"));
        }
        let g = file.g.iter().map(|v| complex_vec_from_json(v)).collect();
        Self::new(h, g, file.sigma_r2, file.sigma2, file.p_s, file.p_r, file.alpha)
    }

    pub fn to_file(&self) -> RelayInstanceFile {
        RelayInstanceFile {
            n_s: self.n_s(),
            n_r: self.n_r(),
            k: self.k(),
            h: complex_mat_to_json(&self.h),
            g: self.g.iter().map(complex_vec_to_json).collect(),
            sigma_r2: self.sigma_r2,
            sigma2: self.sigma2.clone(),
            p_s: self.p_s,
            p_r: self.p_r,
            alpha: self.alpha.clone(),
        }
    }

    pub fn n_s(&self) -> usize {
        self.h.ncols()
    }

    pub fn n_r(&self) -> usize {
        self.h.nrows()
    }

    pub fn k(&self) -> usize {
        self.g.len()
    }

    pub fn sigma_r(&self) -> f64 {
        self.sigma_r2.sqrt()
    }

    /// `G = [g_1 … g_K]`, `N_r × K`.
    pub fn g_matrix(&self) -> ComplexMatrix {
        ComplexMatrix::from_columns(&self.g)
    }

    /// Per-user SINR when the relay forwards the effective signals `X`
    /// (column `k` carries user `k`) with precoder `F`.
    pub fn sinr_x(&self, x: &ComplexMatrix, f: &ComplexMatrix) -> Vec<f64> {
        (0..self.k())
            .map(|k| {
                let gk = &self.g[k];
                let gains: Vec<f64> = (0..self.k()).map(|j| gk.dotc(&x.column(j)).norm_sqr()).collect();
                let relay_noise = self.sigma_r2 * (f.adjoint() * gk).norm_squared();
                let interference: f64 = gains.iter().enumerate().filter(|(j, _)| *j != k).map(|(_, v)| v).sum();
                gains[k] / (interference + relay_noise + self.sigma2[k])
            })
            .collect()
    }

    pub fn sinr(&self, v: &ComplexMatrix, f: &ComplexMatrix) -> Vec<f64> {
        self.sinr_x(&(f * &self.h * v), f)
    }

    /// Weighted sum rate in nats.
    pub fn sum_rate(&self, v: &ComplexMatrix, f: &ComplexMatrix) -> f64 {
        self.weighted_rate(&self.sinr(v, f))
    }

    pub fn weighted_rate(&self, sinr: &[f64]) -> f64 {
        sinr.iter().zip(&self.alpha).map(|(s, a)| a * s.ln_1p()).sum()
    }

    pub fn source_power(&self, v: &ComplexMatrix) -> f64 {
        v.norm_squared()
    }

    pub fn relay_power(&self, v: &ComplexMatrix, f: &ComplexMatrix) -> f64 {
        (f * &self.h * v).norm_squared() + self.sigma_r2 * f.norm_squared()
    }

    /// Scale `V` to use the full source budget, then `F` to use the full
    /// relay budget given the scaled `V`. Every SINR is non-decreasing in
    /// each of the two scales, so filling the budgets is the natural repair.
    /// Returns the repaired pair and the two scale factors.
    pub fn repair(&self, v: &ComplexMatrix, f: &ComplexMatrix) -> (ComplexMatrix, ComplexMatrix, [f64; 2]) {
        let pv = self.source_power(v);
        let sv = if pv > 0.0 { (self.p_s / pv).sqrt() } else { 1.0 };
        let v2 = v * C64::from(sv);
        let pr = self.relay_power(&v2, f);
        let sf = if pr > 0.0 { (self.p_r / pr).sqrt() } else { 1.0 };
        let f2 = f * C64::from(sf);
        (v2, f2, [sv, sf])
    }
}
