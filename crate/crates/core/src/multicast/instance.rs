use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{complex_vec_from_json, complex_vec_to_json, ComplexJson};
use crate::numerics::{real_embed_psd, ComplexMatrix, ComplexVector, RealMatrix, C64};

/// Multi-group multicast downlink: `n_g` groups served by an `N_t`-antenna
/// base station under a total power budget.
///
/// The per-user matrices `A_k = diag(e_i) ⊗ R_k` and
/// `B_k = (I − diag(e_i)) ⊗ R_k + (σ_k²/P_BS) I`, with `R_k = h_k h_kᴴ` and `i`
/// the user's group, turn each user's SINR into the Rayleigh-type ratio
/// `wᴴA_k w / wᴴB_k w` of the stacked unit-norm beamformer `w`.
#[derive(Debug, Clone)]
pub struct MulticastInstance {
    n_t: usize,
    groups: Vec<Vec<usize>>,
    channels: Vec<ComplexVector>,
    sigma2: Vec<f64>,
    p_bs: f64,
    user_group: Vec<usize>,
    a: Vec<ComplexMatrix>,
    b: Vec<ComplexMatrix>,
    a_eq: Vec<RealMatrix>,
    b_eq: Vec<RealMatrix>,
}

/// On-disk form of [`MulticastInstance`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MulticastInstanceFile {
    #[serde(rename = "N_t")]
    pub n_t: usize,
    pub groups: Vec<Vec<usize>>,
    pub channels: Vec<Vec<ComplexJson>>,
    pub sigma2: Vec<f64>,
    #[serde(rename = "P_BS")]
    pub p_bs: f64,
}

impl MulticastInstance {
    pub fn new(
        n_t: usize,
        groups: Vec<Vec<usize>>,
        channels: Vec<ComplexVector>,
        sigma2: Vec<f64>,
        p_bs: f64,
    ) -> Result<Self> {
        let k_users = channels.len();
        if n_t == 0 || groups.is_empty() || k_users == 0 {
            return Err(Error::invalid("need at least one antenna, group and user"));
        }
        if !(p_bs > 0.0 && p_bs.is_finite()) {
            return Err(Error::invalid("P_BS must be positive"));
        }
        if sigma2.len() != k_users || sigma2.iter().any(|&s| !(s > 0.0 && s.is_finite())) {
            return Err(Error::invalid("need one positive noise power per user"));
        }
        if channels.iter().any(|h| h.len() != n_t || h.iter().any(|c| !c.re.is_finite() || !c.im.is_finite())) {
            return Err(Error::invalid(format!("every channel must be a finite vector of length {n_t}")));
        }
        let mut user_group = vec![usize::MAX; k_users];
        for (i, g) in groups.iter().enumerate() {
            if g.is_empty() {
                return Err(Error::invalid(format!("group {i} has no users")));
            }
            for &k in g {
                if k >= k_users || user_group[k] != usize::MAX {
                    return Err(Error::invalid(format!("user {k} is out of range or in several groups")));
                }
                user_group[k] = i;
            }
        }
        if user_group.contains(&usize::MAX) {
            return Err(Error::invalid("every user must belong to a group"));
        }

        let n_g = groups.len();
        let n = n_g * n_t;
        let mut a = Vec::with_capacity(k_users);
        let mut b = Vec::with_capacity(k_users);
        for (k, h) in channels.iter().enumerate() {
            let r = h * h.adjoint();
            let mut ak = ComplexMatrix::zeros(n, n);
            let mut bk = ComplexMatrix::identity(n, n) * C64::from(sigma2[k] / p_bs);
            for j in 0..n_g {
                let target = if j == user_group[k] { &mut ak } else { &mut bk };
                let mut blk = target.view_mut((j * n_t, j * n_t), (n_t, n_t));
                blk += &r;
            }
            a.push(ak);
            b.push(bk);
        }
        let a_eq = a.iter().map(real_embed_psd).collect::<Result<Vec<_>>>()?;
        let b_eq = b.iter().map(real_embed_psd).collect::<Result<Vec<_>>>()?;
        Ok(Self {
            n_t,
            groups,
            channels,
            sigma2,
            p_bs,
            user_group,
            a,
            b,
            a_eq,
            b_eq,
        })
    }

    /// Random instance with `n_g` groups of `m_g` users each, i.i.d.
    /// `CN(0, 1)` channels, unit noise and the given power budget.
    pub fn random<R: Rng + ?Sized>(n_t: usize, n_g: usize, m_g: usize, p_bs: f64, rng: &mut R) -> Result<Self> {
        let k_users = n_g * m_g;
        let channels = (0..k_users).map(|_| complex_gaussian(n_t, rng)).collect();
        let groups = (0..n_g).map(|i| (i * m_g..(i + 1) * m_g).collect()).collect();
        Self::new(n_t, groups, channels, vec![1.0; k_users], p_bs)
    }

    pub fn from_file(file: MulticastInstanceFile) -> Result<Self> {
        let channels = file.channels.iter().map(|h| complex_vec_from_json(h)).collect();
        Self::new(file.n_t, file.groups, channels, file.sigma2, file.p_bs)
    }

    pub fn to_file(&self) -> MulticastInstanceFile {
        MulticastInstanceFile {
            n_t: self.n_t,
            groups: self.groups.clone(),
            channels: self.channels.iter().map(complex_vec_to_json).collect(),
            sigma2: self.sigma2.clone(),
            p_bs: self.p_bs,
        }
    }

    pub fn n_t(&self) -> usize {
        self.n_t
    }

    pub fn n_groups(&self) -> usize {
        self.groups.len()
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    pub fn n_users(&self) -> usize {
        self.channels.len()
    }

    /// Length of the stacked beamformer, `n_g · N_t`.
    pub fn dim(&self) -> usize {
        self.groups.len() * self.n_t
    }

    pub fn p_bs(&self) -> f64 {
        self.p_bs
    }

    pub fn sigma2(&self) -> &[f64] {
        &self.sigma2
    }

    pub fn channels(&self) -> &[ComplexVector] {
        &self.channels
    }

    pub fn user_group(&self, k: usize) -> usize {
        self.user_group[k]
    }

    pub fn a(&self, k: usize) -> &ComplexMatrix {
        &self.a[k]
    }

    pub fn b(&self, k: usize) -> &ComplexMatrix {
        &self.b[k]
    }

    pub fn a_eq(&self, k: usize) -> &RealMatrix {
        &self.a_eq[k]
    }

    pub fn b_eq(&self, k: usize) -> &RealMatrix {
        &self.b_eq[k]
    }

    /// Per-user SINR of stacked beamformers `w` (already scaled to the power
    /// budget), evaluated directly from the channels.
    pub fn sinr(&self, w: &ComplexVector) -> Vec<f64> {
        let n_t = self.n_t;
        (0..self.n_users())
            .map(|k| {
                let h = &self.channels[k];
                let gain = |j: usize| h.dotc(&w.rows(j * n_t, n_t)).norm_sqr();
                let signal = gain(self.user_group[k]);
                let interference: f64 = (0..self.n_groups()).filter(|&j| j != self.user_group[k]).map(gain).sum();
                signal / (interference + self.sigma2[k])
            })
            .collect()
    }
}

pub(crate) use crate::numerics::complex_gaussian_vector as complex_gaussian;
