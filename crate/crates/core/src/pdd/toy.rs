//! Small quadratic block problems with closed-form block minimisers.
//!
//! They exercise the PDD driver against known optima and are shared by the
//! unit tests, the verification suites and the benches.

use super::problem::{BlockGeometry, BlockProblem};
use crate::error::{Error, Result};
use crate::numerics::{RealMatrix, RealVector};

/// `min ½zᵀQz − qᵀz + μ Σ_{j∈N} |z_j|  s.t.  Mz = d,  lo_j ≤ z_j ≤ hi_j`.
///
/// Blocks are index sets. Blocks carrying a box bound or an ℓ₁ weight must be
/// singletons so that the block minimiser stays closed form.
#[derive(Debug, Clone)]
pub struct QuadraticToy {
    pub q_mat: RealMatrix,
    pub q_vec: RealVector,
    pub m: RealMatrix,
    pub d: RealVector,
    pub blocks: Vec<Vec<usize>>,
    /// Per-coordinate box, `None` for free coordinates.
    pub bounds: Vec<Option<(f64, f64)>>,
    /// Per-coordinate ℓ₁ weight (`0` for smooth coordinates).
    pub l1: Vec<f64>,
}

impl QuadraticToy {
    pub fn new(
        q_mat: RealMatrix,
        q_vec: RealVector,
        m: RealMatrix,
        d: RealVector,
        blocks: Vec<Vec<usize>>,
    ) -> Result<Self> {
        let n = q_vec.len();
        if q_mat.shape() != (n, n) || m.ncols() != n || m.nrows() != d.len() {
            return Err(Error::invalid("inconsistent toy problem dimensions"));
        }
        let mut seen = vec![false; n];
        for &j in blocks.iter().flatten() {
            if j >= n || seen[j] {
                return Err(Error::invalid("blocks must partition the coordinates"));
            }
            seen[j] = true;
        }
        if seen.contains(&false) {
            return Err(Error::invalid("blocks must partition the coordinates"));
        }
        Ok(Self {
            q_mat,
            q_vec,
            m,
            d,
            blocks,
            bounds: vec![None; n],
            l1: vec![0.0; n],
        })
    }

    /// `min ‖z‖²  s.t.  z₁ = 1` in `n` dimensions, one block. Optimum
    /// `z = e₁` with multiplier `−2`.
    pub fn unit_norm_anchor(n: usize) -> Self {
        let mut m = RealMatrix::zeros(1, n);
        m[(0, 0)] = 1.0;
        Self::new(
            RealMatrix::identity(n, n) * 2.0,
            RealVector::zeros(n),
            m,
            RealVector::from_element(1, 1.0),
            vec![(0..n).collect()],
        )
        .expect("valid dimensions")
    }

    pub fn with_bounds(mut self, j: usize, lo: f64, hi: f64) -> Self {
        self.bounds[j] = Some((lo, hi));
        self
    }

    pub fn with_l1(mut self, j: usize, weight: f64) -> Self {
        self.l1[j] = weight;
        self
    }

    pub fn dim(&self) -> usize {
        self.q_vec.len()
    }

    /// Gradient of the smooth part of the AL.
    pub fn al_gradient(&self, z: &RealVector, dual: &RealVector, rho: f64) -> RealVector {
        let h = self.constraint(z);
        &self.q_mat * z - &self.q_vec + self.m.tr_mul(&(dual + h / rho))
    }

    fn al_hessian(&self, rho: f64) -> RealMatrix {
        &self.q_mat + self.m.tr_mul(&self.m) / rho
    }
}

impl BlockProblem for QuadraticToy {
    type Iterate = RealVector;

    fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    fn constraint(&self, z: &RealVector) -> RealVector {
        &self.m * z - &self.d
    }

    fn objective(&self, z: &RealVector) -> f64 {
        let l1: f64 = self.l1.iter().zip(z.iter()).map(|(w, x)| w * x.abs()).sum();
        0.5 * z.dot(&(&self.q_mat * z)) - self.q_vec.dot(z) + l1
    }

    fn update_block(&self, block: usize, z: &mut RealVector, dual: &RealVector, rho: f64) -> Result<()> {
        let idx = &self.blocks[block];
        let hess = self.al_hessian(rho);
        let grad = self.al_gradient(z, dual, rho);
        if let [j] = idx.as_slice() {
            let j = *j;
            let h = hess[(j, j)];
            if h <= 0.0 {
                return Err(Error::numerical("toy block curvature", h));
            }
            // 1-D model: ½h(x − z_j)² + g(x − z_j) + μ|x| over the box.
            let target = z[j] - grad[j] / h;
            let shrink = self.l1[j] / h;
            let mut x = target.signum() * (target.abs() - shrink).max(0.0);
            if let Some((lo, hi)) = self.bounds[j] {
                x = x.clamp(lo, hi);
            }
            z[j] = x;
            return Ok(());
        }
        if idx.iter().any(|&j| self.bounds[j].is_some() || self.l1[j] != 0.0) {
            return Err(Error::invalid("bounded or ℓ₁ coordinates need singleton blocks"));
        }
        let k = idx.len();
        let sub_h = RealMatrix::from_fn(k, k, |a, b| hess[(idx[a], idx[b])]);
        let sub_g = RealVector::from_fn(k, |a, _| grad[idx[a]]);
        let step = sub_h
            .cholesky()
            .ok_or_else(|| Error::numerical("toy block Hessian is not positive definite", 0.0))?
            .solve(&sub_g);
        for (a, &j) in idx.iter().enumerate() {
            z[j] -= step[a];
        }
        Ok(())
    }

    fn block_geometry(&self, block: usize) -> BlockGeometry {
        match self.blocks[block].as_slice() {
            [j] if self.l1[*j] != 0.0 => BlockGeometry::Nonsmooth,
            [j] if self.bounds[*j].is_some() => BlockGeometry::ConvexSet,
            _ => BlockGeometry::Free,
        }
    }

    fn block_point(&self, block: usize, z: &RealVector) -> Result<RealVector> {
        Ok(RealVector::from_iterator(
            self.blocks[block].len(),
            self.blocks[block].iter().map(|&j| z[j]),
        ))
    }

    fn block_gradient(&self, block: usize, z: &RealVector, dual: &RealVector, rho: f64) -> Result<RealVector> {
        let g = self.al_gradient(z, dual, rho);
        Ok(RealVector::from_iterator(
            self.blocks[block].len(),
            self.blocks[block].iter().map(|&j| g[j]),
        ))
    }

    fn project_block(&self, block: usize, mut point: RealVector) -> Result<RealVector> {
        if let [j] = self.blocks[block].as_slice() {
            if let Some((lo, hi)) = self.bounds[*j] {
                point[0] = point[0].clamp(lo, hi);
            }
        }
        Ok(point)
    }

    fn prox_block(&self, block: usize, _anchor: &RealVector, mut point: RealVector) -> Result<RealVector> {
        if let [j] = self.blocks[block].as_slice() {
            let w = self.l1[*j];
            point[0] = point[0].signum() * (point[0].abs() - w).max(0.0);
        }
        Ok(point)
    }
}
