use crate::error::{Error, Result};
use crate::numerics::RealVector;

/// Feasible-set structure of a block, used by the stationarity residuals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockGeometry {
    /// Unconstrained smooth block.
    Free,
    /// Block restricted to a closed convex set with an available projection.
    ConvexSet,
    /// Block carrying a composite nonsmooth term with an available prox.
    Nonsmooth,
}

/// An augmented-Lagrangian problem split into blocks.
///
/// The coupling constraint `h(z) = 0` is dualised by the outer loop; the AL
/// is `f(z) + λᵀh(z) + ‖h(z)‖²/(2ρ)`. Each `update_block` call must minimise
/// a locally tight upper bound of the AL in that block, so it never increases
/// the AL.
pub trait BlockProblem: Send + Sync {
    type Iterate: Clone + Send;

    fn num_blocks(&self) -> usize;

    /// Dualised constraint residual `h(z)`; its length must never change.
    fn constraint(&self, z: &Self::Iterate) -> RealVector;

    /// Original objective `f(z)` (minimisation form).
    fn objective(&self, z: &Self::Iterate) -> f64;

    fn augmented_lagrangian(&self, z: &Self::Iterate, dual: &RealVector, rho: f64) -> f64 {
        let h = self.constraint(z);
        self.objective(z) + dual.dot(&h) + h.norm_squared() / (2.0 * rho)
    }

    /// Hook run once at the start of every inner sweep, before any block
    /// update. Surrogates that must be refreshed at the sweep's starting point
    /// (but leave the AL unchanged) belong here.
    fn begin_sweep(&self, _z: &mut Self::Iterate, _dual: &RealVector, _rho: f64) -> Result<()> {
        Ok(())
    }

    /// Surrogate-minimisation update of `block`, leaving other blocks alone.
    fn update_block(
        &self,
        block: usize,
        z: &mut Self::Iterate,
        dual: &RealVector,
        rho: f64,
    ) -> Result<()>;

    fn block_geometry(&self, _block: usize) -> BlockGeometry {
        BlockGeometry::Free
    }

    /// Flattened real coordinates of `block`.
    fn block_point(&self, _block: usize, _z: &Self::Iterate) -> Result<RealVector> {
        Err(Error::Unsupported("block coordinates are not exposed by this problem".into()))
    }

    /// Gradient of the smooth part of the AL with respect to `block`, in the
    /// same coordinates as [`BlockProblem::block_point`].
    fn block_gradient(
        &self,
        _block: usize,
        _z: &Self::Iterate,
        _dual: &RealVector,
        _rho: f64,
    ) -> Result<RealVector> {
        Err(Error::Unsupported("block gradients are not available for this problem".into()))
    }

    /// Euclidean projection onto a convex-set block's feasible set.
    fn project_block(&self, _block: usize, point: RealVector) -> Result<RealVector> {
        Ok(point)
    }

    /// `argmin_v φ'(s(anchor))·s(v) + ½‖v − point‖²` for a nonsmooth block.
    fn prox_block(&self, _block: usize, _anchor: &RealVector, point: RealVector) -> Result<RealVector> {
        Ok(point)
    }
}
