//! Dense real/complex linear-algebra kernels and convex projections shared by
//! the solvers.
//!
//! Everything here is a pure function of its inputs. Eigen and singular value
//! decompositions are delegated to `nalgebra`; the wrappers add the residual
//! checks, ordering and sign conventions the solvers rely on.

mod cubic;
mod eigen;
mod embed;
mod project;
mod random;
mod svd;
mod sylvester;

use nalgebra::{Complex, DMatrix, DVector};

pub use cubic::solve_monotone_cubic;
pub use eigen::{max_generalized_eig_hermitian, min_eigvec_sym, min_eigvec_sym_with};
pub use embed::{complex_from_embedded, hermitian_part, real_embed_matrix, real_embed_psd, real_embed_vec};
pub use project::{project_ball, project_simplex, project_simplex_columns};
pub use random::{complex_gaussian_matrix, complex_gaussian_vector, random_orthonormal_columns};
pub use svd::{thin_svd, thin_svd_with, ThinSvd};
pub use sylvester::{solve_sylvester, solve_sylvester_with};

pub type C64 = Complex<f64>;
pub type RealMatrix = DMatrix<f64>;
pub type RealVector = DVector<f64>;
pub type ComplexMatrix = DMatrix<C64>;
pub type ComplexVector = DVector<C64>;

/// Default tolerances for the numerics kernels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Allowed Hermitian asymmetry, relative to the largest entry.
    pub hermitian: f64,
    /// Eigen-residual bound relative to `‖C‖_F`.
    pub eigen_residual: f64,
    /// Reconstruction / orthonormality bound for the thin SVD.
    pub svd_residual: f64,
    /// Sylvester residual bound relative to `(‖A‖+‖B‖)·‖F‖`.
    pub sylvester_residual: f64,
    /// Relative residual accepted for the monotone cubic root.
    pub cubic_residual: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            hermitian: 1e-12,
            eigen_residual: 1e-9,
            svd_residual: 1e-9,
            sylvester_residual: 1e-8,
            cubic_residual: 1e-12,
        }
    }
}

/// Largest absolute entry.
pub fn max_abs<T: nalgebra::ComplexField<RealField = f64>>(m: &DMatrix<T>) -> f64 {
    m.iter().fold(0.0, |acc, x| acc.max(x.clone().abs()))
}

pub(crate) fn all_finite<T: nalgebra::ComplexField<RealField = f64>>(m: &DMatrix<T>) -> bool {
    m.iter().all(|x| x.clone().abs().is_finite())
}
