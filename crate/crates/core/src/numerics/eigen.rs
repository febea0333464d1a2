use nalgebra::SymmetricEigen;

use super::{all_finite, ComplexMatrix, RealMatrix, RealVector, Tolerances};
use crate::error::{Error, Result};

/// Flips `v` so its first non-negligible component is positive.
pub(crate) fn fix_sign(v: &mut RealVector) {
    let scale = v.amax();
    if let Some(x) = v.iter().copied().find(|x| x.abs() > 1e-12 * scale) {
        if x < 0.0 {
            v.neg_mut();
        }
    }
}

/// Unit eigenvector for the smallest eigenvalue of a symmetric matrix.
pub fn min_eigvec_sym(c: &RealMatrix) -> Result<(RealVector, f64)> {
    min_eigvec_sym_with(c, &Tolerances::default())
}

pub fn min_eigvec_sym_with(c: &RealMatrix, tol: &Tolerances) -> Result<(RealVector, f64)> {
    if !c.is_square() || c.nrows() == 0 {
        return Err(Error::invalid(format!(
            "eigensolver needs a non-empty square matrix, got {}x{}",
            c.nrows(),
            c.ncols()
        )));
    }
    if !all_finite(c) {
        return Err(Error::invalid("eigensolver input has non-finite entries"));
    }
    let sym = (c + c.transpose()).scale(0.5);
    let norm = sym.norm();
    let eig = SymmetricEigen::try_new(sym.clone(), f64::EPSILON, 10_000)
        .ok_or_else(|| Error::numerical("symmetric eigensolver did not converge", f64::NAN))?;
    let (idx, &lambda) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty spectrum");
    let mut v = eig.eigenvectors.column(idx).into_owned();
    v /= v.norm();
    fix_sign(&mut v);
    let residual = (&sym * &v - &v * lambda).norm();
    if !(residual <= tol.eigen_residual * norm) {
        return Err(Error::numerical("symmetric eigensolver residual", residual));
    }
    Ok((v, lambda))
}

/// Largest eigenvalue of the Hermitian-definite pencil `(A, B)`, i.e.
/// `λ_max(B⁻¹A)`, together with a `B`-normalised maximiser rescaled to unit
/// Euclidean norm.
pub fn max_generalized_eig_hermitian(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
) -> Result<(f64, super::ComplexVector)> {
    let n = a.nrows();
    if !a.is_square() || !b.is_square() || b.nrows() != n {
        return Err(Error::invalid("generalized eigenproblem needs square matrices of equal size"));
    }
    let chol = nalgebra::Cholesky::new(super::hermitian_part(b))
        .ok_or_else(|| Error::invalid("B is not positive definite"))?;
    let l = chol.l();
    let l_inv = l
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::numerical("Cholesky factor inversion", f64::NAN))?;
    let reduced = super::hermitian_part(&(&l_inv * a * l_inv.adjoint()));
    let eig = SymmetricEigen::try_new(reduced, f64::EPSILON, 10_000)
        .ok_or_else(|| Error::numerical("Hermitian eigensolver did not converge", f64::NAN))?;
    let (idx, &lambda) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty spectrum");
    let y = eig.eigenvectors.column(idx).into_owned();
    let mut x = l_inv.adjoint() * y;
    let nx = x.norm();
    x.unscale_mut(nx);
    Ok((lambda, x))
}
