use super::{max_abs, ComplexMatrix, ComplexVector, RealMatrix, RealVector, Tolerances, C64};
use crate::error::{Error, Result};

/// Stacks `(Re w, Im w)`.
pub fn real_embed_vec(w: &ComplexVector) -> RealVector {
    let n = w.len();
    RealVector::from_fn(2 * n, |i, _| if i < n { w[i].re } else { w[i - n].im })
}

/// Inverse of [`real_embed_vec`]. Panics on odd length.
pub fn complex_from_embedded(v: &RealVector) -> ComplexVector {
    assert!(v.len() % 2 == 0, "embedded vector must have even length");
    let n = v.len() / 2;
    ComplexVector::from_fn(n, |i, _| C64::new(v[i], v[i + n]))
}

/// `[[Re M, -Im M], [Im M, Re M]]` without any symmetry check.
pub fn real_embed_matrix(m: &ComplexMatrix) -> RealMatrix {
    let (r, c) = m.shape();
    let mut out = RealMatrix::zeros(2 * r, 2 * c);
    for j in 0..c {
        for i in 0..r {
            let z = m[(i, j)];
            out[(i, j)] = z.re;
            out[(i + r, j + c)] = z.re;
            out[(i, j + c)] = -z.im;
            out[(i + r, j)] = z.im;
        }
    }
    out
}

/// `(M + Mᴴ)/2`.
pub fn hermitian_part(m: &ComplexMatrix) -> ComplexMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Real embedding of a Hermitian matrix, so that `wᴴ M w = w_eqᵀ M_eq w_eq`.
///
/// The input is symmetrised by averaging with its conjugate transpose; an
/// asymmetry larger than the Hermitian tolerance (relative to the largest
/// entry) is rejected.
pub fn real_embed_psd(m: &ComplexMatrix) -> Result<RealMatrix> {
    if !m.is_square() {
        return Err(Error::invalid(format!(
            "expected a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let tol = Tolerances::default().hermitian * max_abs(m).max(1.0);
    let skew = max_abs(&(m - m.adjoint()));
    if skew > tol {
        return Err(Error::invalid(format!(
            "matrix is not Hermitian (max |M - Mᴴ| = {skew:.3e})"
        )));
    }
    Ok(real_embed_matrix(&hermitian_part(m)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(n: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
        let g = ComplexMatrix::from_fn(n, n, |_, _| {
            C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        hermitian_part(&g)
    }

    #[test]
    fn identity_embeds_to_identity() {
        let m = ComplexMatrix::identity(2, 2);
        assert_eq!(real_embed_psd(&m).unwrap(), RealMatrix::identity(4, 4));
    }

    #[test]
    fn imaginary_unit_vector() {
        let w = ComplexVector::from_vec(vec![C64::new(0.0, 1.0), C64::new(0.0, 0.0)]);
        let e = real_embed_vec(&w);
        assert_eq!(e.as_slice(), &[0.0, 0.0, 1.0, 0.0]);
        assert_eq!(e.norm(), 1.0);
        assert_eq!(complex_from_embedded(&e), w);
    }

    #[test]
    fn quadratic_forms_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let n = rng.random_range(1..6);
            let m = random_hermitian(n, &mut rng);
            let mut w = ComplexVector::from_fn(n, |_, _| {
                C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
            });
            w /= C64::from(w.norm());
            let lhs = (w.adjoint() * &m * &w)[(0, 0)];
            let we = real_embed_vec(&w);
            let rhs = we.dot(&(real_embed_psd(&m).unwrap() * &we));
            assert!((lhs.re - rhs).abs() < 1e-10);
            assert!(lhs.im.abs() < 1e-10);
            assert!((we.norm() - w.norm()).abs() < 1e-14);
        }
    }

    #[test]
    fn rejects_non_hermitian_and_non_square() {
        let m = ComplexMatrix::from_row_slice(2, 2, &[
            C64::new(1.0, 0.0),
            C64::new(1.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(1.0, 0.0),
        ]);
        assert!(matches!(real_embed_psd(&m), Err(Error::InvalidInput(_))));
        let r = ComplexMatrix::zeros(2, 3);
        assert!(matches!(real_embed_psd(&r), Err(Error::InvalidInput(_))));
    }
}
