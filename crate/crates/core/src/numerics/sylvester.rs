use nalgebra::{ComplexField, DMatrix, DVector};

use super::{all_finite, Tolerances};
use crate::error::{Error, Result};

/// Solves `A·F + F·B = C` by Kronecker vectorisation,
/// `(I ⊗ A + Bᵀ ⊗ I) vec(F) = vec(C)`, with a dense LU factorisation.
///
/// Intended for the small relay sizes (`N_r ≤ 16`, so at most a 256×256
/// system). The spectra of `A` and `-B` must be disjoint.
pub fn solve_sylvester<T>(a: &DMatrix<T>, b: &DMatrix<T>, c: &DMatrix<T>) -> Result<DMatrix<T>>
where
    T: ComplexField<RealField = f64> + Copy,
{
    solve_sylvester_with(a, b, c, &Tolerances::default())
}

pub fn solve_sylvester_with<T>(
    a: &DMatrix<T>,
    b: &DMatrix<T>,
    c: &DMatrix<T>,
    tol: &Tolerances,
) -> Result<DMatrix<T>>
where
    T: ComplexField<RealField = f64> + Copy,
{
    let m = a.nrows();
    let n = b.nrows();
    if !a.is_square() || !b.is_square() || c.shape() != (m, n) {
        return Err(Error::invalid(format!(
            "Sylvester shapes: A {:?}, B {:?}, C {:?}",
            a.shape(),
            b.shape(),
            c.shape()
        )));
    }
    if !(all_finite(a) && all_finite(b) && all_finite(c)) {
        return Err(Error::invalid("Sylvester input has non-finite entries"));
    }
    if m == 0 || n == 0 {
        return Ok(DMatrix::zeros(m, n));
    }

    let dim = m * n;
    let mut kron = DMatrix::<T>::zeros(dim, dim);
    // Column-major vec: entry (i, j) of F lives at i + j*m.
    for j in 0..n {
        for k in 0..m {
            for i in 0..m {
                kron[(i + j * m, k + j * m)] += a[(i, k)];
            }
        }
        for l in 0..n {
            let blj = b[(l, j)];
            for i in 0..m {
                kron[(i + j * m, i + l * m)] += blj;
            }
        }
    }

    let lu = kron.lu();
    let u = lu.u();
    let diag: Vec<f64> = (0..dim).map(|i| u[(i, i)].abs()).collect();
    let dmax = diag.iter().cloned().fold(0.0, f64::max);
    let dmin = diag.iter().cloned().fold(f64::INFINITY, f64::min);
    let condition = if dmin > 0.0 { dmax / dmin } else { f64::INFINITY };
    if !(condition < 1e14) {
        return Err(Error::IllConditioned {
            what: "Sylvester Kronecker system".into(),
            condition,
        });
    }
    let rhs = DVector::from_column_slice(c.as_slice());
    let x = lu.solve(&rhs).ok_or_else(|| Error::IllConditioned {
        what: "Sylvester Kronecker system".into(),
        condition,
    })?;
    let f = DMatrix::from_column_slice(m, n, x.as_slice());

    let residual = (a * &f + &f * b - c).norm();
    let bound = tol.sylvester_residual * (a.norm() + b.norm()) * f.norm() + 1e-12;
    if !(residual <= bound) {
        return Err(Error::numerical("Sylvester residual", residual));
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{ComplexMatrix, RealMatrix, RealVector, C64};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_pair() {
        let m = RealMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, -1.0, 0.5, 4.0]);
        let f = solve_sylvester(&RealMatrix::identity(2, 2), &RealMatrix::identity(3, 3), &(&m * 2.0))
            .unwrap();
        assert!((f - m).norm() < 1e-13);
    }

    #[test]
    fn decoupled_rows_when_b_is_zero() {
        let d = RealVector::from_vec(vec![2.0, 4.0, 0.5]);
        let a = RealMatrix::from_diagonal(&d);
        let c = RealMatrix::from_fn(3, 2, |i, j| (i + 2 * j) as f64 - 1.0);
        let f = solve_sylvester(&a, &RealMatrix::zeros(2, 2), &c).unwrap();
        for i in 0..3 {
            for j in 0..2 {
                assert!((f[(i, j)] - c[(i, j)] / d[i]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn complex_hermitian_operators() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut cplx = |r: usize, c: usize| {
            ComplexMatrix::from_fn(r, c, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        };
        let g = cplx(4, 4);
        let h = cplx(4, 3);
        let rhs = cplx(4, 4);
        let a = &g * g.adjoint() + ComplexMatrix::identity(4, 4);
        let b = &h * h.adjoint();
        let f = solve_sylvester(&a, &b, &rhs).unwrap();
        assert!((&a * &f + &f * &b - &rhs).norm() < 1e-10);
    }

    #[test]
    fn singular_system_is_reported() {
        let a = RealMatrix::identity(2, 2);
        let b = -RealMatrix::identity(2, 2);
        let err = solve_sylvester(&a, &b, &RealMatrix::identity(2, 2)).unwrap_err();
        assert!(matches!(err, Error::IllConditioned { .. }));
    }
}
