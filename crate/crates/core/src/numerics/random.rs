use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{ComplexMatrix, ComplexVector, C64};

/// I.i.d. circularly-symmetric `CN(0, 1)` entries.
pub fn complex_gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        C64::new(s * re, s * im)
    })
}

pub fn complex_gaussian_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexVector {
    complex_gaussian_matrix(n, 1, rng).column(0).into_owned()
}

/// `cols` orthonormal columns of a Haar-random `n × n` unitary (`cols ≤ n`).
pub fn random_orthonormal_columns<R: Rng + ?Sized>(n: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    assert!(cols <= n, "cannot draw {cols} orthonormal columns in dimension {n}");
    let qr = complex_gaussian_matrix(n, cols, rng).qr();
    let (q, r) = (qr.q(), qr.r());
    // Rotate each column by the phase of R's diagonal so the draw is Haar.
    let mut out = q;
    for j in 0..cols {
        let d = r[(j, j)];
        let n = d.norm();
        if n > 0.0 {
            let phase = d / C64::from(n);
            let col = out.column(j) * phase;
            out.set_column(j, &col);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn orthonormal_columns_are_orthonormal() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let q = random_orthonormal_columns(5, 3, &mut rng);
        let gram = q.adjoint() * &q;
        assert!((gram - ComplexMatrix::identity(3, 3)).norm() < 1e-12);
    }
}
