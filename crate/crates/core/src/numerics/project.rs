use nalgebra::{ComplexField, DMatrix};

use super::{RealMatrix, RealVector};
use crate::error::{Error, Result};

/// Euclidean projection onto the Frobenius ball of radius `r` centred at 0.
pub fn project_ball<T>(m: &DMatrix<T>, r: f64) -> Result<DMatrix<T>>
where
    T: ComplexField<RealField = f64> + Copy,
{
    if !(r >= 0.0) {
        return Err(Error::invalid(format!("ball radius must be non-negative, got {r}")));
    }
    let norm = m.norm();
    if norm <= r {
        Ok(m.clone())
    } else {
        Ok(m.unscale(norm / r))
    }
}

/// Projection onto the probability simplex `{s ≥ 0, 1ᵀs = 1}` by sorting and
/// thresholding: `s_i = max(v_i − θ, 0)` with `θ` chosen so the entries sum
/// to one.
pub fn project_simplex(v: &RealVector) -> Result<RealVector> {
    if v.is_empty() {
        return Err(Error::invalid("cannot project an empty vector onto the simplex"));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::invalid("simplex projection input has non-finite entries"));
    }
    let mut out = v.clone();
    project_slice(out.as_mut_slice(), &mut Vec::with_capacity(v.len()));
    Ok(out)
}

/// Column-wise simplex projection.
pub fn project_simplex_columns(m: &RealMatrix) -> Result<RealMatrix> {
    if m.nrows() == 0 {
        return Err(Error::invalid("cannot project empty columns onto the simplex"));
    }
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::invalid("simplex projection input has non-finite entries"));
    }
    let mut out = m.clone();
    let mut scratch = Vec::with_capacity(m.nrows());
    for mut col in out.column_iter_mut() {
        project_slice(col.as_mut_slice(), &mut scratch);
    }
    Ok(out)
}

fn project_slice(x: &mut [f64], sorted: &mut Vec<f64>) {
    sorted.clear();
    sorted.extend_from_slice(x);
    sorted.sort_unstable_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (i, &u) in sorted.iter().enumerate() {
        cumsum += u;
        let t = (cumsum - 1.0) / (i + 1) as f64;
        if u - t > 0.0 {
            theta = t;
        } else {
            break;
        }
    }
    for xi in x.iter_mut() {
        *xi = (*xi - theta).max(0.0);
    }
    // Renormalise away the last bit of rounding so 1ᵀs = 1 holds tightly.
    let s: f64 = x.iter().sum();
    if s > 0.0 && (s - 1.0).abs() > 0.0 {
        let corr = (s - 1.0) / x.iter().filter(|&&v| v > 0.0).count() as f64;
        for xi in x.iter_mut().filter(|v| **v > 0.0) {
            *xi = (*xi - corr).max(0.0);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::ComplexMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn vec(xs: &[f64]) -> RealVector {
        RealVector::from_column_slice(xs)
    }

    #[test]
    fn ball_interior_and_scaling() {
        let m = RealMatrix::from_row_slice(1, 2, &[3.0, 4.0]);
        assert_eq!(project_ball(&m, 10.0).unwrap(), m);
        let p = project_ball(&m, 2.5).unwrap();
        assert!((p - m.scale(0.5)).norm() < 1e-15);
        assert!(project_ball(&m, -1.0).is_err());
        let z = ComplexMatrix::zeros(2, 2);
        assert_eq!(project_ball(&z, 0.0).unwrap(), z);
    }

    #[test]
    fn simplex_symmetric_and_vertex() {
        let s = project_simplex(&vec(&[0.5, 0.5, 0.5])).unwrap();
        assert!(s.iter().all(|&x| (x - 1.0 / 3.0).abs() < 1e-15));
        let s = project_simplex(&vec(&[2.0, 0.0, 0.0])).unwrap();
        assert_eq!(s.as_slice(), &[1.0, 0.0, 0.0]);
        assert!(project_simplex(&RealVector::zeros(0)).is_err());
    }

    #[test]
    fn simplex_kkt_and_idempotence() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let k = rng.random_range(1..10);
            let v = RealVector::from_fn(k, |_, _| rng.random_range(-3.0..3.0));
            let s = project_simplex(&v).unwrap();
            assert!((s.sum() - 1.0).abs() < 1e-14);
            assert!(s.iter().all(|&x| x >= 0.0));
            // ∃θ: s_i = max(v_i − θ, 0).
            let (i, _) = s.iter().enumerate().find(|(_, &x)| x > 0.0).unwrap();
            let theta = v[i] - s[i];
            for j in 0..k {
                assert!((s[j] - (v[j] - theta).max(0.0)).abs() < 1e-12);
            }
            let s2 = project_simplex(&s).unwrap();
            assert!((s2 - &s).amax() < 1e-12);
        }
    }
}
