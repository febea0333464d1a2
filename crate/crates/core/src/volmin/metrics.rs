use itertools::Itertools;

use crate::error::{Error, Result};
use crate::numerics::RealMatrix;

/// Floor reported for an exact recovery.
pub const MSE_FLOOR_DB: f64 = -120.0;
const MAX_PERMUTATION_RANK: usize = 8;

/// Permutation-matched mean squared error between unit-normalised columns,
/// in dB: `min_π (1/K) Σ_k ‖x_k/‖x_k‖ − x̂_{π(k)}/‖x̂_{π(k)}‖‖²`.
pub fn mse_db(x_hat: &RealMatrix, x_true: &RealMatrix) -> Result<f64> {
    if x_hat.shape() != x_true.shape() {
        return Err(Error::invalid("estimate and truth must have the same shape"));
    }
    let k = x_true.ncols();
    if k == 0 || k > MAX_PERMUTATION_RANK {
        return Err(Error::invalid(format!("MSE needs 1 <= K <= {MAX_PERMUTATION_RANK}, got {k}")));
    }
    let normalise = |m: &RealMatrix| -> Result<RealMatrix> {
        let mut out = m.clone();
        for (j, mut col) in out.column_iter_mut().enumerate() {
            let n = col.norm();
            if !(n > 0.0) {
                return Err(Error::invalid(format!("column {j} is zero")));
            }
            col /= n;
        }
        Ok(out)
    };
    let a = normalise(x_true)?;
    let b = normalise(x_hat)?;
    // cost[i][j] = ‖a_i − b_j‖²
    let cost: Vec<Vec<f64>> =
        (0..k).map(|i| (0..k).map(|j| (a.column(i) - b.column(j)).norm_squared()).collect()).collect();
    let best = (0..k)
        .permutations(k)
        .map(|p| p.iter().enumerate().map(|(i, &j)| cost[i][j]).sum::<f64>() / k as f64)
        .fold(f64::INFINITY, f64::min);
    Ok(if best > 0.0 { (10.0 * best.log10()).max(MSE_FLOOR_DB) } else { MSE_FLOOR_DB })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn exact_recovery_hits_floor() {
        let x = RealMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.5, 2.0, 0.1, 1.0]);
        assert_eq!(mse_db(&x, &x).unwrap(), MSE_FLOOR_DB);
    }

    #[test]
    fn permuted_and_scaled_columns_score_zero() {
        let x = RealMatrix::from_row_slice(3, 3, &[1.0, 0.0, 0.3, 0.5, 2.0, 0.1, 0.1, 1.0, 0.9]);
        let mut y = RealMatrix::zeros(3, 3);
        y.set_column(0, &(x.column(2) * 3.0));
        y.set_column(1, &(x.column(0) * 0.2));
        y.set_column(2, &x.column(1));
        assert!(mse_db(&y, &x).unwrap() <= -100.0);
    }

    #[test]
    fn matches_exhaustive_enumeration_for_three_columns() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = RealMatrix::from_fn(4, 3, |_, _| rng.random_range(0.0..1.0));
        let b = RealMatrix::from_fn(4, 3, |_, _| rng.random_range(0.0..1.0));
        let unit = |m: &RealMatrix, j: usize| m.column(j) / m.column(j).norm();
        let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        let best = perms
            .iter()
            .map(|p| (0..3).map(|i| (unit(&a, i) - unit(&b, p[i])).norm_squared()).sum::<f64>() / 3.0)
            .fold(f64::INFINITY, f64::min);
        assert!((mse_db(&b, &a).unwrap() - 10.0 * best.log10()).abs() < 1e-12);
    }

    #[test]
    fn zero_column_is_rejected() {
        let x = RealMatrix::from_row_slice(2, 2, &[1.0, 0.0, 1.0, 0.0]);
        assert!(mse_db(&x, &RealMatrix::identity(2, 2)).is_err());
    }
}
