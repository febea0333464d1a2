//! JSON conversions for dense matrices. Complex scalars are `[re, im]` pairs
//! and matrices are arrays of rows.

use crate::error::{Error, Result};
use crate::numerics::{ComplexMatrix, ComplexVector, RealMatrix, C64};

pub type ComplexJson = [f64; 2];

pub fn complex_vec_to_json(v: &ComplexVector) -> Vec<ComplexJson> {
    v.iter().map(|c| [c.re, c.im]).collect()
}

pub fn complex_vec_from_json(v: &[ComplexJson]) -> ComplexVector {
    ComplexVector::from_iterator(v.len(), v.iter().map(|&[re, im]| C64::new(re, im)))
}

pub fn complex_mat_to_json(m: &ComplexMatrix) -> Vec<Vec<ComplexJson>> {
    m.row_iter().map(|r| r.iter().map(|c| [c.re, c.im]).collect()).collect()
}

pub fn complex_mat_from_json(rows: &[Vec<ComplexJson>]) -> Result<ComplexMatrix> {
    let ncols = check_rows(rows)?;
    Ok(ComplexMatrix::from_fn(rows.len(), ncols, |i, j| {
        let [re, im] = rows[i][j];
        C64::new(re, im)
    }))
}

pub fn real_mat_to_json(m: &RealMatrix) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

pub fn real_mat_from_json(rows: &[Vec<f64>]) -> Result<RealMatrix> {
    let ncols = check_rows(rows)?;
    Ok(RealMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j]))
}

fn check_rows<T>(rows: &[Vec<T>]) -> Result<usize> {
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::invalid("matrix rows have unequal lengths"));
    }
    Ok(ncols)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_matrix_round_trips_row_major() {
        let m = ComplexMatrix::from_fn(2, 3, |i, j| C64::new(i as f64, j as f64));
        let json = complex_mat_to_json(&m);
        assert_eq!(json[1][2], [1.0, 2.0]);
        assert_eq!(complex_mat_from_json(&json).unwrap(), m);
    }

    #[test]
    fn ragged_rows_are_rejected() {
        assert!(real_mat_from_json(&[vec![1.0, 2.0], vec![3.0]]).is_err());
    }
}
