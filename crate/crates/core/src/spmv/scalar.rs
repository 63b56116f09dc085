#[cfg(feature = "parallel")]
use rayon::prelude::*;

use alloc::vec;
use alloc::vec::Vec;

use crate::csr::{check_x, CsrMatrix};
use crate::error::Result;
use crate::exec::Exec;

const ROWS_PER_TASK: usize = 256;

#[inline]
fn row_dot(a: &CsrMatrix, x: &[f64], row: usize) -> f64 {
    let rp = a.row_ptr();
    let cols = &a.col_idx()[rp[row]..rp[row + 1]];
    let vals = &a.val()[rp[row]..rp[row + 1]];
    let mut sum = 0.0;
    for (&c, &v) in cols.iter().zip(vals) {
        sum += v * x[c];
    }
    sum
}

/// One dot product per row; rows are distributed over the pool.
pub fn spmv_csr_scalar(a: &CsrMatrix, x: &[f64]) -> Result<Vec<f64>> {
    spmv_csr_scalar_with(a, x, Exec::Parallel)
}

pub fn spmv_csr_scalar_with(a: &CsrMatrix, x: &[f64], exec: Exec) -> Result<Vec<f64>> {
    check_x(a, x)?;
    let mut y = vec![0.0; a.rows()];
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        y.par_chunks_mut(ROWS_PER_TASK)
            .enumerate()
            .for_each(|(block, ys)| {
                let first = block * ROWS_PER_TASK;
                for (k, yi) in ys.iter_mut().enumerate() {
                    *yi = row_dot(a, x, first + k);
                }
            });
        return Ok(y);
    }
    let _ = (exec, ROWS_PER_TASK);
    for (row, yi) in y.iter_mut().enumerate() {
        *yi = row_dot(a, x, row);
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::csr::{coo_to_csr, dense_spmv_oracle, CooEntry};

    #[test]
    fn identity() {
        let a = CsrMatrix::identity(5);
        let x = [1.0, -2.0, 3.5, 0.0, 9.0];
        assert_eq!(spmv_csr_scalar(&a, &x).unwrap(), x.to_vec());
    }

    #[test]
    fn empty_rows_are_zero() {
        let a = coo_to_csr(&[CooEntry::new(1, 1, 2.0)], 4, 2).unwrap();
        assert_eq!(
            spmv_csr_scalar(&a, &[1.0, 3.0]).unwrap(),
            vec![0.0, 6.0, 0.0, 0.0]
        );
    }

    #[test]
    fn matches_oracle_exactly_in_both_modes() {
        let entries: Vec<CooEntry> = (0..2000)
            .map(|k| CooEntry::new((k * 31) % 700, (k * 17) % 90, 1.0 / (1.0 + k as f64)))
            .collect();
        let a = coo_to_csr(&entries, 700, 90).unwrap();
        let x: Vec<f64> = (0..90).map(|i| (i as f64).sin()).collect();
        let oracle = dense_spmv_oracle(&a, &x).unwrap();
        assert_eq!(
            spmv_csr_scalar_with(&a, &x, Exec::Sequential).unwrap(),
            oracle
        );
        assert_eq!(
            spmv_csr_scalar_with(&a, &x, Exec::Parallel).unwrap(),
            oracle
        );
    }

    #[test]
    fn rejects_wrong_x() {
        assert!(spmv_csr_scalar(&CsrMatrix::identity(2), &[1.0]).is_err());
    }
}
