use alloc::vec;
use alloc::vec::Vec;

use crate::csr::{check_x, CsrMatrix};
use crate::error::Result;
use crate::scan::serial_segmented_sum;

/// SpMV through a flat segmented sum over all products.
///
/// Row starts are scattered into a head-flag array, the products are
/// segment-summed, and each non-empty row gathers the sum at its head.
pub fn spmv_csr_segsum(a: &CsrMatrix, x: &[f64]) -> Result<Vec<f64>> {
    check_x(a, x)?;
    let nnz = a.nnz();
    let row_ptr = a.row_ptr();

    let mut bit_flag = vec![false; nnz];
    for &start in &row_ptr[..a.rows()] {
        // trailing empty rows point one past the last nonzero
        if start < nnz {
            bit_flag[start] = true;
        }
    }

    let mut product: Vec<f64> = a
        .val()
        .iter()
        .zip(a.col_idx())
        .map(|(&v, &c)| v * x[c])
        .collect();

    serial_segmented_sum(&mut product, &bit_flag)?;

    let y = (0..a.rows())
        .map(|k| {
            if row_ptr[k] == row_ptr[k + 1] {
                0.0
            } else {
                product[row_ptr[k]]
            }
        })
        .collect();
    Ok(y)
}
