//! Compressed sparse row storage.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// One `(row, col, value)` triple with 0-based indices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CooEntry {
    pub row: usize,
    pub col: usize,
    pub value: f64,
}

impl CooEntry {
    pub fn new(row: usize, col: usize, value: f64) -> Self {
        Self { row, col, value }
    }
}

/// A canonical CSR matrix: `row_ptr` is non-decreasing from 0 to `nnz`, and
/// column indices are strictly increasing inside every row.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    m: usize,
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    val: Vec<f64>,
}

impl CsrMatrix {
    /// Builds a matrix from raw arrays, checking every canonical-form invariant.
    pub fn new(
        m: usize,
        n: usize,
        row_ptr: Vec<usize>,
        col_idx: Vec<usize>,
        val: Vec<f64>,
    ) -> Result<Self> {
        let a = Self {
            m,
            n,
            row_ptr,
            col_idx,
            val,
        };
        a.validate()?;
        Ok(a)
    }

    pub(crate) fn from_parts_unchecked(
        m: usize,
        n: usize,
        row_ptr: Vec<usize>,
        col_idx: Vec<usize>,
        val: Vec<f64>,
    ) -> Self {
        let a = Self {
            m,
            n,
            row_ptr,
            col_idx,
            val,
        };
        debug_assert!(a.validate().is_ok());
        a
    }

    /// An `m x n` matrix with no stored entries.
    pub fn zeros(m: usize, n: usize) -> Self {
        Self {
            m,
            n,
            row_ptr: vec![0; m + 1],
            col_idx: Vec::new(),
            val: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            m: n,
            n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            val: vec![1.0; n],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.row_ptr.len() != self.m + 1 {
            return Err(Error::InvalidCsr("row_ptr length must be m + 1"));
        }
        if self.row_ptr[0] != 0 {
            return Err(Error::InvalidCsr("row_ptr[0] must be 0"));
        }
        if self.col_idx.len() != self.val.len() {
            return Err(Error::InvalidCsr("col_idx and val lengths differ"));
        }
        if self.row_ptr[self.m] != self.col_idx.len() {
            return Err(Error::InvalidCsr("row_ptr[m] must equal nnz"));
        }
        for w in self.row_ptr.windows(2) {
            if w[0] > w[1] {
                return Err(Error::InvalidCsr("row_ptr must be non-decreasing"));
            }
            let cols = &self.col_idx[w[0]..w[1]];
            if cols.iter().any(|&c| c >= self.n) {
                return Err(Error::InvalidCsr("column index out of bounds"));
            }
            if cols.windows(2).any(|c| c[0] >= c[1]) {
                return Err(Error::InvalidCsr(
                    "column indices must be strictly increasing within a row",
                ));
            }
        }
        Ok(())
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn nnz(&self) -> usize {
        self.val.len()
    }

    #[inline]
    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    #[inline]
    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    #[inline]
    pub fn val(&self) -> &[f64] {
        &self.val
    }

    #[inline]
    pub fn row_len(&self, row: usize) -> usize {
        self.row_ptr[row + 1] - self.row_ptr[row]
    }

    pub fn into_parts(self) -> (usize, usize, Vec<usize>, Vec<usize>, Vec<f64>) {
        (self.m, self.n, self.row_ptr, self.col_idx, self.val)
    }

    /// Expands back to row-major COO triples.
    pub fn to_coo(&self) -> Vec<CooEntry> {
        let mut out = Vec::with_capacity(self.nnz());
        for row in 0..self.m {
            for k in self.row_ptr[row]..self.row_ptr[row + 1] {
                out.push(CooEntry::new(row, self.col_idx[k], self.val[k]));
            }
        }
        out
    }
}

/// Assembles a canonical CSR matrix. Duplicate `(row, col)` pairs are summed
/// in input order.
pub fn coo_to_csr(entries: &[CooEntry], m: usize, n: usize) -> Result<CsrMatrix> {
    for (index, e) in entries.iter().enumerate() {
        if e.row >= m || e.col >= n {
            return Err(Error::EntryOutOfBounds {
                index,
                row: e.row,
                col: e.col,
                m,
                n,
            });
        }
    }

    // Counting sort by row keeps input order within each row, so a stable
    // sort by column afterwards sums duplicates in input order.
    let mut counts = vec![0usize; m + 1];
    for e in entries {
        counts[e.row + 1] += 1;
    }
    for i in 0..m {
        counts[i + 1] += counts[i];
    }
    let mut next = counts.clone();
    let mut order = vec![0usize; entries.len()];
    for (k, e) in entries.iter().enumerate() {
        order[next[e.row]] = k;
        next[e.row] += 1;
    }

    let mut row_ptr = Vec::with_capacity(m + 1);
    let mut col_idx = Vec::with_capacity(entries.len());
    let mut val = Vec::with_capacity(entries.len());
    row_ptr.push(0);
    for row in 0..m {
        let bucket = &mut order[counts[row]..counts[row + 1]];
        bucket.sort_by_key(|&k| entries[k].col);
        let mut last_col = None;
        for &k in bucket.iter() {
            let e = entries[k];
            if last_col == Some(e.col) {
                *val.last_mut().expect("duplicate follows an entry") += e.value;
            } else {
                col_idx.push(e.col);
                val.push(e.value);
                last_col = Some(e.col);
            }
        }
        row_ptr.push(col_idx.len());
    }
    Ok(CsrMatrix::from_parts_unchecked(m, n, row_ptr, col_idx, val))
}

/// Reference `y = A x`, summing each row left to right.
pub fn dense_spmv_oracle(a: &CsrMatrix, x: &[f64]) -> Result<Vec<f64>> {
    check_x(a, x)?;
    let mut y = vec![0.0; a.m];
    for (row, yi) in y.iter_mut().enumerate() {
        let mut sum = 0.0;
        for k in a.row_ptr[row]..a.row_ptr[row + 1] {
            sum += a.val[k] * x[a.col_idx[k]];
        }
        *yi = sum;
    }
    Ok(y)
}

#[inline]
pub(crate) fn check_x(a: &CsrMatrix, x: &[f64]) -> Result<()> {
    if x.len() != a.n {
        return Err(Error::DimensionMismatch {
            expected: a.n,
            actual: x.len(),
        });
    }
    Ok(())
}
