//! Tile-parallel CSR5 SpMV.
//!
//! Each complete tile is processed column by column (one SIMD lane per
//! column). Within a column the products are summed between segment heads:
//!
//! - the run before the column's first head continues a row started further
//!   left (red) and is parked in `tmp[i - 1]`;
//! - a run between two heads is a whole row (green) and is emitted directly;
//! - the run after the last head (blue) may continue to the right.
//!
//! A column with no head at all is red from top to bottom. A fast segmented
//! sum over `tmp` driven by `seg_offset` then folds every red piece into the
//! blue run it continues, and the blue totals are emitted.
//!
//! The row of a tile's first head and the row of each blue run may also be
//! touched by neighbouring tiles or by the tail, so those contributions are
//! accumulated; all others are plain stores to rows no other tile touches.

use alloc::vec::Vec;
use core::sync::atomic::{AtomicU64, Ordering};

use crate::error::{Error, Result};
use crate::exec::{map_blocks, Exec};
use crate::format::Csr5Matrix;
use crate::scan::fast_segmented_sum_with;

/// Complete tiles per scheduling block. Fixed so that the combine order of
/// accumulated contributions never depends on the thread count.
const TILES_PER_BLOCK: usize = 64;

/// How contributions shared between tiles are combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AccumulateMode {
    /// Buffer shared-row contributions per block and add them in ascending
    /// tile order. Bit-identical across runs and thread counts.
    #[default]
    Deterministic,
    /// Add shared-row contributions with atomic compare-and-swap as tiles
    /// finish. Summation order may vary between runs.
    Atomic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContributionKind {
    /// Row is written by exactly one tile; store.
    Exclusive,
    /// Row may be shared with other tiles or the tail; add.
    Accumulate,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Contribution {
    pub row: usize,
    pub value: f64,
    pub kind: ContributionKind,
}

/// Receives the row sums a tile produces.
pub trait ContributionSink {
    fn store(&mut self, row: usize, value: f64);
    fn accumulate(&mut self, row: usize, value: f64);
}

impl ContributionSink for Vec<Contribution> {
    fn store(&mut self, row: usize, value: f64) {
        self.push(Contribution {
            row,
            value,
            kind: ContributionKind::Exclusive,
        });
    }

    fn accumulate(&mut self, row: usize, value: f64) {
        self.push(Contribution {
            row,
            value,
            kind: ContributionKind::Accumulate,
        });
    }
}

/// Per-worker scratch for [`spmv_csr5_tile`]; never shared between tiles
/// running at the same time.
#[derive(Debug, Clone, Default)]
pub struct SpmvWorkspace {
    sum: Vec<f64>,
    /// Red sub-segment sums; `tmp[i - 1]` belongs to column `i`.
    tmp: Vec<f64>,
    /// Blue sub-segment sums.
    last_tmp: Vec<f64>,
    /// Running head index per column, starting at the column's `y_offset`.
    y_offset: Vec<usize>,
    seg_offset: Vec<usize>,
    flags: Vec<u64>,
    has_head: Vec<bool>,
    scan_scratch: Vec<f64>,
}

impl SpmvWorkspace {
    pub fn new(omega: usize) -> Self {
        let mut ws = Self::default();
        ws.resize(omega);
        ws
    }

    fn resize(&mut self, omega: usize) {
        self.sum.resize(omega, 0.0);
        self.tmp.resize(omega, 0.0);
        self.last_tmp.resize(omega, 0.0);
        self.y_offset.resize(omega, 0);
        self.seg_offset.resize(omega, 0);
        self.flags.resize(omega, 0);
        self.has_head.resize(omega, false);
    }
}

/// Processes complete tile `tid`, sending every row sum it produces to `sink`.
///
/// Each segment head in the tile yields exactly one contribution. Panics if
/// `tid` is not a complete tile or `x` is shorter than the column count.
pub fn spmv_csr5_tile<S: ContributionSink>(
    a5: &Csr5Matrix,
    tid: usize,
    x: &[f64],
    ws: &mut SpmvWorkspace,
    sink: &mut S,
) {
    assert!(
        tid < a5.complete_tiles(),
        "tile {tid} is not a complete tile"
    );
    assert!(x.len() >= a5.cols(), "x is shorter than the column count");
    let geom = a5.geometry();
    let (omega, sigma) = (geom.omega, geom.sigma);
    let layout = a5.layout();
    ws.resize(omega);

    let ptr = a5.tile_pointer(tid);
    let empty_offset = a5.empty_offsets(tid);
    let row_of = |head: usize| {
        if ptr.has_empty_rows {
            ptr.row + empty_offset[head]
        } else {
            ptr.row + head
        }
    };

    for i in 0..omega {
        let (y, seg, flags) = layout.unpack_column(a5.descriptor_word(tid, i));
        ws.y_offset[i] = y;
        ws.seg_offset[i] = seg;
        ws.flags[i] = flags;
        ws.sum[i] = 0.0;
        ws.tmp[i] = 0.0;
        ws.last_tmp[i] = 0.0;
        ws.has_head[i] = false;
    }

    let col_idx = a5.col_idx();
    let val = a5.val();
    for j in 0..sigma {
        let row_base = geom.physical(tid, 0, j);
        let vals = &val[row_base..row_base + omega];
        let cols = &col_idx[row_base..row_base + omega];
        for i in 0..omega {
            if layout.flag_at(ws.flags[i], j) {
                if ws.has_head[i] {
                    // end of a green segment
                    let head = ws.y_offset[i];
                    if head == 0 {
                        sink.accumulate(row_of(head), ws.sum[i]);
                    } else {
                        sink.store(row_of(head), ws.sum[i]);
                    }
                    ws.y_offset[i] += 1;
                } else {
                    // end of a red sub-segment; column 0 is sealed at (0, 0)
                    assert!(i > 0 || j == 0, "column 0 must open with a head");
                    if i > 0 {
                        ws.tmp[i - 1] = ws.sum[i];
                    }
                    ws.has_head[i] = true;
                }
                ws.sum[i] = 0.0;
            }
            ws.sum[i] += vals[i] * x[cols[i]];
        }
    }

    for i in 0..omega {
        if ws.has_head[i] {
            ws.last_tmp[i] = ws.sum[i];
        } else {
            // unsealed top and bottom: the whole column is red
            ws.tmp[i - 1] = ws.sum[i];
        }
    }

    fast_segmented_sum_with(&mut ws.tmp, &ws.seg_offset, &mut ws.scan_scratch)
        .expect("seg_offset stays inside the tile");

    for i in 0..omega {
        if ws.has_head[i] {
            let total = ws.last_tmp[i] + ws.tmp[i];
            sink.accumulate(row_of(ws.y_offset[i]), total);
        }
    }
}

/// All contributions of complete tile `tid`, in emission order.
pub fn tile_contributions(a5: &Csr5Matrix, tid: usize, x: &[f64]) -> Vec<Contribution> {
    let mut ws = SpmvWorkspace::new(a5.params().omega);
    let mut out = Vec::new();
    spmv_csr5_tile(a5, tid, x, &mut ws, &mut out);
    out
}

#[inline]
fn atomic_add(slot: &AtomicU64, value: f64) {
    let mut cur = slot.load(Ordering::Relaxed);
    loop {
        let next = (f64::from_bits(cur) + value).to_bits();
        match slot.compare_exchange_weak(cur, next, Ordering::Relaxed, Ordering::Relaxed) {
            Ok(_) => return,
            Err(seen) => cur = seen,
        }
    }
}

struct BufferedSink<'a> {
    y: &'a [AtomicU64],
    shared: Vec<(usize, f64)>,
}

impl ContributionSink for BufferedSink<'_> {
    #[inline]
    fn store(&mut self, row: usize, value: f64) {
        self.y[row].store(value.to_bits(), Ordering::Relaxed);
    }

    #[inline]
    fn accumulate(&mut self, row: usize, value: f64) {
        self.shared.push((row, value));
    }
}

struct AtomicSink<'a> {
    y: &'a [AtomicU64],
}

impl ContributionSink for AtomicSink<'_> {
    #[inline]
    fn store(&mut self, row: usize, value: f64) {
        self.y[row].store(value.to_bits(), Ordering::Relaxed);
    }

    #[inline]
    fn accumulate(&mut self, row: usize, value: f64) {
        atomic_add(&self.y[row], value);
    }
}

/// Entries past the last complete tile, row by row from the row holding the
/// first tail entry. That first row may already hold tile contributions.
fn spmv_tail(a5: &Csr5Matrix, x: &[f64], y: &mut [f64]) {
    let complete = a5.complete_tiles();
    let tail_begin = complete * a5.geometry().size();
    if tail_begin == a5.nnz() {
        return;
    }
    let row_ptr = a5.row_ptr();
    let col_idx = a5.col_idx();
    let val = a5.val();
    let start_row = a5.tile_pointer(complete).row;
    for (row, yr) in y.iter_mut().enumerate().skip(start_row) {
        let lo = row_ptr[row].max(tail_begin);
        let hi = row_ptr[row + 1];
        if hi <= lo {
            continue;
        }
        let mut sum = 0.0;
        for k in lo..hi {
            sum += val[k] * x[col_idx[k]];
        }
        *yr += sum;
    }
}

/// `y = A x` for a CSR5 matrix using the parallel strategy.
pub fn spmv_csr5(a5: &Csr5Matrix, x: &[f64], mode: AccumulateMode) -> Result<Vec<f64>> {
    spmv_csr5_with(a5, x, mode, Exec::Parallel)
}

pub fn spmv_csr5_with(
    a5: &Csr5Matrix,
    x: &[f64],
    mode: AccumulateMode,
    exec: Exec,
) -> Result<Vec<f64>> {
    if x.len() != a5.cols() {
        return Err(Error::DimensionMismatch {
            expected: a5.cols(),
            actual: x.len(),
        });
    }
    let omega = a5.params().omega;
    let complete = a5.complete_tiles();
    let cells: Vec<AtomicU64> = (0..a5.rows()).map(|_| AtomicU64::new(0)).collect();

    let shared = match mode {
        AccumulateMode::Deterministic => map_blocks(
            exec,
            complete,
            TILES_PER_BLOCK,
            || SpmvWorkspace::new(omega),
            |ws, tiles| {
                let mut sink = BufferedSink {
                    y: &cells,
                    shared: Vec::new(),
                };
                for tid in tiles {
                    spmv_csr5_tile(a5, tid, x, ws, &mut sink);
                }
                sink.shared
            },
        ),
        AccumulateMode::Atomic => {
            map_blocks(
                exec,
                complete,
                TILES_PER_BLOCK,
                || SpmvWorkspace::new(omega),
                |ws, tiles| {
                    let mut sink = AtomicSink { y: &cells };
                    for tid in tiles {
                        spmv_csr5_tile(a5, tid, x, ws, &mut sink);
                    }
                },
            );
            Vec::new()
        }
    };

    let mut y: Vec<f64> = cells
        .into_iter()
        .map(|c| f64::from_bits(c.into_inner()))
        .collect();
    for block in shared {
        for (row, value) in block {
            y[row] += value;
        }
    }
    spmv_tail(a5, x, &mut y);
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::csr::{coo_to_csr, dense_spmv_oracle, CooEntry, CsrMatrix};
    use crate::format::{csr_to_csr5, TuningParams};
    use alloc::vec;

    fn params(w: usize, s: usize) -> TuningParams {
        TuningParams::new(w, s).unwrap()
    }

    #[test]
    fn tile_inside_one_row_is_one_reduction() {
        let a = CsrMatrix::new(
            1,
            12,
            vec![0, 12],
            (0..12).collect(),
            (1..=12).map(f64::from).collect(),
        )
        .unwrap();
        let a5 = csr_to_csr5(&a, params(2, 3)).unwrap();
        let x = vec![1.0; 12];
        let c = tile_contributions(&a5, 1, &x);
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].kind, ContributionKind::Accumulate);
        assert_eq!(c[0].row, 0);
        assert_eq!(c[0].value, (7..=12).sum::<i32>() as f64);
    }

    #[test]
    fn singleton_rows_give_one_contribution_each() {
        let a = CsrMatrix::new(
            8,
            1,
            (0..=8).collect(),
            vec![0; 8],
            (1..=8).map(f64::from).collect(),
        )
        .unwrap();
        let a5 = csr_to_csr5(&a, params(2, 2)).unwrap();
        let x = [10.0];
        for tid in 0..2 {
            let mut c = tile_contributions(&a5, tid, &x);
            assert_eq!(c.len(), 4);
            c.sort_by_key(|c| c.row);
            for (k, ci) in c.iter().enumerate() {
                let row = tid * 4 + k;
                assert_eq!(ci.row, row);
                assert_eq!(ci.value, 10.0 * (row + 1) as f64);
            }
            assert_eq!(c[0].kind, ContributionKind::Accumulate);
        }
    }

    #[test]
    fn tail_only_equals_scalar() {
        let a = coo_to_csr(
            &[
                CooEntry::new(0, 1, 0.5),
                CooEntry::new(2, 0, -3.0),
                CooEntry::new(2, 2, 1.25),
            ],
            3,
            3,
        )
        .unwrap();
        let a5 = csr_to_csr5(&a, params(4, 4)).unwrap();
        let x = [0.1, 0.2, 0.3];
        assert_eq!(
            spmv_csr5(&a5, &x, AccumulateMode::Deterministic).unwrap(),
            crate::spmv_csr_scalar(&a, &x).unwrap()
        );
    }

    #[test]
    fn headless_columns_fold_into_the_open_row() {
        // row 0 spans columns 0..2 of a 4x2 tile, rows 1 and 2 follow
        let row_ptr = vec![0, 5, 6, 8];
        let a = CsrMatrix::new(
            3,
            8,
            row_ptr,
            vec![0, 1, 2, 3, 4, 0, 0, 1],
            (1..=8).map(f64::from).collect(),
        )
        .unwrap();
        let a5 = csr_to_csr5(&a, params(4, 2)).unwrap();
        let d = a5.tile_descriptor(0);
        assert_eq!(d.seg_offset, vec![1, 0, 0, 0]);
        let x = vec![1.0; 8];
        let y = spmv_csr5(&a5, &x, AccumulateMode::Deterministic).unwrap();
        assert_eq!(y, dense_spmv_oracle(&a, &x).unwrap());
    }

    #[test]
    fn rejects_wrong_x() {
        let a5 = csr_to_csr5(&CsrMatrix::identity(3), params(1, 1)).unwrap();
        assert!(spmv_csr5(&a5, &[1.0], AccumulateMode::Atomic).is_err());
    }
}
