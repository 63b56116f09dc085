//! Tile geometry and tile pointers.

use alloc::vec::Vec;

use crate::exec::{map_range, Exec};

/// Shape of a tile and the two ways of addressing an entry inside it.
///
/// Descriptor generation walks the nonzero stream in its original order
/// (column `i` holds `sigma` consecutive nonzeros), while the kernels read
/// the transposed storage where depth `j` of all `omega` columns is
/// contiguous. Every index computation goes through these two functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TileGeometry {
    pub omega: usize,
    pub sigma: usize,
}

impl TileGeometry {
    pub fn new(omega: usize, sigma: usize) -> Self {
        Self { omega, sigma }
    }

    #[inline]
    pub fn size(&self) -> usize {
        self.omega * self.sigma
    }

    /// Position in the untransposed nonzero stream of entry `(i, j)` of tile `tid`.
    #[inline]
    pub fn logical(&self, tid: usize, i: usize, j: usize) -> usize {
        tid * self.size() + i * self.sigma + j
    }

    /// Position in transposed storage of entry `(i, j)` of tile `tid`.
    #[inline]
    pub fn physical(&self, tid: usize, i: usize, j: usize) -> usize {
        tid * self.size() + j * self.omega + i
    }

    /// `ceil(nnz / size)`, the tile count including an incomplete tail tile.
    #[inline]
    pub fn tile_count(&self, nnz: usize) -> usize {
        nnz.div_ceil(self.size())
    }

    #[inline]
    pub fn complete_tiles(&self, nnz: usize) -> usize {
        nnz / self.size()
    }
}

/// Row of nonzero `g`: the last row `r < m` with `row_ptr[r] <= g`.
///
/// Empty rows share their `row_ptr` value with the next non-empty row, so
/// taking the last match skips them. For `g >= nnz` this is `m - 1`.
/// Returns 0 when the matrix has no rows.
#[inline]
pub fn row_of_nonzero(row_ptr: &[usize], g: usize) -> usize {
    let m = row_ptr.len().saturating_sub(1);
    row_ptr[..m].partition_point(|&v| v <= g).saturating_sub(1)
}

/// Decoded tile pointer: the first matrix row touched by a tile and whether
/// the tile's row range contains an empty row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TilePointer {
    pub row: usize,
    pub has_empty_rows: bool,
}

impl TilePointer {
    pub const FLAG32: u32 = 1 << 31;
    pub const FLAG64: u64 = 1 << 63;

    pub fn new(row: usize, has_empty_rows: bool) -> Self {
        Self {
            row,
            has_empty_rows,
        }
    }

    /// Sign-magnitude encoding in 32 bits; flagged row 0 is `0x8000_0000`.
    pub fn to_raw32(self) -> u32 {
        debug_assert!((self.row as u64) < u64::from(Self::FLAG32));
        let raw = self.row as u32;
        if self.has_empty_rows {
            raw | Self::FLAG32
        } else {
            raw
        }
    }

    pub fn from_raw32(raw: u32) -> Self {
        Self {
            row: (raw & !Self::FLAG32) as usize,
            has_empty_rows: raw & Self::FLAG32 != 0,
        }
    }

    pub fn to_raw64(self) -> u64 {
        let raw = self.row as u64;
        debug_assert!(raw < Self::FLAG64);
        if self.has_empty_rows {
            raw | Self::FLAG64
        } else {
            raw
        }
    }

    pub fn from_raw64(raw: u64) -> Self {
        Self {
            row: (raw & !Self::FLAG64) as usize,
            has_empty_rows: raw & Self::FLAG64 != 0,
        }
    }
}

/// Packed tile pointer array. 32-bit words hold row indices below 2^31.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TilePtrArray {
    Narrow(Vec<u32>),
    Wide(Vec<u64>),
}

impl TilePtrArray {
    /// Uses 32-bit words when `rows < 2^31`.
    pub fn encode(ptrs: &[TilePointer], rows: usize) -> Self {
        if (rows as u64) < u64::from(TilePointer::FLAG32) {
            TilePtrArray::Narrow(ptrs.iter().map(|p| p.to_raw32()).collect())
        } else {
            TilePtrArray::Wide(ptrs.iter().map(|p| p.to_raw64()).collect())
        }
    }

    #[inline]
    pub fn get(&self, tid: usize) -> TilePointer {
        match self {
            TilePtrArray::Narrow(v) => TilePointer::from_raw32(v[tid]),
            TilePtrArray::Wide(v) => TilePointer::from_raw64(v[tid]),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            TilePtrArray::Narrow(v) => v.len(),
            TilePtrArray::Wide(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn word_bits(&self) -> u32 {
        match self {
            TilePtrArray::Narrow(_) => 32,
            TilePtrArray::Wide(_) => 64,
        }
    }

    pub fn size_bytes(&self) -> usize {
        self.len() * self.word_bits() as usize / 8
    }

    pub fn iter(&self) -> impl Iterator<Item = TilePointer> + '_ {
        (0..self.len()).map(move |tid| self.get(tid))
    }
}

/// Builds the `p + 1` tile pointers for a CSR row pointer array.
///
/// Entry `tid` is the row holding nonzero `tid * omega * sigma`. Tile `tid`
/// is flagged when any row in the inclusive range `[ptr[tid], ptr[tid + 1]]`
/// is empty; a flag on the closing row can be spurious but only costs an
/// indirection through `empty_offset`.
pub fn generate_tile_ptr(row_ptr: &[usize], geom: TileGeometry, exec: Exec) -> Vec<TilePointer> {
    let nnz = row_ptr.last().copied().unwrap_or(0);
    let p = geom.tile_count(nnz);
    let rows = map_range(exec, p + 1, |tid| {
        row_of_nonzero(row_ptr, tid * geom.size())
    });
    map_range(exec, p + 1, |tid| {
        let has_empty_rows =
            tid < p && (rows[tid]..=rows[tid + 1]).any(|rid| row_ptr[rid] == row_ptr[rid + 1]);
        TilePointer::new(rows[tid], has_empty_rows)
    })
}
