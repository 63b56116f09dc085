use alloc::vec;
use alloc::vec::Vec;

use super::descriptor::{
    column_mask, fill_bit_flag, generate_empty_offset, generate_y_and_seg_offset, DescriptorLayout,
    DescriptorWords, PackedWord, TileDescriptor,
};
use super::params::TuningParams;
use super::tile::{generate_tile_ptr, TileGeometry, TilePointer, TilePtrArray};
use super::transpose::{transpose_tiles, untranspose_tiles};
use crate::csr::CsrMatrix;
use crate::error::Result;
use crate::exec::{map_chunks_mut, Exec};

/// A sparse matrix in CSR5 form.
///
/// `row_ptr` is the untouched CSR row pointer. `col_idx` and `val` are the
/// CSR arrays with every complete `omega * sigma` tile transposed to
/// column-major order; the trailing `nnz mod (omega * sigma)` entries stay in
/// CSR order. Each tile has a pointer to its first row, and each complete
/// tile a packed descriptor of `omega` words. Tiles whose row range contains
/// empty rows also carry an `empty_offset` list mapping segment heads to rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Csr5Matrix {
    m: usize,
    n: usize,
    params: TuningParams,
    layout: DescriptorLayout,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    val: Vec<f64>,
    tile_ptr: TilePtrArray,
    descriptors: DescriptorWords,
    empty_offset_ptr: Vec<usize>,
    empty_offset: Vec<usize>,
}

impl Csr5Matrix {
    /// Converts in place: the CSR arrays are moved in and transposed tile by tile.
    pub fn from_csr(a: CsrMatrix, params: TuningParams, exec: Exec) -> Result<Self> {
        params.validate()?;
        let layout = DescriptorLayout::new(params.omega, params.sigma)?;
        let geom = TileGeometry::new(params.omega, params.sigma);
        let (m, n, row_ptr, mut col_idx, mut val) = a.into_parts();
        let nnz = val.len();

        let ptrs = generate_tile_ptr(&row_ptr, geom, exec);
        let tile_ptr = TilePtrArray::encode(&ptrs, m);

        let complete = geom.complete_tiles(nnz);
        let (descriptors, per_tile_empty) = if layout.word_bits == 32 {
            let (w, e) = build_descriptors::<u32>(&row_ptr, &ptrs, geom, &layout, complete, exec);
            (DescriptorWords::Narrow(w), e)
        } else {
            let (w, e) = build_descriptors::<u64>(&row_ptr, &ptrs, geom, &layout, complete, exec);
            (DescriptorWords::Wide(w), e)
        };

        let mut empty_offset_ptr = Vec::with_capacity(complete + 1);
        let mut empty_offset = Vec::new();
        empty_offset_ptr.push(0);
        for list in per_tile_empty {
            if let Some(list) = list {
                empty_offset.extend_from_slice(&list);
            }
            empty_offset_ptr.push(empty_offset.len());
        }

        transpose_tiles(&mut col_idx, geom, exec);
        transpose_tiles(&mut val, geom, exec);

        Ok(Self {
            m,
            n,
            params,
            layout,
            row_ptr,
            col_idx,
            val,
            tile_ptr,
            descriptors,
            empty_offset_ptr,
            empty_offset,
        })
    }

    /// Drops the tile metadata and restores CSR order.
    pub fn into_csr(self, exec: Exec) -> CsrMatrix {
        let geom = self.geometry();
        let Self {
            m,
            n,
            row_ptr,
            mut col_idx,
            mut val,
            ..
        } = self;
        untranspose_tiles(&mut col_idx, geom, exec);
        untranspose_tiles(&mut val, geom, exec);
        CsrMatrix::from_parts_unchecked(m, n, row_ptr, col_idx, val)
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
    pub fn params(&self) -> &TuningParams {
        &self.params
    }

    #[inline]
    pub fn layout(&self) -> &DescriptorLayout {
        &self.layout
    }

    #[inline]
    pub fn geometry(&self) -> TileGeometry {
        TileGeometry::new(self.params.omega, self.params.sigma)
    }

    /// Tiles including the incomplete tail tile.
    #[inline]
    pub fn tile_count(&self) -> usize {
        self.geometry().tile_count(self.nnz())
    }

    #[inline]
    pub fn complete_tiles(&self) -> usize {
        self.geometry().complete_tiles(self.nnz())
    }

    #[inline]
    pub fn tail_len(&self) -> usize {
        self.nnz() % self.geometry().size()
    }

    #[inline]
    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    /// Column indices in tile-transposed storage order.
    #[inline]
    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    /// Values in tile-transposed storage order.
    #[inline]
    pub fn val(&self) -> &[f64] {
        &self.val
    }

    #[inline]
    pub fn tile_ptr(&self) -> &TilePtrArray {
        &self.tile_ptr
    }

    #[inline]
    pub fn tile_pointer(&self, tid: usize) -> TilePointer {
        self.tile_ptr.get(tid)
    }

    #[inline]
    pub fn descriptor_words(&self) -> &DescriptorWords {
        &self.descriptors
    }

    /// Packed word of column `i` of complete tile `tid`.
    #[inline]
    pub fn descriptor_word(&self, tid: usize, i: usize) -> u64 {
        self.descriptors.word(tid * self.params.omega + i)
    }

    /// Unpacked descriptor of complete tile `tid`.
    pub fn tile_descriptor(&self, tid: usize) -> TileDescriptor {
        assert!(tid < self.complete_tiles(), "tile {tid} has no descriptor");
        let omega = self.params.omega;
        let words: Vec<u64> = (0..omega).map(|i| self.descriptor_word(tid, i)).collect();
        self.layout.unpack(&words)
    }

    /// Head-to-row offsets of complete tile `tid`; empty unless the tile is flagged.
    #[inline]
    pub fn empty_offsets(&self, tid: usize) -> &[usize] {
        &self.empty_offset[self.empty_offset_ptr[tid]..self.empty_offset_ptr[tid + 1]]
    }

    /// Bytes of tile pointers plus packed descriptors.
    pub fn tile_metadata_bytes(&self) -> usize {
        self.tile_ptr.size_bytes() + self.descriptors.size_bytes()
    }

    /// Number of stored `empty_offset` entries over all tiles.
    pub fn empty_offset_len(&self) -> usize {
        self.empty_offset.len()
    }

    /// Footprint of the plain CSR arrays for the given index and value widths.
    pub fn csr_footprint_bytes(&self, index_bytes: usize, value_bytes: usize) -> usize {
        (self.m + 1 + self.nnz()) * index_bytes + self.nnz() * value_bytes
    }
}

fn build_descriptors<W: PackedWord>(
    row_ptr: &[usize],
    ptrs: &[TilePointer],
    geom: TileGeometry,
    layout: &DescriptorLayout,
    complete: usize,
    exec: Exec,
) -> (Vec<W>, Vec<Option<Vec<usize>>>) {
    let omega = geom.omega;
    let sigma = geom.sigma;
    let mut words = vec![W::default(); complete * omega];
    if complete == 0 {
        return (words, Vec::new());
    }
    let empty = map_chunks_mut(
        exec,
        &mut words,
        omega,
        || vec![false; geom.size()],
        |flags, tid, out| {
            fill_bit_flag(row_ptr, tid, geom, flags);
            let (y_offset, seg_offset) = generate_y_and_seg_offset(flags, omega, sigma);
            for (i, w) in out.iter_mut().enumerate() {
                let mask = column_mask(&flags[i * sigma..(i + 1) * sigma]);
                *w = W::from_u64(layout.pack_column(y_offset[i], seg_offset[i], mask));
            }
            let ptr = ptrs[tid];
            ptr.has_empty_rows
                .then(|| generate_empty_offset(row_ptr, tid, ptr.row, flags, geom))
        },
    );
    (words, empty)
}

/// CSR to CSR5 using the parallel strategy. The input is copied.
pub fn csr_to_csr5(a: &CsrMatrix, params: TuningParams) -> Result<Csr5Matrix> {
    csr_to_csr5_with(a, params, Exec::Parallel)
}

pub fn csr_to_csr5_with(a: &CsrMatrix, params: TuningParams, exec: Exec) -> Result<Csr5Matrix> {
    Csr5Matrix::from_csr(a.clone(), params, exec)
}

/// CSR5 back to CSR; bit-exact inverse of [`csr_to_csr5`].
pub fn csr5_to_csr(a5: &Csr5Matrix) -> CsrMatrix {
    a5.clone().into_csr(Exec::Parallel)
}
