//! Tile descriptors: segment-head flags, per-column output offsets, and the
//! headless-neighbour counts that drive the fast segmented sum.

use alloc::vec;
use alloc::vec::Vec;

use super::tile::{row_of_nonzero, TileGeometry};
use crate::error::{Error, Result};
use crate::scan::{exclusive_prefix_sum, segmented_sum_by};

/// Unpacked descriptor of one complete tile.
///
/// `bit_flag` is column-major: entry `(i, j)` lives at `i * sigma + j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TileDescriptor {
    pub omega: usize,
    pub sigma: usize,
    /// Segment heads in all columns left of column `i`.
    pub y_offset: Vec<usize>,
    /// Contiguous headless columns immediately right of column `i`
    /// (0 when column `i` itself is headless).
    pub seg_offset: Vec<usize>,
    pub bit_flag: Vec<bool>,
}

impl TileDescriptor {
    /// Derives the offsets from a flag array.
    pub fn from_bit_flag(bit_flag: Vec<bool>, omega: usize, sigma: usize) -> Self {
        let (y_offset, seg_offset) = generate_y_and_seg_offset(&bit_flag, omega, sigma);
        Self {
            omega,
            sigma,
            y_offset,
            seg_offset,
            bit_flag,
        }
    }

    #[inline]
    pub fn flag(&self, i: usize, j: usize) -> bool {
        self.bit_flag[i * self.sigma + j]
    }

    pub fn head_count(&self) -> usize {
        self.bit_flag.iter().filter(|&&b| b).count()
    }

    pub fn column_heads(&self, i: usize) -> usize {
        self.bit_flag[i * self.sigma..(i + 1) * self.sigma]
            .iter()
            .filter(|&&b| b)
            .count()
    }
}

/// Marks the nonzeros of complete tile `tid` that start a matrix row.
/// Entry `(0, 0)` is always marked so every tile starts a segment.
pub fn generate_bit_flag(row_ptr: &[usize], tid: usize, geom: TileGeometry) -> Vec<bool> {
    let mut flags = vec![false; geom.size()];
    fill_bit_flag(row_ptr, tid, geom, &mut flags);
    flags
}

pub(crate) fn fill_bit_flag(row_ptr: &[usize], tid: usize, geom: TileGeometry, flags: &mut [bool]) {
    debug_assert_eq!(flags.len(), geom.size());
    flags.fill(false);
    let base = geom.logical(tid, 0, 0);
    let end = base + geom.size();
    let first = row_ptr.partition_point(|&v| v < base);
    for &start in row_ptr[first..].iter().take_while(|&&v| v < end) {
        // logical offset i*sigma + j is already the column-major flag index
        flags[start - base] = true;
    }
    flags[0] = true;
}

/// Per-column head counts become `y_offset` by an exclusive scan. The
/// "is headless" indicator segment-summed with the "has a head" flags gives
/// each headed column the length of the headless run to its right.
pub fn generate_y_and_seg_offset(
    bit_flag: &[bool],
    omega: usize,
    sigma: usize,
) -> (Vec<usize>, Vec<usize>) {
    assert_eq!(bit_flag.len(), omega * sigma);
    let mut y_offset = vec![0usize; omega];
    let mut seg_offset = vec![0usize; omega];
    let mut tmp_bit = vec![false; omega];
    for i in 0..omega {
        let column = &bit_flag[i * sigma..(i + 1) * sigma];
        for &f in column {
            y_offset[i] += usize::from(f);
            tmp_bit[i] |= f;
        }
        seg_offset[i] = usize::from(!tmp_bit[i]);
    }
    exclusive_prefix_sum(&mut y_offset);
    segmented_sum_by(&mut seg_offset, &tmp_bit).expect("lengths match");
    (y_offset, seg_offset)
}

/// Row of every segment head in tile `tid`, relative to the tile's first row,
/// in column-major head order.
pub fn generate_empty_offset(
    row_ptr: &[usize],
    tid: usize,
    tile_row: usize,
    bit_flag: &[bool],
    geom: TileGeometry,
) -> Vec<usize> {
    let mut out = Vec::with_capacity(bit_flag.iter().filter(|&&b| b).count());
    for i in 0..geom.omega {
        for j in 0..geom.sigma {
            if bit_flag[i * geom.sigma + j] {
                let g = geom.logical(tid, i, j);
                out.push(row_of_nonzero(row_ptr, g) - tile_row);
            }
        }
    }
    out
}

/// Machine word holding one packed descriptor column.
pub trait PackedWord: Copy + Default + Send + Sync + 'static {
    const BITS: u32;
    fn from_u64(v: u64) -> Self;
    fn to_u64(self) -> u64;
}

impl PackedWord for u32 {
    const BITS: u32 = 32;
    #[inline]
    fn from_u64(v: u64) -> Self {
        debug_assert!(v <= u64::from(u32::MAX));
        v as u32
    }
    #[inline]
    fn to_u64(self) -> u64 {
        u64::from(self)
    }
}

impl PackedWord for u64 {
    const BITS: u32 = 64;
    #[inline]
    fn from_u64(v: u64) -> Self {
        v
    }
    #[inline]
    fn to_u64(self) -> u64 {
        self
    }
}

#[inline]
fn ceil_log2(x: usize) -> u32 {
    if x <= 1 {
        0
    } else {
        usize::BITS - (x - 1).leading_zeros()
    }
}

#[inline]
fn low_mask(bits: u32) -> u64 {
    if bits >= 64 {
        u64::MAX
    } else {
        (1u64 << bits) - 1
    }
}

/// Bit-field layout of one descriptor column, most significant first:
/// `[y_offset | seg_offset | bit_flag]`, right-aligned in the word. Depth `j`
/// of `bit_flag` sits at bit `sigma - 1 - j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DescriptorLayout {
    pub omega: usize,
    pub sigma: usize,
    pub y_bits: u32,
    pub seg_bits: u32,
    pub word_bits: u32,
}

impl DescriptorLayout {
    pub fn new(omega: usize, sigma: usize) -> Result<Self> {
        if omega == 0 || sigma == 0 {
            return Err(Error::InvalidParams("omega and sigma must be at least 1"));
        }
        let y_bits = ceil_log2(omega * sigma);
        let seg_bits = ceil_log2(omega);
        let bits = y_bits as u64 + seg_bits as u64 + sigma as u64;
        let word_bits = match bits {
            0..=32 => 32,
            33..=64 => 64,
            _ => {
                return Err(Error::DescriptorOverflow {
                    omega,
                    sigma,
                    bits: u32::try_from(bits).unwrap_or(u32::MAX),
                })
            }
        };
        Ok(Self {
            omega,
            sigma,
            y_bits,
            seg_bits,
            word_bits,
        })
    }

    /// Bits used per column.
    #[inline]
    pub fn column_bits(&self) -> u32 {
        self.y_bits + self.seg_bits + self.sigma as u32
    }

    #[inline]
    fn flag_bits(&self) -> u32 {
        self.sigma as u32
    }

    /// Packs one column; `flags` has depth `j` at bit `sigma - 1 - j`.
    #[inline]
    pub fn pack_column(&self, y_offset: usize, seg_offset: usize, flags: u64) -> u64 {
        debug_assert!((y_offset as u64) <= low_mask(self.y_bits));
        debug_assert!((seg_offset as u64) <= low_mask(self.seg_bits));
        debug_assert!(flags <= low_mask(self.flag_bits()));
        let fb = self.flag_bits();
        // shifts are split so a zero-width y field never shifts by 64
        let y = ((y_offset as u64) << self.seg_bits) << fb;
        let seg = (seg_offset as u64) << fb;
        y | seg | flags
    }

    #[inline]
    pub fn unpack_column(&self, word: u64) -> (usize, usize, u64) {
        let fb = self.flag_bits();
        let flags = word & low_mask(fb);
        let seg = (word >> fb) & low_mask(self.seg_bits);
        let y = ((word >> fb) >> self.seg_bits) & low_mask(self.y_bits);
        (y as usize, seg as usize, flags)
    }

    /// Tests depth `j` in an unpacked flag field.
    #[inline]
    pub fn flag_at(&self, flags: u64, j: usize) -> bool {
        (flags >> (self.sigma - 1 - j)) & 1 != 0
    }

    pub fn pack<W: PackedWord>(&self, desc: &TileDescriptor, out: &mut [W]) {
        assert_eq!(desc.omega, self.omega);
        assert_eq!(desc.sigma, self.sigma);
        assert_eq!(out.len(), self.omega);
        for (i, word) in out.iter_mut().enumerate() {
            let flags = column_mask(&desc.bit_flag[i * self.sigma..(i + 1) * self.sigma]);
            *word = W::from_u64(self.pack_column(desc.y_offset[i], desc.seg_offset[i], flags));
        }
    }

    pub fn unpack<W: PackedWord>(&self, words: &[W]) -> TileDescriptor {
        assert_eq!(words.len(), self.omega);
        let mut desc = TileDescriptor {
            omega: self.omega,
            sigma: self.sigma,
            y_offset: vec![0; self.omega],
            seg_offset: vec![0; self.omega],
            bit_flag: vec![false; self.omega * self.sigma],
        };
        for (i, w) in words.iter().enumerate() {
            let (y, seg, flags) = self.unpack_column(w.to_u64());
            desc.y_offset[i] = y;
            desc.seg_offset[i] = seg;
            for j in 0..self.sigma {
                desc.bit_flag[i * self.sigma + j] = self.flag_at(flags, j);
            }
        }
        desc
    }
}

/// Column flags to a bit mask with depth `j` at bit `len - 1 - j`.
#[inline]
pub(crate) fn column_mask(column: &[bool]) -> u64 {
    column
        .iter()
        .fold(0u64, |acc, &f| (acc << 1) | u64::from(f))
}

/// Packs a descriptor into `omega` words of the layout's width.
pub fn pack_tile_descriptor(desc: &TileDescriptor, layout: &DescriptorLayout) -> Vec<u64> {
    let mut out = vec![0u64; layout.omega];
    layout.pack(desc, &mut out);
    out
}

pub fn unpack_tile_descriptor(words: &[u64], layout: &DescriptorLayout) -> TileDescriptor {
    layout.unpack(words)
}

/// Packed descriptors of all complete tiles, `omega` words per tile.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DescriptorWords {
    Narrow(Vec<u32>),
    Wide(Vec<u64>),
}

impl DescriptorWords {
    #[inline]
    pub fn word(&self, idx: usize) -> u64 {
        match self {
            DescriptorWords::Narrow(v) => u64::from(v[idx]),
            DescriptorWords::Wide(v) => v[idx],
        }
    }

    pub fn len(&self) -> usize {
        match self {
            DescriptorWords::Narrow(v) => v.len(),
            DescriptorWords::Wide(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn size_bytes(&self) -> usize {
        match self {
            DescriptorWords::Narrow(v) => v.len() * 4,
            DescriptorWords::Wide(v) => v.len() * 8,
        }
    }
}
