//! Prefix scans and segmented sums.
//!
//! All scans run left to right, so results are reproducible bit for bit.

use alloc::vec::Vec;

use crate::error::{Error, Result};

/// In-place inclusive prefix sum.
pub fn inclusive_prefix_sum(data: &mut [f64]) {
    let mut acc = 0.0;
    for v in data.iter_mut() {
        acc += *v;
        *v = acc;
    }
}

/// In-place exclusive prefix sum; the first output is 0.
pub fn exclusive_prefix_sum(data: &mut [usize]) {
    let mut acc = 0;
    for v in data.iter_mut() {
        let cur = *v;
        *v = acc;
        acc += cur;
    }
}

/// Serial segmented sum over a generic additive type.
///
/// Every head position receives the sum of its segment (head through the
/// entry before the next head). Every other position is zeroed, including a
/// leading run with no head, whose values are discarded.
pub fn segmented_sum_by<T>(data: &mut [T], flags: &[bool]) -> Result<()>
where
    T: Copy + Default + core::ops::AddAssign,
{
    if data.len() != flags.len() {
        return Err(Error::DimensionMismatch {
            expected: data.len(),
            actual: flags.len(),
        });
    }
    let len = data.len();
    let mut i = 0;
    while i < len {
        if flags[i] {
            let mut j = i + 1;
            while j < len && !flags[j] {
                let v = data[j];
                data[i] += v;
                j += 1;
            }
            // Positions i+1..j are non-heads and are zeroed on their own turn.
            for slot in &mut data[i + 1..j] {
                *slot = T::default();
            }
            i = j;
        } else {
            data[i] = T::default();
            i += 1;
        }
    }
    Ok(())
}

/// Serial segmented sum of doubles; see [`segmented_sum_by`].
pub fn serial_segmented_sum(data: &mut [f64], flags: &[bool]) -> Result<()> {
    segmented_sum_by(data, flags)
}

/// Segmented sum driven by per-position segment lengths.
///
/// With `S` the inclusive scan of the input, position `i` becomes
/// `S[i + seg_offset[i]] - S[i] + input[i]`: the sum of `input[i..=i + seg_offset[i]]`.
/// Positions that are not segment heads receive whatever the formula yields
/// and should not be read.
pub fn fast_segmented_sum(data: &mut [f64], seg_offset: &[usize]) -> Result<()> {
    let mut scratch = Vec::with_capacity(data.len());
    fast_segmented_sum_with(data, seg_offset, &mut scratch)
}

/// [`fast_segmented_sum`] reusing a caller-provided scratch buffer.
pub fn fast_segmented_sum_with(
    data: &mut [f64],
    seg_offset: &[usize],
    scratch: &mut Vec<f64>,
) -> Result<()> {
    let len = data.len();
    if seg_offset.len() != len {
        return Err(Error::DimensionMismatch {
            expected: len,
            actual: seg_offset.len(),
        });
    }
    for (index, &offset) in seg_offset.iter().enumerate() {
        if index + offset >= len {
            return Err(Error::OffsetOutOfRange { index, offset, len });
        }
    }
    scratch.clear();
    scratch.extend_from_slice(data);
    inclusive_prefix_sum(data);
    // Reads of data[i + off] must see the scan, not already-updated outputs,
    // so keep a second copy of the scan in the scratch tail.
    scratch.extend_from_slice(data);
    let (orig, scanned) = scratch.split_at(len);
    for i in 0..len {
        data[i] = scanned[i + seg_offset[i]] - scanned[i] + orig[i];
    }
    Ok(())
}
