use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// A COO entry lies outside the declared shape.
    #[error("entry {index} at ({row}, {col}) is out of bounds for a {m}x{n} matrix")]
    EntryOutOfBounds {
        index: usize,
        row: usize,
        col: usize,
        m: usize,
        n: usize,
    },

    #[error("invalid CSR structure: {0}")]
    InvalidCsr(&'static str),

    #[error("dimension mismatch: expected length {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid tuning parameters: {0}")]
    InvalidParams(&'static str),

    /// The packed descriptor fields do not fit in a 64-bit word.
    #[error(
        "tile descriptor needs {bits} bits per column (omega={omega}, sigma={sigma}); \
         use a smaller sigma or a wider word"
    )]
    DescriptorOverflow {
        omega: usize,
        sigma: usize,
        bits: u32,
    },

    #[error("segment offset {offset} at position {index} runs past length {len}")]
    OffsetOutOfRange {
        index: usize,
        offset: usize,
        len: usize,
    },
}
