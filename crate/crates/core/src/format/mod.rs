//! The CSR5 storage format.

pub mod descriptor;
mod dump;
mod matrix;
pub mod params;
pub mod tile;
pub mod transpose;

pub use descriptor::{
    generate_bit_flag, generate_empty_offset, generate_y_and_seg_offset, pack_tile_descriptor,
    unpack_tile_descriptor, DescriptorLayout, DescriptorWords, PackedWord, TileDescriptor,
};
pub use matrix::{csr5_to_csr, csr_to_csr5, csr_to_csr5_with, Csr5Matrix};
pub use params::{select_omega, select_sigma, SigmaBounds, TuningParams};
pub use tile::{generate_tile_ptr, row_of_nonzero, TileGeometry, TilePointer, TilePtrArray};
pub use transpose::{transpose_tiles, untranspose_tiles};
