//! SpMV kernels: CSR-scalar (row blocks), CSR with a serial segmented sum,
//! and the tile-parallel CSR5 kernel.

mod csr5;
mod scalar;
mod segsum;

pub use csr5::{
    spmv_csr5, spmv_csr5_tile, spmv_csr5_with, tile_contributions, AccumulateMode, Contribution,
    ContributionKind, ContributionSink, SpmvWorkspace,
};
pub use scalar::{spmv_csr_scalar, spmv_csr_scalar_with};
pub use segsum::spmv_csr_segsum;
