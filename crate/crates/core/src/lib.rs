//! CSR5 sparse matrix storage and SpMV.
//!
//! The crate is `no_std` (with `alloc`) unless the `std` feature is enabled.
//! The default `parallel` feature pulls in `std` and rayon and lets tile
//! conversion and the SpMV kernels fan out across the current rayon pool.
//!
//! Layout of the crate:
//! - [`csr`]: the classic CSR matrix, COO ingest and the dense reference oracle.
//! - [`scan`]: prefix scans, the serial segmented sum and the offset-driven
//!   fast segmented sum.
//! - [`format`]: the CSR5 representation, tuning parameters, tile pointers,
//!   packed tile descriptors and conversion to and from CSR.
//! - [`spmv`]: CSR-scalar, CSR segmented-sum and tile-parallel CSR5 kernels.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod csr;
pub mod error;
pub mod format;
pub mod scan;
pub mod spmv;

mod exec;

pub use csr::{coo_to_csr, dense_spmv_oracle, CooEntry, CsrMatrix};
pub use error::{Error, Result};
pub use exec::Exec;
pub use format::{
    csr5_to_csr, csr_to_csr5, csr_to_csr5_with, select_omega, select_sigma, Csr5Matrix,
    DescriptorLayout, SigmaBounds, TileDescriptor, TilePointer, TuningParams,
};
pub use spmv::{
    spmv_csr5, spmv_csr5_tile, spmv_csr_scalar, spmv_csr_segsum, AccumulateMode, Contribution,
    ContributionKind, SpmvWorkspace,
};

#[cfg(doctest)]
#[doc = include_str!("../../../README.md")]
struct ReadmeDoctests;
