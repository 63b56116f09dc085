//! Matrix ingestion, synthetic generators and the SpMV benchmark harness
//! built on the `csr5` crate.

pub mod bench;
pub mod error;
pub mod mtx;
pub mod report;
pub mod synth;

pub use bench::{
    iteration_speedup, max_relative_error, run_benchmark, BenchConfig, BenchReport, FaultyKernel,
    Kernel, KernelKind, KernelTiming,
};
pub use error::BenchError;
pub use mtx::{parse_matrix_market, read_matrix_market, MatrixMarket};
pub use report::{emit_csv, read_csv, rows_of, write_csv, CsvRow, CSV_HEADER};
pub use synth::{generate_synthetic, SyntheticKind};
