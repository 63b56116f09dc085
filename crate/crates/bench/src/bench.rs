//! Timing loop, correctness gate and iteration-count speedup model.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use csr5::spmv::spmv_csr5_with;
use csr5::{
    csr_to_csr5_with, dense_spmv_oracle, spmv_csr_segsum, AccumulateMode, Csr5Matrix, CsrMatrix,
    Exec, TuningParams,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{BenchError, Result};

/// Relative tolerance for the pre-timing correctness check.
pub const VALIDATION_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KernelKind {
    CsrScalar,
    CsrSegsum,
    Csr5,
}

impl KernelKind {
    pub const ALL: [KernelKind; 3] = [
        KernelKind::CsrScalar,
        KernelKind::CsrSegsum,
        KernelKind::Csr5,
    ];

    pub fn name(self) -> &'static str {
        match self {
            KernelKind::CsrScalar => "csr-scalar",
            KernelKind::CsrSegsum => "csr-segsum",
            KernelKind::Csr5 => "csr5",
        }
    }

    pub fn build(self, params: TuningParams, mode: AccumulateMode) -> Box<dyn Kernel> {
        match self {
            KernelKind::CsrScalar => Box::new(CsrScalarKernel),
            KernelKind::CsrSegsum => Box::new(CsrSegsumKernel),
            KernelKind::Csr5 => Box::new(Csr5Kernel {
                params,
                mode,
                matrix: None,
            }),
        }
    }
}

impl fmt::Display for KernelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for KernelKind {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self> {
        KernelKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                BenchError::Invalid(format!(
                    "unknown kernel {s:?} (expected csr-scalar, csr-segsum or csr5)"
                ))
            })
    }
}

/// A timed SpMV implementation.
pub trait Kernel: Send + Sync {
    fn name(&self) -> &str;

    /// One-off format conversion. Kernels working on CSR directly do nothing.
    fn prepare(&mut self, _a: &CsrMatrix) -> Result<()> {
        Ok(())
    }

    fn has_preprocessing(&self) -> bool {
        false
    }

    fn spmv(&self, a: &CsrMatrix, x: &[f64]) -> Result<Vec<f64>>;
}

struct CsrScalarKernel;

impl Kernel for CsrScalarKernel {
    fn name(&self) -> &str {
        KernelKind::CsrScalar.name()
    }

    fn spmv(&self, a: &CsrMatrix, x: &[f64]) -> Result<Vec<f64>> {
        Ok(csr5::spmv::spmv_csr_scalar_with(a, x, Exec::Parallel)?)
    }
}

struct CsrSegsumKernel;

impl Kernel for CsrSegsumKernel {
    fn name(&self) -> &str {
        KernelKind::CsrSegsum.name()
    }

    fn spmv(&self, a: &CsrMatrix, x: &[f64]) -> Result<Vec<f64>> {
        Ok(spmv_csr_segsum(a, x)?)
    }
}

struct Csr5Kernel {
    params: TuningParams,
    mode: AccumulateMode,
    matrix: Option<Csr5Matrix>,
}

impl Kernel for Csr5Kernel {
    fn name(&self) -> &str {
        KernelKind::Csr5.name()
    }

    fn prepare(&mut self, a: &CsrMatrix) -> Result<()> {
        self.matrix = Some(csr_to_csr5_with(a, self.params, Exec::Parallel)?);
        Ok(())
    }

    fn has_preprocessing(&self) -> bool {
        true
    }

    fn spmv(&self, _a: &CsrMatrix, x: &[f64]) -> Result<Vec<f64>> {
        let a5 = self
            .matrix
            .as_ref()
            .ok_or_else(|| BenchError::Invalid("csr5 kernel used before prepare".into()))?;
        Ok(spmv_csr5_with(a5, x, self.mode, Exec::Parallel)?)
    }
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub runs: usize,
    pub inner: usize,
    pub warmup: usize,
    /// Recorded in the report; the caller installs the matching thread pool.
    pub threads: usize,
    pub seed: u64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            runs: 10,
            inner: 1000,
            warmup: 10,
            threads: 1,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelTiming {
    pub kernel: String,
    /// Seconds per call, one entry per run (each averaged over `inner` calls).
    pub samples: Vec<f64>,
    pub best_secs: f64,
    pub avg_secs: f64,
    pub gflops: f64,
    pub conv_secs: Option<f64>,
    pub max_rel_err: f64,
    pub speedup_n50: Option<f64>,
    pub speedup_n500: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub matrix: String,
    pub rows: usize,
    pub cols: usize,
    pub nnz: usize,
    pub threads: usize,
    pub kernels: Vec<KernelTiming>,
}

/// Total-time ratio for `n` products including one-off preprocessing:
/// `n * t_csr / (t_pre + n * t_new)`.
pub fn iteration_speedup(t_csr: f64, t_pre: f64, t_new: f64, n: usize) -> Result<f64> {
    // written so that NaN inputs are rejected
    let valid = t_csr > 0.0 && t_new > 0.0 && t_pre >= 0.0 && n > 0;
    if !valid {
        return Err(BenchError::Invalid(format!(
            "speedup needs positive times and n (t_csr={t_csr}, t_pre={t_pre}, t_new={t_new}, n={n})"
        )));
    }
    let n = n as f64;
    Ok(n * t_csr / (t_pre + n * t_new))
}

/// Largest per-row error relative to `sum_j |a_ij x_j|`. Rows whose scale is
/// zero must match exactly, otherwise the result is infinite.
pub fn max_relative_error(a: &CsrMatrix, x: &[f64], y: &[f64], y_ref: &[f64]) -> f64 {
    if y.len() != y_ref.len() {
        return f64::INFINITY;
    }
    let (rp, ci, v) = (a.row_ptr(), a.col_idx(), a.val());
    let mut worst = 0.0f64;
    for r in 0..a.rows() {
        let scale: f64 = (rp[r]..rp[r + 1]).map(|k| (v[k] * x[ci[k]]).abs()).sum();
        let diff = (y[r] - y_ref[r]).abs();
        let rel = if diff == 0.0 {
            0.0
        } else if scale > 0.0 {
            diff / scale
        } else {
            f64::INFINITY
        };
        if rel.is_nan() {
            return f64::INFINITY;
        }
        worst = worst.max(rel);
    }
    worst
}

fn time_kernel(k: &dyn Kernel, a: &CsrMatrix, x: &[f64], cfg: &BenchConfig) -> Result<Vec<f64>> {
    for _ in 0..cfg.warmup {
        std::hint::black_box(k.spmv(a, x)?);
    }
    let inner = cfg.inner.max(1);
    let mut samples = Vec::with_capacity(cfg.runs);
    for _ in 0..cfg.runs.max(1) {
        let t0 = Instant::now();
        for _ in 0..inner {
            std::hint::black_box(k.spmv(a, std::hint::black_box(x))?);
        }
        samples.push(t0.elapsed().as_secs_f64() / inner as f64);
    }
    Ok(samples)
}

/// Validates every kernel against the dense reference, then times it.
///
/// A kernel whose output differs from the reference by more than
/// [`VALIDATION_TOLERANCE`] aborts the run with [`BenchError::Correctness`].
/// Speedups are filled in when a `csr-scalar` kernel is part of the run.
pub fn run_benchmark(
    name: &str,
    a: &CsrMatrix,
    kernels: Vec<Box<dyn Kernel>>,
    cfg: &BenchConfig,
) -> Result<BenchReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let x: Vec<f64> = (0..a.cols()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let y_ref = dense_spmv_oracle(a, &x)?;
    let flops = 2.0 * a.nnz() as f64;

    let mut timings = Vec::with_capacity(kernels.len());
    for mut k in kernels {
        let mut conv_secs = None;
        if k.has_preprocessing() {
            let mut best = f64::INFINITY;
            for _ in 0..cfg.runs.max(1) {
                let t0 = Instant::now();
                k.prepare(a)?;
                best = best.min(t0.elapsed().as_secs_f64());
            }
            conv_secs = Some(best);
        } else {
            k.prepare(a)?;
        }

        let y = k.spmv(a, &x)?;
        let err = max_relative_error(a, &x, &y, &y_ref);
        if err > VALIDATION_TOLERANCE {
            return Err(BenchError::Correctness {
                kernel: k.name().to_string(),
                max_rel_err: err,
            });
        }

        let samples = time_kernel(k.as_ref(), a, &x, cfg)?;
        let best = samples.iter().copied().fold(f64::INFINITY, f64::min);
        let avg = samples.iter().sum::<f64>() / samples.len() as f64;
        timings.push(KernelTiming {
            kernel: k.name().to_string(),
            samples,
            best_secs: best,
            avg_secs: avg,
            gflops: if best > 0.0 { flops / best * 1e-9 } else { 0.0 },
            conv_secs,
            max_rel_err: err,
            speedup_n50: None,
            speedup_n500: None,
        });
    }

    let baseline = timings
        .iter()
        .find(|t| t.kernel == KernelKind::CsrScalar.name())
        .map(|t| t.best_secs);
    if let Some(t_csr) = baseline {
        for t in &mut timings {
            let pre = t.conv_secs.unwrap_or(0.0);
            t.speedup_n50 = iteration_speedup(t_csr, pre, t.best_secs, 50).ok();
            t.speedup_n500 = iteration_speedup(t_csr, pre, t.best_secs, 500).ok();
        }
    }

    Ok(BenchReport {
        matrix: name.to_string(),
        rows: a.rows(),
        cols: a.cols(),
        nnz: a.nnz(),
        threads: cfg.threads,
        kernels: timings,
    })
}

/// Wraps a kernel and perturbs one output entry; used to exercise the
/// correctness gate.
pub struct FaultyKernel(pub Box<dyn Kernel>);

impl Kernel for FaultyKernel {
    fn name(&self) -> &str {
        self.0.name()
    }

    fn prepare(&mut self, a: &CsrMatrix) -> Result<()> {
        self.0.prepare(a)
    }

    fn has_preprocessing(&self) -> bool {
        self.0.has_preprocessing()
    }

    fn spmv(&self, a: &CsrMatrix, x: &[f64]) -> Result<Vec<f64>> {
        let mut y = self.0.spmv(a, x)?;
        if let Some(v) = y.first_mut() {
            *v += 1.0;
        }
        Ok(y)
    }
}
