use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Parser, ValueEnum};
use csr5::{csr_to_csr5, AccumulateMode, CsrMatrix, SigmaBounds, TuningParams};
use csr5_bench::bench::VALIDATION_TOLERANCE;
use csr5_bench::synth::DEFAULT_LONG_ROW_FRACTION;
use csr5_bench::{
    emit_csv, generate_synthetic, read_matrix_market, run_benchmark, BenchConfig, BenchError,
    BenchReport, FaultyKernel, Kernel, KernelKind, SyntheticKind,
};

const THREADS_ENV: &str = "SPMV_BENCH_THREADS";

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Mode {
    Deterministic,
    Atomic,
}

#[derive(Debug, Parser)]
#[command(
    name = "spmv-bench",
    version,
    about = "Benchmark CSR and CSR5 sparse matrix-vector multiplication",
    group(ArgGroup::new("input").required(true).args(["matrix", "synthetic"]))
)]
struct Cli {
    /// Matrix Market coordinate file.
    #[arg(long)]
    matrix: Option<PathBuf>,

    /// Generate a matrix instead: regular, one-long-row or random.
    #[arg(long, requires_all = ["rows", "cols", "nnz"])]
    synthetic: Option<SyntheticKind>,

    /// Rows of the synthetic matrix.
    #[arg(long)]
    rows: Option<usize>,

    /// Columns of the synthetic matrix.
    #[arg(long)]
    cols: Option<usize>,

    /// Nonzeros of the synthetic matrix.
    #[arg(long)]
    nnz: Option<usize>,

    /// Seed for the synthetic matrix and the input vector.
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Share of nonzeros in the long row for `one-long-row`.
    #[arg(long, default_value_t = DEFAULT_LONG_ROW_FRACTION)]
    long_row_fraction: f64,

    /// Comma separated list of csr-scalar, csr-segsum, csr5.
    #[arg(long, value_delimiter = ',', default_values_t = KernelKind::ALL)]
    kernels: Vec<KernelKind>,

    /// Tile width.
    #[arg(long, default_value_t = 4)]
    omega: usize,

    /// Tile height, or `auto` to derive it from the average row length.
    #[arg(long, default_value = "16")]
    sigma: String,

    /// Bounds r,s,t,u for automatic sigma selection.
    #[arg(long, value_delimiter = ',', value_name = "R,S,T,U")]
    tune_bounds: Option<Vec<usize>>,

    /// Timed samples per kernel.
    #[arg(long, default_value_t = 10)]
    runs: usize,

    /// Calls averaged into each sample.
    #[arg(long, default_value_t = 1000)]
    inner: usize,

    /// Untimed calls before sampling.
    #[arg(long, default_value_t = 10)]
    warmup: usize,

    /// Worker threads. Falls back to SPMV_BENCH_THREADS, then the core count.
    #[arg(long)]
    threads: Option<usize>,

    /// How csr5 combines partial sums at tile boundaries.
    #[arg(long, value_enum, default_value_t = Mode::Deterministic)]
    mode: Mode,

    /// Write one CSV row per kernel to this file.
    #[arg(long)]
    csv: Option<PathBuf>,

    /// Print the CSR5 layout, to PATH if given, else to stdout.
    #[arg(long, num_args = 0..=1, value_name = "PATH")]
    dump_format: Option<Option<PathBuf>>,

    #[arg(long, hide = true)]
    inject_fault: Option<KernelKind>,
}

fn thread_count(flag: Option<usize>) -> Result<usize, BenchError> {
    if let Some(t) = flag {
        return Ok(t);
    }
    if let Ok(v) = std::env::var(THREADS_ENV) {
        return v.trim().parse().map_err(|_| {
            BenchError::Invalid(format!("{THREADS_ENV}={v:?} is not a thread count"))
        });
    }
    Ok(std::thread::available_parallelism().map_or(1, |n| n.get()))
}

fn load(cli: &Cli) -> Result<(String, CsrMatrix), BenchError> {
    if let Some(path) = &cli.matrix {
        let a = read_matrix_market(path)?.to_csr()?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        return Ok((name, a));
    }
    let kind = match cli.synthetic {
        Some(SyntheticKind::OneLongRow { .. }) => SyntheticKind::OneLongRow {
            fraction: cli.long_row_fraction,
        },
        Some(k) => k,
        None => return Err(BenchError::Invalid("no input matrix".into())),
    };
    let (m, n, nnz) = (
        cli.rows.unwrap_or(0),
        cli.cols.unwrap_or(0),
        cli.nnz.unwrap_or(0),
    );
    let a = generate_synthetic(kind, m, n, nnz, cli.seed)?;
    Ok((format!("{kind}-{m}x{n}-{nnz}-s{}", cli.seed), a))
}

fn tuning(cli: &Cli, a: &CsrMatrix) -> Result<TuningParams, BenchError> {
    let bounds = match &cli.tune_bounds {
        Some(b) => match b[..] {
            [r, s, t, u] => SigmaBounds::new(r, s, t, u)?,
            _ => {
                return Err(BenchError::Invalid(
                    "--tune-bounds expects four values r,s,t,u".into(),
                ))
            }
        },
        None => SigmaBounds::default(),
    };
    let params = if cli.sigma == "auto" {
        TuningParams::adaptive(cli.omega, a.nnz(), a.rows(), bounds)?
    } else {
        let sigma = cli.sigma.parse().map_err(|_| {
            BenchError::Invalid(format!(
                "--sigma expects an integer or auto, got {:?}",
                cli.sigma
            ))
        })?;
        TuningParams::with_bounds(cli.omega, sigma, bounds)?
    };
    Ok(params)
}

fn print_report(r: &BenchReport) {
    println!(
        "{}: {}x{} nnz={} threads={}",
        r.matrix, r.rows, r.cols, r.nnz, r.threads
    );
    println!(
        "{:<12} {:>12} {:>12} {:>9} {:>12} {:>10} {:>10}",
        "kernel", "best_ms", "avg_ms", "gflops", "conv_ms", "x(n=50)", "x(n=500)"
    );
    let cell =
        |v: Option<f64>, scale: f64| v.map_or("-".to_string(), |x| format!("{:.4}", x * scale));
    for t in &r.kernels {
        println!(
            "{:<12} {:>12.6} {:>12.6} {:>9.3} {:>12} {:>10} {:>10}",
            t.kernel,
            t.best_secs * 1e3,
            t.avg_secs * 1e3,
            t.gflops,
            cell(t.conv_secs, 1e3),
            cell(t.speedup_n50, 1.0),
            cell(t.speedup_n500, 1.0),
        );
    }
}

fn run(cli: Cli) -> Result<(), BenchError> {
    let threads = thread_count(cli.threads)?;
    if threads == 0 {
        return Err(BenchError::Invalid(
            "thread count must be at least 1".into(),
        ));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| BenchError::Invalid(format!("thread pool: {e}")))?;

    let (name, a) = load(&cli)?;
    let params = tuning(&cli, &a)?;
    let mode = match cli.mode {
        Mode::Deterministic => AccumulateMode::Deterministic,
        Mode::Atomic => AccumulateMode::Atomic,
    };

    if let Some(dest) = &cli.dump_format {
        let dump = pool.install(|| csr_to_csr5(&a, params))?.debug_dump();
        match dest {
            Some(path) => std::fs::write(path, dump).map_err(|e| BenchError::Io {
                path: path.clone(),
                source: e,
            })?,
            None => print!("{dump}"),
        }
    }

    let kernels: Vec<Box<dyn Kernel>> = cli
        .kernels
        .iter()
        .map(|&k| {
            let kernel = k.build(params, mode);
            if cli.inject_fault == Some(k) {
                Box::new(FaultyKernel(kernel)) as Box<dyn Kernel>
            } else {
                kernel
            }
        })
        .collect();
    let cfg = BenchConfig {
        runs: cli.runs,
        inner: cli.inner,
        warmup: cli.warmup,
        threads,
        seed: cli.seed,
    };
    let report = pool.install(|| run_benchmark(&name, &a, kernels, &cfg))?;
    print_report(&report);
    if let Some(path) = &cli.csv {
        emit_csv(path, std::slice::from_ref(&report))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e @ BenchError::Correctness { .. }) => {
            eprintln!("error: {e} (tolerance {VALIDATION_TOLERANCE:e})");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
