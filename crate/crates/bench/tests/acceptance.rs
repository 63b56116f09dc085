//! End-to-end acceptance checks. Each check prints one PASS/FAIL line; the
//! test fails if any check fails.

use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use csr5::format::{pack_tile_descriptor, unpack_tile_descriptor};
use csr5::scan::{fast_segmented_sum, serial_segmented_sum};
use csr5::spmv::spmv_csr5_with;
use csr5::{
    csr5_to_csr, csr_to_csr5, csr_to_csr5_with, dense_spmv_oracle, select_sigma, spmv_csr5,
    spmv_csr_scalar, spmv_csr_segsum, AccumulateMode, CsrMatrix, DescriptorLayout, Exec,
    SigmaBounds, TileDescriptor, TuningParams,
};
use csr5_bench::{generate_synthetic, iteration_speedup, max_relative_error, SyntheticKind};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Check<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

const OMEGAS: [usize; 4] = [1, 2, 4, 8];
const SIGMAS: [usize; 5] = [1, 2, 4, 12, 16];
/// Divisible by every omega * sigma in the grid.
const TILE_LCM: usize = 384;

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Row lengths given explicitly, distinct random columns, random values.
fn from_lengths(rng: &mut ChaCha8Rng, n: usize, lens: &[usize]) -> CsrMatrix {
    let mut row_ptr = vec![0];
    let mut col_idx = Vec::new();
    let mut val = Vec::new();
    for &len in lens {
        let start = col_idx.len();
        col_idx.extend(sample(rng, n, len));
        col_idx[start..].sort_unstable();
        val.extend((0..len).map(|_| rng.gen_range(-1.0..1.0)));
        row_ptr.push(col_idx.len());
    }
    CsrMatrix::new(lens.len(), n, row_ptr, col_idx, val).unwrap()
}

/// Splits `nnz` over `m` rows of capacity `n`, leaving each row empty with
/// probability `p_empty`.
fn random_lengths(
    rng: &mut ChaCha8Rng,
    m: usize,
    n: usize,
    nnz: usize,
    p_empty: f64,
) -> Vec<usize> {
    let open: Vec<usize> = (0..m).filter(|_| !rng.gen_bool(p_empty)).collect();
    let mut lens = vec![0; m];
    let cap = open.len() * n;
    let mut left = nnz.min(cap);
    while left > 0 {
        let r = open[rng.gen_range(0..open.len())];
        if lens[r] < n {
            lens[r] += 1;
            left -= 1;
        }
    }
    lens
}

fn corpus() -> Vec<CsrMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut out = Vec::new();
    for k in 0..600 {
        let m = rng.gen_range(1..=200);
        let n = rng.gen_range(1..=200);
        let cap = (m * n).min(5000);
        let a = match k % 8 {
            // all empty
            0 => CsrMatrix::zeros(m, n),
            // many empty rows
            1 => {
                let nnz = rng.gen_range(0..=cap);
                let lens = random_lengths(&mut rng, m, n, nnz, 0.6);
                from_lengths(&mut rng, n, &lens)
            }
            // singleton rows, some empty
            2 => {
                let lens: Vec<usize> = (0..m).map(|_| usize::from(rng.gen_bool(0.8))).collect();
                from_lengths(&mut rng, n, &lens)
            }
            // one row with 30% of the nonzeros
            3 => {
                let m = m.max(2);
                let n = n.max(30);
                let nnz = rng.gen_range(10..=(n * 10 / 3).min(5000).min(m * n / 2));
                generate_synthetic(
                    SyntheticKind::OneLongRow { fraction: 0.3 },
                    m,
                    n,
                    nnz,
                    k as u64,
                )
                .unwrap()
            }
            // nnz a multiple of every tile size
            4 => {
                let mult = (cap / TILE_LCM).max(1);
                let nnz = (TILE_LCM * rng.gen_range(1..=mult)).min(cap / TILE_LCM * TILE_LCM);
                if nnz == 0 {
                    generate_synthetic(SyntheticKind::Regular, 20, 200, TILE_LCM * 2, k as u64)
                        .unwrap()
                } else {
                    let lens = random_lengths(&mut rng, m, n, nnz, 0.0);
                    from_lengths(&mut rng, n, &lens)
                }
            }
            // fewer nonzeros than the smallest nontrivial tile
            5 => {
                let nnz = rng.gen_range(1..=cap.min(7));
                let lens = random_lengths(&mut rng, m, n, nnz, 0.3);
                from_lengths(&mut rng, n, &lens)
            }
            6 => generate_synthetic(
                SyntheticKind::Random,
                m,
                n,
                rng.gen_range(0..=cap),
                k as u64,
            )
            .unwrap(),
            _ => generate_synthetic(
                SyntheticKind::Regular,
                m,
                n,
                rng.gen_range(0..=cap),
                k as u64,
            )
            .unwrap(),
        };
        out.push(a);
    }
    out
}

/// Independent reference: multiply through a dense copy of the matrix.
fn dense_product(a: &CsrMatrix, x: &[f64]) -> Vec<f64> {
    let (m, n) = (a.rows(), a.cols());
    let mut dense = vec![0.0; m * n];
    for r in 0..m {
        for k in a.row_ptr()[r]..a.row_ptr()[r + 1] {
            dense[r * n + a.col_idx()[k]] += a.val()[k];
        }
    }
    (0..m)
        .map(|r| (0..n).map(|c| dense[r * n + c] * x[c]).sum())
        .collect()
}

fn oracle_equivalence(corpus: &[CsrMatrix]) -> Outcome {
    const TOL: f64 = 1e-12;
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut checks = 0usize;
    let mut worst = 0.0f64;
    let (mut with_empty, mut exact_multiple, mut below_tile) = (0, 0, 0);
    for (idx, a) in corpus.iter().enumerate() {
        if (0..a.rows()).any(|r| a.row_len(r) == 0) {
            with_empty += 1;
        }
        let x: Vec<f64> = (0..a.cols()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let y_ref = dense_spmv_oracle(a, &x).unwrap();
        let dense = dense_product(a, &x);
        let mut record =
            |name: &str, y: &[f64], params: Option<(usize, usize)>| -> Result<(), String> {
                let e = max_relative_error(a, &x, y, &y_ref);
                worst = worst.max(e);
                checks += 1;
                check(e <= TOL, || {
                    format!("matrix {idx} {name} {params:?}: error {e:e}")
                })
            };
        record("dense", &dense, None)?;
        record("csr-scalar", &spmv_csr_scalar(a, &x).unwrap(), None)?;
        record("csr-segsum", &spmv_csr_segsum(a, &x).unwrap(), None)?;
        for omega in OMEGAS {
            for sigma in SIGMAS {
                let params = TuningParams::new(omega, sigma).unwrap();
                let a5 = csr_to_csr5(a, params).unwrap();
                if a.nnz() > 0 && a.nnz() % (omega * sigma) == 0 {
                    exact_multiple += 1;
                }
                if a.nnz() < omega * sigma {
                    below_tile += 1;
                }
                for mode in [AccumulateMode::Deterministic, AccumulateMode::Atomic] {
                    let y = spmv_csr5(&a5, &x, mode).unwrap();
                    record(&format!("csr5 {mode:?}"), &y, Some((omega, sigma)))?;
                }
            }
        }
    }
    let elapsed = t0.elapsed();
    check(elapsed < Duration::from_secs(60), || {
        format!("took {elapsed:?}")
    })?;
    check(
        with_empty > 0 && exact_multiple > 0 && below_tile > 0,
        || "corpus lacks coverage".into(),
    )?;
    Ok(format!(
        "{} matrices, {checks} products, max rel err {worst:.2e}, {elapsed:.1?} \
         (empty-row matrices {with_empty}, exact-multiple cases {exact_multiple}, sub-tile cases {below_tile})",
        corpus.len()
    ))
}

fn roundtrip(corpus: &[CsrMatrix]) -> Outcome {
    let mut count = 0;
    for (idx, a) in corpus.iter().enumerate() {
        for omega in OMEGAS {
            for sigma in SIGMAS {
                let params = TuningParams::new(omega, sigma).unwrap();
                let back = csr5_to_csr(&csr_to_csr5(a, params).unwrap());
                let same = back.rows() == a.rows()
                    && back.cols() == a.cols()
                    && back.row_ptr() == a.row_ptr()
                    && back.col_idx() == a.col_idx()
                    && back
                        .val()
                        .iter()
                        .map(|v| v.to_bits())
                        .eq(a.val().iter().map(|v| v.to_bits()));
                check(same, || {
                    format!("matrix {idx} with ({omega},{sigma}) changed")
                })?;
                count += 1;
            }
        }
    }
    Ok(format!("{count} conversions bit-exact"))
}

/// 8x8, 34 nonzeros. Row lengths 2,4,0,7,5,1,7,8.
fn example_matrix() -> CsrMatrix {
    let lens = [2usize, 4, 0, 7, 5, 1, 7, 8];
    let mut row_ptr = vec![0];
    let mut col_idx = Vec::new();
    for &len in &lens {
        col_idx.extend(0..len);
        row_ptr.push(col_idx.len());
    }
    let val = (1..=col_idx.len()).map(|v| v as f64).collect();
    CsrMatrix::new(8, 8, row_ptr, col_idx, val).unwrap()
}

fn worked_example() -> Outcome {
    let a = example_matrix();
    check(a.nnz() == 34, || format!("nnz {}", a.nnz()))?;
    let a5 = csr_to_csr5(&a, TuningParams::new(4, 4).unwrap()).map_err(|e| e.to_string())?;
    check(a5.complete_tiles() == 2 && a5.tail_len() == 2, || {
        format!("tiles {} tail {}", a5.complete_tiles(), a5.tail_len())
    })?;
    let row1 = a5.tile_pointer(1).row;
    check(row1 == 4, || format!("tile_ptr[1] = {row1}"))?;
    let d1 = a5.tile_descriptor(1);
    check(d1.column_heads(0) == 3 && d1.column_heads(2) == 1, || {
        format!(
            "tile 1 heads per column {:?}",
            (0..4).map(|i| d1.column_heads(i)).collect::<Vec<_>>()
        )
    })?;
    check(d1.y_offset[1] == 3 && d1.y_offset[3] == 4, || {
        format!("tile 1 y_offset {:?}", d1.y_offset)
    })?;
    let d0 = a5.tile_descriptor(0);
    check(d0.seg_offset == [0, 1, 0, 0], || {
        format!("tile 0 seg_offset {:?}", d0.seg_offset)
    })?;
    check(d0.column_heads(2) == 0, || {
        "tile 0 column 2 has a head".into()
    })?;

    let x: Vec<f64> = (0..8).map(|c| c as f64 + 1.0).collect();
    let y = spmv_csr5(&a5, &x, AccumulateMode::Deterministic).unwrap();
    check(y == dense_spmv_oracle(&a, &x).unwrap(), || {
        "product differs".into()
    })?;
    Ok(format!(
        "2 tiles + tail 2, tile_ptr[1]={row1}, y_offset={:?}, seg_offset={:?}",
        d1.y_offset, d0.seg_offset
    ))
}

fn seg_offsets(heads: &[bool]) -> Vec<usize> {
    (0..heads.len())
        .map(|i| {
            if heads[i] {
                heads[i + 1..].iter().take_while(|&&h| !h).count()
            } else {
                0
            }
        })
        .collect()
}

fn fast_segsum() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0.0f64;
    for trial in 0..10_000 {
        let len = rng.gen_range(1..=64);
        let density = rng.gen_range(0.05..0.95);
        let mut heads: Vec<bool> = (0..len).map(|_| rng.gen_bool(density)).collect();
        heads[0] = true;
        let integer = trial % 2 == 0;
        let scale = 10f64.powi(rng.gen_range(-6..7));
        let data: Vec<f64> = (0..len)
            .map(|_| {
                if integer {
                    rng.gen_range(-1000i32..=1000) as f64
                } else {
                    rng.gen_range(-1.0..1.0) * scale
                }
            })
            .collect();
        let mut serial = data.clone();
        serial_segmented_sum(&mut serial, &heads).unwrap();
        let offsets = seg_offsets(&heads);
        let mut fast = data.clone();
        fast_segmented_sum(&mut fast, &offsets).unwrap();
        for i in (0..len).filter(|&i| heads[i]) {
            if integer {
                check(fast[i].to_bits() == serial[i].to_bits(), || {
                    format!("trial {trial} head {i}: {} vs {}", fast[i], serial[i])
                })?;
            } else {
                let scale: f64 = data[i..=i + offsets[i]].iter().map(|v| v.abs()).sum();
                let diff = (fast[i] - serial[i]).abs();
                let rel = if diff == 0.0 { 0.0 } else { diff / scale };
                worst = worst.max(rel);
                check(rel <= 1e-12, || {
                    format!("trial {trial} head {i}: rel {rel:e}")
                })?;
            }
        }
    }
    Ok(format!(
        "10000 trials, integer data bit-exact, max rel err {worst:.2e}"
    ))
}

fn descriptor_packing() -> Outcome {
    let l = DescriptorLayout::new(32, 16).map_err(|e| e.to_string())?;
    check(
        (l.y_bits, l.seg_bits, l.column_bits(), l.word_bits) == (9, 5, 30, 32),
        || {
            format!(
                "widths {}+{}+16={} in {}",
                l.y_bits,
                l.seg_bits,
                l.column_bits(),
                l.word_bits
            )
        },
    )?;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut count = 0;
    for omega in [4usize, 8, 32] {
        for sigma in [4usize, 12, 16] {
            let layout = DescriptorLayout::new(omega, sigma).map_err(|e| e.to_string())?;
            for _ in 0..112 {
                let density = rng.gen_range(0.0..1.0);
                let flags: Vec<bool> = (0..omega * sigma).map(|_| rng.gen_bool(density)).collect();
                let desc = TileDescriptor::from_bit_flag(flags, omega, sigma);
                let words = pack_tile_descriptor(&desc, &layout);
                let back = unpack_tile_descriptor(&words, &layout);
                check(back == desc, || {
                    format!("roundtrip failed for ({omega},{sigma})")
                })?;
                count += 1;
            }
        }
    }
    check(count >= 1000, || format!("only {count} descriptors"))?;
    Ok(format!(
        "9+5+16=30 bits in a 32-bit word, {count} descriptors roundtrip"
    ))
}

fn sigma_selection() -> Outcome {
    let bounds = SigmaBounds::MAXWELL;
    let got: Vec<usize> = [2.0, 10.0, 100.0, 1000.0]
        .iter()
        .map(|&d| select_sigma(d, &bounds, None))
        .collect();
    check(got == [4, 10, 32, 4], || format!("sigma {got:?}"))?;
    Ok(format!("nnz/row 2,10,100,1000 -> sigma {got:?}"))
}

fn determinism() -> Outcome {
    let a = generate_synthetic(SyntheticKind::Random, 10_000, 10_000, 100_000, 7).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(70);
    let x: Vec<f64> = (0..a.cols()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let a5 = csr_to_csr5(&a, TuningParams::default()).unwrap();
    let mut reference: Option<Vec<u64>> = None;
    for threads in [1, 2, 8] {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        for run in 0..5 {
            let y = pool.install(|| spmv_csr5(&a5, &x, AccumulateMode::Deterministic).unwrap());
            let bits: Vec<u64> = y.iter().map(|v| v.to_bits()).collect();
            match &reference {
                None => reference = Some(bits),
                Some(r) => check(*r == bits, || {
                    format!("threads {threads} run {run} differs")
                })?,
            }
        }
    }
    Ok(format!(
        "nnz {}, 15 runs over 1/2/8 threads bit-identical",
        a.nnz()
    ))
}

fn iteration_model() -> Outcome {
    let s = iteration_speedup(1.0, 5.0, 0.5, 50).map_err(|e| e.to_string())?;
    check((s - 1.6667).abs() <= 1e-4, || format!("speedup {s}"))?;
    let mut prev = 0.0;
    for n in 1..=500 {
        let v = iteration_speedup(1.0, 5.0, 0.5, n).map_err(|e| e.to_string())?;
        check(v > prev, || format!("not increasing at n={n}"))?;
        prev = v;
    }
    Ok(format!(
        "speedup(1,5,0.5,50)={s:.4}, increasing over n=1..500"
    ))
}

fn best_of<T>(reps: usize, mut f: impl FnMut() -> T) -> (Duration, T) {
    let mut best = Duration::MAX;
    let mut last = None;
    for _ in 0..reps {
        let t0 = Instant::now();
        let v = f();
        best = best.min(t0.elapsed());
        last = Some(v);
    }
    (best, last.unwrap())
}

fn conversion_cost() -> Outcome {
    let a = generate_synthetic(SyntheticKind::Random, 200_000, 200_000, 1_000_000, 9).unwrap();
    let params = TuningParams::default();
    let x: Vec<f64> = vec![1.0; a.cols()];
    let (conv, a5) = best_of(3, || csr_to_csr5_with(&a, params, Exec::Parallel).unwrap());
    let (spmv, _) = best_of(5, || {
        spmv_csr5_with(&a5, &x, AccumulateMode::Deterministic, Exec::Parallel).unwrap()
    });
    let ratio = conv.as_secs_f64() / spmv.as_secs_f64();
    check(ratio <= 50.0, || {
        format!("conversion {conv:?} is {ratio:.1}x one spmv {spmv:?}")
    })?;
    Ok(format!(
        "nnz {}, conversion {conv:.2?} = {ratio:.1}x one spmv ({spmv:.2?})",
        a.nnz()
    ))
}

fn space_overhead() -> Outcome {
    let params = TuningParams::new(32, 16).unwrap();
    let mut parts = Vec::new();
    for (label, kind, m) in [
        ("regular", SyntheticKind::Regular, 100_000),
        ("random", SyntheticKind::Random, 200_000),
    ] {
        let a = generate_synthetic(kind, m, m, 1_000_000, 10).unwrap();
        let a5 = csr_to_csr5(&a, params).unwrap();
        let csr = a5.csr_footprint_bytes(4, 8) as f64;
        let tiles = a5.tile_metadata_bytes() as f64;
        // empty_offset entries counted as 32-bit indices
        let with_empty = tiles + 4.0 * a5.empty_offset_len() as f64;
        let (p_tiles, p_all) = (100.0 * tiles / csr, 100.0 * with_empty / csr);
        check(p_all < 4.0, || {
            format!("{label}: metadata {p_all:.2}% of CSR")
        })?;
        parts.push(format!(
            "{label} {p_tiles:.2}% ({p_all:.2}% with empty_offset)"
        ));
    }
    Ok(format!("tile metadata / CSR: {}", parts.join(", ")))
}

/// Writes to the process stdout directly so the lines survive the test
/// harness's output capture.
fn report(line: String) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{line}");
    let _ = out.flush();
}

#[test]
fn acceptance() {
    report(String::new());
    let corpus = corpus();
    let checks: Vec<Check<'_>> = vec![
        (
            "oracle equivalence",
            Box::new(|| oracle_equivalence(&corpus)),
        ),
        ("roundtrip", Box::new(|| roundtrip(&corpus))),
        ("worked 8x8 example", Box::new(worked_example)),
        ("fast segmented sum", Box::new(fast_segsum)),
        ("descriptor packing", Box::new(descriptor_packing)),
        ("sigma selection", Box::new(sigma_selection)),
        ("determinism", Box::new(determinism)),
        ("iteration model", Box::new(iteration_model)),
        ("conversion cost", Box::new(conversion_cost)),
        ("space overhead", Box::new(space_overhead)),
    ];
    let mut failed = Vec::new();
    for (k, (name, f)) in checks.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        match outcome {
            Ok(detail) => report(format!("PASS {:>2} {name}: {detail}", k + 1)),
            Err(why) => {
                report(format!("FAIL {:>2} {name}: {why}", k + 1));
                failed.push(k + 1);
            }
        }
    }
    assert!(failed.is_empty(), "failed checks: {failed:?}");
}
