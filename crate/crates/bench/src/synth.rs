//! Seeded synthetic sparse matrices.

use std::fmt;
use std::str::FromStr;

use csr5::CsrMatrix;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{BenchError, Result};

pub const DEFAULT_LONG_ROW_FRACTION: f64 = 0.15;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SyntheticKind {
    /// Same length for every row, remainder spread over the first rows.
    Regular,
    /// One row holds `fraction` of all nonzeros, the rest are spread evenly.
    OneLongRow { fraction: f64 },
    /// Heavy-tailed row lengths; empty rows are common.
    Random,
}

impl FromStr for SyntheticKind {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "regular" => Ok(SyntheticKind::Regular),
            "one-long-row" => Ok(SyntheticKind::OneLongRow {
                fraction: DEFAULT_LONG_ROW_FRACTION,
            }),
            "random" => Ok(SyntheticKind::Random),
            other => Err(BenchError::Invalid(format!(
                "unknown synthetic kind {other:?} (expected regular, one-long-row or random)"
            ))),
        }
    }
}

impl fmt::Display for SyntheticKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SyntheticKind::Regular => f.write_str("regular"),
            SyntheticKind::OneLongRow { .. } => f.write_str("one-long-row"),
            SyntheticKind::Random => f.write_str("random"),
        }
    }
}

fn spread_evenly(lens: &mut [usize], rows: impl Iterator<Item = usize> + Clone, total: usize) {
    let count = rows.clone().count();
    if count == 0 {
        return;
    }
    let (base, rem) = (total / count, total % count);
    for (k, r) in rows.enumerate() {
        lens[r] = base + usize::from(k < rem);
    }
}

fn skewed_lengths(rng: &mut ChaCha8Rng, m: usize, n: usize, nnz: usize) -> Vec<usize> {
    // Pareto weights with shape 1.5
    let weights: Vec<f64> = (0..m)
        .map(|_| {
            let u: f64 = rng.gen_range(f64::EPSILON..1.0);
            u.powf(-1.0 / 1.5)
        })
        .collect();
    let total: f64 = weights.iter().sum();
    let mut lens: Vec<usize> = weights
        .iter()
        .map(|w| ((nnz as f64 * w / total) as usize).min(n))
        .collect();
    let mut left = nnz - lens.iter().sum::<usize>();

    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| weights[b].total_cmp(&weights[a]));
    while left > 0 {
        for &r in &order {
            if left == 0 {
                break;
            }
            if lens[r] < n {
                lens[r] += 1;
                left -= 1;
            }
        }
    }
    lens
}

/// Deterministic for a given `(kind, m, n, nnz, seed)`. Values are uniform
/// in [-1, 1) and column indices within a row are distinct.
pub fn generate_synthetic(
    kind: SyntheticKind,
    m: usize,
    n: usize,
    nnz: usize,
    seed: u64,
) -> Result<CsrMatrix> {
    let capacity = m.saturating_mul(n);
    if nnz > capacity {
        return Err(BenchError::Infeasible(format!(
            "{nnz} nonzeros do not fit in a {m}x{n} matrix"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut lens = vec![0usize; m];

    match kind {
        SyntheticKind::Regular => spread_evenly(&mut lens, 0..m, nnz),
        SyntheticKind::OneLongRow { fraction } => {
            if !(0.0..=1.0).contains(&fraction) {
                return Err(BenchError::Invalid(format!(
                    "long-row fraction {fraction} outside [0, 1]"
                )));
            }
            if nnz > 0 {
                let long = ((fraction * nnz as f64).round() as usize).min(nnz);
                let rest = nnz - long;
                if long > n || rest > (m - 1) * n {
                    return Err(BenchError::Infeasible(format!(
                        "a row of {long} nonzeros plus {rest} others do not fit in {m}x{n}"
                    )));
                }
                let target = rng.gen_range(0..m);
                lens[target] = long;
                spread_evenly(&mut lens, (0..m).filter(|&r| r != target), rest);
            }
        }
        SyntheticKind::Random => {
            if m > 0 {
                lens = skewed_lengths(&mut rng, m, n, nnz);
            }
        }
    }

    let mut row_ptr = Vec::with_capacity(m + 1);
    row_ptr.push(0);
    let mut col_idx = Vec::with_capacity(nnz);
    let mut val = Vec::with_capacity(nnz);
    for &len in &lens {
        let start = col_idx.len();
        col_idx.extend(sample(&mut rng, n, len));
        col_idx[start..].sort_unstable();
        val.extend((0..len).map(|_| rng.gen_range(-1.0..1.0)));
        row_ptr.push(col_idx.len());
    }
    Ok(CsrMatrix::new(m, n, row_ptr, col_idx, val)?)
}
