use crate::error::{Error, Result};

/// Tile width used when no SIMD lane count is supplied (256-bit lanes of doubles).
pub const DEFAULT_OMEGA: usize = 4;

/// Fixed tile height for x86 CPUs.
pub const DEFAULT_SIGMA: usize = 16;

/// Bounds `<r, s, t, u>` for sparsity-driven tile height selection.
///
/// `r` keeps sigma from getting too small, `s` from getting too large, and
/// once the average row length exceeds `t` sigma drops to `u` because tiles
/// mostly sit inside a single row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SigmaBounds {
    pub r: usize,
    pub s: usize,
    pub t: usize,
    pub u: usize,
}

impl SigmaBounds {
    /// Double-precision setting for nVidia Maxwell GPUs.
    pub const MAXWELL: SigmaBounds = SigmaBounds::new_unchecked(4, 32, 256, 4);
    /// Double-precision setting for AMD GCN GPUs.
    pub const GCN: SigmaBounds = SigmaBounds::new_unchecked(4, 7, 256, 4);

    const fn new_unchecked(r: usize, s: usize, t: usize, u: usize) -> Self {
        Self { r, s, t, u }
    }

    pub fn new(r: usize, s: usize, t: usize, u: usize) -> Result<Self> {
        let b = Self { r, s, t, u };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        if self.r == 0 {
            return Err(Error::InvalidParams("bound r must be at least 1"));
        }
        if !(self.r <= self.s && self.s <= self.t) {
            return Err(Error::InvalidParams("bounds must satisfy r <= s <= t"));
        }
        if self.u == 0 {
            return Err(Error::InvalidParams("fallback sigma u must be at least 1"));
        }
        Ok(())
    }
}

impl Default for SigmaBounds {
    fn default() -> Self {
        Self::MAXWELL
    }
}

/// Tile shape: `omega` columns (SIMD lanes) of `sigma` entries each.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TuningParams {
    pub omega: usize,
    pub sigma: usize,
    pub bounds: SigmaBounds,
}

impl TuningParams {
    pub fn new(omega: usize, sigma: usize) -> Result<Self> {
        Self::with_bounds(omega, sigma, SigmaBounds::default())
    }

    pub fn with_bounds(omega: usize, sigma: usize, bounds: SigmaBounds) -> Result<Self> {
        let p = Self {
            omega,
            sigma,
            bounds,
        };
        p.validate()?;
        Ok(p)
    }

    /// Picks sigma from the matrix's average row length with the bounded rule.
    pub fn adaptive(omega: usize, nnz: usize, rows: usize, bounds: SigmaBounds) -> Result<Self> {
        bounds.validate()?;
        let per_row = if rows == 0 {
            0.0
        } else {
            nnz as f64 / rows as f64
        };
        Self::with_bounds(omega, select_sigma(per_row, &bounds, None), bounds)
    }

    pub fn validate(&self) -> Result<()> {
        if self.omega == 0 {
            return Err(Error::InvalidParams("omega must be at least 1"));
        }
        if self.sigma == 0 {
            return Err(Error::InvalidParams("sigma must be at least 1"));
        }
        self.bounds.validate()
    }

    #[inline]
    pub fn tile_size(&self) -> usize {
        self.omega * self.sigma
    }
}

impl Default for TuningParams {
    fn default() -> Self {
        Self {
            omega: DEFAULT_OMEGA,
            sigma: DEFAULT_SIGMA,
            bounds: SigmaBounds::default(),
        }
    }
}

/// Tile width follows the SIMD lane count; 4 when unknown.
pub fn select_omega(simd_width_hint: Option<usize>) -> usize {
    match simd_width_hint {
        Some(w) if w >= 1 => w,
        _ => DEFAULT_OMEGA,
    }
}

/// Tile height from the average row length, unless a fixed value is given.
///
/// ```text
/// r          if nnz/row <= r
/// nnz/row    if r < nnz/row <= s   (rounded to nearest)
/// s          if s < nnz/row <= t
/// u          otherwise
/// ```
pub fn select_sigma(nnz_per_row: f64, bounds: &SigmaBounds, fixed_sigma: Option<usize>) -> usize {
    if let Some(sigma) = fixed_sigma {
        return sigma;
    }
    let SigmaBounds { r, s, t, u } = *bounds;
    if nnz_per_row <= r as f64 {
        r
    } else if nnz_per_row <= s as f64 {
        // positive and bounded by s, so truncation after +0.5 rounds
        ((nnz_per_row + 0.5) as usize).clamp(r, s)
    } else if nnz_per_row <= t as f64 {
        s
    } else {
        u
    }
}
