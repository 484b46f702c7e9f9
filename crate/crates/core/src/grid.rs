//! Torus geometry, the truncated mode lattice and the 2D real transforms.
//!
//! The physical domain is the periodic square `[0, 2πL)²` sampled on an
//! `n × n` uniform grid, stored row-major with `x₁` varying fastest
//! (`values[i2 * n + i1]`). Spectral data is kept as the half spectrum of a
//! real field: `n` rows indexed by `k₂` in FFT order and `n/2 + 1` columns
//! indexed by `k₁ = 0..=n/2`. The coefficient convention is
//! `θ(x) = Σ_k θ̂(k) exp(i k·x / L)`, so the physical wavevector of mode `k`
//! is `ξ = k / L`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Result, SqgError};

pub const DEFAULT_DEALIAS_FRACTION: f64 = 2.0 / 3.0;

/// Resolution and geometry of the periodic domain.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Modes (and grid points) per axis; even.
    pub n: usize,
    /// Torus period parameter `L`: the domain is `[0, 2πL)²`.
    pub length: f64,
    /// Fraction of the per-axis band `n/2` kept by the dealiasing mask.
    #[serde(default = "default_dealias")]
    pub dealias_fraction: f64,
}

fn default_dealias() -> f64 {
    DEFAULT_DEALIAS_FRACTION
}

impl GridSpec {
    pub fn new(n: usize, length: f64) -> Self {
        Self {
            n,
            length,
            dealias_fraction: DEFAULT_DEALIAS_FRACTION,
        }
    }

    pub fn with_dealias_fraction(mut self, fraction: f64) -> Self {
        self.dealias_fraction = fraction;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 || !self.n.is_multiple_of(2) {
            return Err(SqgError::InvalidGrid(format!(
                "n must be an even integer >= 2, got {}",
                self.n
            )));
        }
        if !(self.length.is_finite() && self.length > 0.0) {
            return Err(SqgError::InvalidGrid(format!(
                "length must be finite and > 0, got {}",
                self.length
            )));
        }
        if !(self.dealias_fraction > 0.0 && self.dealias_fraction <= 1.0) {
            return Err(SqgError::InvalidGrid(format!(
                "dealias_fraction must lie in (0, 1], got {}",
                self.dealias_fraction
            )));
        }
        Ok(())
    }

    pub fn build(self) -> Result<Arc<Grid>> {
        Grid::new(self)
    }
}

impl Default for GridSpec {
    fn default() -> Self {
        Self::new(64, 1.0)
    }
}

/// A validated [`GridSpec`] with its wavenumber tables, dealiasing mask and
/// FFT plans. Immutable and shared between fields through an `Arc`.
pub struct Grid {
    spec: GridSpec,
    half: usize,
    /// Signed `k₁` per column, `k₂` per row.
    col_k: Vec<i64>,
    row_k: Vec<i64>,
    mask: Vec<bool>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid").field("spec", &self.spec).finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.spec == other.spec
    }
}

impl Grid {
    pub fn new(spec: GridSpec) -> Result<Arc<Self>> {
        spec.validate()?;
        let n = spec.n;
        let half = n / 2 + 1;
        let col_k: Vec<i64> = (0..half as i64).collect();
        let row_k: Vec<i64> = (0..n)
            .map(|a| {
                if a < n / 2 {
                    a as i64
                } else {
                    a as i64 - n as i64
                }
            })
            .collect();
        let cutoff = spec.dealias_fraction * (n as f64) / 2.0;
        let mut mask = Vec::with_capacity(n * half);
        for &k2 in &row_k {
            for &k1 in &col_k {
                mask.push(k1.abs() as f64 <= cutoff + 1e-9 && k2.abs() as f64 <= cutoff + 1e-9);
            }
        }
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        Ok(Arc::new(Self {
            spec,
            half,
            col_k,
            row_k,
            mask,
            fwd,
            inv,
        }))
    }

    pub fn spec(&self) -> GridSpec {
        self.spec
    }

    pub fn n(&self) -> usize {
        self.spec.n
    }

    pub fn length(&self) -> f64 {
        self.spec.length
    }

    /// Number of stored columns, `n/2 + 1`.
    pub fn half_width(&self) -> usize {
        self.half
    }

    /// Number of stored half-spectrum coefficients.
    pub fn spectral_len(&self) -> usize {
        self.spec.n * self.half
    }

    pub fn physical_len(&self) -> usize {
        self.spec.n * self.spec.n
    }

    #[inline]
    pub fn index(&self, row: usize, col: usize) -> usize {
        row * self.half + col
    }

    /// Integer mode `(k₁, k₂)` of a half-spectrum index.
    #[inline]
    pub fn mode(&self, idx: usize) -> (i64, i64) {
        (self.col_k[idx % self.half], self.row_k[idx / self.half])
    }

    /// Half-spectrum index of the integer mode `(k₁, k₂)` with `k₁ >= 0`,
    /// or `None` when it is not on the lattice.
    pub fn index_of(&self, k1: i64, k2: i64) -> Option<usize> {
        let n = self.spec.n as i64;
        if k1 < 0 || k1 > n / 2 || k2 < -n / 2 || k2 >= n / 2 {
            return None;
        }
        let row = k2.rem_euclid(n) as usize;
        Some(self.index(row, k1 as usize))
    }

    /// Physical wavevector `ξ = k / L`.
    #[inline]
    pub fn wavevector(&self, idx: usize) -> (f64, f64) {
        let (k1, k2) = self.mode(idx);
        (k1 as f64 / self.spec.length, k2 as f64 / self.spec.length)
    }

    /// `|ξ|` of a half-spectrum index.
    #[inline]
    pub fn wavenumber(&self, idx: usize) -> f64 {
        let (x1, x2) = self.wavevector(idx);
        x1.hypot(x2)
    }

    /// True on the Nyquist row or column, where odd multipliers are zeroed.
    #[inline]
    pub fn is_nyquist(&self, idx: usize) -> bool {
        let (k1, k2) = self.mode(idx);
        let h = (self.spec.n / 2) as i64;
        k1 == h || k2 == -h
    }

    /// Whether the dealiasing mask keeps this mode.
    #[inline]
    pub fn in_band(&self, idx: usize) -> bool {
        self.mask[idx]
    }

    /// Per-axis cutoff `dealias_fraction · n/2`.
    pub fn dealias_cutoff(&self) -> f64 {
        self.spec.dealias_fraction * self.spec.n as f64 / 2.0
    }

    /// Largest per-axis integer mode kept by the mask.
    pub fn max_band_mode(&self) -> i64 {
        (self.dealias_cutoff() + 1e-9).floor() as i64
    }

    /// Smallest nonzero `|ξ|` on the lattice.
    pub fn min_wavenumber(&self) -> f64 {
        1.0 / self.spec.length
    }

    /// Largest `|ξ|` on the stored lattice (the Nyquist corner).
    pub fn max_wavenumber(&self) -> f64 {
        std::f64::consts::SQRT_2 * (self.spec.n / 2) as f64 / self.spec.length
    }

    /// Grid spacing `2πL / n`.
    pub fn spacing(&self) -> f64 {
        2.0 * PI * self.spec.length / self.spec.n as f64
    }

    /// Measure of the torus, `(2πL)²`.
    pub fn measure(&self) -> f64 {
        (2.0 * PI * self.spec.length).powi(2)
    }

    pub fn cell_area(&self) -> f64 {
        self.spacing().powi(2)
    }

    /// Physical coordinates of grid point `(i1, i2)`.
    pub fn point(&self, i1: usize, i2: usize) -> (f64, f64) {
        let h = self.spacing();
        (i1 as f64 * h, i2 as f64 * h)
    }

    /// Physical samples to normalized half-spectrum coefficients.
    /// The two self-conjugate columns are symmetrized exactly.
    pub fn forward(&self, values: &[f64]) -> Vec<Complex64> {
        let n = self.spec.n;
        let half = self.half;
        assert_eq!(values.len(), n * n, "physical array has wrong length");
        let mut scratch = vec![Complex64::default(); self.fwd.get_inplace_scratch_len()];
        let mut row = vec![Complex64::default(); n];
        // columns[b * n + i2]
        let mut columns = vec![Complex64::default(); half * n];
        for i2 in 0..n {
            for (dst, &v) in row.iter_mut().zip(&values[i2 * n..(i2 + 1) * n]) {
                *dst = Complex64::new(v, 0.0);
            }
            self.fwd.process_with_scratch(&mut row, &mut scratch);
            for b in 0..half {
                columns[b * n + i2] = row[b];
            }
        }
        for col in columns.chunks_exact_mut(n) {
            self.fwd.process_with_scratch(col, &mut scratch);
        }
        let norm = 1.0 / (n * n) as f64;
        let mut out = vec![Complex64::default(); n * half];
        for b in 0..half {
            for a in 0..n {
                out[a * half + b] = columns[b * n + a] * norm;
            }
        }
        self.symmetrize(&mut out);
        out
    }

    /// Half-spectrum coefficients to physical samples.
    pub fn inverse(&self, coeffs: &[Complex64]) -> Vec<f64> {
        let n = self.spec.n;
        let half = self.half;
        assert_eq!(coeffs.len(), n * half, "spectral array has wrong length");
        let mut scratch = vec![Complex64::default(); self.inv.get_inplace_scratch_len()];
        let mut columns = vec![Complex64::default(); half * n];
        for b in 0..half {
            for a in 0..n {
                columns[b * n + a] = coeffs[a * half + b];
            }
        }
        for col in columns.chunks_exact_mut(n) {
            self.inv.process_with_scratch(col, &mut scratch);
        }
        let mut row = vec![Complex64::default(); n];
        let mut out = vec![0.0; n * n];
        for i2 in 0..n {
            row[0] = Complex64::new(columns[i2].re, 0.0);
            for b in 1..half {
                let g = columns[b * n + i2];
                if b == n / 2 {
                    row[b] = Complex64::new(g.re, 0.0);
                } else {
                    row[b] = g;
                    row[n - b] = g.conj();
                }
            }
            self.inv.process_with_scratch(&mut row, &mut scratch);
            for (dst, z) in out[i2 * n..(i2 + 1) * n].iter_mut().zip(&row) {
                *dst = z.re;
            }
        }
        out
    }

    /// Largest violation of `c(-k) = conj c(k)` over the self-conjugate
    /// columns `k₁ = 0` and `k₁ = n/2`.
    pub fn hermitian_defect(&self, coeffs: &[Complex64]) -> f64 {
        let n = self.spec.n;
        let mut worst: f64 = 0.0;
        for &b in &[0, n / 2] {
            for a in 0..n {
                let partner = (n - a) % n;
                let d = (coeffs[a * self.half + b] - coeffs[partner * self.half + b].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    /// Project the self-conjugate columns onto exact Hermitian symmetry.
    pub fn symmetrize(&self, coeffs: &mut [Complex64]) {
        let n = self.spec.n;
        for &b in &[0, n / 2] {
            for a in 0..=n / 2 {
                let partner = (n - a) % n;
                let i = a * self.half + b;
                let j = partner * self.half + b;
                let avg = (coeffs[i] + coeffs[j].conj()) * 0.5;
                coeffs[i] = avg;
                coeffs[j] = avg.conj();
            }
        }
    }
}
