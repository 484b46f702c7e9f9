//! Dyadic blocks `Δ_j` and the low block `Δ̄₋₁` realised on a grid.

use std::ops::RangeInclusive;
use std::sync::Arc;

use crate::field::SpectralField;
use crate::grid::Grid;
use crate::lp::mollifier::Mollifier;

/// The blocks `Δ_j` that can be non-zero on a grid, with their multipliers
/// tabulated once.
///
/// `j_min` and `j_max` are the smallest range such that every nonzero
/// lattice mode (`1/L ≤ |ξ| ≤ √2·(n/2)/L`) is covered; blocks outside this
/// range vanish identically and are omitted from all norms.
#[derive(Clone, Debug)]
pub struct DyadicDecomposition {
    grid: Arc<Grid>,
    mollifier: Mollifier,
    j_min: i32,
    j_max: i32,
    weights: Vec<Vec<f64>>,
    low: Vec<f64>,
}

/// A block projection together with its range flag.
#[derive(Clone, Debug)]
pub struct Block {
    pub field: SpectralField,
    /// Set when `j` lies outside `[j_min, j_max]`; the field is then zero.
    pub out_of_band: bool,
}

/// Smallest `j` with `2^j ≥ x`, computed without trusting `log2` rounding.
fn ceil_log2(x: f64) -> i32 {
    let mut j = x.log2().ceil() as i32;
    while 2f64.powi(j - 1) >= x {
        j -= 1;
    }
    while 2f64.powi(j) < x {
        j += 1;
    }
    j
}

/// Largest `j` with `2^j ≤ x`.
fn floor_log2(x: f64) -> i32 {
    let mut j = x.log2().floor() as i32;
    while 2f64.powi(j) > x {
        j -= 1;
    }
    while 2f64.powi(j + 1) <= x {
        j += 1;
    }
    j
}

impl DyadicDecomposition {
    pub fn new(grid: &Arc<Grid>) -> Self {
        Self::with_mollifier(grid, Mollifier)
    }

    pub fn with_mollifier(grid: &Arc<Grid>, mollifier: Mollifier) -> Self {
        // φ̂(2^{-j}ξ) ≠ 0 requires 2^{j-1} < |ξ| < 2^{j+1}.
        let j_min = floor_log2(grid.min_wavenumber());
        let j_max = ceil_log2(grid.max_wavenumber());
        let len = grid.spectral_len();
        let weights = (j_min..=j_max)
            .map(|j| {
                (0..len)
                    .map(|i| {
                        if i == 0 {
                            0.0
                        } else {
                            mollifier.block_weight(j, grid.wavenumber(i))
                        }
                    })
                    .collect()
            })
            .collect();
        let low = (0..len)
            .map(|i| mollifier.low_weight(grid.wavenumber(i)))
            .collect();
        Self {
            grid: grid.clone(),
            mollifier,
            j_min,
            j_max,
            weights,
            low,
        }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn mollifier(&self) -> Mollifier {
        self.mollifier
    }

    pub fn j_min(&self) -> i32 {
        self.j_min
    }

    pub fn j_max(&self) -> i32 {
        self.j_max
    }

    pub fn j_range(&self) -> RangeInclusive<i32> {
        self.j_min..=self.j_max
    }

    /// Blocks entering inhomogeneous norms: `j ≥ 0` within range.
    pub fn inhomogeneous_range(&self) -> RangeInclusive<i32> {
        self.j_min.max(0)..=self.j_max
    }

    pub fn contains(&self, j: i32) -> bool {
        self.j_range().contains(&j)
    }

    /// Multiplier table of block `j`, or `None` outside the range.
    pub fn weights(&self, j: i32) -> Option<&[f64]> {
        self.contains(j)
            .then(|| self.weights[(j - self.j_min) as usize].as_slice())
    }

    /// Multiplier table of the low block `χ(2|ξ|)` (mean mode included).
    pub fn low_weights(&self) -> &[f64] {
        &self.low
    }

    /// `Δ_j f`. The grid of `f` must be the decomposition's grid.
    pub fn dyadic_block(&self, field: &SpectralField, j: i32) -> Block {
        debug_assert!(**field.grid() == *self.grid);
        match self.weights(j) {
            Some(w) => Block {
                field: field.apply_real_multiplier(|i| w[i]),
                out_of_band: false,
            },
            None => Block {
                field: SpectralField::zeros(field.grid()),
                out_of_band: true,
            },
        }
    }

    /// `Δ_j f`, zero outside the range.
    pub fn block(&self, field: &SpectralField, j: i32) -> SpectralField {
        self.dyadic_block(field, j).field
    }

    /// `Δ̄₋₁ f = Σ_{j<0} Δ_j f` plus the mean mode.
    pub fn low_block(&self, field: &SpectralField) -> SpectralField {
        field.apply_real_multiplier(|i| self.low[i])
    }

    /// Largest `|Σ_j φ̂(2^{-j}ξ) − 1|` over nonzero lattice modes.
    pub fn partition_defect(&self) -> f64 {
        (1..self.grid.spectral_len())
            .map(|i| {
                let s: f64 = self.weights.iter().map(|w| w[i]).sum();
                (s - 1.0).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Largest `|χ(2|ξ|) + Σ_{j≥0} φ̂(2^{-j}ξ) − 1|` over all lattice modes.
    pub fn inhomogeneous_partition_defect(&self) -> f64 {
        (0..self.grid.spectral_len())
            .map(|i| {
                let s: f64 = self
                    .inhomogeneous_range()
                    .map(|j| self.weights[(j - self.j_min) as usize][i])
                    .sum();
                (s + self.low[i] - 1.0).abs()
            })
            .fold(0.0, f64::max)
    }
}
