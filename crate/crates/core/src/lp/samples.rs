//! Seeded random fields for the verification suites.

use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex64;

use crate::field::SpectralField;
use crate::grid::Grid;
use crate::lp::decomposition::DyadicDecomposition;

/// Independent Gaussian coefficients on the non-Nyquist modes with
/// `lo ≤ |ξ| ≤ hi`, symmetrised to a real field. May be zero if no mode
/// qualifies.
pub fn random_band_field(grid: &Arc<Grid>, lo: f64, hi: f64, rng: &mut impl Rng) -> SpectralField {
    let mut coeffs = vec![Complex64::default(); grid.spectral_len()];
    for (i, c) in coeffs.iter_mut().enumerate() {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        let r = grid.wavenumber(i);
        if i != 0 && !grid.is_nyquist(i) && r >= lo && r <= hi {
            *c = Complex64::new(re, im);
        }
    }
    grid.symmetrize(&mut coeffs);
    SpectralField::from_coeffs_unchecked(grid, coeffs)
}

/// `Δ_j w` for a random `w` supported on the support of block `j`.
pub fn random_block_field(
    decomp: &DyadicDecomposition,
    j: i32,
    rng: &mut impl Rng,
) -> SpectralField {
    let scale = 2f64.powi(j);
    let w = random_band_field(decomp.grid(), 0.5 * scale, 2.0 * scale, rng);
    decomp.block(&w, j)
}
