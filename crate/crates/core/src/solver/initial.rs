//! Deterministic initial data.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SqgError};
use crate::field::SpectralField;
use crate::grid::Grid;
use crate::lp::random_band_field;

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialData {
    /// `A·sin(x₁/L)`.
    SingleMode {
        #[serde(default = "one")]
        amplitude: f64,
    },
    /// Gaussian coefficients on the in-band modes with
    /// `2^{j_lo} ≤ |ξ| ≤ 2^{j_hi}`, scaled to root-mean-square `amplitude`.
    RandomBand {
        j_lo: i32,
        j_hi: i32,
        seed: u64,
        #[serde(default = "one")]
        amplitude: f64,
    },
    /// Two opposite-sign Gaussian bumps of width `width` centred at
    /// `(πL ± separation/2, πL)`, dealiased and with the mean removed.
    VortexPair {
        separation: f64,
        width: f64,
        #[serde(default = "one")]
        amplitude: f64,
    },
}

/// Shortest signed periodic displacement on a circle of length `period`.
fn wrap(d: f64, period: f64) -> f64 {
    d - period * (d / period).round()
}

pub fn make_initial_data(kind: &InitialData, grid: &Arc<Grid>) -> Result<SpectralField> {
    match *kind {
        InitialData::SingleMode { amplitude } => {
            SpectralField::mode(grid, 1, 0, Complex64::new(0.0, -0.5 * amplitude))
        }
        InitialData::RandomBand {
            j_lo,
            j_hi,
            seed,
            amplitude,
        } => {
            if j_lo > j_hi {
                return Err(SqgError::Config(format!(
                    "band j_lo = {j_lo} exceeds j_hi = {j_hi}"
                )));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f = random_band_field(grid, 2f64.powi(j_lo), 2f64.powi(j_hi), &mut rng).dealiased();
            let rms = f.l2_norm() / grid.measure().sqrt();
            if rms == 0.0 {
                return Err(SqgError::Config(format!(
                    "band [2^{j_lo}, 2^{j_hi}] contains no resolvable in-band mode"
                )));
            }
            Ok(f.scaled(amplitude / rms))
        }
        InitialData::VortexPair {
            separation,
            width,
            amplitude,
        } => {
            if !(width > 0.0) {
                return Err(SqgError::Config(format!(
                    "vortex width must be positive, got {width}"
                )));
            }
            let period = 2.0 * PI * grid.length();
            let c = 0.5 * period;
            let bump = |x: f64, y: f64, cx: f64| {
                let dx = wrap(x - cx, period);
                let dy = wrap(y - c, period);
                (-(dx * dx + dy * dy) / (2.0 * width * width)).exp()
            };
            let f = SpectralField::from_fn(grid, |x, y| {
                amplitude * (bump(x, y, c + 0.5 * separation) - bump(x, y, c - 0.5 * separation))
            });
            Ok(f.dealiased().without_mean())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;

    #[test]
    fn single_mode_is_sine() {
        let g = GridSpec::new(16, 1.0).build().unwrap();
        let f = make_initial_data(&InitialData::SingleMode { amplitude: 1.0 }, &g).unwrap();
        let v = f.to_physical();
        for i2 in 0..16 {
            for i1 in 0..16 {
                let (x, _) = g.point(i1, i2);
                assert!((v[i2 * 16 + i1] - x.sin()).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn random_band_is_deterministic_and_mean_zero() {
        let g = GridSpec::new(64, 1.0).build().unwrap();
        let kind = InitialData::RandomBand {
            j_lo: 2,
            j_hi: 4,
            seed: 7,
            amplitude: 1.0,
        };
        let a = make_initial_data(&kind, &g).unwrap();
        let b = make_initial_data(&kind, &g).unwrap();
        assert_eq!(a.coeffs(), b.coeffs());
        assert_eq!(a.mean(), 0.0);
        assert!(a.check_hermitian().is_ok());
        let rms = a.l2_norm() / g.measure().sqrt();
        assert!((rms - 1.0).abs() < 1e-12);
        let empty = InitialData::RandomBand {
            j_lo: 8,
            j_hi: 9,
            seed: 1,
            amplitude: 1.0,
        };
        assert!(matches!(
            make_initial_data(&empty, &g),
            Err(SqgError::Config(_))
        ));
    }

    #[test]
    fn vortex_pair_is_antisymmetric_and_mean_zero() {
        let g = GridSpec::new(64, 1.0).build().unwrap();
        let kind = InitialData::VortexPair {
            separation: 2.0,
            width: 0.5,
            amplitude: 1.0,
        };
        let f = make_initial_data(&kind, &g).unwrap();
        assert!(f.mean().abs() < 1e-12);
        let v = f.to_physical();
        let n = 64;
        let (i_pos, i_neg) = (32 + 10, 32 - 10); // x = π ± 1
        assert!(v[32 * n + i_pos] > 0.9 && v[32 * n + i_neg] < -0.9);
        assert!((v[32 * n + i_pos] + v[32 * n + i_neg]).abs() < 1e-10);
    }
}
