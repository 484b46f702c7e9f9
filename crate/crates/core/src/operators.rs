//! Fourier multipliers (fractional Laplacian, Riesz transforms, gradients)
//! and the dealiased transport nonlinearity.

use std::sync::Arc;

use rustfft::num_complex::Complex64;

use crate::error::{Result, SqgError};
use crate::field::SpectralField;
use crate::grid::Grid;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// An operator result carrying the mean-mode warning of negative powers.
#[derive(Clone, Debug)]
pub struct Flagged<T> {
    pub value: T,
    /// Set when a negative power discarded a nonzero mean.
    pub mean_dropped: bool,
}

/// `(-Δ)^β`: multiply mode `k` by `|ξ|^{2β}`, `ξ = k/L`.
///
/// Zero mode: kept for `β = 0`, zeroed otherwise. For `β < 0` a nonzero
/// mean is reported through [`Flagged::mean_dropped`].
pub fn fractional_laplacian(field: &SpectralField, beta: f64) -> Flagged<SpectralField> {
    let grid = field.grid().clone();
    let mean_dropped = beta < 0.0 && field.coeffs()[0] != Complex64::default();
    let value = field.apply_real_multiplier(|i| {
        if i == 0 {
            if beta == 0.0 {
                1.0
            } else {
                0.0
            }
        } else {
            grid.wavenumber(i).powf(2.0 * beta)
        }
    });
    Flagged {
        value,
        mean_dropped,
    }
}

/// `Λ^s = (-Δ)^{s/2}`.
pub fn lambda_power(field: &SpectralField, s: f64) -> SpectralField {
    fractional_laplacian(field, 0.5 * s).value
}

/// Spectral partial derivatives `(∂₁f, ∂₂f)`; Nyquist lines are zeroed.
pub fn gradient(field: &SpectralField) -> [SpectralField; 2] {
    let g = field.grid().clone();
    let d = |axis: usize| {
        field.apply_multiplier(|i| {
            if g.is_nyquist(i) {
                return Complex64::default();
            }
            let xi = g.wavevector(i);
            I * if axis == 0 { xi.0 } else { xi.1 }
        })
    };
    [d(0), d(1)]
}

/// A planar vector field `(u₁, u₂)` in spectral form.
#[derive(Clone, Debug)]
pub struct Velocity {
    pub u1: SpectralField,
    pub u2: SpectralField,
}

impl Velocity {
    pub fn zeros(grid: &Arc<Grid>) -> Self {
        Self {
            u1: SpectralField::zeros(grid),
            u2: SpectralField::zeros(grid),
        }
    }

    /// The constant vector field `(c₁, c₂)`.
    pub fn constant(grid: &Arc<Grid>, c1: f64, c2: f64) -> Self {
        let mut v = Self::zeros(grid);
        v.u1.coeffs_mut()[0] = Complex64::new(c1, 0.0);
        v.u2.coeffs_mut()[0] = Complex64::new(c2, 0.0);
        v
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.u1.grid()
    }

    /// `∂₁u₁ + ∂₂u₂`.
    pub fn divergence(&self) -> SpectralField {
        let [d1, _] = gradient(&self.u1);
        let [_, d2] = gradient(&self.u2);
        &d1 + &d2
    }

    /// `‖div u‖ / ‖∇u‖` in the coefficient `ℓ²` sense; zero for constants.
    pub fn divergence_defect(&self) -> f64 {
        let div = self.divergence().energy();
        let scale: f64 = gradient(&self.u1)
            .iter()
            .chain(gradient(&self.u2).iter())
            .map(|f| f.energy())
            .sum();
        if scale == 0.0 {
            0.0
        } else {
            (div / scale).sqrt()
        }
    }

    pub fn to_physical(&self) -> PhysicalVelocity {
        PhysicalVelocity {
            u1: self.u1.to_physical(),
            u2: self.u2.to_physical(),
        }
    }

    /// Components of the velocity gradient `∂ᵢuⱼ`, for Besov norms of `∇u`.
    pub fn gradient_components(&self) -> Vec<SpectralField> {
        let [a, b] = gradient(&self.u1);
        let [c, d] = gradient(&self.u2);
        vec![a, b, c, d]
    }
}

/// Velocity samples on the physical grid.
#[derive(Clone, Debug)]
pub struct PhysicalVelocity {
    pub u1: Vec<f64>,
    pub u2: Vec<f64>,
}

impl PhysicalVelocity {
    pub fn max_speed(&self) -> f64 {
        self.u1
            .iter()
            .zip(&self.u2)
            .fold(0.0, |m, (a, b)| m.max(a.hypot(*b)))
    }
}

/// `u = (-R₂θ, R₁θ)`, i.e. multipliers `(-iξ₂/|ξ|, iξ₁/|ξ|)`. The zero mode
/// and the Nyquist lines are set to zero.
pub fn riesz_velocity(theta: &SpectralField) -> Velocity {
    let g = theta.grid().clone();
    let symbol = |axis: usize| {
        let g = g.clone();
        move |i: usize| {
            if i == 0 || g.is_nyquist(i) {
                return Complex64::default();
            }
            let (x1, x2) = g.wavevector(i);
            let r = x1.hypot(x2);
            if axis == 0 {
                -I * (x2 / r)
            } else {
                I * (x1 / r)
            }
        }
    };
    Velocity {
        u1: theta.apply_multiplier(symbol(0)),
        u2: theta.apply_multiplier(symbol(1)),
    }
}

pub(crate) fn ensure_dealias_band(grid: &Grid) -> Result<()> {
    if grid.max_band_mode() < 1 {
        return Err(SqgError::Config(format!(
            "dealiased band is empty for n = {} and dealias_fraction = {}",
            grid.n(),
            grid.spec().dealias_fraction
        )));
    }
    Ok(())
}

/// Dealiased `u·∇θ` for a velocity already sampled on the grid. `θ` is
/// band-limited by the mask before differentiation.
pub fn advection(u: &PhysicalVelocity, theta: &SpectralField) -> Result<SpectralField> {
    let grid = theta.grid();
    ensure_dealias_band(grid)?;
    let [d1, d2] = gradient(&theta.dealiased());
    let g1 = d1.to_physical();
    let g2 = d2.to_physical();
    let prod: Vec<f64> = (0..g1.len())
        .map(|i| u.u1[i] * g1[i] + u.u2[i] * g2[i])
        .collect();
    Ok(SpectralField::from_physical(grid, &prod).dealiased())
}

/// The transport term `u·∇θ` with `u` the Riesz velocity of `θ`, computed
/// pseudo-spectrally and dealiased.
pub fn nonlinear_term(theta: &SpectralField) -> Result<SpectralField> {
    ensure_dealias_band(theta.grid())?;
    let band = theta.dealiased();
    let u = riesz_velocity(&band).to_physical();
    advection(&u, &band)
}
