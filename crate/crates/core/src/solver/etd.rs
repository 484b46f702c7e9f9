//! Exponential time differencing for `θ_t = −Λ^γ θ + N(θ)`: the linear
//! part is integrated exactly per mode, `N` by Runge–Kutta stages.

use std::sync::Arc;

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SqgError};
use crate::field::SpectralField;
use crate::grid::Grid;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Second-order Cox–Matthews scheme (two stages).
    EtdRk2,
    /// Fourth-order Cox–Matthews scheme (four stages).
    #[default]
    EtdRk4,
}

impl Scheme {
    pub fn stages(self) -> usize {
        match self {
            Self::EtdRk2 => 2,
            Self::EtdRk4 => 4,
        }
    }
}

/// `φ_k(z) = Σ_{m≥0} z^m / (m + k)!`, with a Taylor series near zero to
/// avoid cancellation.
pub fn phi(k: u32, z: f64) -> f64 {
    if z.abs() < 0.5 {
        let mut term = 1.0 / (1..=k).map(f64::from).product::<f64>();
        let mut sum = term;
        for m in 1..30 {
            term *= z / f64::from(m + k);
            sum += term;
            if term.abs() < 1e-18 * sum.abs() {
                break;
            }
        }
        return sum;
    }
    let e = z.exp();
    match k {
        0 => e,
        1 => (e - 1.0) / z,
        2 => (e - 1.0 - z) / (z * z),
        3 => (e - 1.0 - z - 0.5 * z * z) / (z * z * z),
        _ => {
            // φ_k(z) = (φ_{k−1}(z) − 1/(k−1)!) / z
            let fact: f64 = (1..k).map(f64::from).product();
            (phi(k - 1, z) - 1.0 / fact) / z
        }
    }
}

/// Per-mode coefficient tables of one scheme and step size.
#[derive(Clone, Debug)]
pub struct EtdStepper {
    grid: Arc<Grid>,
    scheme: Scheme,
    dt: f64,
    decay: Vec<f64>,
    half_decay: Vec<f64>,
    coef: [Vec<f64>; 4],
}

fn combine(grid: &Arc<Grid>, terms: &[(&[f64], &[Complex64])]) -> SpectralField {
    let len = grid.spectral_len();
    let coeffs = (0..len)
        .map(|i| terms.iter().map(|(w, c)| c[i] * w[i]).sum())
        .collect();
    SpectralField::from_coeffs_unchecked(grid, coeffs)
}

impl EtdStepper {
    pub fn new(grid: &Arc<Grid>, gamma: f64, dt: f64, scheme: Scheme) -> Self {
        let len = grid.spectral_len();
        let rate: Vec<f64> = (0..len)
            .map(|i| {
                if i == 0 {
                    0.0
                } else {
                    grid.wavenumber(i).powf(gamma)
                }
            })
            .collect();
        let table =
            |f: &dyn Fn(f64) -> f64| -> Vec<f64> { rate.iter().map(|r| f(-r * dt)).collect() };
        let decay = table(&|z| z.exp());
        let half_decay = table(&|z| (0.5 * z).exp());
        let coef = match scheme {
            Scheme::EtdRk2 => [
                table(&|z| dt * phi(1, z)),
                table(&|z| dt * phi(2, z)),
                Vec::new(),
                Vec::new(),
            ],
            Scheme::EtdRk4 => [
                table(&|z| 0.5 * dt * phi(1, 0.5 * z)),
                table(&|z| dt * (phi(1, z) - 3.0 * phi(2, z) + 4.0 * phi(3, z))),
                table(&|z| dt * (phi(2, z) - 2.0 * phi(3, z))),
                table(&|z| dt * (-phi(2, z) + 4.0 * phi(3, z))),
            ],
        };
        Self {
            grid: grid.clone(),
            scheme,
            dt,
            decay,
            half_decay,
            coef,
        }
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    /// One step from `u`. `forcing(stage, state)` returns `N` at the given
    /// stage; stages are numbered from 0 in evaluation order.
    pub fn step_with(
        &self,
        u: &SpectralField,
        mut forcing: impl FnMut(usize, &SpectralField) -> Result<SpectralField>,
    ) -> Result<SpectralField> {
        let g = &self.grid;
        let [c0, c1, c2, c3] = &self.coef;
        let nu = forcing(0, u)?;
        let out = match self.scheme {
            Scheme::EtdRk2 => {
                let a = combine(g, &[(&self.decay, u.coeffs()), (c0, nu.coeffs())]);
                let na = forcing(1, &a)?;
                let correction = (&na - &nu).apply_real_multiplier(|i| c1[i]);
                &a + &correction
            }
            Scheme::EtdRk4 => {
                let e2 = &self.half_decay;
                let a = combine(g, &[(e2, u.coeffs()), (c0, nu.coeffs())]);
                let na = forcing(1, &a)?;
                let b = combine(g, &[(e2, u.coeffs()), (c0, na.coeffs())]);
                let nb = forcing(2, &b)?;
                let lead = nb.axpy(1.0, &nb)?.axpy(-1.0, &nu)?;
                let c = combine(g, &[(e2, a.coeffs()), (c0, lead.coeffs())]);
                let nc = forcing(3, &c)?;
                let mid = na.axpy(1.0, &nb)?.scaled(2.0);
                combine(
                    g,
                    &[
                        (&self.decay, u.coeffs()),
                        (c1, nu.coeffs()),
                        (c2, mid.coeffs()),
                        (c3, nc.coeffs()),
                    ],
                )
            }
        };
        if !out.is_finite() {
            return Err(SqgError::Blowup {
                last_finite_time: 0.0,
            });
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;

    #[test]
    fn phi_series_matches_closed_form() {
        for k in 1..=3 {
            for z in [-0.49, -0.3, -1e-8, 0.0, 0.2] {
                let series = phi(k, z);
                if z.abs() > 1e-3 {
                    let closed = match k {
                        1 => (z.exp() - 1.0) / z,
                        2 => (z.exp() - 1.0 - z) / (z * z),
                        _ => (z.exp() - 1.0 - z - 0.5 * z * z) / (z * z * z),
                    };
                    assert!((series - closed).abs() < 1e-9 * closed.abs(), "k={k} z={z}");
                }
            }
        }
        assert_eq!(phi(1, 0.0), 1.0);
        assert_eq!(phi(2, 0.0), 0.5);
        assert!((phi(3, 0.0) - 1.0 / 6.0).abs() < 1e-17);
        // continuity across the switch
        for k in 1..=3 {
            let a = phi(k, -0.5 + 1e-12);
            let b = phi(k, -0.5 - 1e-12);
            assert!((a - b).abs() < 1e-11);
        }
        assert!((phi(4, -2.0) - (phi(3, -2.0) - 1.0 / 6.0) / -2.0).abs() < 1e-16);
    }

    #[test]
    fn zero_forcing_is_exact_decay() {
        let g = GridSpec::new(16, 1.0).build().unwrap();
        let u = SpectralField::from_fn(&g, |x, y| (x + 2.0 * y).sin() + 0.5 * (3.0 * y).cos());
        for scheme in [Scheme::EtdRk2, Scheme::EtdRk4] {
            let s = EtdStepper::new(&g, 0.7, 0.01, scheme);
            let out = s
                .step_with(&u, |_, x| Ok(SpectralField::zeros(x.grid())))
                .unwrap();
            for (i, (a, b)) in out.coeffs().iter().zip(u.coeffs()).enumerate() {
                let r = if i == 0 {
                    0.0
                } else {
                    g.wavenumber(i).powf(0.7)
                };
                assert!((a - b * (-r * 0.01).exp()).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn constant_forcing_is_integrated_exactly() {
        // θ' = −cθ + f has θ(h) = e^{−ch}θ₀ + hφ₁(−ch) f.
        let g = GridSpec::new(8, 1.0).build().unwrap();
        let u = SpectralField::mode(&g, 1, 1, Complex64::new(0.2, 0.1)).unwrap();
        let f = SpectralField::mode(&g, 1, 1, Complex64::new(-0.3, 0.4)).unwrap();
        let h = 0.3;
        let c = 2f64.sqrt();
        let i = g.index_of(1, 1).unwrap();
        let expect = u.coeffs()[i] * (-c * h).exp() + f.coeffs()[i] * h * phi(1, -c * h);
        for scheme in [Scheme::EtdRk2, Scheme::EtdRk4] {
            let s = EtdStepper::new(&g, 1.0, h, scheme);
            let out = s.step_with(&u, |_, _| Ok(f.clone())).unwrap();
            assert!((out.coeffs()[i] - expect).norm() < 1e-15, "{scheme:?}");
        }
    }
}
