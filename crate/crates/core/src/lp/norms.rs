//! Besov norms of fields and Chemin-type mixed time-space norms of
//! trajectories.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SqgError};
use crate::field::{check_exponent, lp_norm_samples, lp_norm_vector_samples, SpectralField};
use crate::lp::decomposition::DyadicDecomposition;
use crate::trajectory::Trajectory;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BesovParams {
    pub s: f64,
    pub p: f64,
    pub q: f64,
    pub homogeneous: bool,
}

impl BesovParams {
    pub fn homogeneous(s: f64, p: f64, q: f64) -> Self {
        Self {
            s,
            p,
            q,
            homogeneous: true,
        }
    }

    pub fn inhomogeneous(s: f64, p: f64, q: f64) -> Self {
        Self {
            s,
            p,
            q,
            homogeneous: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_exponent(self.p)?;
        check_exponent(self.q)?;
        if !self.s.is_finite() {
            return Err(SqgError::Domain(format!(
                "regularity s = {} must be finite",
                self.s
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixedNormParams {
    pub r: f64,
    pub besov: BesovParams,
    /// `true`: time norm per block, inside the `ℓ^q` sum (`L̃^r B`);
    /// `false`: time norm of the spatial Besov norm (`L^r B`).
    pub chemin_style: bool,
}

impl MixedNormParams {
    pub fn chemin(r: f64, besov: BesovParams) -> Self {
        Self {
            r,
            besov,
            chemin_style: true,
        }
    }

    pub fn standard(r: f64, besov: BesovParams) -> Self {
        Self {
            r,
            besov,
            chemin_style: false,
        }
    }
}

/// `ℓ^q` norm of a non-negative sequence (`q = ∞` is the supremum).
pub fn lq_norm(values: impl IntoIterator<Item = f64>, q: f64) -> f64 {
    if q.is_infinite() {
        values.into_iter().fold(0.0, f64::max)
    } else {
        values
            .into_iter()
            .map(|v| v.powf(q))
            .sum::<f64>()
            .powf(1.0 / q)
    }
}

/// Trapezoid-rule `L^r` norm over time of samples `g(tᵢ) ≥ 0`; the rule is
/// applied to `g^r`. `r = ∞` gives the maximum.
pub fn time_lr_norm(times: &[f64], values: &[f64], r: f64) -> Result<f64> {
    check_exponent(r)?;
    if times.len() != values.len() {
        return Err(SqgError::Domain("times and values differ in length".into()));
    }
    if times.len() < 2 {
        return Err(SqgError::InsufficientData(format!(
            "time norms need at least 2 snapshots, got {}",
            times.len()
        )));
    }
    if times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(SqgError::Domain(
            "snapshot times must increase strictly".into(),
        ));
    }
    if r.is_infinite() {
        return Ok(values.iter().copied().fold(0.0, f64::max));
    }
    let integral: f64 = times
        .windows(2)
        .zip(values.windows(2))
        .map(|(t, v)| 0.5 * (t[1] - t[0]) * (v[0].powf(r) + v[1].powf(r)))
        .sum();
    Ok(integral.powf(1.0 / r))
}

/// `L^p` norms of every block of one field, of its low block and of the
/// field itself. Besov norms for any `s, q` follow without further
/// transforms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockProfile {
    pub p: f64,
    pub j_min: i32,
    /// `‖Δ_j f‖_p` for `j = j_min, j_min + 1, …`.
    pub blocks: Vec<f64>,
    /// `‖Δ̄₋₁ f‖_p`.
    pub low: f64,
    /// `‖f‖_p`.
    pub full: f64,
}

impl BlockProfile {
    pub fn j_max(&self) -> i32 {
        self.j_min + self.blocks.len() as i32 - 1
    }

    /// `‖Δ_j f‖_p`, zero outside the stored range.
    pub fn block(&self, j: i32) -> f64 {
        if j < self.j_min || j > self.j_max() {
            0.0
        } else {
            self.blocks[(j - self.j_min) as usize]
        }
    }

    pub fn homogeneous(&self, s: f64, q: f64) -> f64 {
        lq_norm(
            (self.j_min..=self.j_max()).map(|j| 2f64.powf(s * j as f64) * self.block(j)),
            q,
        )
    }

    pub fn inhomogeneous(&self, s: f64, q: f64) -> f64 {
        self.low
            + lq_norm(
                (self.j_min.max(0)..=self.j_max()).map(|j| 2f64.powf(s * j as f64) * self.block(j)),
                q,
            )
    }

    pub fn besov(&self, s: f64, q: f64, homogeneous: bool) -> f64 {
        if homogeneous {
            self.homogeneous(s, q)
        } else {
            self.inhomogeneous(s, q)
        }
    }
}

impl DyadicDecomposition {
    /// Block profile of a scalar field.
    pub fn profile(&self, field: &SpectralField, p: f64) -> Result<BlockProfile> {
        self.profile_vector(std::slice::from_ref(field), p)
    }

    /// Block profile of a vector field, with the pointwise Euclidean norm
    /// inside `L^p`.
    pub fn profile_vector(&self, components: &[SpectralField], p: f64) -> Result<BlockProfile> {
        check_exponent(p)?;
        if components.is_empty() {
            return Err(SqgError::Domain("vector field has no components".into()));
        }
        for c in components {
            if **c.grid() != **self.grid() {
                return Err(SqgError::GridMismatch);
            }
        }
        let area = self.grid().cell_area();
        let norm_of = |weights: &[f64]| -> f64 {
            let samples: Vec<Vec<f64>> = components
                .iter()
                .map(|c| c.apply_real_multiplier(|i| weights[i]).to_physical())
                .collect();
            if samples.len() == 1 {
                lp_norm_samples(&samples[0], p, area)
            } else {
                lp_norm_vector_samples(&samples, p, area)
            }
        };
        let blocks = self
            .j_range()
            .collect::<Vec<_>>()
            .par_iter()
            .map(|&j| norm_of(self.weights(j).expect("j in range")))
            .collect();
        let low = norm_of(self.low_weights());
        let full = {
            let samples: Vec<Vec<f64>> = components.iter().map(|c| c.to_physical()).collect();
            if samples.len() == 1 {
                lp_norm_samples(&samples[0], p, area)
            } else {
                lp_norm_vector_samples(&samples, p, area)
            }
        };
        Ok(BlockProfile {
            p,
            j_min: self.j_min(),
            blocks,
            low,
            full,
        })
    }

    /// Block profiles of every snapshot of a trajectory.
    pub fn trajectory_profiles(&self, traj: &Trajectory, p: f64) -> Result<Vec<BlockProfile>> {
        traj.snapshots()
            .par_iter()
            .map(|s| self.profile(&s.field, p))
            .collect()
    }
}

/// `‖f‖_{Ḃ^s_{p,q}}` (homogeneous: `ℓ^q` over all realisable blocks) or
/// `‖f‖_{B^s_{p,q}} = ‖Δ̄₋₁f‖_p + ‖(2^{js}‖Δ_j f‖_p)_{j≥0}‖_{ℓ^q}`.
pub fn besov_norm(
    field: &SpectralField,
    params: &BesovParams,
    decomp: &DyadicDecomposition,
) -> Result<f64> {
    params.validate()?;
    Ok(decomp
        .profile(field, params.p)?
        .besov(params.s, params.q, params.homogeneous))
}

/// Mixed norm of a sequence of profiles sampled at `times`.
///
/// Chemin style: `‖(2^{js}‖Δ_j f‖_{L^r_t L^p})_j‖_{ℓ^q}`, plus
/// `‖f‖_{L^r_t L^p}` in the inhomogeneous case. Standard style: the time
/// `L^r` norm of the spatial Besov norm.
pub fn mixed_norm_from_profiles(
    times: &[f64],
    profiles: &[BlockProfile],
    params: &MixedNormParams,
) -> Result<f64> {
    params.besov.validate()?;
    check_exponent(params.r)?;
    if times.len() != profiles.len() {
        return Err(SqgError::Domain(
            "times and profiles differ in length".into(),
        ));
    }
    if times.len() < 2 {
        return Err(SqgError::InsufficientData(format!(
            "mixed norms need at least 2 snapshots, got {}",
            times.len()
        )));
    }
    let BesovParams {
        s, q, homogeneous, ..
    } = params.besov;
    let r = params.r;
    if !params.chemin_style {
        let values: Vec<f64> = profiles
            .iter()
            .map(|p| p.besov(s, q, homogeneous))
            .collect();
        return time_lr_norm(times, &values, r);
    }
    let j_min = profiles.iter().map(|p| p.j_min).min().unwrap_or(0);
    let j_max = profiles.iter().map(|p| p.j_max()).max().unwrap_or(-1);
    let mut terms = Vec::new();
    for j in j_min..=j_max {
        let series: Vec<f64> = profiles.iter().map(|p| p.block(j)).collect();
        terms.push(2f64.powf(s * j as f64) * time_lr_norm(times, &series, r)?);
    }
    let dot = lq_norm(terms, q);
    if homogeneous {
        Ok(dot)
    } else {
        let full: Vec<f64> = profiles.iter().map(|p| p.full).collect();
        Ok(time_lr_norm(times, &full, r)? + dot)
    }
}

/// Mixed time-space Besov norm of a trajectory.
pub fn chemin_norm(
    traj: &Trajectory,
    params: &MixedNormParams,
    decomp: &DyadicDecomposition,
) -> Result<f64> {
    params.besov.validate()?;
    if traj.len() < 2 {
        return Err(SqgError::InsufficientData(format!(
            "mixed norms need at least 2 snapshots, got {}",
            traj.len()
        )));
    }
    let profiles = decomp.trajectory_profiles(traj, params.besov.p)?;
    mixed_norm_from_profiles(&traj.times(), &profiles, params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use rustfft::num_complex::Complex64;
    use std::f64::consts::PI;

    #[test]
    fn zero_field_has_zero_norm() {
        let g = GridSpec::new(16, 1.0).build().unwrap();
        let d = DyadicDecomposition::new(&g);
        let z = SpectralField::zeros(&g);
        for h in [true, false] {
            let p = BesovParams {
                s: 1.0,
                p: 2.0,
                q: 1.0,
                homogeneous: h,
            };
            assert_eq!(besov_norm(&z, &p, &d).unwrap(), 0.0);
        }
    }

    #[test]
    fn unit_mode_norm_is_its_lp_norm() {
        let g = GridSpec::new(32, 1.0).build().unwrap();
        let d = DyadicDecomposition::new(&g);
        let a = 0.7;
        let f = SpectralField::mode(&g, 1, 0, Complex64::new(0.0, -a / 2.0)).unwrap();
        for (s, q) in [(0.0, 1.0), (1.5, 2.0), (-0.5, f64::INFINITY)] {
            let n = besov_norm(&f, &BesovParams::homogeneous(s, 2.0, q), &d).unwrap();
            assert!((n - a * 2f64.sqrt() * PI).abs() < 1e-12);
        }
    }

    #[test]
    fn dilated_mode_scales_by_two_to_the_ms() {
        let g = GridSpec::new(64, 1.0).build().unwrap();
        let d = DyadicDecomposition::new(&g);
        let base = SpectralField::mode(&g, 0, 1, Complex64::new(0.4, 0.1)).unwrap();
        // |f|⁴ stays resolved on the grid for modes up to 8, so the
        // quadrature is exact.
        for m in 1..=3 {
            let f = SpectralField::mode(&g, 0, 1 << m, Complex64::new(0.4, 0.1)).unwrap();
            for s in [0.5, 1.0, -1.0] {
                let p = BesovParams::homogeneous(s, 4.0, 2.0);
                let ratio = besov_norm(&f, &p, &d).unwrap() / besov_norm(&base, &p, &d).unwrap();
                assert!((ratio / 2f64.powf(m as f64 * s) - 1.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn trapezoid_time_norm() {
        let t = [0.0, 1.0, 3.0];
        let v = [1.0, 1.0, 1.0];
        assert!((time_lr_norm(&t, &v, 2.0).unwrap() - 3f64.sqrt()).abs() < 1e-15);
        assert_eq!(
            time_lr_norm(&t, &[1.0, 4.0, 2.0], f64::INFINITY).unwrap(),
            4.0
        );
        assert!(matches!(
            time_lr_norm(&[0.0], &[1.0], 2.0),
            Err(SqgError::InsufficientData(_))
        ));
    }

    #[test]
    fn constant_trajectory_factors() {
        let g = GridSpec::new(32, 1.0).build().unwrap();
        let d = DyadicDecomposition::new(&g);
        let f = SpectralField::from_fn(&g, |x, y| (x + 2.0 * y).sin() + 0.3 * (3.0 * x).cos());
        let times: Vec<f64> = (0..=10).map(|i| 0.25 * i as f64).collect();
        let traj = Trajectory::constant(&f, &times).unwrap();
        let b = BesovParams::homogeneous(0.5, 2.0, 2.0);
        let spatial = besov_norm(&f, &b, &d).unwrap();
        for r in [1.0, 2.0, 4.0] {
            let n = chemin_norm(&traj, &MixedNormParams::chemin(r, b), &d).unwrap();
            assert!((n - 2.5f64.powf(1.0 / r) * spatial).abs() < 1e-12 * spatial);
        }
    }
}
