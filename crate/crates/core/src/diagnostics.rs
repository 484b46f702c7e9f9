//! Regularity-criterion monitoring: the critical exponent, the running
//! `L^{r₀}_t B^α_{p,∞}` integral, the blowup-rate fit and the `Λ`
//! functional.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SqgError};
use crate::lp::{
    mixed_norm_from_profiles, BesovParams, BlockProfile, DyadicDecomposition, MixedNormParams,
};
use crate::trajectory::{RunStatus, Trajectory};

/// `α = 2/p + 1 − γ + γ/r₀`.
pub fn critical_alpha(p: f64, r0: f64, gamma: f64) -> Result<f64> {
    if !(p.is_finite() && p >= 2.0) {
        return Err(SqgError::Domain(format!("p must lie in [2, ∞), got {p}")));
    }
    if !(r0.is_finite() && r0 >= 2.0) {
        return Err(SqgError::Domain(format!("r0 must lie in [2, ∞), got {r0}")));
    }
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(SqgError::Domain(format!(
            "gamma must lie in (0, 1], got {gamma}"
        )));
    }
    Ok(2.0 / p + 1.0 - gamma + gamma / r0)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriterionParams {
    pub p: f64,
    pub r0: f64,
    pub gamma: f64,
    pub alpha: f64,
}

impl CriterionParams {
    pub fn new(p: f64, r0: f64, gamma: f64) -> Result<Self> {
        let alpha = critical_alpha(p, r0, gamma)?;
        let params = Self {
            p,
            r0,
            gamma,
            alpha,
        };
        debug_assert_eq!(params.alpha, 2.0 / p + 1.0 - gamma + gamma / r0);
        Ok(params)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum CriterionVerdict {
    /// The running integral is finite over the whole run.
    Satisfied { integral: f64 },
    /// The run was stopped by the blowup flag; the integral is finite up to
    /// `last_reliable_time`.
    Truncated {
        last_reliable_time: f64,
        integral: f64,
    },
    /// A non-finite norm appeared at `time`.
    Violated { time: f64, last_reliable_time: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlowupFit {
    pub exponent: f64,
    pub amplitude: f64,
    /// Time window `[s_start, s_end]` of the fitted samples.
    pub window: (f64, f64),
    pub samples: usize,
    pub t_guess: f64,
    /// The rate `1/r₀` of the lower bound.
    pub target_exponent: f64,
    pub tolerance: f64,
    pub blowup_consistent: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonitorSeries {
    pub times: Vec<f64>,
    /// `‖θ(t)‖_{B^α_{p,∞}}` (inhomogeneous).
    pub besov_alpha_values: Vec<f64>,
    /// `∫₀ᵗ ‖θ(s)‖^{r₀}_{B^α_{p,∞}} ds` (trapezoid rule).
    pub running_integral: Vec<f64>,
    pub blowup_fit: Option<BlowupFit>,
    pub verdict: CriterionVerdict,
}

fn cumulative_trapezoid(times: &[f64], values: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    let mut out = Vec::with_capacity(times.len());
    out.push(0.0);
    for i in 1..times.len() {
        acc += 0.5 * (times[i] - times[i - 1]) * (values[i] + values[i - 1]);
        out.push(acc);
    }
    out
}

/// Monitor `θ ∈ L^{r₀}_t B^α_{p,∞}` along a trajectory.
pub fn regularity_monitor(
    traj: &Trajectory,
    params: &CriterionParams,
    decomp: &DyadicDecomposition,
) -> Result<MonitorSeries> {
    if traj.len() < 2 {
        return Err(SqgError::InsufficientData(format!(
            "the monitor needs at least 2 snapshots, got {}",
            traj.len()
        )));
    }
    let times = traj.times();
    let values: Vec<f64> = decomp
        .trajectory_profiles(traj, params.p)?
        .iter()
        .map(|p| p.inhomogeneous(params.alpha, f64::INFINITY))
        .collect();
    let powered: Vec<f64> = values.iter().map(|v| v.powf(params.r0)).collect();
    let running_integral = cumulative_trapezoid(&times, &powered);
    let verdict = match values.iter().position(|v| !v.is_finite()) {
        Some(i) => CriterionVerdict::Violated {
            time: times[i],
            last_reliable_time: if i > 0 { times[i - 1] } else { f64::NAN },
        },
        None => {
            let integral = *running_integral.last().expect("non-empty");
            match traj.status {
                RunStatus::Completed => CriterionVerdict::Satisfied { integral },
                RunStatus::BlowupFlagged { time, .. } => CriterionVerdict::Truncated {
                    last_reliable_time: time,
                    integral,
                },
            }
        }
    };
    Ok(MonitorSeries {
        times,
        besov_alpha_values: values,
        running_integral,
        blowup_fit: None,
        verdict,
    })
}

/// Relative tolerance of the blowup-consistency verdict.
pub const BLOWUP_FIT_TOL: f64 = 0.2;
/// Minimum number of samples in the fit window.
pub const BLOWUP_FIT_MIN_SAMPLES: usize = 8;

fn least_squares(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (slope, my - slope * mx)
}

/// Fit `‖θ(s)‖ ≈ A (T − s)^{−e}` on the last quarter of the series.
///
/// The window samples are mapped to `x = −ln(T − s)`, resampled at equally
/// spaced `x` (log-spaced in `T − s`) by linear interpolation, and fitted
/// by least squares. Non-positive values are dropped.
pub fn blowup_proxy_fit(
    series: &MonitorSeries,
    params: &CriterionParams,
    t_guess: f64,
) -> Result<BlowupFit> {
    let last = *series
        .times
        .last()
        .ok_or_else(|| SqgError::InsufficientData("empty series".into()))?;
    if !(t_guess > last) {
        return Err(SqgError::Domain(format!(
            "T_guess = {t_guess} must exceed the last sample time {last}"
        )));
    }
    let start = (series.times.len() * 3) / 4;
    let (xs, ys): (Vec<f64>, Vec<f64>) = series.times[start..]
        .iter()
        .zip(&series.besov_alpha_values[start..])
        .filter(|(_, v)| **v > 0.0 && v.is_finite())
        .map(|(s, v)| (-(t_guess - s).ln(), v.ln()))
        .unzip();
    if xs.len() < BLOWUP_FIT_MIN_SAMPLES {
        return Err(SqgError::InsufficientData(format!(
            "fit window holds {} usable samples, need {BLOWUP_FIT_MIN_SAMPLES}",
            xs.len()
        )));
    }
    let m = xs.len();
    let (x0, x1) = (xs[0], xs[m - 1]);
    let grid_x: Vec<f64> = (0..m)
        .map(|i| x0 + (x1 - x0) * i as f64 / (m - 1) as f64)
        .collect();
    let mut k = 0;
    let grid_y: Vec<f64> = grid_x
        .iter()
        .map(|&x| {
            while k + 2 < m && xs[k + 1] < x {
                k += 1;
            }
            let (xa, xb) = (xs[k], xs[k + 1]);
            let w = if xb > xa {
                ((x - xa) / (xb - xa)).clamp(0.0, 1.0)
            } else {
                0.0
            };
            ys[k] + w * (ys[k + 1] - ys[k])
        })
        .collect();
    let (slope, intercept) = least_squares(&grid_x, &grid_y);
    let target = 1.0 / params.r0;
    Ok(BlowupFit {
        exponent: slope,
        amplitude: intercept.exp(),
        window: (series.times[start], last),
        samples: m,
        t_guess,
        target_exponent: target,
        tolerance: BLOWUP_FIT_TOL,
        blowup_consistent: slope >= target * (1.0 - BLOWUP_FIT_TOL),
    })
}

/// `Λ` from precomputed profiles.
pub fn lambda_from_profiles(
    times: &[f64],
    profiles: &[BlockProfile],
    params: &CriterionParams,
    q: f64,
) -> Result<f64> {
    let a = params.alpha;
    let dissipative = MixedNormParams::chemin(
        2.0,
        BesovParams::homogeneous(a + 0.5 * params.gamma, params.p, q),
    );
    let uniform = MixedNormParams::chemin(f64::INFINITY, BesovParams::homogeneous(a, params.p, q));
    Ok(mixed_norm_from_profiles(times, profiles, &dissipative)?
        + mixed_norm_from_profiles(times, profiles, &uniform)?)
}

/// `Λ(θ, T) = ‖θ‖_{L̃²Ḃ^{α+γ/2}_{p,q}} + ‖θ‖_{L̃^∞Ḃ^α_{p,q}}` over the
/// trajectory's time span.
pub fn lambda_functional(
    traj: &Trajectory,
    params: &CriterionParams,
    q: f64,
    decomp: &DyadicDecomposition,
) -> Result<f64> {
    if traj.len() < 2 {
        return Err(SqgError::InsufficientData(format!(
            "Λ needs at least 2 snapshots, got {}",
            traj.len()
        )));
    }
    let profiles = decomp.trajectory_profiles(traj, params.p)?;
    lambda_from_profiles(&traj.times(), &profiles, params, q)
}

/// The three norms of the embedding chain
/// `‖θ‖_{L^{r₀}B^α_{p,∞}} ≤ ‖θ‖_{L̃^{r₀}B^α_{p,r₀}} ≤ C ‖θ‖_{L̃^{r₀}B^{α+γ/r₀}_{p,∞}}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingChain {
    pub standard: f64,
    pub chemin: f64,
    pub chemin_upper: f64,
    /// Smallest `C` making the second inequality hold.
    pub constant: f64,
}

impl EmbeddingChain {
    pub fn first_holds(&self, rel_tol: f64) -> bool {
        self.standard <= self.chemin * (1.0 + rel_tol)
    }
}

pub fn embedding_chain(
    traj: &Trajectory,
    params: &CriterionParams,
    decomp: &DyadicDecomposition,
) -> Result<EmbeddingChain> {
    let profiles = decomp.trajectory_profiles(traj, params.p)?;
    let times = traj.times();
    let (a, p, r0) = (params.alpha, params.p, params.r0);
    let standard = mixed_norm_from_profiles(
        &times,
        &profiles,
        &MixedNormParams::standard(r0, BesovParams::inhomogeneous(a, p, f64::INFINITY)),
    )?;
    let chemin = mixed_norm_from_profiles(
        &times,
        &profiles,
        &MixedNormParams::chemin(r0, BesovParams::inhomogeneous(a, p, r0)),
    )?;
    let chemin_upper = mixed_norm_from_profiles(
        &times,
        &profiles,
        &MixedNormParams::chemin(
            r0,
            BesovParams::inhomogeneous(a + params.gamma / r0, p, f64::INFINITY),
        ),
    )?;
    Ok(EmbeddingChain {
        standard,
        chemin,
        chemin_upper,
        constant: if chemin == 0.0 {
            0.0
        } else {
            chemin / chemin_upper
        },
    })
}

/// `Λ(θ, T) / ‖θ₀‖_{Ḃ^α_{p,q}}`.
pub fn apriori_ratio(
    traj: &Trajectory,
    params: &CriterionParams,
    q: f64,
    decomp: &DyadicDecomposition,
) -> Result<f64> {
    let first = traj
        .first()
        .ok_or_else(|| SqgError::InsufficientData("empty trajectory".into()))?;
    let norm0 = decomp
        .profile(&first.field, params.p)?
        .homogeneous(params.alpha, q);
    Ok(lambda_functional(traj, params, q, decomp)? / norm0)
}

/// `‖θ‖_{L̃^r B^{α+γ/r}_{p,q}} / ‖θ₀‖_{B^α_{p,q}}` (inhomogeneous norms).
pub fn smoothing_ratio(
    traj: &Trajectory,
    params: &CriterionParams,
    q: f64,
    r: f64,
    decomp: &DyadicDecomposition,
) -> Result<f64> {
    let profiles = decomp.trajectory_profiles(traj, params.p)?;
    let s = params.alpha
        + if r.is_infinite() {
            0.0
        } else {
            params.gamma / r
        };
    let num = mixed_norm_from_profiles(
        &traj.times(),
        &profiles,
        &MixedNormParams::chemin(r, BesovParams::inhomogeneous(s, params.p, q)),
    )?;
    Ok(num / profiles[0].inhomogeneous(params.alpha, q))
}
