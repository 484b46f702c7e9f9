//! Successive approximations: iterate `k + 1` solves the linear transport
//! equation `θ_t + u^k·∇θ + Λ^γθ = 0` with the velocity of iterate `k`.
//!
//! The lagged velocity is stored at every Runge–Kutta stage of every step,
//! so each iterate uses exactly the stage states of its predecessor and the
//! fixed point of the iteration is the direct solution of the same scheme.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diagnostics::{critical_alpha, lambda_functional, CriterionParams};
use crate::error::{Result, SqgError};
use crate::field::SpectralField;
use crate::lp::{besov_norm, median, BesovParams, DyadicDecomposition};
use crate::operators::{advection, riesz_velocity, PhysicalVelocity};
use crate::solver::config::SolverConfig;
use crate::solver::run::integrate;
use crate::trajectory::Trajectory;

#[derive(Clone, Debug)]
pub struct PicardState {
    pub k: usize,
    pub trajectory: Trajectory,
    /// `Λ(θ^k − θ^{k−1}, T)`; `None` for `k = 0`.
    pub diff_norm: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum PicardStatus {
    /// All requested iterates were computed.
    Completed,
    /// The difference norm grew three times in a row, or an iterate became
    /// non-finite, at iterate `k`.
    NoContraction { k: usize },
}

/// Ratios `d_{k+1}/d_k` only count when `d_k` exceeds this fraction of the
/// first difference (below it the iteration has converged to roundoff).
pub const RATIO_FLOOR: f64 = 1e-13;
/// A run contracts geometrically when the median ratio is below this.
pub const CONTRACTION_THRESHOLD: f64 = 0.8;

#[derive(Clone, Debug)]
pub struct PicardRun {
    pub states: Vec<PicardState>,
    pub status: PicardStatus,
    pub criterion: CriterionParams,
    pub q: f64,
}

impl PicardRun {
    /// `d_k = Λ(θ^k − θ^{k−1})` for `k = 1, 2, …`.
    pub fn differences(&self) -> Vec<f64> {
        self.states.iter().filter_map(|s| s.diff_norm).collect()
    }

    pub fn contraction_ratios(&self) -> Vec<f64> {
        let d = self.differences();
        let Some(&d1) = d.first() else {
            return Vec::new();
        };
        d.windows(2)
            .filter(|w| w[0] > RATIO_FLOOR * d1)
            .map(|w| w[1] / w[0])
            .collect()
    }

    pub fn median_ratio(&self) -> Option<f64> {
        let r = self.contraction_ratios();
        (!r.is_empty()).then(|| median(&r))
    }

    /// Geometric decrease: completed, and the median ratio is below
    /// [`CONTRACTION_THRESHOLD`] (vacuously true when the differences
    /// vanish after the first).
    pub fn contracts(&self) -> bool {
        self.status == PicardStatus::Completed
            && self
                .median_ratio()
                .is_none_or(|m| m < CONTRACTION_THRESHOLD)
    }

    pub fn last(&self) -> &PicardState {
        self.states.last().expect("iterate 0 always present")
    }
}

/// Velocities of one iterate at every stage of every step.
type StageStore = Vec<Vec<PhysicalVelocity>>;

fn linear_iterate(
    theta0: &SpectralField,
    cfg: &SolverConfig,
    lagged: Option<&StageStore>,
) -> Result<(Trajectory, StageStore)> {
    let stages = cfg.scheme.stages();
    let mut store: StageStore = Vec::with_capacity(cfg.steps());
    let traj = integrate(theta0, cfg, |step, stage, state| {
        if stage == 0 {
            store.push(Vec::with_capacity(stages));
        }
        store[step].push(riesz_velocity(&state.dealiased()).to_physical());
        match lagged {
            Some(prev) => Ok(-&advection(&prev[step][stage], state)?),
            None => Ok(SpectralField::zeros(state.grid())),
        }
    })?;
    Ok((traj, store))
}

/// Run up to `k_max` successive approximations from `θ⁰ ≡ 0`.
///
/// Differences are measured with `Λ(θ^{k} − θ^{k−1}, T)` for the given
/// criterion exponents and summability `q`. Iteration stops early with
/// [`PicardStatus::NoContraction`] when the difference grows three times
/// in a row or an iterate is flagged.
pub fn picard_iterate(
    theta0: &SpectralField,
    cfg: &SolverConfig,
    k_max: usize,
    criterion: &CriterionParams,
    q: f64,
    decomp: &DyadicDecomposition,
) -> Result<PicardRun> {
    let zero = SpectralField::zeros(theta0.grid());
    let (zero_traj, _) = {
        let mut linear = cfg.clone();
        linear.nonlinear = false;
        linear.track_lp_norms = false;
        linear_iterate(&zero, &linear, None)?
    };
    let mut states = vec![PicardState {
        k: 0,
        trajectory: zero_traj,
        diff_norm: None,
    }];
    let mut lagged: Option<StageStore> = None;
    let mut status = PicardStatus::Completed;
    let mut growth = 0;
    for k in 1..=k_max {
        let (traj, store) = linear_iterate(theta0, cfg, lagged.as_ref())?;
        let prev = &states[k - 1].trajectory;
        let flagged = !traj.status.is_completed();
        let diff = if flagged || traj.len() != prev.len() {
            f64::INFINITY
        } else {
            lambda_functional(&traj.difference(prev)?, criterion, q, decomp)?
        };
        let prev_diff = states[k - 1].diff_norm;
        states.push(PicardState {
            k,
            trajectory: traj,
            diff_norm: Some(diff),
        });
        if !diff.is_finite() {
            status = PicardStatus::NoContraction { k };
            break;
        }
        growth = match prev_diff {
            Some(p) if diff > p => growth + 1,
            _ => 0,
        };
        if growth >= 3 {
            status = PicardStatus::NoContraction { k };
            break;
        }
        lagged = Some(store);
    }
    Ok(PicardRun {
        states,
        status,
        criterion: *criterion,
        q,
    })
}

/// `T = c_cal · ‖θ₀‖_{Ḃ^α_{p,q}}^{−r₀}`, or `+∞` for zero data.
pub fn existence_time_estimate(
    theta0: &SpectralField,
    p: f64,
    q: f64,
    r0: f64,
    gamma: f64,
    c_cal: f64,
    decomp: &DyadicDecomposition,
) -> Result<f64> {
    let alpha = critical_alpha(p, r0, gamma)?;
    if !(q >= 1.0) {
        return Err(SqgError::Domain(format!("q must lie in [1, ∞], got {q}")));
    }
    if !(c_cal > 0.0 && c_cal.is_finite()) {
        return Err(SqgError::Domain(format!(
            "c_cal must be positive, got {c_cal}"
        )));
    }
    let norm = besov_norm(theta0, &BesovParams::homogeneous(alpha, p, q), decomp)?;
    Ok(existence_time_from_norm(norm, r0, c_cal))
}

pub fn existence_time_from_norm(norm: f64, r0: f64, c_cal: f64) -> f64 {
    if norm == 0.0 {
        f64::INFINITY
    } else {
        c_cal * norm.powf(-r0)
    }
}

/// Settings of the calibration of `c_cal`.
#[derive(Clone, Debug)]
pub struct CalibrationSetup {
    /// Grid, `γ`, scheme and snapshot stride of the Picard runs; `dt` and
    /// `t_end` are overwritten per trial.
    pub base: SolverConfig,
    pub steps: usize,
    pub k_max: usize,
    pub criterion: CriterionParams,
    pub q: f64,
    pub c_lo: f64,
    pub c_hi: f64,
    pub bisections: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationTrial {
    pub c: f64,
    pub all_contract: bool,
    /// Median contraction ratio per datum (`NaN` when undefined).
    pub median_ratios: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    /// Largest tested `c` for which every datum contracted.
    pub c_cal: f64,
    /// Smallest tested `c` for which some datum failed (`∞` if none).
    pub c_fail: f64,
    pub trials: Vec<CalibrationTrial>,
}

/// Picard run on `[0, T]` with `T` from the existence-time formula and
/// `steps` equal steps.
pub fn picard_on_existence_interval(
    theta0: &SpectralField,
    setup: &CalibrationSetup,
    c: f64,
    decomp: &DyadicDecomposition,
) -> Result<PicardRun> {
    let cr = &setup.criterion;
    let t = existence_time_estimate(theta0, cr.p, setup.q, cr.r0, cr.gamma, c, decomp)?;
    if !t.is_finite() {
        return Err(SqgError::Domain(
            "zero initial data has no finite existence time".into(),
        ));
    }
    let mut cfg = setup.base.clone();
    cfg.t_end = t;
    cfg.dt = t / setup.steps as f64;
    picard_iterate(theta0, &cfg, setup.k_max, cr, setup.q, decomp)
}

/// Bisect (geometrically) for the largest `c` such that the Picard
/// iteration contracts on `[0, c‖θ₀‖^{−r₀}]` for every datum.
pub fn calibrate_existence_constant(
    data: &[SpectralField],
    setup: &CalibrationSetup,
    decomp: &DyadicDecomposition,
) -> Result<CalibrationReport> {
    if data.is_empty() {
        return Err(SqgError::InsufficientData("calibration needs data".into()));
    }
    if !(setup.c_lo > 0.0 && setup.c_lo < setup.c_hi) {
        return Err(SqgError::Domain(
            "calibration bracket must satisfy 0 < c_lo < c_hi".into(),
        ));
    }
    let mut trials = Vec::new();
    let mut test = |c: f64| -> Result<bool> {
        let runs: Vec<PicardRun> = data
            .par_iter()
            .map(|d| picard_on_existence_interval(d, setup, c, decomp))
            .collect::<Result<_>>()?;
        let all_contract = runs.iter().all(PicardRun::contracts);
        trials.push(CalibrationTrial {
            c,
            all_contract,
            median_ratios: runs
                .iter()
                .map(|r| r.median_ratio().unwrap_or(f64::NAN))
                .collect(),
        });
        Ok(all_contract)
    };
    let (mut lo, mut hi) = (setup.c_lo, setup.c_hi);
    if test(hi)? {
        return Ok(CalibrationReport {
            c_cal: hi,
            c_fail: f64::INFINITY,
            trials,
        });
    }
    if !test(lo)? {
        return Err(SqgError::Domain(format!(
            "Picard iteration fails to contract already at c = {lo}"
        )));
    }
    for _ in 0..setup.bisections {
        let mid = (lo * hi).sqrt();
        if test(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(CalibrationReport {
        c_cal: lo,
        c_fail: hi,
        trials,
    })
}
