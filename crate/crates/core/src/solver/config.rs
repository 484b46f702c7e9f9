use serde::{Deserialize, Serialize};

use crate::error::{Result, SqgError};
use crate::grid::GridSpec;
use crate::solver::etd::Scheme;

fn default_stride() -> usize {
    1
}

fn default_true() -> bool {
    true
}

fn default_cfl() -> f64 {
    1.0
}

fn default_pileup() -> f64 {
    0.1
}

/// Fractional order of the dissipation `Λ^γ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DissipationParams {
    pub gamma: f64,
}

impl DissipationParams {
    /// Accepts `γ ∈ (0, 2]`.
    pub fn new(gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma <= 2.0) {
            return Err(SqgError::Domain(format!(
                "gamma must lie in (0, 2], got {gamma}"
            )));
        }
        Ok(Self { gamma })
    }

    /// The regularity theory covers `γ ∈ (0, 1]` only.
    pub fn ensure_critical_range(&self) -> Result<()> {
        if self.gamma > 1.0 {
            return Err(SqgError::Domain(format!(
                "gamma must lie in (0, 1], got {}",
                self.gamma
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub grid: GridSpec,
    pub gamma: f64,
    pub dt: f64,
    pub t_end: f64,
    #[serde(default)]
    pub scheme: Scheme,
    #[serde(default = "default_stride")]
    pub snapshot_stride: usize,
    /// `false` drops the transport term (pure fractional heat flow).
    #[serde(default = "default_true")]
    pub nonlinear: bool,
    /// Record `L⁴`, `L⁸` and `L^∞` norms after every step.
    #[serde(default)]
    pub track_lp_norms: bool,
    /// Advisory bound on `max|u|·dt/Δx`.
    #[serde(default = "default_cfl")]
    pub cfl_limit: f64,
    /// Top-octave energy fraction that flags spectral pile-up.
    #[serde(default = "default_pileup")]
    pub pileup_threshold: f64,
}

impl SolverConfig {
    pub fn new(grid: GridSpec, gamma: f64, dt: f64, t_end: f64) -> Self {
        Self {
            grid,
            gamma,
            dt,
            t_end,
            scheme: Scheme::default(),
            snapshot_stride: 1,
            nonlinear: true,
            track_lp_norms: false,
            cfl_limit: default_cfl(),
            pileup_threshold: default_pileup(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        DissipationParams::new(self.gamma)?.ensure_critical_range()?;
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(SqgError::Config(format!(
                "dt must be positive, got {}",
                self.dt
            )));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(SqgError::Config(format!(
                "t_end must be positive, got {}",
                self.t_end
            )));
        }
        if !(self.dt < self.t_end) {
            return Err(SqgError::Config(format!(
                "dt = {} must be smaller than t_end = {}",
                self.dt, self.t_end
            )));
        }
        if self.snapshot_stride == 0 {
            return Err(SqgError::Config(
                "snapshot_stride must be at least 1".into(),
            ));
        }
        if !(self.cfl_limit > 0.0) {
            return Err(SqgError::Config("cfl_limit must be positive".into()));
        }
        if !(self.pileup_threshold > 0.0 && self.pileup_threshold <= 1.0) {
            return Err(SqgError::Config(
                "pileup_threshold must lie in (0, 1]".into(),
            ));
        }
        Ok(())
    }

    /// Number of steps; the last one is shortened when `t_end / dt` is not
    /// an integer.
    pub fn steps(&self) -> usize {
        ((self.t_end / self.dt) - 1e-9).ceil().max(1.0) as usize
    }

    /// Time after `k` steps.
    pub fn time_at(&self, k: usize) -> f64 {
        if k >= self.steps() {
            self.t_end
        } else {
            k as f64 * self.dt
        }
    }
}
