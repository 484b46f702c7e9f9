//! Time-stamped field sequences and per-step scalar diagnostics.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SqgError};
use crate::field::SpectralField;

#[derive(Clone, Debug)]
pub struct Snapshot {
    pub step: usize,
    pub time: f64,
    pub field: SpectralField,
}

/// Scalar diagnostics recorded after every step (and at `t = 0`).
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StepDiagnostics {
    pub step: usize,
    pub time: f64,
    /// `‖θ‖₂²`.
    pub energy: f64,
    /// `‖Λ^{γ/2}θ‖₂²`.
    pub dissipation: f64,
    pub l4: Option<f64>,
    pub l8: Option<f64>,
    /// Supremum of the trigonometric interpolant.
    pub linf: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BlowupReason {
    NonFinite,
    SpectralPileup { fraction: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum RunStatus {
    Completed,
    /// The run was stopped; `time` is the last time with a reliable state.
    BlowupFlagged {
        time: f64,
        reason: BlowupReason,
    },
}

impl RunStatus {
    pub fn is_completed(&self) -> bool {
        matches!(self, Self::Completed)
    }
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    snapshots: Vec<Snapshot>,
    pub diagnostics: Vec<StepDiagnostics>,
    pub status: RunStatus,
    /// Largest `max|u|·dt/Δx` observed at snapshot times.
    pub max_cfl: f64,
}

impl Trajectory {
    /// A trajectory from explicit `(time, field)` pairs; times must increase
    /// strictly and all fields share one grid.
    pub fn from_snapshots(items: Vec<(f64, SpectralField)>) -> Result<Self> {
        let mut t = Self {
            snapshots: Vec::with_capacity(items.len()),
            diagnostics: Vec::new(),
            status: RunStatus::Completed,
            max_cfl: 0.0,
        };
        for (i, (time, field)) in items.into_iter().enumerate() {
            t.push(i, time, field)?;
        }
        Ok(t)
    }

    /// The same field held at each of `times`.
    pub fn constant(field: &SpectralField, times: &[f64]) -> Result<Self> {
        Self::from_snapshots(times.iter().map(|&t| (t, field.clone())).collect())
    }

    pub(crate) fn empty() -> Self {
        Self {
            snapshots: Vec::new(),
            diagnostics: Vec::new(),
            status: RunStatus::Completed,
            max_cfl: 0.0,
        }
    }

    pub fn push(&mut self, step: usize, time: f64, field: SpectralField) -> Result<()> {
        if let Some(last) = self.snapshots.last() {
            if !(time > last.time) {
                return Err(SqgError::Domain(format!(
                    "snapshot times must increase strictly ({time} after {})",
                    last.time
                )));
            }
            last.field.ensure_same_grid(&field)?;
        }
        self.snapshots.push(Snapshot { step, time, field });
        Ok(())
    }

    pub fn snapshots(&self) -> &[Snapshot] {
        &self.snapshots
    }

    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.time).collect()
    }

    pub fn fields(&self) -> impl Iterator<Item = &SpectralField> {
        self.snapshots.iter().map(|s| &s.field)
    }

    pub fn first(&self) -> Option<&Snapshot> {
        self.snapshots.first()
    }

    pub fn last(&self) -> Option<&Snapshot> {
        self.snapshots.last()
    }

    /// Snapshots with `time ≤ t_end`.
    pub fn truncated(&self, t_end: f64) -> Self {
        Self {
            snapshots: self
                .snapshots
                .iter()
                .filter(|s| s.time <= t_end)
                .cloned()
                .collect(),
            diagnostics: self
                .diagnostics
                .iter()
                .filter(|d| d.time <= t_end)
                .cloned()
                .collect(),
            status: self.status,
            max_cfl: self.max_cfl,
        }
    }

    /// Snapshot-wise `self − other`; the time stamps must agree.
    pub fn difference(&self, other: &Self) -> Result<Self> {
        if self.len() != other.len() {
            return Err(SqgError::Domain(format!(
                "trajectories have {} and {} snapshots",
                self.len(),
                other.len()
            )));
        }
        let mut out = Self::empty();
        for (a, b) in self.snapshots.iter().zip(&other.snapshots) {
            if (a.time - b.time).abs() > 1e-12 * a.time.abs().max(1.0) {
                return Err(SqgError::Domain(format!(
                    "snapshot times differ: {} vs {}",
                    a.time, b.time
                )));
            }
            a.field.ensure_same_grid(&b.field)?;
            out.push(a.step, a.time, &a.field - &b.field)?;
        }
        Ok(out)
    }

    /// Apply `f` to every snapshot field, keeping the time stamps.
    pub fn map(&self, f: impl Fn(&SpectralField) -> SpectralField) -> Result<Self> {
        let mut out = Self::empty();
        for s in &self.snapshots {
            out.push(s.step, s.time, f(&s.field))?;
        }
        Ok(out)
    }
}
