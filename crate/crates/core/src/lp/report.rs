//! Machine-readable results of the verification suites.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictStatus {
    /// Empirical ratios are finite and uniform in `j`.
    Bounded,
    /// Some ratio is non-finite or not uniform in `j`.
    Violated,
    /// An exact identity held within tolerance.
    Passed,
    /// An exact identity failed.
    Failed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub status: VerdictStatus,
    pub tolerance: f64,
    pub detail: String,
}

impl Verdict {
    pub fn is_pass(&self) -> bool {
        matches!(self.status, VerdictStatus::Bounded | VerdictStatus::Passed)
    }
}

/// One row per block `j` (and per relation when a suite checks several).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JRow {
    pub j: i32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relation: Option<String>,
    /// Mean left side over the samples of this block.
    pub lhs: f64,
    /// Mean right side over the samples of this block.
    pub rhs: f64,
    /// Mean of the per-sample ratios.
    pub ratio: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ratio_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ratio_max: Option<f64>,
    pub samples: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub lemma_id: String,
    pub params: Value,
    pub per_j: Vec<JRow>,
    pub constants: BTreeMap<String, f64>,
    pub verdict: Verdict,
}

impl LemmaReport {
    pub fn rows<'a>(&'a self, relation: &'a str) -> impl Iterator<Item = &'a JRow> + 'a {
        self.per_j
            .iter()
            .filter(move |r| r.relation.as_deref() == Some(relation))
    }

    pub fn constant(&self, name: &str) -> Option<f64> {
        self.constants.get(name).copied()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Per-block accumulator of `(lhs, rhs)` sample pairs.
#[derive(Clone, Debug, Default)]
pub(crate) struct RatioStats {
    lhs: Vec<f64>,
    rhs: Vec<f64>,
}

impl RatioStats {
    pub fn push(&mut self, lhs: f64, rhs: f64) {
        self.lhs.push(lhs);
        self.rhs.push(rhs);
    }

    pub fn len(&self) -> usize {
        self.lhs.len()
    }

    pub fn ratios(&self) -> impl Iterator<Item = f64> + '_ {
        self.lhs.iter().zip(&self.rhs).map(|(l, r)| l / r)
    }

    pub fn min(&self) -> f64 {
        self.ratios().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.ratios().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn row(&self, j: i32, relation: &str) -> JRow {
        let n = self.len().max(1) as f64;
        JRow {
            j,
            relation: Some(relation.to_string()),
            lhs: self.lhs.iter().sum::<f64>() / n,
            rhs: self.rhs.iter().sum::<f64>() / n,
            ratio: self.ratios().sum::<f64>() / n,
            ratio_min: Some(self.min()),
            ratio_max: Some(self.max()),
            samples: self.len(),
        }
    }
}

/// Median of a non-empty slice (`NaN` when empty).
pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    match v.len() {
        0 => f64::NAN,
        n if n % 2 == 1 => v[n / 2],
        n => 0.5 * (v[n / 2 - 1] + v[n / 2]),
    }
}

/// Uniformity in `j`: all values finite and positive, the largest below
/// `factor ×` the median and the smallest above `median / factor`.
pub(crate) fn uniform_in_j(values: &[f64], factor: f64) -> Result<(), String> {
    if values.is_empty() {
        return Err("no non-degenerate blocks".into());
    }
    if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
        return Err(format!("ratio {v} is not finite and positive"));
    }
    let m = median(values);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    if hi >= factor * m {
        return Err(format!("max ratio {hi:.4e} ≥ {factor} × median {m:.4e}"));
    }
    if lo * factor <= m {
        return Err(format!("min ratio {lo:.4e} ≤ median {m:.4e} / {factor}"));
    }
    Ok(())
}

/// Factor used by the `j`-uniformity verdicts.
pub const UNIFORMITY_FACTOR: f64 = 10.0;
