//! Run configuration: TOML or JSON (chosen by file extension), with
//! cross-field validation that names the offending field.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use sqg_core::solver::{InitialData, Scheme, SolverConfig};
use sqg_core::GridSpec;

pub const OUTPUT_DIR_ENV: &str = "SQG_OUTPUT_DIR";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub n: usize,
    #[serde(default = "one")]
    pub length: f64,
    #[serde(default = "two_thirds")]
    pub dealias_fraction: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub gamma: f64,
    pub dt: f64,
    pub t_end: f64,
    #[serde(default)]
    pub scheme: Scheme,
    #[serde(default = "one_usize")]
    pub snapshot_stride: usize,
    #[serde(default = "yes")]
    pub nonlinear: bool,
    #[serde(default)]
    pub track_lp_norms: bool,
    #[serde(default = "one")]
    pub cfl_limit: f64,
    #[serde(default = "pileup")]
    pub pileup_threshold: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CriterionSection {
    pub p: f64,
    pub r0: f64,
    /// Summability index of `Λ` and of the existence-time norm.
    #[serde(default = "two")]
    pub q: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputsSection {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    /// Write a checkpoint for every stored snapshot whose step is a
    /// multiple of this; 0 writes only the final state.
    #[serde(default)]
    pub checkpoint_stride: usize,
    #[serde(default = "yes")]
    pub csv: bool,
}

impl Default for OutputsSection {
    fn default() -> Self {
        Self {
            dir: default_dir(),
            checkpoint_stride: 0,
            csv: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PicardSection {
    /// With `c_cal`, the horizon is the existence-time estimate instead of
    /// `solver.t_end`.
    pub c_cal: Option<f64>,
    /// Number of steps on the existence interval (default: from
    /// `solver.dt`).
    pub steps: Option<usize>,
    #[serde(default = "eight")]
    pub k_max: usize,
}

/// Parameters of the verification suites; each suite reads what it needs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySection {
    #[serde(default = "hundred")]
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub j_lo: i32,
    #[serde(default = "four")]
    pub j_hi: i32,
    #[serde(default = "two")]
    pub p: f64,
    #[serde(default = "four_f")]
    pub q_out: f64,
    #[serde(default = "one")]
    pub s: f64,
    #[serde(default = "one")]
    pub gamma: f64,
    #[serde(default = "two_usize")]
    pub oversample: usize,
    #[serde(default = "tolerance")]
    pub tolerance: f64,
    /// `(j, m)` pairs of the scaling suite.
    #[serde(default = "scaling_cases")]
    pub cases: Vec<(i32, i32)>,
    pub commutator: Option<sqg_core::lp::CommutatorParams>,
    pub product: Option<sqg_core::lp::ProductParams>,
}

impl Default for VerifySection {
    fn default() -> Self {
        toml::from_str("").expect("all fields have defaults")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub grid: GridSection,
    pub solver: Option<SolverSection>,
    pub initial_data: Option<InitialData>,
    pub criterion: Option<CriterionSection>,
    #[serde(default)]
    pub outputs: OutputsSection,
    pub picard: Option<PicardSection>,
    pub verify: Option<VerifySection>,
}

fn one() -> f64 {
    1.0
}
fn two() -> f64 {
    2.0
}
fn four_f() -> f64 {
    4.0
}
fn two_thirds() -> f64 {
    2.0 / 3.0
}
fn pileup() -> f64 {
    0.1
}
fn tolerance() -> f64 {
    1e-10
}
fn yes() -> bool {
    true
}
fn one_usize() -> usize {
    1
}
fn two_usize() -> usize {
    2
}
fn four() -> i32 {
    4
}
fn eight() -> usize {
    8
}
fn hundred() -> usize {
    100
}
fn default_dir() -> PathBuf {
    PathBuf::from("sqg-output")
}
fn scaling_cases() -> Vec<(i32, i32)> {
    vec![(1, 1), (1, 2), (2, 1), (2, -1), (3, -2)]
}

impl RunConfig {
    /// Parse by extension (`.toml` or `.json`); syntax and type errors
    /// carry the parser's line/column diagnostics.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
        let cfg: Self = match ext {
            "toml" => {
                toml::from_str(&text).map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))?
            }
            "json" => serde_json::from_str(&text)
                .map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))?,
            _ => bail!(
                "{}: unknown config extension {ext:?}, expected .toml or .json",
                path.display()
            ),
        };
        Ok(cfg)
    }

    pub fn grid_spec(&self) -> Result<GridSpec> {
        let g = &self.grid;
        let spec = GridSpec::new(g.n, g.length).with_dealias_fraction(g.dealias_fraction);
        spec.validate().context("[grid]")?;
        Ok(spec)
    }

    /// `outputs.dir`, overridden by `SQG_OUTPUT_DIR`.
    pub fn output_dir(&self) -> PathBuf {
        match std::env::var_os(OUTPUT_DIR_ENV) {
            Some(dir) if !dir.is_empty() => PathBuf::from(dir),
            _ => self.outputs.dir.clone(),
        }
    }

    pub fn solver_config(&self) -> Result<SolverConfig> {
        let s = self.solver.as_ref().context("missing [solver] section")?;
        let mut cfg = SolverConfig::new(self.grid_spec()?, s.gamma, s.dt, s.t_end);
        cfg.scheme = s.scheme;
        cfg.snapshot_stride = s.snapshot_stride;
        cfg.nonlinear = s.nonlinear;
        cfg.track_lp_norms = s.track_lp_norms;
        cfg.cfl_limit = s.cfl_limit;
        cfg.pileup_threshold = s.pileup_threshold;
        if !(s.gamma > 0.0 && s.gamma <= 1.0) {
            bail!("solver.gamma = {} violates γ ∈ (0,1]", s.gamma);
        }
        if !(s.dt > 0.0) {
            bail!("solver.dt = {} must be positive", s.dt);
        }
        if !(s.dt < s.t_end) {
            bail!(
                "solver.dt = {} must be smaller than solver.t_end = {}",
                s.dt,
                s.t_end
            );
        }
        cfg.validate().context("[solver]")?;
        Ok(cfg)
    }

    pub fn initial_data(&self) -> Result<&InitialData> {
        self.initial_data
            .as_ref()
            .context("missing [initial_data] section")
    }

    pub fn criterion(&self) -> Result<&CriterionSection> {
        let c = self
            .criterion
            .as_ref()
            .context("missing [criterion] section")?;
        if !(c.p.is_finite() && c.p >= 2.0) {
            bail!("criterion.p = {} violates p ∈ [2,∞)", c.p);
        }
        if !(c.r0.is_finite() && c.r0 >= 2.0) {
            bail!("criterion.r0 = {} violates r0 ∈ [2,∞)", c.r0);
        }
        if !(c.q >= 1.0) {
            bail!("criterion.q = {} violates q ∈ [1,∞]", c.q);
        }
        Ok(c)
    }

    /// Checks needed by `simulate` and `picard`.
    pub fn validate_run(&self) -> Result<()> {
        self.solver_config()?;
        self.initial_data()?;
        self.criterion()?;
        if let Some(p) = &self.picard {
            if let Some(c) = p.c_cal {
                if !(c > 0.0 && c.is_finite()) {
                    bail!("picard.c_cal = {c} must be positive");
                }
            }
            if p.steps == Some(0) {
                bail!("picard.steps must be at least 1");
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const RUN: &str = r#"
[grid]
n = 32

[solver]
gamma = 1.0
dt = 0.01
t_end = 0.1

[initial_data]
kind = "random_band"
j_lo = 0
j_hi = 2
seed = 3

[criterion]
p = 4.0
r0 = 4.0
"#;

    #[test]
    fn toml_defaults() {
        let cfg: RunConfig = toml::from_str(RUN).unwrap();
        assert_eq!(cfg.grid.length, 1.0);
        assert_eq!(cfg.solver.as_ref().unwrap().scheme, Scheme::EtdRk4);
        assert_eq!(cfg.criterion.as_ref().unwrap().q, 2.0);
        assert!(cfg.outputs.csv);
        cfg.validate_run().unwrap();
        let v = VerifySection::default();
        assert_eq!(v.samples, 100);
        assert_eq!(v.cases.len(), 5);
    }

    #[test]
    fn criterion_range_is_named() {
        let text = RUN.replace("p = 4.0", "p = 1.5");
        let cfg: RunConfig = toml::from_str(&text).unwrap();
        let err = cfg.validate_run().unwrap_err().to_string();
        assert!(err.contains("p ∈ [2,∞)"), "{err}");
    }

    #[test]
    fn dt_beyond_t_end_is_rejected() {
        let text = RUN.replace("dt = 0.01", "dt = 0.5");
        let cfg: RunConfig = toml::from_str(&text).unwrap();
        assert!(cfg.validate_run().is_err());
    }

    #[test]
    fn unknown_fields_are_reported_with_location() {
        let text = RUN.replace("n = 32", "n = 32\nsize = 3");
        let err = toml::from_str::<RunConfig>(&text).unwrap_err().to_string();
        assert!(err.contains("size") && err.contains("line"), "{err}");
    }
}
