//! Numerical checks of the Bernstein-type inequalities, the commutator
//! estimate and the product estimate.

use std::collections::BTreeMap;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Result, SqgError};
use crate::field::{check_exponent, lp_norm_samples, SpectralField};
use crate::grid::{Grid, GridSpec};
use crate::lp::decomposition::DyadicDecomposition;
use crate::lp::norms::{
    lq_norm, mixed_norm_from_profiles, time_lr_norm, BesovParams, MixedNormParams,
};
use crate::lp::report::{
    uniform_in_j, JRow, LemmaReport, RatioStats, Verdict, VerdictStatus, UNIFORMITY_FACTOR,
};
use crate::operators::{advection, lambda_power, riesz_velocity, PhysicalVelocity, Velocity};
use crate::trajectory::Trajectory;

/// Blocks whose `L^p` norm is below this fraction of the sample's norm
/// are treated as empty.
const DEGENERATE_BLOCK: f64 = 1e-12;

/// Tolerance on the divergence of advecting velocities.
pub const DIVERGENCE_TOL: f64 = 1e-10;

fn relation_rows(stats: &BTreeMap<i32, RatioStats>, relation: &str) -> Vec<JRow> {
    stats.iter().map(|(j, s)| s.row(*j, relation)).collect()
}

fn extremes(stats: &BTreeMap<i32, RatioStats>) -> (f64, f64) {
    stats
        .values()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| {
            (lo.min(s.min()), hi.max(s.max()))
        })
}

fn mean_ratios(stats: &BTreeMap<i32, RatioStats>) -> Vec<f64> {
    relation_rows(stats, "").iter().map(|r| r.ratio).collect()
}

fn merge(into: &mut BTreeMap<i32, RatioStats>, j: i32, lhs: f64, rhs: f64) {
    into.entry(j).or_default().push(lhs, rhs);
}

fn uniformity_verdict(checks: &[(&str, &BTreeMap<i32, RatioStats>)]) -> Verdict {
    let failures: Vec<String> = checks
        .iter()
        .filter_map(|(name, stats)| {
            uniform_in_j(&mean_ratios(stats), UNIFORMITY_FACTOR)
                .err()
                .map(|e| format!("{name}: {e}"))
        })
        .collect();
    if failures.is_empty() {
        Verdict {
            status: VerdictStatus::Bounded,
            tolerance: UNIFORMITY_FACTOR,
            detail: "ratios finite, positive and uniform in j".into(),
        }
    } else {
        Verdict {
            status: VerdictStatus::Violated,
            tolerance: UNIFORMITY_FACTOR,
            detail: failures.join("; "),
        }
    }
}

/// Per-sample, per-block `(j, lhs, rhs)` triples of one or more relations.
type SampleRows = Vec<Vec<(i32, f64, f64)>>;

fn nonzero_blocks(
    decomp: &DyadicDecomposition,
    v: &SpectralField,
    p: f64,
) -> Vec<(i32, SpectralField, f64)> {
    let area = decomp.grid().cell_area();
    let total = lp_norm_samples(&v.to_physical(), p, area);
    decomp
        .j_range()
        .filter_map(|j| {
            let b = decomp.block(v, j);
            let n = lp_norm_samples(&b.to_physical(), p, area);
            (n > DEGENERATE_BLOCK * total && n > 0.0).then_some((j, b, n))
        })
        .collect()
}

/// Bernstein inequalities: for each nonzero block of each sample,
/// `‖Λ^s Δ_j v‖_p / (2^{js}‖Δ_j v‖_p)` ("derivative") and
/// `‖Δ_j v‖_{q_out} / (2^{2j(1/p − 1/q_out)}‖Δ_j v‖_p)` ("integrability").
pub fn verify_bernstein(
    decomp: &DyadicDecomposition,
    p: f64,
    q_out: f64,
    s: f64,
    samples: &[SpectralField],
) -> Result<LemmaReport> {
    check_exponent(p)?;
    check_exponent(q_out)?;
    if q_out < p {
        return Err(SqgError::Domain(format!(
            "integrability exponent q_out = {q_out} must be at least p = {p}"
        )));
    }
    let area = decomp.grid().cell_area();
    let gain = 1.0 / p - 1.0 / q_out;
    let per_sample: Vec<(SampleRows, usize)> = samples
        .par_iter()
        .map(|v| {
            let blocks = nonzero_blocks(decomp, v, p);
            let skipped = decomp.j_range().count() - blocks.len();
            let mut deriv = Vec::new();
            let mut integ = Vec::new();
            for (j, b, norm_p) in blocks {
                let lhs = lp_norm_samples(&lambda_power(&b, s).to_physical(), p, area);
                deriv.push((j, lhs, 2f64.powf(j as f64 * s) * norm_p));
                let lhs = lp_norm_samples(&b.to_physical(), q_out, area);
                integ.push((j, lhs, 2f64.powf(2.0 * gain * j as f64) * norm_p));
            }
            (vec![deriv, integ], skipped)
        })
        .collect();

    let mut deriv = BTreeMap::new();
    let mut integ = BTreeMap::new();
    let mut skipped = 0;
    for (rows, sk) in per_sample {
        skipped += sk;
        for &(j, l, r) in &rows[0] {
            merge(&mut deriv, j, l, r);
        }
        for &(j, l, r) in &rows[1] {
            merge(&mut integ, j, l, r);
        }
    }
    let (d_lo, d_hi) = extremes(&deriv);
    let (i_lo, i_hi) = extremes(&integ);
    let constants = BTreeMap::from([
        ("lambda".to_string(), d_lo),
        ("lambda_prime".to_string(), d_hi),
        ("band_derivative".to_string(), d_hi / d_lo),
        ("C".to_string(), i_hi),
        ("integrability_min".to_string(), i_lo),
        ("band_integrability".to_string(), i_hi / i_lo),
        ("skipped_blocks".to_string(), skipped as f64),
    ]);
    let verdict = uniformity_verdict(&[("derivative", &deriv), ("integrability", &integ)]);
    let mut per_j = relation_rows(&deriv, "derivative");
    per_j.extend(relation_rows(&integ, "integrability"));
    Ok(LemmaReport {
        lemma_id: "bernstein".into(),
        params: json!({
            "p": p, "q_out": q_out, "s": s, "samples": samples.len(),
            "mollifier": decomp.mollifier().description(),
        }),
        per_j,
        constants,
        verdict,
    })
}

/// A refined grid with the same period used for quadrature of nonlinear
/// expressions in the samples.
fn oversampled_grid(grid: &Grid, factor: usize) -> Result<Arc<Grid>> {
    GridSpec::new(grid.n() * factor, grid.length())
        .with_dealias_fraction(1.0)
        .build()
}

/// `sign(v)|v|^a`.
fn signed_power(values: &[f64], a: f64) -> Vec<f64> {
    values
        .iter()
        .map(|v| v.signum() * v.abs().powf(a))
        .collect()
}

fn abs_power(values: &[f64], a: f64) -> Vec<f64> {
    values.iter().map(|v| v.abs().powf(a)).collect()
}

/// `‖Λ^{γ/2} w‖₂` for physical samples `w` on `grid`.
fn lambda_half_l2(grid: &Arc<Grid>, values: &[f64], gamma: f64) -> f64 {
    lambda_power(&SpectralField::from_physical(grid, values), 0.5 * gamma).l2_norm()
}

/// `∫ (Λ^γ v) |v|^{p−2} v dx` by quadrature on the field's grid.
fn dissipation_integral(v: &SpectralField, gamma: f64, p: f64) -> f64 {
    let area = v.grid().cell_area();
    let lv = lambda_power(v, gamma).to_physical();
    let w = signed_power(&v.to_physical(), p - 1.0);
    area * lv.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>()
}

/// Generalized Bernstein inequality and the fractional lower bounds.
///
/// Per block (`Δ_j v = b`): "block_lower" compares
/// `‖Λ^{γ/2}(|b|^{p/2})‖₂^{2/p}` with `2^{γj/p}‖b‖_p`, and
/// "block_dissipation" compares `∫(Λ^γ b)|b|^{p−2}b` with `2^{γj}‖b‖_p^p`.
/// On each whole sample, `∫(Λ^γ v)|v|^{p−2}v` is compared with
/// `‖Λ^{γ/2}(|v|^{p/2−1}v)‖₂²` (reduces to Parseval at `p = 2`) and with
/// `‖Λ^{γ/2}|v|^{p/2}‖₂²`. Nonlinear expressions are evaluated on a grid
/// refined by `oversample`.
pub fn verify_generalized_bernstein(
    decomp: &DyadicDecomposition,
    p: f64,
    gamma: f64,
    samples: &[SpectralField],
    oversample: usize,
) -> Result<LemmaReport> {
    if !(p.is_finite() && p >= 2.0) {
        return Err(SqgError::Domain(format!("p must lie in [2, ∞), got {p}")));
    }
    if !(0.0..=2.0).contains(&gamma) {
        return Err(SqgError::Domain(format!(
            "gamma must lie in [0, 2], got {gamma}"
        )));
    }
    if oversample == 0 {
        return Err(SqgError::Domain(
            "oversampling factor must be at least 1".into(),
        ));
    }
    let fine = oversampled_grid(decomp.grid(), oversample)?;
    let area = fine.cell_area();
    let per_sample: Vec<(SampleRows, [f64; 2])> = samples
        .par_iter()
        .map(|v| {
            let mut lower = Vec::new();
            let mut diss = Vec::new();
            for (j, b, _) in nonzero_blocks(decomp, v, p) {
                let bf = b.resample(&fine).0;
                let vals = bf.to_physical();
                let norm_p = lp_norm_samples(&vals, p, area);
                let lhs = lambda_half_l2(&fine, &abs_power(&vals, 0.5 * p), gamma).powf(2.0 / p);
                lower.push((j, lhs, 2f64.powf(gamma * j as f64 / p) * norm_p));
                let lhs = dissipation_integral(&bf, gamma, p);
                diss.push((j, lhs, 2f64.powf(gamma * j as f64) * norm_p.powf(p)));
            }
            let vf = v.resample(&fine).0;
            let vals = vf.to_physical();
            let full = dissipation_integral(&vf, gamma, p);
            let signed = lambda_half_l2(&fine, &signed_power(&vals, 0.5 * p), gamma).powi(2);
            let modulus = lambda_half_l2(&fine, &abs_power(&vals, 0.5 * p), gamma).powi(2);
            (vec![lower, diss], [full / signed, full / modulus])
        })
        .collect();

    let mut lower = BTreeMap::new();
    let mut diss = BTreeMap::new();
    let mut full_signed = Vec::new();
    let mut full_modulus = Vec::new();
    for (rows, [fs, fm]) in per_sample {
        for &(j, l, r) in &rows[0] {
            merge(&mut lower, j, l, r);
        }
        for &(j, l, r) in &rows[1] {
            merge(&mut diss, j, l, r);
        }
        full_signed.push(fs);
        full_modulus.push(fm);
    }
    let (l_lo, l_hi) = extremes(&lower);
    let (d_lo, d_hi) = extremes(&diss);
    let min = |v: &[f64]| v.iter().copied().fold(f64::INFINITY, f64::min);
    let max = |v: &[f64]| v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let constants = BTreeMap::from([
        ("lambda".to_string(), l_lo),
        ("lambda_prime".to_string(), l_hi),
        ("band_block_lower".to_string(), l_hi / l_lo),
        ("c_block".to_string(), d_lo),
        ("block_dissipation_max".to_string(), d_hi),
        ("c_full".to_string(), min(&full_signed)),
        ("full_ratio_max".to_string(), max(&full_signed)),
        ("c_full_modulus".to_string(), min(&full_modulus)),
        ("full_modulus_ratio_max".to_string(), max(&full_modulus)),
    ]);
    let mut verdict = uniformity_verdict(&[("block_lower", &lower), ("block_dissipation", &diss)]);
    if verdict.is_pass()
        && !full_signed
            .iter()
            .chain(&full_modulus)
            .all(|r| r.is_finite() && *r > 0.0)
    {
        verdict = Verdict {
            status: VerdictStatus::Violated,
            tolerance: UNIFORMITY_FACTOR,
            detail: "whole-field dissipation ratio not finite and positive".into(),
        };
    }
    let mut per_j = relation_rows(&lower, "block_lower");
    per_j.extend(relation_rows(&diss, "block_dissipation"));
    Ok(LemmaReport {
        lemma_id: "generalized_bernstein".into(),
        params: json!({
            "p": p, "gamma": gamma, "samples": samples.len(), "oversample": oversample,
            "mollifier": decomp.mollifier().description(),
        }),
        per_j,
        constants,
        verdict,
    })
}

fn ensure_divergence_free(u: &Velocity) -> Result<()> {
    let d = u.divergence_defect();
    if d > DIVERGENCE_TOL {
        return Err(SqgError::Precondition(format!(
            "velocity is not divergence-free (relative defect {d:.3e})"
        )));
    }
    Ok(())
}

/// `[u, Δ_j]·∇v = u·Δ_j(∇v) − Δ_j(u·∇v)`, with both products dealiased as
/// in the transport term.
pub fn commutator(
    u: &Velocity,
    v: &SpectralField,
    j: i32,
    decomp: &DyadicDecomposition,
) -> Result<SpectralField> {
    ensure_divergence_free(u)?;
    v.ensure_same_grid(&u.u1)?;
    let up = u_dealiased(u).to_physical();
    let transport = advection(&up, v)?;
    commutator_with(&up, &transport, v, j, decomp)
}

fn u_dealiased(u: &Velocity) -> Velocity {
    Velocity {
        u1: u.u1.dealiased(),
        u2: u.u2.dealiased(),
    }
}

fn commutator_with(
    up: &PhysicalVelocity,
    transport: &SpectralField,
    v: &SpectralField,
    j: i32,
    decomp: &DyadicDecomposition,
) -> Result<SpectralField> {
    let first = advection(up, &decomp.block(v, j))?;
    Ok(&first - &decomp.block(transport, j))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CommutatorParams {
    pub rho1: f64,
    pub rho2: f64,
    pub r1: f64,
    pub r2: f64,
    pub p: f64,
    pub q: f64,
}

impl CommutatorParams {
    /// `1/r = 1/r₁ + 1/r₂`.
    pub fn r(&self) -> f64 {
        1.0 / (1.0 / self.r1 + 1.0 / self.r2)
    }

    pub fn validate(&self) -> Result<()> {
        check_exponent(self.p)?;
        check_exponent(self.q)?;
        check_exponent(self.r1)?;
        check_exponent(self.r2)?;
        let two_p = 2.0 / self.p;
        let mut failed = Vec::new();
        if !(self.rho1 < 1.0) {
            failed.push(format!("rho1 < 1 (rho1 = {})", self.rho1));
        }
        if !(self.rho2 < 1.0) {
            failed.push(format!("rho2 < 1 (rho2 = {})", self.rho2));
        }
        if !(self.rho1 + self.rho2 + 2.0 * two_p.min(1.0) > 0.0) {
            failed.push("rho1 + rho2 + 2 min(1, 2/p) > 0".into());
        }
        if !(self.rho1 + two_p > 0.0) {
            failed.push("rho1 + 2/p > 0".into());
        }
        if !(1.0 / self.r1 + 1.0 / self.r2 <= 1.0 + 1e-12) {
            failed.push("1/r1 + 1/r2 <= 1".into());
        }
        if failed.is_empty() {
            Ok(())
        } else {
            Err(SqgError::Domain(format!(
                "commutator estimate requires {}",
                failed.join(", ")
            )))
        }
    }
}

fn ensure_same_times(a: &Trajectory, b: &Trajectory) -> Result<()> {
    if a.len() != b.len() || a.times().iter().zip(b.times()).any(|(x, y)| *x != y) {
        return Err(SqgError::Domain(
            "trajectories must share their time stamps".into(),
        ));
    }
    if a.len() < 2 {
        return Err(SqgError::InsufficientData(format!(
            "mixed norms need at least 2 snapshots, got {}",
            a.len()
        )));
    }
    Ok(())
}

/// Commutator estimate with `u` the Riesz velocity of `traj_u`:
/// `c_j = ‖[u,Δ_j]·∇v‖_{L^r_t L^p} · 2^{j(2/p+ρ₁+ρ₂−1)} /
/// (‖∇u‖_{L̃^{r₁}Ḃ^{2/p+ρ₁−1}_{p,q}} ‖∇v‖_{L̃^{r₂}Ḃ^{2/p+ρ₂−1}_{p,q}})`.
pub fn verify_commutator_estimate(
    params: &CommutatorParams,
    traj_u: &Trajectory,
    traj_v: &Trajectory,
    decomp: &DyadicDecomposition,
) -> Result<LemmaReport> {
    params.validate()?;
    ensure_same_times(traj_u, traj_v)?;
    let p = params.p;
    let js: Vec<i32> = decomp.j_range().collect();
    type Snap = (
        crate::lp::norms::BlockProfile,
        crate::lp::norms::BlockProfile,
        Vec<f64>,
    );
    let per_time: Vec<Snap> = traj_u
        .snapshots()
        .par_iter()
        .zip(traj_v.snapshots().par_iter())
        .map(|(su, sv)| -> Result<Snap> {
            let u = u_dealiased(&riesz_velocity(&su.field));
            ensure_divergence_free(&u)?;
            let v = &sv.field;
            let grad_u = decomp.profile_vector(&u.gradient_components(), p)?;
            let [a, b] = crate::operators::gradient(v);
            let grad_v = decomp.profile_vector(&[a, b], p)?;
            let up = u.to_physical();
            let transport = advection(&up, v)?;
            let area = decomp.grid().cell_area();
            let comm = js
                .iter()
                .map(|&j| {
                    commutator_with(&up, &transport, v, j, decomp)
                        .map(|c| lp_norm_samples(&c.to_physical(), p, area))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok((grad_u, grad_v, comm))
        })
        .collect::<Result<_>>()?;

    let times = traj_u.times();
    let gu: Vec<_> = per_time.iter().map(|s| s.0.clone()).collect();
    let gv: Vec<_> = per_time.iter().map(|s| s.1.clone()).collect();
    let two_p = 2.0 / p;
    let nu = mixed_norm_from_profiles(
        &times,
        &gu,
        &MixedNormParams::chemin(
            params.r1,
            BesovParams::homogeneous(two_p + params.rho1 - 1.0, p, params.q),
        ),
    )?;
    let nv = mixed_norm_from_profiles(
        &times,
        &gv,
        &MixedNormParams::chemin(
            params.r2,
            BesovParams::homogeneous(two_p + params.rho2 - 1.0, p, params.q),
        ),
    )?;
    let r = params.r();
    let sigma = two_p + params.rho1 + params.rho2 - 1.0;
    let mut per_j = Vec::new();
    let mut cj = Vec::new();
    for (k, &j) in js.iter().enumerate() {
        let series: Vec<f64> = per_time.iter().map(|s| s.2[k]).collect();
        let lhs = time_lr_norm(&times, &series, r)?;
        let rhs = 2f64.powf(-sigma * j as f64) * nu * nv;
        let ratio = if lhs == 0.0 { 0.0 } else { lhs / rhs };
        cj.push(ratio);
        per_j.push(JRow {
            j,
            relation: None,
            lhs,
            rhs,
            ratio,
            ratio_min: None,
            ratio_max: None,
            samples: times.len(),
        });
    }
    let norm = lq_norm(cj.iter().copied(), params.q);
    let active = cj.iter().filter(|c| **c > 1e-14 * norm).count();
    let constants = BTreeMap::from([
        ("cj_lq_norm".to_string(), norm),
        ("cj_max".to_string(), cj.iter().copied().fold(0.0, f64::max)),
        ("active_blocks".to_string(), active as f64),
        ("grad_u_norm".to_string(), nu),
        ("grad_v_norm".to_string(), nv),
        ("r".to_string(), r),
    ]);
    let verdict = if norm.is_finite() {
        Verdict {
            status: VerdictStatus::Bounded,
            tolerance: f64::INFINITY,
            detail: format!("l^q norm of c_j = {norm:.6e}"),
        }
    } else {
        Verdict {
            status: VerdictStatus::Violated,
            tolerance: f64::INFINITY,
            detail: "l^q norm of c_j is not finite".into(),
        }
    };
    Ok(LemmaReport {
        lemma_id: "commutator".into(),
        params: json!({
            "rho1": params.rho1, "rho2": params.rho2, "r1": params.r1, "r2": params.r2,
            "p": params.p, "q": params.q, "snapshots": times.len(),
        }),
        per_j,
        constants,
        verdict,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProductParams {
    pub s: f64,
    pub s1: f64,
    pub p: f64,
    pub q: f64,
    pub r: f64,
    pub r1: f64,
    pub r2: f64,
}

impl ProductParams {
    pub fn validate(&self) -> Result<()> {
        check_exponent(self.q)?;
        check_exponent(self.r)?;
        check_exponent(self.r1)?;
        check_exponent(self.r2)?;
        let mut failed = Vec::new();
        if !(self.p >= 2.0) {
            failed.push(format!("p >= 2 (p = {})", self.p));
        }
        let two_p = 2.0 / self.p;
        if !(self.s > -two_p - 1.0) {
            failed.push("s > -2/p - 1".into());
        }
        if !(self.s <= self.s1 && self.s1 <= two_p) {
            failed.push("s <= s1 <= 2/p".into());
        }
        let endpoint = (self.s1 - two_p).abs() < 1e-12 || (self.s1 - self.s).abs() < 1e-12;
        if endpoint && self.q != 1.0 {
            failed.push("q = 1 when s1 = 2/p or s1 = s".into());
        }
        let inv = 1.0 / self.r1 + 1.0 / self.r2;
        if (1.0 / self.r - inv).abs() > 1e-12 || inv > 1.0 + 1e-12 {
            failed.push("1/r = 1/r1 + 1/r2 <= 1".into());
        }
        if failed.is_empty() {
            Ok(())
        } else {
            Err(SqgError::Domain(format!(
                "product estimate requires {}",
                failed.join(", ")
            )))
        }
    }
}

/// Product estimate with `u` the Riesz velocity of `traj_u`: compares
/// `‖u·∇v‖_{L̃^r Ḃ^s_{p,q}}` with
/// `‖u‖_{L̃^{r₁}Ḃ^{s₁}_{p,q}} ‖∇v‖_{L̃^{r₂}Ḃ^{s+2/p−s₁}_{p,q}}`.
/// Rows hold the per-block contributions `2^{js}‖Δ_j(u·∇v)‖_{L^r_t L^p}`
/// against the full right side.
pub fn verify_product_estimate(
    params: &ProductParams,
    traj_u: &Trajectory,
    traj_v: &Trajectory,
    decomp: &DyadicDecomposition,
) -> Result<LemmaReport> {
    params.validate()?;
    ensure_same_times(traj_u, traj_v)?;
    let p = params.p;
    type Snap = (
        crate::lp::norms::BlockProfile,
        crate::lp::norms::BlockProfile,
        crate::lp::norms::BlockProfile,
    );
    let per_time: Vec<Snap> = traj_u
        .snapshots()
        .par_iter()
        .zip(traj_v.snapshots().par_iter())
        .map(|(su, sv)| -> Result<Snap> {
            let u = u_dealiased(&riesz_velocity(&su.field));
            let prod = advection(&u.to_physical(), &sv.field)?;
            let [a, b] = crate::operators::gradient(&sv.field);
            Ok((
                decomp.profile(&prod, p)?,
                decomp.profile_vector(&[u.u1.clone(), u.u2.clone()], p)?,
                decomp.profile_vector(&[a, b], p)?,
            ))
        })
        .collect::<Result<_>>()?;
    let times = traj_u.times();
    let col = |k: usize| -> Vec<_> {
        per_time
            .iter()
            .map(|s| match k {
                0 => s.0.clone(),
                1 => s.1.clone(),
                _ => s.2.clone(),
            })
            .collect()
    };
    let (prod, us, gv) = (col(0), col(1), col(2));
    let hom = |s| BesovParams::homogeneous(s, p, params.q);
    let lhs = mixed_norm_from_profiles(
        &times,
        &prod,
        &MixedNormParams::chemin(params.r, hom(params.s)),
    )?;
    let nu = mixed_norm_from_profiles(
        &times,
        &us,
        &MixedNormParams::chemin(params.r1, hom(params.s1)),
    )?;
    let nv = mixed_norm_from_profiles(
        &times,
        &gv,
        &MixedNormParams::chemin(params.r2, hom(params.s + 2.0 / p - params.s1)),
    )?;
    let rhs = nu * nv;
    let ratio_of = |l: f64| if l == 0.0 { 0.0 } else { l / rhs };
    let mut per_j = Vec::new();
    for j in decomp.j_range() {
        let series: Vec<f64> = prod.iter().map(|pr| pr.block(j)).collect();
        let l = 2f64.powf(params.s * j as f64) * time_lr_norm(&times, &series, params.r)?;
        per_j.push(JRow {
            j,
            relation: None,
            lhs: l,
            rhs,
            ratio: ratio_of(l),
            ratio_min: None,
            ratio_max: None,
            samples: times.len(),
        });
    }
    let ratio = ratio_of(lhs);
    let constants = BTreeMap::from([
        ("lhs".to_string(), lhs),
        ("rhs".to_string(), rhs),
        ("ratio".to_string(), ratio),
        ("u_norm".to_string(), nu),
        ("grad_v_norm".to_string(), nv),
    ]);
    let verdict = if ratio.is_finite() {
        Verdict {
            status: VerdictStatus::Bounded,
            tolerance: f64::INFINITY,
            detail: format!("lhs / rhs = {ratio:.6e}"),
        }
    } else {
        Verdict {
            status: VerdictStatus::Violated,
            tolerance: f64::INFINITY,
            detail: "lhs / rhs is not finite".into(),
        }
    };
    Ok(LemmaReport {
        lemma_id: "product".into(),
        params: serde_json::to_value(params).expect("params serialize"),
        per_j,
        constants,
        verdict,
    })
}
