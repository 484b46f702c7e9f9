//! The time loop shared by direct runs and Picard iterates.

use crate::error::{Result, SqgError};
use crate::field::SpectralField;
use crate::operators::{nonlinear_term, riesz_velocity};
use crate::solver::config::SolverConfig;
use crate::solver::etd::EtdStepper;
use crate::trajectory::{BlowupReason, RunStatus, StepDiagnostics, Trajectory};

/// `‖Λ^{γ/2}θ‖₂²` by Parseval.
pub fn dissipation_rate(theta: &SpectralField, gamma: f64) -> f64 {
    let g = theta.grid().clone();
    theta.weighted_power(|i| {
        if i == 0 {
            0.0
        } else {
            g.wavenumber(i).powf(gamma)
        }
    }) * g.measure()
}

/// Fraction of the (nonzero-mode) energy in the top octave of the
/// dealiased band, `K/2 < max(|k₁|, |k₂|) ≤ K`.
pub fn top_octave_fraction(theta: &SpectralField) -> f64 {
    let g = theta.grid().clone();
    let k = g.max_band_mode() as f64;
    let total = theta.weighted_power(|i| if i == 0 { 0.0 } else { 1.0 });
    if total == 0.0 {
        return 0.0;
    }
    let top = theta.weighted_power(|i| {
        let (a, b) = g.mode(i);
        let m = a.abs().max(b.abs()) as f64;
        if g.in_band(i) && m > 0.5 * k {
            1.0
        } else {
            0.0
        }
    });
    top / total
}

fn diagnostics(
    theta: &SpectralField,
    step: usize,
    time: f64,
    cfg: &SolverConfig,
) -> StepDiagnostics {
    let mut d = StepDiagnostics {
        step,
        time,
        energy: theta.energy(),
        dissipation: dissipation_rate(theta, cfg.gamma),
        ..Default::default()
    };
    if cfg.track_lp_norms {
        // Quadrature on a twice finer grid is exact for L⁴ of band-limited
        // fields.
        let fine = crate::grid::GridSpec::new(2 * theta.grid().n(), theta.grid().length())
            .with_dealias_fraction(1.0)
            .build()
            .expect("refined grid is valid");
        let f = theta.resample(&fine).0;
        d.l4 = f.lp_norm(4.0).ok();
        d.l8 = f.lp_norm(8.0).ok();
        d.linf = Some(theta.sup_norm());
    }
    d
}

fn cfl_number(theta: &SpectralField, dt: f64) -> f64 {
    let speed = riesz_velocity(&theta.dealiased()).to_physical().max_speed();
    speed * dt / theta.grid().spacing()
}

/// Integrate from `theta0` with `forcing(step, stage, state)` supplying the
/// explicit term at each Runge–Kutta stage.
pub(crate) fn integrate(
    theta0: &SpectralField,
    cfg: &SolverConfig,
    mut forcing: impl FnMut(usize, usize, &SpectralField) -> Result<SpectralField>,
) -> Result<Trajectory> {
    cfg.validate()?;
    if theta0.grid().spec() != cfg.grid {
        return Err(SqgError::GridMismatch);
    }
    theta0.check_hermitian()?;
    let grid = theta0.grid().clone();
    let steps = cfg.steps();
    let stepper = EtdStepper::new(&grid, cfg.gamma, cfg.dt, cfg.scheme);
    let last_dt = cfg.t_end - (steps - 1) as f64 * cfg.dt;
    let last = ((last_dt - cfg.dt).abs() > 1e-12 * cfg.dt)
        .then(|| EtdStepper::new(&grid, cfg.gamma, last_dt, cfg.scheme));

    let mut traj = Trajectory::empty();
    traj.push(0, 0.0, theta0.clone())?;
    traj.diagnostics.push(diagnostics(theta0, 0, 0.0, cfg));
    traj.max_cfl = cfl_number(theta0, cfg.dt);

    let mut theta = theta0.clone();
    for k in 0..steps {
        let t = cfg.time_at(k);
        let s = match (&last, k + 1 == steps) {
            (Some(l), true) => l,
            _ => &stepper,
        };
        let next = match s.step_with(&theta, |stage, state| forcing(k, stage, state)) {
            Ok(next) => next,
            Err(SqgError::Blowup { .. }) => {
                traj.status = RunStatus::BlowupFlagged {
                    time: t,
                    reason: BlowupReason::NonFinite,
                };
                return Ok(traj);
            }
            Err(e) => return Err(e),
        };
        let t_next = cfg.time_at(k + 1);
        theta = next;
        traj.diagnostics
            .push(diagnostics(&theta, k + 1, t_next, cfg));
        let fraction = top_octave_fraction(&theta);
        let flagged = fraction > cfg.pileup_threshold;
        if (k + 1) % cfg.snapshot_stride == 0 || k + 1 == steps || flagged {
            traj.max_cfl = traj.max_cfl.max(cfl_number(&theta, cfg.dt));
            traj.push(k + 1, t_next, theta.clone())?;
        }
        if flagged {
            traj.status = RunStatus::BlowupFlagged {
                time: t_next,
                reason: BlowupReason::SpectralPileup { fraction },
            };
            return Ok(traj);
        }
    }
    Ok(traj)
}

/// The transport forcing `N(θ) = −u·∇θ` (or zero for linear runs).
pub(crate) fn transport_forcing(
    cfg: &SolverConfig,
    state: &SpectralField,
) -> Result<SpectralField> {
    if cfg.nonlinear {
        Ok(-&nonlinear_term(state)?)
    } else {
        Ok(SpectralField::zeros(state.grid()))
    }
}

/// Advance one step of size `cfg.dt`. A non-finite result is reported as
/// [`SqgError::Blowup`] with `last_finite_time = 0` (the start of the
/// step).
pub fn step_etd(state: &SpectralField, cfg: &SolverConfig) -> Result<SpectralField> {
    cfg.validate()?;
    if state.grid().spec() != cfg.grid {
        return Err(SqgError::GridMismatch);
    }
    state.check_hermitian()?;
    let stepper = EtdStepper::new(state.grid(), cfg.gamma, cfg.dt, cfg.scheme);
    stepper.step_with(state, |_, s| transport_forcing(cfg, s))
}

/// Solve the initial value problem up to `cfg.t_end`.
///
/// Snapshots are stored every `snapshot_stride` steps and at the final
/// time. The run stops early, with [`RunStatus::BlowupFlagged`], when the
/// state becomes non-finite or the top-octave energy fraction exceeds
/// `cfg.pileup_threshold`.
pub fn run_simulation(theta0: &SpectralField, cfg: &SolverConfig) -> Result<Trajectory> {
    integrate(theta0, cfg, |_, _, s| transport_forcing(cfg, s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use crate::solver::etd::Scheme;
    use rustfft::num_complex::Complex64;

    #[test]
    fn zero_data_stays_zero() {
        let cfg = SolverConfig::new(GridSpec::new(16, 1.0), 0.5, 0.01, 0.1);
        let g = cfg.grid.build().unwrap();
        let t = run_simulation(&SpectralField::zeros(&g), &cfg).unwrap();
        assert_eq!(t.len(), 11);
        assert!(t.fields().all(|f| f.max_abs_coeff() == 0.0));
        assert!(t.status.is_completed());
    }

    #[test]
    fn single_mode_decays_exactly() {
        for scheme in [Scheme::EtdRk2, Scheme::EtdRk4] {
            let mut cfg = SolverConfig::new(GridSpec::new(16, 1.0), 0.5, 0.01, 0.2);
            cfg.scheme = scheme;
            let g = cfg.grid.build().unwrap();
            let s = SpectralField::mode(&g, 1, 0, Complex64::new(0.0, -0.5)).unwrap();
            let mut th = s.clone();
            for m in 1..=5 {
                th = step_etd(&th, &cfg).unwrap();
                let expect = s.scaled((-(m as f64) * 0.01).exp());
                assert!(th.max_coeff_diff(&expect).unwrap() < 1e-15);
            }
        }
    }

    #[test]
    fn snapshots_follow_stride_and_final_time() {
        let mut cfg = SolverConfig::new(GridSpec::new(16, 1.0), 1.0, 0.03, 0.1);
        cfg.snapshot_stride = 2;
        let g = cfg.grid.build().unwrap();
        let f = SpectralField::from_fn(&g, |x, y| (x + y).sin());
        let t = run_simulation(&f, &cfg).unwrap();
        assert_eq!(cfg.steps(), 4);
        let times = t.times();
        assert_eq!(times.len(), 3);
        assert!((times[1] - 0.06).abs() < 1e-15);
        assert_eq!(times[2], 0.1);
        assert_eq!(t.diagnostics.len(), 5);
    }

    #[test]
    fn pileup_is_flagged() {
        let cfg = SolverConfig::new(GridSpec::new(16, 1.0), 1.0, 0.001, 0.01);
        let g = cfg.grid.build().unwrap();
        let f = SpectralField::mode(&g, 5, 0, Complex64::new(1.0, 0.0)).unwrap();
        assert!(top_octave_fraction(&f) > 0.99);
        let t = run_simulation(&f, &cfg).unwrap();
        assert!(matches!(
            t.status,
            RunStatus::BlowupFlagged {
                reason: BlowupReason::SpectralPileup { .. },
                ..
            }
        ));
        assert_eq!(t.len(), 2);
    }
}
