//! `sqg simulate`: run, monitor, checkpoint.

use anyhow::Result;
use serde::Serialize;
use sqg_core::checkpoint::Checkpoint;
use sqg_core::diagnostics::{blowup_proxy_fit, regularity_monitor, CriterionParams, MonitorSeries};
use sqg_core::lp::DyadicDecomposition;
use sqg_core::solver::{make_initial_data, run_simulation};
use sqg_core::RunStatus;

use crate::config::RunConfig;
use crate::manifest::{OutputDir, TerminationStatus};

#[derive(Serialize)]
struct MonitorRow {
    time: f64,
    besov_alpha: f64,
    running_integral: f64,
}

fn monitor_rows(series: &MonitorSeries) -> impl Iterator<Item = MonitorRow> + '_ {
    series
        .times
        .iter()
        .zip(&series.besov_alpha_values)
        .zip(&series.running_integral)
        .map(|((&time, &besov_alpha), &running_integral)| MonitorRow {
            time,
            besov_alpha,
            running_integral,
        })
}

#[derive(Serialize)]
struct Summary<'a> {
    status: &'a RunStatus,
    final_time: f64,
    steps: usize,
    snapshots: usize,
    alpha: f64,
    max_cfl: f64,
    cfl_limit: f64,
    cfl_exceeded: bool,
    monitor: &'a MonitorSeries,
}

pub fn checkpoint_name(step: usize) -> String {
    format!("checkpoint_{step:08}.sqgf")
}

pub const FINAL_CHECKPOINT: &str = "final.sqgf";

pub fn run(config: &RunConfig, out: &mut OutputDir) -> Result<TerminationStatus> {
    config.validate_run()?;
    let cfg = config.solver_config()?;
    let crit = config.criterion()?;
    let grid = cfg.grid.build()?;
    let decomp = DyadicDecomposition::new(&grid);
    let theta0 = make_initial_data(config.initial_data()?, &grid)?;
    let params = CriterionParams::new(crit.p, crit.r0, cfg.gamma)?;

    let traj = run_simulation(&theta0, &cfg)?;
    if traj.max_cfl > cfg.cfl_limit {
        eprintln!(
            "warning: CFL number {:.3} exceeds the advisory limit {}",
            traj.max_cfl, cfg.cfl_limit
        );
    }

    let stride = config.outputs.checkpoint_stride;
    if stride > 0 {
        for s in traj.snapshots().iter().filter(|s| s.step % stride == 0) {
            let bytes = Checkpoint::from_field(&s.field, cfg.gamma, s.time).encode();
            out.write(&checkpoint_name(s.step), &bytes)?;
        }
    }
    let last = traj.last().expect("trajectory holds the initial state");
    out.write(
        FINAL_CHECKPOINT,
        &Checkpoint::from_field(&last.field, cfg.gamma, last.time).encode(),
    )?;

    let mut monitor = if traj.len() >= 2 {
        Some(regularity_monitor(&traj, &params, &decomp)?)
    } else {
        None
    };
    if let (Some(series), RunStatus::BlowupFlagged { time, .. }) = (monitor.as_mut(), traj.status) {
        // Fit against the flagged time pushed by one step.
        series.blowup_fit = blowup_proxy_fit(series, &params, time + cfg.dt).ok();
    }

    if config.outputs.csv {
        out.write_csv("diagnostics.csv", &traj.diagnostics)?;
        if let Some(series) = &monitor {
            out.write_csv("monitor.csv", monitor_rows(series))?;
        }
    }
    if let Some(series) = &monitor {
        out.write_json(
            "summary.json",
            &Summary {
                status: &traj.status,
                final_time: last.time,
                steps: last.step,
                snapshots: traj.len(),
                alpha: params.alpha,
                max_cfl: traj.max_cfl,
                cfl_limit: cfg.cfl_limit,
                cfl_exceeded: traj.max_cfl > cfg.cfl_limit,
                monitor: series,
            },
        )?;
        if let Some(fit) = &series.blowup_fit {
            out.write_json("blowup_fit.json", fit)?;
        }
    }

    Ok(match traj.status {
        RunStatus::Completed => {
            println!("completed at t = {} after {} steps", last.time, last.step);
            TerminationStatus::Completed
        }
        RunStatus::BlowupFlagged { time, reason } => {
            println!("blowup flagged at t = {time}: {reason:?}");
            TerminationStatus::BlowupFlagged
        }
    })
}
