//! `sqg picard`: successive approximations with per-iterate differences.

use anyhow::Result;
use serde::Serialize;
use sqg_core::diagnostics::CriterionParams;
use sqg_core::lp::DyadicDecomposition;
use sqg_core::solver::{existence_time_estimate, make_initial_data, picard_iterate, PicardStatus};

use crate::config::RunConfig;
use crate::manifest::{OutputDir, TerminationStatus};

#[derive(Serialize)]
struct Row {
    k: usize,
    diff_norm: f64,
    ratio: Option<f64>,
}

#[derive(Serialize)]
struct Verdict {
    status: PicardStatus,
    t_end: f64,
    dt: f64,
    c_cal: Option<f64>,
    k_max: usize,
    differences: Vec<f64>,
    contraction_ratios: Vec<f64>,
    median_ratio: Option<f64>,
    contracts: bool,
}

pub fn run(
    config: &RunConfig,
    k_max: Option<usize>,
    out: &mut OutputDir,
) -> Result<TerminationStatus> {
    config.validate_run()?;
    let mut cfg = config.solver_config()?;
    let crit = config.criterion()?;
    let grid = cfg.grid.build()?;
    let decomp = DyadicDecomposition::new(&grid);
    let theta0 = make_initial_data(config.initial_data()?, &grid)?;
    let params = CriterionParams::new(crit.p, crit.r0, cfg.gamma)?;
    let section = config.picard.clone();
    let k_max = k_max.or(section.as_ref().map(|s| s.k_max)).unwrap_or(8);
    let c_cal = section.as_ref().and_then(|s| s.c_cal);

    if let Some(c) = c_cal {
        let t = existence_time_estimate(&theta0, crit.p, crit.q, crit.r0, cfg.gamma, c, &decomp)?;
        if !t.is_finite() {
            anyhow::bail!("zero initial data has no finite existence time");
        }
        let steps = section
            .and_then(|s| s.steps)
            .unwrap_or_else(|| (t / cfg.dt).ceil().max(1.0) as usize);
        cfg.t_end = t;
        cfg.dt = t / steps as f64;
    }

    let run = picard_iterate(&theta0, &cfg, k_max, &params, crit.q, &decomp)?;
    let diffs = run.differences();
    let rows = diffs.iter().enumerate().map(|(i, &d)| Row {
        k: i + 1,
        diff_norm: d,
        ratio: (i > 0).then(|| d / diffs[i - 1]),
    });
    if config.outputs.csv {
        out.write_csv("picard.csv", rows)?;
    }
    let contracts = run.contracts();
    out.write_json(
        "picard.json",
        &Verdict {
            status: run.status,
            t_end: cfg.t_end,
            dt: cfg.dt,
            c_cal,
            k_max,
            differences: diffs.clone(),
            contraction_ratios: run.contraction_ratios(),
            median_ratio: run.median_ratio(),
            contracts,
        },
    )?;
    println!(
        "picard: {:?}, T = {}, median contraction ratio {:?}",
        run.status,
        cfg.t_end,
        run.median_ratio()
    );
    Ok(if contracts {
        TerminationStatus::Completed
    } else {
        TerminationStatus::NoContraction
    })
}
