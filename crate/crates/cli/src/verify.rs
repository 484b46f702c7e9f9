//! `sqg verify <suite>`: the harmonic-analysis checks as JSON reports.

use anyhow::{Context, Result};
use clap::ValueEnum;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sqg_core::lp::{
    random_block_field, scaling_transform, verify_bernstein, verify_commutator_estimate,
    verify_generalized_bernstein, verify_partition, verify_product_estimate, verify_scaling,
    DyadicDecomposition, LemmaReport,
};
use sqg_core::solver::{make_initial_data, run_simulation};
use sqg_core::SpectralField;

use crate::config::{RunConfig, VerifySection};
use crate::manifest::{OutputDir, TerminationStatus};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Bernstein,
    #[value(name = "gen_bernstein", alias = "gen-bernstein")]
    GenBernstein,
    Commutator,
    Product,
    Partition,
    Scaling,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Bernstein => "bernstein",
            Suite::GenBernstein => "gen_bernstein",
            Suite::Commutator => "commutator",
            Suite::Product => "product",
            Suite::Partition => "partition",
            Suite::Scaling => "scaling",
        }
    }
}

/// `samples` random single-block fields for every `j` in `[j_lo, j_hi]`.
fn block_samples(decomp: &DyadicDecomposition, v: &VerifySection) -> Vec<SpectralField> {
    let mut rng = ChaCha8Rng::seed_from_u64(v.seed);
    let mut out = Vec::new();
    for j in v.j_lo..=v.j_hi {
        out.extend((0..v.samples).map(|_| random_block_field(decomp, j, &mut rng)));
    }
    out
}

fn scaling_cases(
    decomp: &DyadicDecomposition,
    v: &VerifySection,
) -> Result<Vec<(SpectralField, i32, i32)>> {
    let mut rng = ChaCha8Rng::seed_from_u64(v.seed);
    v.cases
        .iter()
        .map(|&(j, m)| {
            // Downward shifts need modes on the coarser sublattice.
            let f = if m < 0 {
                let coarse = random_block_field(decomp, j + m, &mut rng);
                scaling_transform(&coarse, -m, 1.0)?.field
            } else {
                random_block_field(decomp, j, &mut rng)
            };
            Ok((f, j, m))
        })
        .collect()
}

fn report(suite: Suite, config: &RunConfig) -> Result<LemmaReport> {
    let grid = config.grid_spec()?.build()?;
    let decomp = DyadicDecomposition::new(&grid);
    let v = config.verify.clone().unwrap_or_default();
    Ok(match suite {
        Suite::Partition => verify_partition(&decomp, v.tolerance),
        Suite::Bernstein => {
            verify_bernstein(&decomp, v.p, v.q_out, v.s, &block_samples(&decomp, &v))?
        }
        Suite::GenBernstein => verify_generalized_bernstein(
            &decomp,
            v.p,
            v.gamma,
            &block_samples(&decomp, &v),
            v.oversample,
        )?,
        Suite::Scaling => verify_scaling(
            &decomp,
            v.gamma,
            v.p,
            &scaling_cases(&decomp, &v)?,
            v.tolerance,
        )?,
        Suite::Commutator | Suite::Product => {
            // Both suites use θ and its Riesz velocity along the configured run.
            let cfg = config.solver_config()?;
            let theta0 = make_initial_data(config.initial_data()?, &grid)?;
            let traj = run_simulation(&theta0, &cfg)?;
            if suite == Suite::Commutator {
                let params = v
                    .commutator
                    .context("missing [verify.commutator] parameters")?;
                verify_commutator_estimate(&params, &traj, &traj, &decomp)?
            } else {
                let params = v.product.context("missing [verify.product] parameters")?;
                verify_product_estimate(&params, &traj, &traj, &decomp)?
            }
        }
    })
}

pub fn run(suite: Suite, config: &RunConfig, out: &mut OutputDir) -> Result<TerminationStatus> {
    let report = report(suite, config)?;
    out.write(
        &format!("{}_report.json", suite.name()),
        format!("{}\n", report.to_json()).as_bytes(),
    )?;
    println!(
        "{}: {:?} ({})",
        suite.name(),
        report.verdict.status,
        report.verdict.detail
    );
    Ok(if report.verdict.is_pass() {
        TerminationStatus::Completed
    } else {
        TerminationStatus::VerdictFailed
    })
}
