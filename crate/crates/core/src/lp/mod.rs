//! Littlewood–Paley analysis on the torus: dyadic blocks, Besov and
//! Chemin-type norms, and numerical checks of the harmonic-analysis
//! inequalities used by the regularity theory.

mod decomposition;
mod lemmas;
mod mollifier;
mod norms;
mod report;
mod samples;
mod scaling;

pub use decomposition::{Block, DyadicDecomposition};
pub use lemmas::{
    commutator, verify_bernstein, verify_commutator_estimate, verify_generalized_bernstein,
    verify_product_estimate, CommutatorParams, ProductParams, DIVERGENCE_TOL,
};
pub use mollifier::Mollifier;
pub use norms::{
    besov_norm, chemin_norm, lq_norm, mixed_norm_from_profiles, time_lr_norm, BesovParams,
    BlockProfile, MixedNormParams,
};
pub use report::{median, JRow, LemmaReport, Verdict, VerdictStatus, UNIFORMITY_FACTOR};
pub use samples::{random_band_field, random_block_field};
pub use scaling::{
    scaling_invariance, scaling_transform, verify_partition, verify_scaling, Scaled,
};
