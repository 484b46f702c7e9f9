//! Pseudo-spectral simulation of the dissipative surface quasi-geostrophic
//! equation `θ_t + u·∇θ + Λ^γ θ = 0`, `u = (−R₂θ, R₁θ)`, on a periodic
//! torus, together with Littlewood–Paley tools for critical Besov norms.

// `!(x > y)` deliberately rejects NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod checkpoint;
pub mod diagnostics;
pub mod error;
pub mod field;
pub mod grid;
pub mod lp;
pub mod operators;
pub mod solver;
pub mod trajectory;

pub use error::{Result, SqgError};
pub use field::SpectralField;
pub use grid::{Grid, GridSpec};
pub use rustfft::num_complex::Complex64;
pub use trajectory::{RunStatus, Trajectory};
