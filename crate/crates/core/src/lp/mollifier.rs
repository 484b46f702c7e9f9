//! The radial cutoff `χ` and the annulus bump `φ̂(ξ) = χ(|ξ|) − χ(2|ξ|)`.

use serde::{Deserialize, Serialize};

/// Smoothed unit step: `χ = 1` on `[0, 1]`, `χ = 0` on `[2, ∞)`, and
/// `χ(r) = h(2 − r) / (h(2 − r) + h(r − 1))` in between with
/// `h(t) = exp(−1/t)` for `t > 0`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Mollifier;

fn bump(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp()
    } else {
        0.0
    }
}

impl Mollifier {
    pub fn chi(&self, r: f64) -> f64 {
        if r <= 1.0 {
            1.0
        } else if r >= 2.0 {
            0.0
        } else {
            let a = bump(2.0 - r);
            a / (a + bump(r - 1.0))
        }
    }

    /// `φ̂` as a function of `|ξ|`; supported in `[1/2, 2]`.
    pub fn phi_hat(&self, r: f64) -> f64 {
        self.chi(r) - self.chi(2.0 * r)
    }

    /// `φ̂(2^{-j} ξ)` as a function of `|ξ|`.
    pub fn block_weight(&self, j: i32, r: f64) -> f64 {
        self.phi_hat(r * 2f64.powi(-j))
    }

    /// Multiplier of the low block `Σ_{j<0} Δ_j`, i.e. `χ(2|ξ|)`.
    pub fn low_weight(&self, r: f64) -> f64 {
        self.chi(2.0 * r)
    }

    /// Human-readable description recorded in reports.
    pub fn description(&self) -> &'static str {
        "chi(r)=h(2-r)/(h(2-r)+h(r-1)) on [1,2], h(t)=exp(-1/t); phi_hat(r)=chi(r)-chi(2r)"
    }
}
