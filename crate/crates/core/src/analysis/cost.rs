//! Communication-cost predictors for the nearest-replica strategy.

use crate::popularity::{harmonic_lambda, PopularityProfile};

/// `Σ_j p_j / sqrt(1 - (1 - p_j)^M)`: the expected nearest-replica distance
/// up to a constant factor. A file with `p_j = 0` contributes nothing.
pub fn predicted_cost(profile: &PopularityProfile, m: usize) -> f64 {
    assert!(m >= 1, "cache size must be at least 1");
    profile
        .pmf()
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| {
            // 1 - (1 - p)^M, stable for small p
            let q = -libm::expm1(m as f64 * libm::log1p(-p));
            p / libm::sqrt(q)
        })
        .sum()
}

/// Popularity regimes with distinct cost scaling at constant `M`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CostRegime {
    /// `0 <= γ < 1`: `sqrt(K / M)`.
    Flat,
    /// `γ = 1`: `sqrt(K / (M ln K))`.
    Harmonic,
    /// `1 < γ < 2`: `K^(1 - γ/2) / sqrt(M)`.
    Intermediate,
    /// `γ = 2`: `ln K / sqrt(M)`.
    Critical,
    /// `γ > 2`: `1 / sqrt(M)`.
    Steep,
}

impl CostRegime {
    /// Exponents within this distance of 1 or 2 count as the boundary cases.
    pub const BOUNDARY_TOLERANCE: f64 = 1e-9;

    pub fn of(gamma: f64) -> Self {
        let t = Self::BOUNDARY_TOLERANCE;
        if (gamma - 1.0).abs() <= t {
            CostRegime::Harmonic
        } else if (gamma - 2.0).abs() <= t {
            CostRegime::Critical
        } else if gamma < 1.0 {
            CostRegime::Flat
        } else if gamma < 2.0 {
            CostRegime::Intermediate
        } else {
            CostRegime::Steep
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            CostRegime::Flat => "0<=gamma<1",
            CostRegime::Harmonic => "gamma=1",
            CostRegime::Intermediate => "1<gamma<2",
            CostRegime::Critical => "gamma=2",
            CostRegime::Steep => "gamma>2",
        }
    }

    pub fn expression(self) -> &'static str {
        match self {
            CostRegime::Flat => "sqrt(K/M)",
            CostRegime::Harmonic => "sqrt(K/(M ln K))",
            CostRegime::Intermediate => "K^(1-gamma/2)/sqrt(M)",
            CostRegime::Critical => "ln K/sqrt(M)",
            CostRegime::Steep => "1/sqrt(M)",
        }
    }

    /// Leading term evaluated at `(K, M, γ)`.
    pub fn leading_term(self, k: usize, m: usize, gamma: f64) -> f64 {
        let k = k as f64;
        let sm = libm::sqrt(m as f64);
        match self {
            CostRegime::Flat => libm::sqrt(k) / sm,
            CostRegime::Harmonic => libm::sqrt(k / libm::log(k)) / sm,
            CostRegime::Intermediate => libm::pow(k, 1.0 - gamma / 2.0) / sm,
            CostRegime::Critical => libm::log(k) / sm,
            CostRegime::Steep => 1.0 / sm,
        }
    }

    /// Exponent of `K` in the leading term, where it is a pure power.
    pub fn k_exponent(self, gamma: f64) -> Option<f64> {
        match self {
            CostRegime::Flat => Some(0.5),
            CostRegime::Intermediate => Some(1.0 - gamma / 2.0),
            CostRegime::Steep => Some(0.0),
            CostRegime::Harmonic | CostRegime::Critical => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeEstimate {
    pub regime: CostRegime,
    pub leading_term: f64,
}

/// Which scaling regime applies to `γ` and its leading term at `(K, M)`.
pub fn cost_regime(k: usize, m: usize, gamma: f64) -> RegimeEstimate {
    let regime = CostRegime::of(gamma);
    RegimeEstimate { regime, leading_term: regime.leading_term(k, m, gamma) }
}

/// The finite-`K` Zipf form `Λ(γ/2) / sqrt(M Λ(γ))` that the regimes
/// approximate.
pub fn zipf_cost_sum(k: usize, m: usize, gamma: f64) -> f64 {
    harmonic_lambda(k, gamma / 2.0) / libm::sqrt(m as f64 * harmonic_lambda(k, gamma))
}
