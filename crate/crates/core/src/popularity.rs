//! File popularity profiles.

use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PopularityKind {
    Uniform,
    /// Popularity inversely proportional to `rank^gamma`.
    Zipf { gamma: f64 },
}

/// A normalized popularity distribution over files `1..=K`, ordered by rank.
#[derive(Debug, Clone, PartialEq)]
pub struct PopularityProfile {
    kind: PopularityKind,
    pmf: Vec<f64>,
    cdf: Vec<f64>,
}

/// `Λ(γ) = Σ_{j=1..K} j^{-γ}`, summed smallest term first.
pub fn harmonic_lambda(k: usize, gamma: f64) -> f64 {
    (1..=k).rev().map(|j| libm::pow(j as f64, -gamma)).sum()
}

impl PopularityProfile {
    /// Builds the profile for a library of `k` files.
    pub fn new(k: usize, kind: PopularityKind) -> Result<Self> {
        if k == 0 {
            return Err(Error::EmptyLibrary);
        }
        let pmf: Vec<f64> = match kind {
            PopularityKind::Uniform => (0..k).map(|_| 1.0 / k as f64).collect(),
            PopularityKind::Zipf { gamma } => {
                if !gamma.is_finite() || gamma < 0.0 {
                    return Err(Error::InvalidExponent(gamma));
                }
                let norm = harmonic_lambda(k, gamma);
                (1..=k).map(|j| libm::pow(j as f64, -gamma) / norm).collect()
            }
        };
        let mut cdf = Vec::with_capacity(k);
        let mut acc = 0.0;
        for p in &pmf {
            acc += p;
            cdf.push(acc);
        }
        // guard against rounding so every u in [0, 1) maps to a file
        *cdf.last_mut().expect("k >= 1") = 1.0;
        Ok(Self { kind, pmf, cdf })
    }

    pub fn uniform(k: usize) -> Result<Self> {
        Self::new(k, PopularityKind::Uniform)
    }

    pub fn zipf(k: usize, gamma: f64) -> Result<Self> {
        Self::new(k, PopularityKind::Zipf { gamma })
    }

    pub fn kind(&self) -> PopularityKind {
        self.kind
    }

    /// Zipf exponent; zero for the uniform profile.
    pub fn gamma(&self) -> f64 {
        match self.kind {
            PopularityKind::Uniform => 0.0,
            PopularityKind::Zipf { gamma } => gamma,
        }
    }

    /// Library size `K`.
    pub fn library_size(&self) -> usize {
        self.pmf.len()
    }

    /// Probabilities, index `i` holding file `i + 1`.
    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    /// Probability of file `file` (1-based).
    pub fn p(&self, file: u32) -> f64 {
        self.pmf[file as usize - 1]
    }

    /// Draws a file id in `1..=K` by inverse CDF. Consumes exactly one `u64`
    /// from `rng`.
    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        let u: f64 = rng.gen();
        let idx = self.cdf.partition_point(|&c| c <= u);
        (idx.min(self.cdf.len() - 1) + 1) as u32
    }
}
