//! Small statistical helpers shared by the codebook and capacity modules.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Result, VsaError};

/// Exact `Binomial(n, p)` probability mass for `0..=n`, built by the ratio
/// recurrence from `P(0) = (1-p)^n`.
pub fn binomial_pmf(n: usize, p: f64) -> Vec<f64> {
    let mut pmf = Vec::with_capacity(n + 1);
    let q = 1.0 - p;
    let mut term = q.powi(n as i32);
    pmf.push(term);
    for j in 1..=n {
        term *= (n + 1 - j) as f64 / j as f64 * (p / q);
        pmf.push(term);
    }
    pmf
}

/// Result of a Pearson chi-square goodness-of-fit test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChiSquareTest {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    /// Number of bins after pooling sparse tails.
    pub bins: usize,
}

impl ChiSquareTest {
    pub fn passes(&self, significance: f64) -> bool {
        self.p_value > significance
    }
}

/// Pearson chi-square test of `observed` counts against probabilities
/// `expected_pmf`. Adjacent bins are pooled left to right until each pooled
/// bin expects at least `min_expected` counts; a short remainder joins the
/// last bin.
pub fn chi_square_gof(observed: &[u64], expected_pmf: &[f64], min_expected: f64) -> Result<ChiSquareTest> {
    if observed.len() != expected_pmf.len() || observed.is_empty() {
        return Err(VsaError::InvalidParameter(
            "observed and expected must be non-empty and equally long".into(),
        ));
    }
    let total: u64 = observed.iter().sum();
    if total == 0 {
        return Err(VsaError::InsufficientData("no observations".into()));
    }
    let total = total as f64;

    let mut bins: Vec<(f64, f64)> = Vec::new();
    let (mut obs_acc, mut exp_acc) = (0.0, 0.0);
    for (&o, &p) in observed.iter().zip(expected_pmf) {
        obs_acc += o as f64;
        exp_acc += p * total;
        if exp_acc >= min_expected {
            bins.push((obs_acc, exp_acc));
            obs_acc = 0.0;
            exp_acc = 0.0;
        }
    }
    // Whatever is left over joins the last bin.
    if exp_acc > 0.0 || obs_acc > 0.0 {
        match bins.last_mut() {
            Some(last) => {
                last.0 += obs_acc;
                last.1 += exp_acc;
            }
            None => bins.push((obs_acc, exp_acc)),
        }
    }
    if bins.len() < 2 {
        return Err(VsaError::InsufficientData("fewer than two bins after pooling".into()));
    }

    let statistic: f64 = bins.iter().map(|&(o, e)| (o - e) * (o - e) / e).sum();
    let dof = bins.len() - 1;
    let dist = ChiSquared::new(dof as f64).map_err(|e| VsaError::InvalidParameter(e.to_string()))?;
    Ok(ChiSquareTest {
        statistic,
        dof,
        p_value: dist.sf(statistic),
        bins: bins.len(),
    })
}

/// Normal-approximation standard error of a binomial proportion.
pub fn binomial_std_error(p: f64, trials: usize) -> f64 {
    if trials == 0 {
        return f64::NAN;
    }
    (p * (1.0 - p) / trials as f64).max(0.0).sqrt()
}

/// Running mean and unbiased variance.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Moments {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    pub(crate) fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub(crate) fn mean(&self) -> f64 {
        if self.n == 0 {
            f64::NAN
        } else {
            self.mean
        }
    }

    pub(crate) fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }
}
