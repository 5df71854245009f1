//! Monte Carlo capacity experiments for Hadamard and tensor memories.
//!
//! Each trial draws a fresh Rademacher codebook holding `k` stored tuples and
//! `m` spurious tuples (all entries independent), bundles the stored tuples,
//! and scores the first stored tuple against every spurious one. A trial is
//! won when the stored tuple's score is strictly the largest.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::binding::{Backend, TupleIndex};
use crate::codebook::{Codebook, CodebookKind};
use crate::error::{Result, VsaError};
use crate::memory::Memory;
use crate::rng::derive_seed;
use crate::stats::{binomial_std_error, Moments};

/// Constant used for the Hadamard bound when none is supplied. Hoeffding's
/// inequality on `(2k−1)d` Rademacher terms gives the exponent
/// `d / (2(2k−1))`, which dominates `d/(6(k−1))` for every `k ≥ 2`.
pub const DEFAULT_HADAMARD_C: f64 = 1.0 / 6.0;

/// Largest tensor memory (in stored values) an experiment may use.
pub const MAX_EXPERIMENT_TENSOR_VALUES: u128 = 1 << 24;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub backend: Backend,
    pub d: usize,
    pub n: usize,
    pub k: usize,
    pub m: usize,
    pub trials: usize,
    pub seed: u64,
    /// Constant in the Hadamard bound `1 − m·exp(−C·d/(k−1))`.
    pub hadamard_c: f64,
}

impl ExperimentConfig {
    pub fn new(backend: Backend, d: usize, n: usize, k: usize, m: usize, trials: usize, seed: u64) -> Self {
        Self {
            backend,
            d,
            n,
            k,
            m,
            trials,
            seed,
            hadamard_c: DEFAULT_HADAMARD_C,
        }
    }

    /// Codebook entries drawn per trial: one per slot of every stored and
    /// spurious tuple.
    pub fn codebook_size(&self) -> usize {
        (self.k + self.m) * self.n
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(VsaError::InvalidParameter(msg));
        if self.backend == Backend::Convolution {
            return bad("capacity experiments support the hadamard and tensor backends".into());
        }
        if self.d == 0 {
            return bad("d must be >= 1".into());
        }
        if self.n < 2 {
            return bad(format!("n must be >= 2 (got {})", self.n));
        }
        if self.k == 0 || self.m == 0 {
            return bad(format!("k and m must be >= 1 (got k={}, m={})", self.k, self.m));
        }
        if self.trials == 0 {
            return bad("trials must be >= 1".into());
        }
        if self.hadamard_c.is_nan() || self.hadamard_c <= 0.0 {
            return bad(format!("hadamard_c must be > 0 (got {})", self.hadamard_c));
        }
        if self.backend == Backend::Tensor {
            let values = (self.d as u128).checked_pow(self.n as u32).unwrap_or(u128::MAX);
            if values > MAX_EXPERIMENT_TENSOR_VALUES {
                return Err(VsaError::SizeGuard {
                    what: "d^n",
                    value: values,
                    limit: MAX_EXPERIMENT_TENSOR_VALUES,
                });
            }
        }
        Ok(())
    }

    /// Theoretical lower bound on accuracy for this cell.
    pub fn bound(&self) -> f64 {
        match self.backend {
            // k = 1 leaves no noise in the matched score; the limit is 1.
            Backend::Hadamard if self.k == 1 => 1.0,
            Backend::Hadamard => {
                bound_hadamard(self.d, self.k, self.m, self.hadamard_c).expect("k >= 2 and C > 0 checked by validate")
            }
            _ => bound_tensor(self.d, self.n, self.k, self.m).expect("k >= 1 checked by validate"),
        }
    }
}

/// Outcome of one trial. Scores are unscaled.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub won: bool,
    pub tied: bool,
    pub match_score: f64,
    pub max_spurious: f64,
    pub spurious_scores: Vec<f64>,
}

/// Runs trial `trial_index` of `cfg`. The trial's codebook seed is derived
/// from `(cfg.seed, trial_index)`, so trials can run in any order.
pub fn run_trial(cfg: &ExperimentConfig, trial_index: u64) -> Result<TrialOutcome> {
    run_trial_in(cfg, trial_index, &mut None)
}

/// [`run_trial`] drawing the trial codebook into `scratch`, which is reused
/// across calls with the same config.
fn run_trial_in(cfg: &ExperimentConfig, trial_index: u64, scratch: &mut Option<Codebook>) -> Result<TrialOutcome> {
    cfg.validate()?;
    let n = cfg.n;
    let seed = derive_seed(cfg.seed, trial_index);
    let cb = match scratch {
        Some(cb) => {
            cb.reseed(seed);
            cb
        }
        None => scratch.insert(Codebook::generate(
            CodebookKind::Rademacher,
            cfg.d,
            cfg.codebook_size(),
            seed,
        )?),
    };
    let cb = &*cb;
    let tuple = |i: usize| TupleIndex::new((i * n..(i + 1) * n).collect());
    let stored = (0..cfg.k).map(tuple).collect::<Result<Vec<_>>>()?;
    let mut candidates = Vec::with_capacity(cfg.m + 1);
    candidates.push(stored[0].clone());
    for i in cfg.k..cfg.k + cfg.m {
        candidates.push(tuple(i)?);
    }

    let memory = Memory::bundle(cb, &stored, None, cfg.backend)?;
    let mut scores = memory.query_detect(&candidates, cb)?.scores;
    let spurious_scores = scores.split_off(1);
    let match_score = scores[0];
    let max_spurious = spurious_scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(TrialOutcome {
        won: match_score > max_spurious,
        tied: match_score == max_spurious,
        match_score,
        max_spurious,
        spurious_scores,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub wins: usize,
    pub ties: usize,
    /// Fraction of trials with a strict win.
    pub accuracy: f64,
    pub tie_rate: f64,
    /// Normal-approximation standard error of `accuracy`.
    pub accuracy_std_error: f64,
    pub match_mean: f64,
    pub match_var: f64,
    pub spurious_mean: f64,
    pub spurious_var: f64,
    /// Theoretical lower bound on accuracy. May be negative.
    pub bound: f64,
    /// Factor mapping an unscaled matched score to 1.
    pub score_scale: f64,
    pub wall_time_secs: f64,
}

impl ExperimentResult {
    /// Whether accuracy clears `bound` within `sigmas` standard errors.
    pub fn consistent_with(&self, bound: f64, sigmas: f64) -> bool {
        self.accuracy >= bound - sigmas * self.accuracy_std_error
    }
}

/// Runs every trial of `cfg` and aggregates. Deterministic given the config
/// (apart from `wall_time_secs`).
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    let start = Instant::now();
    let outcomes = (0..cfg.trials as u64)
        .into_par_iter()
        .map_init(|| None, |scratch, t| run_trial_in(cfg, t, scratch))
        .collect::<Result<Vec<_>>>()?;

    let (mut wins, mut ties) = (0, 0);
    let mut matched = Moments::default();
    let mut spurious = Moments::default();
    for o in &outcomes {
        wins += o.won as usize;
        ties += o.tied as usize;
        matched.push(o.match_score);
        o.spurious_scores.iter().for_each(|&s| spurious.push(s));
    }
    let trials = cfg.trials as f64;
    let accuracy = wins as f64 / trials;
    Ok(ExperimentResult {
        config: *cfg,
        wins,
        ties,
        accuracy,
        tie_rate: ties as f64 / trials,
        accuracy_std_error: binomial_std_error(accuracy, cfg.trials),
        match_mean: matched.mean(),
        match_var: matched.variance(),
        spurious_mean: spurious.mean(),
        spurious_var: spurious.variance(),
        bound: cfg.bound(),
        score_scale: cfg.backend.score_scale(CodebookKind::Rademacher, cfg.d, cfg.n),
        wall_time_secs: start.elapsed().as_secs_f64(),
    })
}

/// `1 − m·exp(−C·d/(k−1))`, reported raw (it may be negative).
pub fn bound_hadamard(d: usize, k: usize, m: usize, c: f64) -> Result<f64> {
    if k < 2 {
        return Err(VsaError::InvalidParameter(format!(
            "Hadamard bound needs k >= 2 (got {k})"
        )));
    }
    if c.is_nan() || c <= 0.0 {
        return Err(VsaError::InvalidParameter(format!("C must be > 0 (got {c})")));
    }
    Ok(1.0 - m as f64 * (-c * d as f64 / (k - 1) as f64).exp())
}

/// `1 − m·exp(−d^n/(2k−1))`.
pub fn bound_tensor(d: usize, n: usize, k: usize, m: usize) -> Result<f64> {
    if k == 0 {
        return Err(VsaError::InvalidParameter("tensor bound needs k >= 1".into()));
    }
    let size = (d as f64).powi(n as i32);
    Ok(1.0 - m as f64 * (-size / (2 * k - 1) as f64).exp())
}

/// Least-squares estimate of the Hadamard constant `C`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacityFit {
    pub c: f64,
    /// `‖residual‖ / ‖response‖` of the fit.
    pub relative_residual: f64,
    pub cells_used: usize,
}

/// Fits `ln(1 − accuracy) = ln(m) − C·d/(k−1)` over the Hadamard cells whose
/// accuracy is strictly between 0 and 1. The intercept is pinned at `ln(m)`,
/// leaving a one-parameter fit through the origin in
/// `(d/(k−1), ln(m) − ln(1 − accuracy))`.
pub fn fit_capacity_constant(results: &[ExperimentResult]) -> Result<CapacityFit> {
    let points: Vec<(f64, f64)> = results
        .iter()
        .filter(|r| r.config.backend == Backend::Hadamard && r.config.k >= 2)
        .filter(|r| r.accuracy > 0.0 && r.accuracy < 1.0)
        .map(|r| {
            let cfg = &r.config;
            let x = cfg.d as f64 / (cfg.k - 1) as f64;
            let y = (cfg.m as f64).ln() - (1.0 - r.accuracy).ln();
            (x, y)
        })
        .collect();
    if points.len() < 3 {
        return Err(VsaError::InsufficientData(format!(
            "need >= 3 unsaturated Hadamard cells, found {}",
            points.len()
        )));
    }
    let sxx: f64 = points.iter().map(|(x, _)| x * x).sum();
    let sxy: f64 = points.iter().map(|(x, y)| x * y).sum();
    let c = sxy / sxx;
    let rss: f64 = points.iter().map(|(x, y)| (y - c * x).powi(2)).sum();
    let tss: f64 = points.iter().map(|(_, y)| y * y).sum();
    Ok(CapacityFit {
        c,
        relative_residual: (rss / tss).sqrt(),
        cells_used: points.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreMoments {
    pub match_mean: f64,
    pub match_var: f64,
    pub spurious_mean: f64,
    pub spurious_var: f64,
    /// Spurious scores pooled into the moments (`m` per trial).
    pub spurious_samples: usize,
}

/// Empirical moments of unscaled Hadamard detection scores.
pub fn score_moments(cfg: &ExperimentConfig) -> Result<ScoreMoments> {
    if cfg.backend != Backend::Hadamard {
        return Err(VsaError::InvalidParameter(
            "score moments are defined for the hadamard backend".into(),
        ));
    }
    let r = run_experiment(cfg)?;
    Ok(ScoreMoments {
        match_mean: r.match_mean,
        match_var: r.match_var,
        spurious_mean: r.spurious_mean,
        spurious_var: r.spurious_var,
        spurious_samples: cfg.trials * cfg.m,
    })
}

/// Largest `k` found whose accuracy reaches the target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacityEstimate {
    pub k: usize,
    pub accuracy: f64,
    /// Every `(k, accuracy)` evaluated, in search order.
    pub evaluated: Vec<(usize, f64)>,
}

/// Searches for the largest `k ≤ k_max` with accuracy ≥ `target`, assuming
/// accuracy is non-increasing in `k`: doubling from `k = 1`, then bisection.
/// `base.k` is ignored.
pub fn capacity_at_accuracy(base: &ExperimentConfig, target: f64, k_max: usize) -> Result<CapacityEstimate> {
    if !(0.0..=1.0).contains(&target) || k_max == 0 {
        return Err(VsaError::InvalidParameter(format!(
            "need target in [0,1] and k_max >= 1 (got {target}, {k_max})"
        )));
    }
    let mut evaluated = Vec::new();
    let mut eval = |k: usize| -> Result<f64> {
        let acc = run_experiment(&ExperimentConfig { k, ..*base })?.accuracy;
        evaluated.push((k, acc));
        Ok(acc)
    };

    let first = eval(1)?;
    if first < target {
        return Ok(CapacityEstimate {
            k: 0,
            accuracy: first,
            evaluated,
        });
    }
    let (mut good, mut good_acc) = (1usize, first);
    let mut bad = None;
    while bad.is_none() && good < k_max {
        let next = (good * 2).min(k_max);
        let acc = eval(next)?;
        if acc >= target {
            good = next;
            good_acc = acc;
        } else {
            bad = Some(next);
        }
    }
    if let Some(mut bad) = bad {
        while bad - good > 1 {
            let mid = good + (bad - good) / 2;
            let acc = eval(mid)?;
            if acc >= target {
                good = mid;
                good_acc = acc;
            } else {
                bad = mid;
            }
        }
    }
    Ok(CapacityEstimate {
        k: good,
        accuracy: good_acc,
        evaluated,
    })
}

/// Capacity of a Hadamard memory of dimension `D` against a tensor memory
/// holding the same number of values (`d^n = D`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacityComparison {
    pub hadamard_dim: usize,
    pub tensor_dim: usize,
    pub order: usize,
    pub m: usize,
    pub target_accuracy: f64,
    pub hadamard: CapacityEstimate,
    pub tensor: CapacityEstimate,
    /// Tensor capacity over Hadamard capacity.
    pub ratio: f64,
}

pub fn compare_memory_capacity(
    tensor_dim: usize,
    order: usize,
    m: usize,
    trials: usize,
    seed: u64,
    target: f64,
    k_max: usize,
) -> Result<CapacityComparison> {
    let hadamard_dim = tensor_dim
        .checked_pow(order as u32)
        .ok_or_else(|| VsaError::InvalidParameter("d^n overflows".into()))?;
    let had = ExperimentConfig::new(Backend::Hadamard, hadamard_dim, order, 1, m, trials, seed);
    let ten = ExperimentConfig::new(Backend::Tensor, tensor_dim, order, 1, m, trials, seed);
    let hadamard = capacity_at_accuracy(&had, target, k_max)?;
    let tensor = capacity_at_accuracy(&ten, target, k_max)?;
    let ratio = tensor.k as f64 / hadamard.k as f64;
    Ok(CapacityComparison {
        hadamard_dim,
        tensor_dim,
        order,
        m,
        target_accuracy: target,
        hadamard,
        tensor,
        ratio,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(backend: Backend, d: usize, k: usize, m: usize, trials: usize) -> ExperimentConfig {
        ExperimentConfig::new(backend, d, 2, k, m, trials, 2024)
    }

    #[test]
    fn validation() {
        assert!(cfg(Backend::Hadamard, 16, 2, 2, 0).validate().is_err());
        assert!(cfg(Backend::Hadamard, 16, 0, 2, 10).validate().is_err());
        assert!(cfg(Backend::Hadamard, 16, 2, 0, 10).validate().is_err());
        assert!(cfg(Backend::Convolution, 16, 2, 2, 10).validate().is_err());
        let mut c = cfg(Backend::Hadamard, 16, 2, 2, 10);
        c.n = 1;
        assert!(c.validate().is_err());
        let big = ExperimentConfig::new(Backend::Tensor, 4097, 2, 1, 1, 1, 0);
        assert!(matches!(big.validate(), Err(VsaError::SizeGuard { .. })));
        assert!(run_experiment(&cfg(Backend::Tensor, 8, 1, 1, 0)).is_err());
    }

    #[test]
    fn hadamard_bound_values() {
        // C·d/(k−1) = 50
        let b = bound_hadamard(100, 2, 1, 0.5).unwrap();
        assert_eq!(b, 1.0 - (-50.0f64).exp());
        let b = bound_hadamard(100, 2, 1, 0.125).unwrap();
        assert!((b - 0.999_996_273_346_828).abs() < 1e-15, "{b}");
        assert!(bound_hadamard(10, 10, 100, 0.01).unwrap() < 0.0);
        assert!(bound_hadamard(10, 1, 1, 0.5).is_err());
    }

    #[test]
    fn tensor_bound_values() {
        let b = bound_tensor(4, 2, 3, 10).unwrap();
        assert!((b - 0.592_377_960_216_337_9).abs() < 1e-12, "{b}");
        assert_eq!(bound_tensor(7, 3, 4, 0).unwrap(), 1.0);
        assert!(1.0 - bound_tensor(32, 2, 5, 100).unwrap() <= 1e-40);
        assert!(bound_tensor(4, 2, 0, 1).is_err());
    }

    #[test]
    fn single_stored_hadamard_has_exact_match_score() {
        let c = cfg(Backend::Hadamard, 64, 1, 3, 50);
        let r = run_experiment(&c).unwrap();
        assert_eq!(r.match_mean, 64.0);
        assert_eq!(r.match_var, 0.0);
        assert_eq!(r.bound, 1.0);
    }

    #[test]
    fn experiments_are_deterministic() {
        for backend in [Backend::Hadamard, Backend::Tensor] {
            let c = cfg(backend, 16, 4, 5, 64);
            let mut a = run_experiment(&c).unwrap();
            let mut b = run_experiment(&c).unwrap();
            a.wall_time_secs = 0.0;
            b.wall_time_secs = 0.0;
            assert_eq!(a, b);
        }
    }

    #[test]
    fn trials_are_order_independent() {
        let c = cfg(Backend::Hadamard, 32, 3, 4, 10);
        let forward: Vec<_> = (0..10).map(|t| run_trial(&c, t).unwrap()).collect();
        let backward: Vec<_> = (0..10).rev().map(|t| run_trial(&c, t).unwrap()).collect();
        assert!(forward.iter().eq(backward.iter().rev()));
    }

    #[test]
    fn accuracy_plus_ties_at_most_one() {
        // Tiny d makes ties common.
        let r = run_experiment(&cfg(Backend::Hadamard, 4, 3, 5, 400)).unwrap();
        assert!(r.ties > 0);
        assert!(r.accuracy + r.tie_rate <= 1.0 + 1e-12);
        assert_eq!(r.wins as f64, r.accuracy * 400.0);
    }

    #[test]
    fn fit_recovers_synthetic_constant() {
        let mut results = Vec::new();
        for (d, k) in [(40, 5), (60, 9), (30, 3), (80, 13)] {
            let c = cfg(Backend::Hadamard, d, k, 15, 1000);
            let accuracy = bound_hadamard(d, k, 15, 0.5).unwrap();
            assert!(accuracy > 0.0 && accuracy < 1.0);
            results.push(ExperimentResult {
                config: c,
                wins: 0,
                ties: 0,
                accuracy,
                tie_rate: 0.0,
                accuracy_std_error: 0.0,
                match_mean: 0.0,
                match_var: 0.0,
                spurious_mean: 0.0,
                spurious_var: 0.0,
                bound: accuracy,
                score_scale: 1.0,
                wall_time_secs: 0.0,
            });
        }
        let fit = fit_capacity_constant(&results).unwrap();
        assert!((fit.c - 0.5).abs() < 1e-6, "{}", fit.c);
        assert!(fit.relative_residual < 1e-9);
        assert_eq!(fit.cells_used, 4);

        for r in &mut results {
            r.accuracy = 1.0;
        }
        assert!(matches!(
            fit_capacity_constant(&results),
            Err(VsaError::InsufficientData(_))
        ));
    }

    #[test]
    fn capacity_search_is_consistent() {
        let base = cfg(Backend::Hadamard, 64, 1, 7, 200);
        let est = capacity_at_accuracy(&base, 0.9, 64).unwrap();
        assert!(est.k >= 1);
        assert!(est.accuracy >= 0.9);
        // k + 1 was evaluated (or k hit the cap) and fell short.
        if est.k < 64 {
            let above = est.evaluated.iter().find(|(k, _)| *k == est.k + 1).unwrap();
            assert!(above.1 < 0.9);
        }
    }
}
