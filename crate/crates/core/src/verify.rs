//! Desk-scale invariant suite covering every module.
//!
//! Each check draws its randomness from its own stream of the suite seed and
//! reports pass/fail with a short measured detail.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::binding::{
    detection_rank, hadamard_bind, hadamard_from_tensor, spurious_unbind_residual, tensor_bind, tensor_detect,
    tensor_unbind_left, tensor_unbind_right, Backend, BoundRep, Side, TupleIndex,
};
use crate::capacity::{
    bound_hadamard, compare_memory_capacity, fit_capacity_constant, run_experiment, ExperimentConfig,
};
use crate::codebook::{dot_statistics, Codebook, CodebookKind, Embedding};
use crate::error::Result;
use crate::memory::Memory;
use crate::rng::{self, derive_seed, Purpose};

#[derive(Debug, Clone, Copy, Default)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Test hook: adds a constant offset to every binding produced inside the
    /// multilinearity and factorization checks, making the operator affine.
    pub corrupt_binding: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

type CheckFn = fn(&Ctx) -> Result<(bool, String)>;

struct Ctx {
    opts: VerifyOptions,
    index: u64,
}

impl Ctx {
    fn rng(&self) -> ChaCha8Rng {
        rng::stream(self.opts.seed, Purpose::Verify, self.index)
    }

    fn seed(&self, i: u64) -> u64 {
        derive_seed(derive_seed(self.opts.seed, self.index), i)
    }

    fn bind(&self, backend: Backend, vs: &[&Embedding]) -> Result<BoundRep> {
        let mut rep = backend.bind(vs)?;
        if self.opts.corrupt_binding {
            rep.values_mut().iter_mut().for_each(|x| *x += 1e-3);
        }
        Ok(rep)
    }
}

const CHECKS: &[(&str, CheckFn)] = &[
    ("codebook.determinism", codebook_determinism),
    ("codebook.orthonormal_gram", orthonormal_gram),
    ("codebook.rademacher_mean", rademacher_mean),
    ("codebook.agreement_count_integral", agreement_count),
    ("binding.multilinearity", multilinearity),
    ("binding.unbind_linearity", unbind_linearity),
    ("binding.exact_tensor_round_trip", exact_round_trip),
    ("binding.spurious_unbind_decomposition", spurious_decomposition),
    ("binding.iterated_impossibility", iterated_impossibility),
    ("binding.detection_calibration", detection_calibration),
    ("binding.hadamard_factorization", factorization),
    ("binding.detection_rank", rank_check),
    ("memory.superposition_respect", superposition_respect),
    ("memory.scale_equivariance", scale_equivariance),
    ("memory.tensor_orthonormal_exactness", memory_exactness),
    ("capacity.determinism", capacity_determinism),
    ("capacity.tensor_bound", tensor_bound),
    ("capacity.hadamard_fitted_bound", hadamard_fitted_bound),
    ("capacity.memory_capacity_ratio", capacity_ratio),
];

/// Names of every check, in run order.
pub fn check_names() -> Vec<&'static str> {
    CHECKS.iter().map(|(n, _)| *n).collect()
}

/// Runs every check. An error inside a check counts as a failure.
pub fn run_all(opts: VerifyOptions) -> Vec<CheckResult> {
    CHECKS
        .iter()
        .enumerate()
        .map(|(i, (name, check))| {
            let ctx = Ctx { opts, index: i as u64 };
            match check(&ctx) {
                Ok((passed, detail)) => CheckResult { name, passed, detail },
                Err(e) => CheckResult {
                    name,
                    passed: false,
                    detail: format!("error: {e}"),
                },
            }
        })
        .collect()
}

fn gaussian(rng: &mut ChaCha8Rng, d: usize) -> Result<Embedding> {
    Embedding::new((0..d).map(|_| rng.sample(StandardNormal)).collect())
}

fn codebook_determinism(ctx: &Ctx) -> Result<(bool, String)> {
    let mut ok = true;
    for kind in [CodebookKind::Rademacher, CodebookKind::Orthonormal] {
        let a = Codebook::generate(kind, 32, 16, ctx.seed(0))?;
        let b = Codebook::generate(kind, 32, 16, ctx.seed(0))?;
        ok &= a == b;
    }
    Ok((ok, "regenerated rademacher and orthonormal 32x16 codebooks".into()))
}

fn orthonormal_gram(ctx: &Ctx) -> Result<(bool, String)> {
    let cb = Codebook::generate(CodebookKind::Orthonormal, 16, 16, ctx.seed(0))?;
    let mut worst = 0.0f64;
    for i in 0..16 {
        for j in 0..16 {
            let want = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((cb[i].dot(&cb[j])? - want).abs());
        }
    }
    Ok((worst <= 1e-10, format!("max |G - I| = {worst:.2e}")))
}

fn rademacher_mean(ctx: &Ctx) -> Result<(bool, String)> {
    let (d, pairs) = (64, 20_000);
    let stats = dot_statistics(d, pairs, ctx.seed(0))?;
    let limit = 4.0 * (1.0 / (d * pairs) as f64).sqrt();
    Ok((
        stats.sample_mean.abs() <= limit,
        format!("|mean Z| = {:.2e}, limit {limit:.2e}", stats.sample_mean.abs()),
    ))
}

fn agreement_count(ctx: &Ctx) -> Result<(bool, String)> {
    let cb = Codebook::generate(CodebookKind::Rademacher, 37, 40, ctx.seed(0))?;
    let mut ok = true;
    for (i, u) in cb.embeddings().iter().enumerate() {
        for v in &cb.embeddings()[i + 1..] {
            let z = u.dot(v)? / 37.0;
            let count = 37.0 * (z + 1.0) / 2.0;
            ok &= (count - count.round()).abs() < 1e-9 && (0.0..=37.0).contains(&count);
        }
    }
    Ok((ok, "d(Z+1)/2 integral on all 780 pairs at d=37".into()))
}

fn multilinearity(ctx: &Ctx) -> Result<(bool, String)> {
    let mut rng = ctx.rng();
    let (d, n) = (6, 3);
    let mut worst = 0.0f64;
    for backend in Backend::ALL {
        for _ in 0..20 {
            let vs: Vec<Embedding> = (0..n).map(|_| gaussian(&mut rng, d)).collect::<Result<_>>()?;
            let other = gaussian(&mut rng, d)?;
            let slot = rng.random_range(0..n);
            let (a, b) = (rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));

            let mixed = vs[slot].combine(a, &other, b)?;
            let mut lhs_args: Vec<&Embedding> = vs.iter().collect();
            lhs_args[slot] = &mixed;
            let lhs = ctx.bind(backend, &lhs_args)?;

            let mut other_args: Vec<&Embedding> = vs.iter().collect();
            other_args[slot] = &other;
            let mut rhs = ctx.bind(backend, &vs.iter().collect::<Vec<_>>())?.scaled(a);
            rhs.add_scaled(&ctx.bind(backend, &other_args)?, b)?;
            worst = worst.max(lhs.max_abs_diff(&rhs)?);
        }
    }
    Ok((
        worst <= 1e-10,
        format!("max deviation {worst:.2e} over 60 random cases"),
    ))
}

fn unbind_linearity(ctx: &Ctx) -> Result<(bool, String)> {
    let mut rng = ctx.rng();
    let (d, n) = (6, 3);
    let mut worst = 0.0f64;
    for backend in Backend::ALL {
        for side in [Side::Left, Side::Right] {
            for _ in 0..10 {
                let vs: Vec<Embedding> = (0..n).map(|_| gaussian(&mut rng, d)).collect::<Result<_>>()?;
                let rep = backend.bind(&vs.iter().collect::<Vec<_>>())?;
                let (u, v) = (gaussian(&mut rng, d)?, gaussian(&mut rng, d)?);
                let (a, b) = (rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
                let lhs = backend.unbind(&u.combine(a, &v, b)?, &rep, side)?;
                let mut rhs = backend.unbind(&u, &rep, side)?.scaled(a);
                rhs.add_scaled(&backend.unbind(&v, &rep, side)?, b)?;
                worst = worst.max(lhs.max_abs_diff(&rhs)?);
            }
        }
    }
    Ok((worst <= 1e-10, format!("max deviation {worst:.2e}")))
}

fn exact_round_trip(ctx: &Ctx) -> Result<(bool, String)> {
    let d = 8;
    let cb = Codebook::generate(CodebookKind::Orthonormal, d, d, ctx.seed(0))?;
    let mut worst = 0.0f64;
    for v in cb.embeddings() {
        for w in cb.embeddings() {
            let t = tensor_bind(&[v, w])?;
            let left = tensor_unbind_left(v, &t)?;
            let right = tensor_unbind_right(&t, w)?;
            worst = worst.max(crate::binding::max_abs_diff(left.values(), w));
            worst = worst.max(crate::binding::max_abs_diff(right.values(), v));
        }
    }
    Ok((worst <= 1e-12, format!("max residual {worst:.2e} over 64 pairs at d=8")))
}

fn spurious_decomposition(ctx: &Ctx) -> Result<(bool, String)> {
    let mut rng = ctx.rng();
    let d = 16;
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let (u, v, w) = (gaussian(&mut rng, d)?, gaussian(&mut rng, d)?, gaussian(&mut rng, d)?);
        let got = tensor_unbind_left(&u, &tensor_bind(&[&v, &w])?)?;
        let want = w.scaled(u.dot(&v)?);
        worst = worst.max(crate::binding::max_abs_diff(got.values(), &want));
    }
    Ok((worst <= 1e-10, format!("max deviation {worst:.2e} over 200 triples")))
}

fn iterated_impossibility(ctx: &Ctx) -> Result<(bool, String)> {
    let d = 256;
    let threshold = 0.5 * (d as f64).sqrt();
    let mut counts = Vec::new();
    for backend in [Backend::Hadamard, Backend::Convolution] {
        let mut hits = 0;
        for s in 0..100 {
            let cb = Codebook::generate(CodebookKind::Rademacher, d, 3, ctx.seed(s))?;
            let r = spurious_unbind_residual(backend, cb.kind(), &cb[0], &cb[1], &cb[2])?;
            hits += (r > threshold) as usize;
        }
        counts.push((backend, hits));
    }
    let ok = counts.iter().all(|&(_, h)| h >= 99);
    let detail = counts
        .iter()
        .map(|(b, h)| format!("{b}: {h}/100"))
        .collect::<Vec<_>>()
        .join(", ");
    Ok((ok, detail))
}

fn detection_calibration(ctx: &Ctx) -> Result<(bool, String)> {
    let cb = Codebook::generate(CodebookKind::Orthonormal, 3, 3, ctx.seed(0))?;
    let mut ok = true;
    for stored in TupleIndex::all(3, 2) {
        let t = tensor_bind(&stored.resolve(&cb)?)?;
        for query in TupleIndex::all(3, 2) {
            let score = tensor_detect(&query.resolve(&cb)?, &t)?;
            ok &= if query == stored {
                (score - 1.0).abs() <= 1e-10
            } else {
                score.abs() <= 1e-10
            };
        }
    }
    Ok((ok, "81 stored/query pairs at d=3, n=2".into()))
}

fn factorization(ctx: &Ctx) -> Result<(bool, String)> {
    let cb = Codebook::generate(CodebookKind::Rademacher, 4, 4, ctx.seed(0))?;
    let mut worst = 0.0f64;
    for n in [2, 3] {
        for tuple in TupleIndex::all(4, n) {
            let vs = tuple.resolve(&cb)?;
            let diag = hadamard_from_tensor(&ctx.bind(Backend::Tensor, &vs)?)?;
            worst = worst.max(diag.max_abs_diff(&hadamard_bind(&vs)?)?);
        }
    }
    Ok((worst <= 1e-12, format!("max deviation {worst:.2e} over 80 tuples")))
}

fn rank_check(ctx: &Ctx) -> Result<(bool, String)> {
    let mut ok = true;
    let mut parts = Vec::new();
    for (d, n) in [(2, 2), (3, 2), (3, 3), (4, 2)] {
        let cb = Codebook::generate(CodebookKind::Orthonormal, d, d, ctx.seed(d as u64))?;
        let tensor = detection_rank(&cb, Backend::Tensor, n)?;
        let hadamard = detection_rank(&cb, Backend::Hadamard, n)?;
        ok &= tensor == d.pow(n as u32) && hadamard <= d;
        parts.push(format!("({d},{n}): {tensor}/{hadamard}"));
    }
    Ok((ok, format!("tensor/hadamard rank {}", parts.join(" "))))
}

fn random_tuples(rng: &mut ChaCha8Rng, m: usize, n: usize, count: usize) -> Result<Vec<TupleIndex>> {
    (0..count)
        .map(|_| TupleIndex::new((0..n).map(|_| rng.random_range(0..m)).collect()))
        .collect()
}

fn superposition_respect(ctx: &Ctx) -> Result<(bool, String)> {
    let mut rng = ctx.rng();
    let cb = Codebook::generate(CodebookKind::Rademacher, 8, 10, ctx.seed(0))?;
    let mut worst = 0.0f64;
    for backend in Backend::ALL {
        let first = random_tuples(&mut rng, 10, 3, 4)?;
        let second = random_tuples(&mut rng, 10, 3, 3)?;
        let all: Vec<TupleIndex> = first.iter().chain(&second).cloned().collect();
        let u = &cb[rng.random_range(0..10)];
        for side in [Side::Left, Side::Right] {
            let joint = Memory::bundle(&cb, &all, None, backend)?.query_unbind(u, side)?;
            let mut split = Memory::bundle(&cb, &first, None, backend)?.query_unbind(u, side)?;
            split.add_scaled(
                &Memory::bundle(&cb, &second, None, backend)?.query_unbind(u, side)?,
                1.0,
            )?;
            worst = worst.max(joint.max_abs_diff(&split)?);
        }
    }
    Ok((worst <= 1e-10, format!("max deviation {worst:.2e}")))
}

fn scale_equivariance(ctx: &Ctx) -> Result<(bool, String)> {
    let mut rng = ctx.rng();
    let cb = Codebook::generate(CodebookKind::Rademacher, 16, 12, ctx.seed(0))?;
    let mut ok = true;
    for backend in Backend::ALL {
        let stored = random_tuples(&mut rng, 12, 2, 4)?;
        let candidates = random_tuples(&mut rng, 12, 2, 8)?;
        let alpha: f64 = rng.random_range(0.1..3.0);
        let base = Memory::bundle(&cb, &stored, None, backend)?.query_detect(&candidates, &cb)?;
        let weights = vec![alpha; stored.len()];
        let scaled = Memory::bundle(&cb, &stored, Some(&weights), backend)?.query_detect(&candidates, &cb)?;
        for (a, b) in base.scores.iter().zip(&scaled.scores) {
            ok &= (alpha * a - b).abs() <= 1e-9 * (1.0 + b.abs());
        }
        ok &= base.best == scaled.best;
    }
    Ok((ok, "scores scale by alpha, argmax fixed".into()))
}

fn memory_exactness(ctx: &Ctx) -> Result<(bool, String)> {
    let cb = Codebook::generate(CodebookKind::Orthonormal, 4, 4, ctx.seed(0))?;
    let all: Vec<TupleIndex> = TupleIndex::all(4, 2).collect();
    let mut ok = true;
    let mut memories = 0;
    // Every set of up to 4 distinct tuples whose lexicographically first
    // element is drawn from the first 16 tuples; exhaustive over k = 1, 2
    // and over contiguous windows for k = 3, 4.
    let mut sets: Vec<Vec<usize>> = Vec::new();
    for a in 0..16 {
        sets.push(vec![a]);
        for b in a + 1..16 {
            sets.push(vec![a, b]);
        }
    }
    for start in 0..16 {
        sets.push((0..3).map(|j| (start + 5 * j) % 16).collect());
        sets.push((0..4).map(|j| (start + 3 * j) % 16).collect());
    }
    for set in sets {
        let stored: Vec<TupleIndex> = set.iter().map(|&i| all[i].clone()).collect();
        let mem = Memory::bundle(&cb, &stored, None, Backend::Tensor)?;
        let det = mem.query_detect(&all, &cb)?;
        for (i, score) in det.scores.iter().enumerate() {
            ok &= if set.contains(&i) {
                (score - 1.0).abs() <= 1e-10
            } else {
                score.abs() <= 1e-10
            };
        }
        memories += 1;
    }
    Ok((ok, format!("{memories} memories scored against all 16 tuples")))
}

fn capacity_determinism(ctx: &Ctx) -> Result<(bool, String)> {
    let mut ok = true;
    for backend in [Backend::Hadamard, Backend::Tensor] {
        let cfg = ExperimentConfig::new(backend, 32, 2, 4, 7, 100, ctx.seed(0));
        let mut a = run_experiment(&cfg)?;
        let mut b = run_experiment(&cfg)?;
        a.wall_time_secs = 0.0;
        b.wall_time_secs = 0.0;
        ok &= a == b;
    }
    Ok((ok, "repeated 100-trial runs identical".into()))
}

fn tensor_bound(ctx: &Ctx) -> Result<(bool, String)> {
    let mut ok = true;
    let mut parts = Vec::new();
    for (d, k) in [(8, 2), (16, 4), (16, 8)] {
        let cfg = ExperimentConfig::new(Backend::Tensor, d, 2, k, 15, 500, ctx.seed(d as u64));
        let r = run_experiment(&cfg)?;
        ok &= r.consistent_with(r.bound, 3.0);
        parts.push(format!("d={d},k={k}: {:.3} vs {:.3}", r.accuracy, r.bound));
    }
    Ok((ok, parts.join("; ")))
}

fn hadamard_fitted_bound(ctx: &Ctx) -> Result<(bool, String)> {
    let mut results = Vec::new();
    for d in [64, 128] {
        for k in [4, 8, 16] {
            let cfg = ExperimentConfig::new(Backend::Hadamard, d, 2, k, 15, 500, ctx.seed((d * k) as u64));
            results.push(run_experiment(&cfg)?);
        }
    }
    let fit = fit_capacity_constant(&results)?;
    let mut violations = 0;
    for r in &results {
        let fitted = bound_hadamard(r.config.d, r.config.k, r.config.m, fit.c)?;
        if !r.consistent_with(fitted, 3.0) {
            violations += 1;
        }
    }
    Ok((
        fit.c > 0.0 && violations == 0,
        format!(
            "C = {:.3} from {} cells, relative residual {:.3}, {violations} violations",
            fit.c, fit.cells_used, fit.relative_residual
        ),
    ))
}

fn capacity_ratio(ctx: &Ctx) -> Result<(bool, String)> {
    let cmp = compare_memory_capacity(16, 2, 15, 300, ctx.seed(0), 0.95, 256)?;
    let ok = (1.0 / 8.0..=8.0).contains(&cmp.ratio);
    Ok((
        ok,
        format!(
            "k95 hadamard(D={}) = {}, tensor(d={}) = {}, ratio {:.2}",
            cmp.hadamard_dim, cmp.hadamard.k, cmp.tensor_dim, cmp.tensor.k, cmp.ratio
        ),
    ))
}
