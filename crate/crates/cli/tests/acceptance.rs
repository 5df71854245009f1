//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails or runs over its time budget.
//!
//! Run with `cargo test -p vsa-cli --test acceptance`.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use vsa_core::binding::{
    detection_rank, spurious_unbind_residual, tensor_bind, tensor_unbind_left, tensor_unbind_right,
};
use vsa_core::capacity::{compare_memory_capacity, fit_capacity_constant, run_experiment, score_moments};
use vsa_core::codebook::dot_statistics;
use vsa_core::rng::derive_seed;
use vsa_core::stats::binomial_std_error;
use vsa_core::{Backend, Codebook, CodebookKind, ExperimentConfig, ExperimentResult};

type Outcome = Result<(bool, String), String>;

struct Criterion {
    id: u32,
    name: &'static str,
    budget: Duration,
    run: fn() -> Outcome,
}

fn e<T: std::fmt::Display>(err: T) -> String {
    err.to_string()
}

// Plain-loop oracles, kept separate from the library's kernels.

fn oracle_dot(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..a.len() {
        s += a[i] * b[i];
    }
    s
}

fn oracle_correlation(u: &[f64], c: &[f64]) -> Vec<f64> {
    let d = u.len();
    (0..d).map(|k| (0..d).map(|i| u[i] * c[(i + k) % d]).sum()).collect()
}

fn oracle_convolution(a: &[f64], b: &[f64]) -> Vec<f64> {
    let d = a.len();
    (0..d)
        .map(|k| (0..d).map(|i| a[i] * b[(k + d - i) % d]).sum())
        .collect()
}

fn inf_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn exact_tensor_unbind() -> Outcome {
    let d = 8;
    let cb = Codebook::generate(CodebookKind::Orthonormal, d, d, 1).map_err(e)?;
    let mut worst: f64 = 0.0;
    for i in 0..d {
        for j in 0..d {
            let t = tensor_bind(&[&cb[i], &cb[j]]).map_err(e)?;
            let left = tensor_unbind_left(&cb[i], &t).map_err(e)?;
            let right = tensor_unbind_right(&t, &cb[j]).map_err(e)?;
            worst = worst.max(inf_dist(left.values(), cb[j].values()));
            worst = worst.max(inf_dist(right.values(), cb[i].values()));
        }
    }
    Ok((
        worst <= 1e-12,
        format!("max residual {worst:.2e} over 64 pairs, limit 1e-12"),
    ))
}

fn spurious_decomposition() -> Outcome {
    let d = 16;
    let mut worst: f64 = 0.0;
    for s in 0..1000u64 {
        let kind = if s % 2 == 0 {
            CodebookKind::Rademacher
        } else {
            CodebookKind::Orthonormal
        };
        let cb = Codebook::generate(kind, d, 3, derive_seed(2, s)).map_err(e)?;
        let (u, v, w) = (&cb[0], &cb[1], &cb[2]);
        let t = tensor_bind(&[v, w]).map_err(e)?;
        let got = tensor_unbind_left(u, &t).map_err(e)?;
        let z = oracle_dot(u.values(), v.values());
        let want: Vec<f64> = w.values().iter().map(|x| z * x).collect();
        worst = worst.max(inf_dist(got.values(), &want));
    }
    Ok((
        worst <= 1e-10,
        format!("max deviation {worst:.2e} over 1000 triples, limit 1e-10"),
    ))
}

fn iterated_impossibility() -> Outcome {
    let d = 256;
    let threshold = 0.5 * (d as f64).sqrt();
    let mut details = Vec::new();
    let mut ok = true;
    for backend in [Backend::Hadamard, Backend::Convolution] {
        let mut hits = 0;
        let mut disagreement: f64 = 0.0;
        for s in 0..100u64 {
            let cb = Codebook::generate(CodebookKind::Rademacher, d, 3, derive_seed(3, s)).map_err(e)?;
            let (u, v, w) = (cb[0].values(), cb[1].values(), cb[2].values());
            let z = oracle_dot(u, v) / d as f64;
            let unbound: Vec<f64> = match backend {
                Backend::Hadamard => (0..d).map(|i| u[i] * v[i] * w[i]).collect(),
                _ => oracle_correlation(u, &oracle_convolution(v, w))
                    .iter()
                    .map(|x| x / d as f64)
                    .collect(),
            };
            let oracle = unbound
                .iter()
                .zip(w)
                .map(|(x, wi)| (x - z * wi).powi(2))
                .sum::<f64>()
                .sqrt();
            let lib = spurious_unbind_residual(backend, cb.kind(), &cb[0], &cb[1], &cb[2]).map_err(e)?;
            disagreement = disagreement.max((oracle - lib).abs());
            hits += (lib > threshold) as usize;
        }
        ok &= hits >= 99 && disagreement < 1e-9;
        details.push(format!("{backend}: {hits}/100 above {threshold}"));
    }
    Ok((ok, details.join(", ")))
}

fn detection_ranks() -> Outcome {
    let mut ok = true;
    let mut details = Vec::new();
    for (d, n) in [(2usize, 2usize), (3, 2), (3, 3), (4, 2)] {
        let cb = Codebook::generate(CodebookKind::Orthonormal, d, d, 4).map_err(e)?;
        let tensor = detection_rank(&cb, Backend::Tensor, n).map_err(e)?;
        let hadamard = detection_rank(&cb, Backend::Hadamard, n).map_err(e)?;
        let full = d.pow(n as u32);
        ok &= tensor == full && hadamard <= d;
        details.push(format!("({d},{n}) tensor {tensor}/{full} hadamard {hadamard}"));
    }
    Ok((ok, details.join("; ")))
}

fn rademacher_statistics() -> Outcome {
    let s100 = dot_statistics(100, 100_000, 5).map_err(e)?;
    let var_ok = (0.0085..=0.0115).contains(&s100.sample_variance);
    let s16 = dot_statistics(16, 100_000, 5).map_err(e)?;
    let fit = s16.binomial_fit().map_err(e)?;
    Ok((
        var_ok && fit.passes(0.01),
        format!(
            "var Z at d=100: {:.5} (want [0.0085, 0.0115]); d=16 chi-square {:.2} on {} dof, p = {:.3}",
            s100.sample_variance, fit.statistic, fit.dof, fit.p_value
        ),
    ))
}

/// Noise-term count for the matched Hadamard score: the `k - 1` other
/// stored bindings each add `d` unit-variance products. Measured 777.2
/// at seed 7, against this count of 768.
const HADAMARD_MATCH_NOISE_TERMS: f64 = 256.0 * 3.0;

fn hadamard_moments() -> Outcome {
    let cfg = ExperimentConfig::new(Backend::Hadamard, 256, 2, 4, 15, 20_000, 7);
    let m = score_moments(&cfg).map_err(e)?;
    let mean_ok = (m.match_mean - 256.0).abs() <= 0.03 * 256.0;
    let var_ok = (m.match_var - HADAMARD_MATCH_NOISE_TERMS).abs() <= 0.10 * HADAMARD_MATCH_NOISE_TERMS;
    Ok((
        mean_ok && var_ok,
        format!(
            "match mean {:.2} (256 +/- 3%), match variance {:.1} ({HADAMARD_MATCH_NOISE_TERMS} +/- 10%)",
            m.match_mean, m.match_var
        ),
    ))
}

/// Independent evaluation of `1 - m exp(-d^n / (2k - 1))`.
fn oracle_tensor_bound(d: usize, n: usize, k: usize, m: usize) -> f64 {
    1.0 - m as f64 * (-((d as f64).powi(n as i32)) / (2.0 * k as f64 - 1.0)).exp()
}

fn tensor_capacity() -> Outcome {
    let mut ok = true;
    let mut details = Vec::new();
    for k in [2, 4, 8] {
        let cfg = ExperimentConfig::new(Backend::Tensor, 32, 2, k, 15, 1000, 8);
        let r = run_experiment(&cfg).map_err(e)?;
        let bound = oracle_tensor_bound(32, 2, k, 15);
        let se = binomial_std_error(bound.clamp(0.0, 1.0), cfg.trials).max(binomial_std_error(r.accuracy, cfg.trials));
        ok &= r.accuracy >= bound - 3.0 * se && (r.bound - bound).abs() < 1e-12;
        details.push(format!("k={k}: {:.3} vs bound {:.6}", r.accuracy, bound));
    }
    Ok((ok, details.join("; ")))
}

fn hadamard_shape() -> Outcome {
    let ds = [256usize, 512, 1024];
    let ks = [8usize, 16, 32];
    let mut grid: Vec<Vec<ExperimentResult>> = Vec::new();
    for &d in &ds {
        let mut row = Vec::new();
        for &k in &ks {
            row.push(run_experiment(&ExperimentConfig::new(Backend::Hadamard, d, 2, k, 15, 1000, 9)).map_err(e)?);
        }
        grid.push(row);
    }
    // a may exceed b by at most two combined standard errors.
    let within = |a: &ExperimentResult, b: &ExperimentResult| {
        let sigma = (a.accuracy_std_error.powi(2) + b.accuracy_std_error.powi(2)).sqrt();
        a.accuracy <= b.accuracy + 2.0 * sigma
    };
    let mut monotone = true;
    for i in 0..ds.len() {
        for j in 0..ks.len() {
            if j + 1 < ks.len() {
                monotone &= within(&grid[i][j + 1], &grid[i][j]);
            }
            if i + 1 < ds.len() {
                monotone &= within(&grid[i][j], &grid[i + 1][j]);
            }
        }
    }
    let flat: Vec<ExperimentResult> = grid.iter().flatten().cloned().collect();
    let fit = fit_capacity_constant(&flat).map_err(e)?;
    let table = grid
        .iter()
        .zip(ds)
        .map(|(row, d)| {
            let accs: Vec<String> = row.iter().map(|r| format!("{:.3}", r.accuracy)).collect();
            format!("d={d}: [{}]", accs.join(" "))
        })
        .collect::<Vec<_>>()
        .join(", ");
    Ok((
        monotone && fit.c > 0.0 && fit.relative_residual < 0.5,
        format!(
            "{table}; monotone {monotone}; C = {:.3}, relative residual {:.3} from {} cells",
            fit.c, fit.relative_residual, fit.cells_used
        ),
    ))
}

fn capacity_ratio() -> Outcome {
    let c = compare_memory_capacity(64, 2, 15, 1000, 9, 0.95, 4096).map_err(e)?;
    let ok = (0.125..=8.0).contains(&c.ratio);
    Ok((
        ok,
        format!(
            "k at 95%: hadamard(D={}) = {}, tensor(d={}, n={}) = {}, ratio {:.3}",
            c.hadamard_dim, c.hadamard.k, c.tensor_dim, c.order, c.tensor.k, c.ratio
        ),
    ))
}

fn capacity_rows(dir: &Path, name: &str) -> Result<Vec<u8>, String> {
    let out = dir.join(name);
    let status = Command::new(env!("CARGO_BIN_EXE_vsa"))
        .args([
            "capacity",
            "--backend",
            "hadamard,tensor",
            "--d",
            "16,32",
            "--k",
            "2,8",
            "--trials",
            "200",
        ])
        .args(["--seed", "10", "--out"])
        .arg(&out)
        .status()
        .map_err(e)?;
    if !status.success() {
        return Err(format!("vsa capacity exited with {status}"));
    }
    std::fs::read(&out).map_err(e)
}

fn reproducibility() -> Outcome {
    let dir = tempfile::tempdir().map_err(e)?;
    let a = capacity_rows(dir.path(), "a.csv")?;
    let b = capacity_rows(dir.path(), "b.csv")?;
    let rows = a.split(|&c| c == b'\n').filter(|l| !l.is_empty()).count() - 1;
    Ok((
        a == b && rows == 8,
        format!("{rows} data rows, {} bytes, identical: {}", a.len(), a == b),
    ))
}

const CRITERIA: &[Criterion] = &[
    Criterion {
        id: 1,
        name: "exact tensor unbinding",
        budget: Duration::from_secs(1),
        run: exact_tensor_unbind,
    },
    Criterion {
        id: 2,
        name: "spurious-unbind decomposition",
        budget: Duration::from_secs(1),
        run: spurious_decomposition,
    },
    Criterion {
        id: 3,
        name: "iterated-representation impossibility",
        budget: Duration::from_secs(5),
        run: iterated_impossibility,
    },
    Criterion {
        id: 4,
        name: "detection rank",
        budget: Duration::from_secs(10),
        run: detection_ranks,
    },
    Criterion {
        id: 5,
        name: "rademacher statistics",
        budget: Duration::from_secs(10),
        run: rademacher_statistics,
    },
    Criterion {
        id: 6,
        name: "hadamard score moments",
        budget: Duration::from_secs(30),
        run: hadamard_moments,
    },
    Criterion {
        id: 7,
        name: "tensor capacity",
        budget: Duration::from_secs(120),
        run: tensor_capacity,
    },
    Criterion {
        id: 8,
        name: "hadamard capacity shape",
        budget: Duration::from_secs(300),
        run: hadamard_shape,
    },
    Criterion {
        id: 9,
        name: "memory-capacity ratio",
        budget: Duration::from_secs(300),
        run: capacity_ratio,
    },
    Criterion {
        id: 10,
        name: "reproducibility",
        budget: Duration::from_secs(60),
        run: reproducibility,
    },
];

fn main() {
    // Accept and ignore libtest flags such as --nocapture.
    let only: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for c in CRITERIA.iter().filter(|c| only.is_empty() || only.contains(&c.id)) {
        let start = Instant::now();
        let outcome = (c.run)();
        let elapsed = start.elapsed();
        let (passed, detail) = match outcome {
            Ok((p, d)) if elapsed <= c.budget => (p, d),
            Ok((_, d)) => (false, format!("{d}; over budget of {:?}", c.budget)),
            Err(err) => (false, format!("error: {err}")),
        };
        failed += !passed as usize;
        println!(
            "{} [{:>2}] {:<38} {:>8.2}s  {detail}",
            if passed { "PASS" } else { "FAIL" },
            c.id,
            c.name,
            elapsed.as_secs_f64()
        );
    }
    println!("acceptance: {failed} failed");
    if failed > 0 {
        std::process::exit(1);
    }
}
