//! Object embeddings: Rademacher codes, orthonormal codes and their
//! dot-product statistics.
//!
//! Rademacher embeddings are stored as raw ±1 entries. The `1/d` normalization
//! is applied by [`normalized_dot`] (with [`DotScale::ByDimension`]) and by
//! representation-level scale factors, never baked into the stored values.

use std::fmt;
use std::ops::{Deref, Index};

use rand::RngCore;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{ensure_dim, Result, VsaError};
use crate::rng::{self, Purpose};
use crate::stats::{binomial_pmf, chi_square_gof, ChiSquareTest};

/// Dense real code of one object.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding(Vec<f64>);

impl Embedding {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(VsaError::InvalidParameter("embedding dimension must be >= 1".into()));
        }
        if values.iter().any(|x| !x.is_finite()) {
            return Err(VsaError::InvalidParameter("embedding entries must be finite".into()));
        }
        Ok(Self(values))
    }

    /// Standard basis vector `e_index` of dimension `d`.
    pub fn basis(d: usize, index: usize) -> Result<Self> {
        if index >= d {
            return Err(VsaError::IndexOutOfRange { index, size: d });
        }
        let mut values = vec![0.0; d];
        values[index] = 1.0;
        Self::new(values)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_values(self) -> Vec<f64> {
        self.0
    }

    pub fn dot(&self, other: &Embedding) -> Result<f64> {
        ensure_dim(self.dim(), other.dim())?;
        Ok(dot(&self.0, &other.0))
    }

    pub fn norm(&self) -> f64 {
        dot(&self.0, &self.0).sqrt()
    }

    /// `alpha * self + beta * other`.
    pub fn combine(&self, alpha: f64, other: &Embedding, beta: f64) -> Result<Embedding> {
        ensure_dim(self.dim(), other.dim())?;
        Embedding::new(self.0.iter().zip(&other.0).map(|(a, b)| alpha * a + beta * b).collect())
    }

    pub fn scaled(&self, alpha: f64) -> Embedding {
        Embedding(self.0.iter().map(|x| alpha * x).collect())
    }

    pub fn is_bipolar(&self) -> bool {
        self.0.iter().all(|&x| x == 1.0 || x == -1.0)
    }
}

impl Deref for Embedding {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// How a codebook's embeddings were produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CodebookKind {
    /// Independent ±1 entries.
    Rademacher,
    /// Seeded Gaussian draw, orthonormalized.
    Orthonormal,
    /// The first `m` standard basis vectors. Ignores the seed.
    Canonical,
}

impl CodebookKind {
    pub fn is_orthonormal(self) -> bool {
        matches!(self, CodebookKind::Orthonormal | CodebookKind::Canonical)
    }

    /// Scale convention for dot products between members of this kind.
    pub fn dot_scale(self) -> DotScale {
        match self {
            CodebookKind::Rademacher => DotScale::ByDimension,
            CodebookKind::Orthonormal | CodebookKind::Canonical => DotScale::Unit,
        }
    }
}

impl fmt::Display for CodebookKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CodebookKind::Rademacher => "rademacher",
            CodebookKind::Orthonormal => "orthonormal",
            CodebookKind::Canonical => "canonical",
        })
    }
}

/// The parameters that fully determine a codebook. This is also its
/// serialized form: values are regenerated on load, never stored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodebookSpec {
    pub kind: CodebookKind,
    pub d: usize,
    pub m: usize,
    pub seed: u64,
}

/// An ordered set of `m` embeddings of dimension `d`.
#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    spec: CodebookSpec,
    embeddings: Vec<Embedding>,
}

impl Codebook {
    /// Generates a codebook. Deterministic in all arguments.
    pub fn generate(kind: CodebookKind, d: usize, m: usize, seed: u64) -> Result<Self> {
        if d == 0 || m == 0 {
            return Err(VsaError::InvalidParameter(format!(
                "codebook needs d >= 1 and m >= 1 (got d={d}, m={m})"
            )));
        }
        if kind.is_orthonormal() && m > d {
            return Err(VsaError::InvalidParameter(format!(
                "an orthonormal codebook cannot hold m={m} > d={d} embeddings"
            )));
        }
        let embeddings = match kind {
            CodebookKind::Rademacher => rademacher(d, m, seed),
            CodebookKind::Orthonormal => orthonormal(d, m, seed),
            CodebookKind::Canonical => (0..m).map(|i| Embedding::basis(d, i)).collect::<Result<_>>()?,
        };
        Ok(Self {
            spec: CodebookSpec { kind, d, m, seed },
            embeddings,
        })
    }

    /// Regenerates the codebook for a new seed, reusing its storage when the
    /// kind allows it. Equivalent to `generate(kind, d, m, seed)`.
    pub fn reseed(&mut self, seed: u64) {
        self.spec.seed = seed;
        match self.spec.kind {
            CodebookKind::Rademacher => {
                let mut rng = rng::stream(seed, Purpose::Codebook, 0);
                for e in &mut self.embeddings {
                    rng::fill_signs(&mut rng, &mut e.0);
                }
            }
            CodebookKind::Orthonormal => self.embeddings = orthonormal(self.spec.d, self.spec.m, seed),
            CodebookKind::Canonical => {}
        }
    }

    pub fn from_spec(spec: CodebookSpec) -> Result<Self> {
        Self::generate(spec.kind, spec.d, spec.m, spec.seed)
    }

    pub fn spec(&self) -> CodebookSpec {
        self.spec
    }

    pub fn kind(&self) -> CodebookKind {
        self.spec.kind
    }

    pub fn seed(&self) -> u64 {
        self.spec.seed
    }

    pub fn dim(&self) -> usize {
        self.spec.d
    }

    pub fn len(&self) -> usize {
        self.embeddings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.embeddings.is_empty()
    }

    pub fn embeddings(&self) -> &[Embedding] {
        &self.embeddings
    }

    pub fn get(&self, index: usize) -> Result<&Embedding> {
        self.embeddings.get(index).ok_or(VsaError::IndexOutOfRange {
            index,
            size: self.embeddings.len(),
        })
    }

    /// Maximum absolute normalized dot over distinct pairs.
    pub fn max_coherence(&self) -> Result<f64> {
        max_coherence(&self.embeddings, self.kind().dot_scale())
    }
}

impl Index<usize> for Codebook {
    type Output = Embedding;

    fn index(&self, index: usize) -> &Embedding {
        &self.embeddings[index]
    }
}

impl Serialize for Codebook {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.spec.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Codebook {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let spec = CodebookSpec::deserialize(deserializer)?;
        Codebook::from_spec(spec).map_err(serde::de::Error::custom)
    }
}

fn rademacher(d: usize, m: usize, seed: u64) -> Vec<Embedding> {
    let mut rng = rng::stream(seed, Purpose::Codebook, 0);
    (0..m)
        .map(|_| {
            let mut values = vec![0.0; d];
            rng::fill_signs(&mut rng, &mut values);
            Embedding(values)
        })
        .collect()
}

/// Modified Gram–Schmidt with one re-orthogonalization pass over a seeded
/// standard-normal draw. A column that collapses numerically is redrawn.
fn orthonormal(d: usize, m: usize, seed: u64) -> Vec<Embedding> {
    let mut rng = rng::stream(seed, Purpose::Codebook, 0);
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(m);
    while basis.len() < m {
        let mut col: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut rng)).collect();
        let scale = dot(&col, &col).sqrt();
        for _pass in 0..2 {
            for q in &basis {
                let proj = dot(q, &col);
                col.iter_mut().zip(q).for_each(|(c, qi)| *c -= proj * qi);
            }
        }
        let norm = dot(&col, &col).sqrt();
        if norm <= 1e-8 * scale {
            continue;
        }
        col.iter_mut().for_each(|c| *c /= norm);
        basis.push(col);
    }
    basis.into_iter().map(Embedding).collect()
}

/// Whether a dot product should be divided by the dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DotScale {
    /// `<u,v>/d`, for raw ±1 codes.
    ByDimension,
    /// Plain `<u,v>`, for codes that are already unit norm.
    Unit,
}

/// Normalized dot product `Z`. The caller picks the scale explicitly.
pub fn normalized_dot(u: &Embedding, v: &Embedding, scale: DotScale) -> Result<f64> {
    let raw = u.dot(v)?;
    Ok(match scale {
        DotScale::ByDimension => raw / u.dim() as f64,
        DotScale::Unit => raw,
    })
}

/// Maximum `|Z|` over all distinct pairs of `embeddings`.
pub fn max_coherence(embeddings: &[Embedding], scale: DotScale) -> Result<f64> {
    if embeddings.len() < 2 {
        return Err(VsaError::InvalidParameter(
            "coherence needs at least two embeddings".into(),
        ));
    }
    let mut worst = 0.0f64;
    for (i, u) in embeddings.iter().enumerate() {
        for v in &embeddings[i + 1..] {
            worst = worst.max(normalized_dot(u, v, scale)?.abs());
        }
    }
    Ok(worst)
}

/// Sample statistics of `Z = <u,v>/d` over independent Rademacher pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DotStatistics {
    pub d: usize,
    pub n_pairs: usize,
    pub seed: u64,
    pub sample_mean: f64,
    pub sample_variance: f64,
    /// Largest `|Z|` seen over the sampled pairs.
    pub max_abs_offdiag: f64,
    /// `histogram[j]` counts pairs with `d(Z+1)/2 == j`, i.e. pairs that agree
    /// in exactly `j` coordinates. Length `d + 1`.
    pub histogram: Vec<u64>,
}

impl DotStatistics {
    /// Chi-square test of the histogram against `Binomial(d, 1/2)`, pooling
    /// bins that expect fewer than 5 counts.
    pub fn binomial_fit(&self) -> Result<ChiSquareTest> {
        chi_square_gof(&self.histogram, &binomial_pmf(self.d, 0.5), 5.0)
    }
}

/// Samples `n_pairs` independent Rademacher pairs of dimension `d`.
///
/// Signs are drawn as raw bits so `d(Z+1)/2` is counted exactly as the number
/// of agreeing coordinates.
pub fn dot_statistics(d: usize, n_pairs: usize, seed: u64) -> Result<DotStatistics> {
    if d == 0 || n_pairs == 0 {
        return Err(VsaError::InvalidParameter(format!(
            "dot statistics need d >= 1 and n_pairs >= 1 (got d={d}, n_pairs={n_pairs})"
        )));
    }
    let mut rng = rng::stream(seed, Purpose::DotStatistics, 0);
    let words = d.div_ceil(64);
    let tail_mask = match d % 64 {
        0 => u64::MAX,
        r => (1u64 << r) - 1,
    };
    let mut u = vec![0u64; words];
    let mut v = vec![0u64; words];
    let mut histogram = vec![0u64; d + 1];
    let (mut sum, mut sum_sq, mut max_abs) = (0.0f64, 0.0f64, 0.0f64);

    for _ in 0..n_pairs {
        u.iter_mut().for_each(|w| *w = rng.next_u64());
        v.iter_mut().for_each(|w| *w = rng.next_u64());
        let disagree: u32 = u
            .iter()
            .zip(&v)
            .enumerate()
            .map(|(i, (a, b))| {
                let mask = if i + 1 == words { tail_mask } else { u64::MAX };
                ((a ^ b) & mask).count_ones()
            })
            .sum();
        let agree = d - disagree as usize;
        histogram[agree] += 1;
        let z = (2.0 * agree as f64 - d as f64) / d as f64;
        sum += z;
        sum_sq += z * z;
        max_abs = max_abs.max(z.abs());
    }

    let n = n_pairs as f64;
    let mean = sum / n;
    let variance = if n_pairs > 1 {
        ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0)
    } else {
        0.0
    };
    Ok(DotStatistics {
        d,
        n_pairs,
        seed,
        sample_mean: mean,
        sample_variance: variance,
        max_abs_offdiag: max_abs,
        histogram,
    })
}
