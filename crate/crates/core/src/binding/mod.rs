//! Binding operators, their unbinding inverses and detection functionals.
//!
//! Three backends are provided:
//!
//! - **Tensor**: the order-`n` outer product, `d^n` values stored row-major
//!   with the last index fastest. Left unbinding contracts the first mode,
//!   right unbinding the last.
//! - **Hadamard**: the entrywise product, `d` values. Unbinding multiplies
//!   entrywise again, which is an exact inverse only for ±1 codes.
//! - **Convolution**: iterated circular convolution, `d` values. Unbinding is
//!   circular correlation and is only approximate.
//!
//! Every operator here is multilinear in its embedding arguments and linear in
//! the representation argument, so all of them respect superposition.

mod convolution;
mod hadamard;
mod rank;
mod tensor;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::codebook::{Codebook, CodebookKind, Embedding};
use crate::error::{ensure_dim, Result, VsaError};

pub use convolution::{circular_convolution, circular_correlation, conv_bind, conv_detect, conv_unbind};
pub use hadamard::{hadamard_bind, hadamard_detect, hadamard_from_tensor, hadamard_unbind};
pub use rank::{detection_matrix, detection_rank, numerical_rank, RANK_MAX_SIDE, RANK_REL_TOL};
pub use tensor::{tensor_bind, tensor_detect, tensor_unbind_left, tensor_unbind_right, MAX_TENSOR_VALUES};

/// Which binding operator produced a representation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    Tensor,
    Hadamard,
    Convolution,
}

impl Backend {
    pub const ALL: [Backend; 3] = [Backend::Tensor, Backend::Hadamard, Backend::Convolution];

    pub fn as_str(self) -> &'static str {
        match self {
            Backend::Tensor => "tensor",
            Backend::Hadamard => "hadamard",
            Backend::Convolution => "convolution",
        }
    }

    /// Number of stored values for an order-`order` representation.
    pub fn rep_len(self, dim: usize, order: usize) -> Result<usize> {
        match self {
            Backend::Tensor => tensor::checked_len(dim, order),
            Backend::Hadamard | Backend::Convolution => Ok(dim),
        }
    }

    pub fn bind(self, vs: &[&Embedding]) -> Result<BoundRep> {
        match self {
            Backend::Tensor => tensor_bind(vs),
            Backend::Hadamard => hadamard_bind(vs),
            Backend::Convolution => conv_bind(vs),
        }
    }

    /// Adds `weight * bind(vs)` into `out` without materializing the bound
    /// representation. `out` must already have the right length.
    pub(crate) fn bind_accumulate(self, vs: &[&Embedding], weight: f64, out: &mut [f64]) -> Result<()> {
        match self {
            Backend::Tensor => tensor::outer_accumulate(vs, weight, out),
            Backend::Hadamard => {
                let h = hadamard_bind(vs)?;
                out.iter_mut().zip(h.values()).for_each(|(o, x)| *o += weight * x);
                Ok(())
            }
            Backend::Convolution => {
                let c = conv_bind(vs)?;
                out.iter_mut().zip(c.values()).for_each(|(o, x)| *o += weight * x);
                Ok(())
            }
        }
    }

    pub fn unbind(self, u: &Embedding, rep: &BoundRep, side: Side) -> Result<BoundRep> {
        rep.expect_backend(self)?;
        match (self, side) {
            (Backend::Tensor, Side::Left) => tensor_unbind_left(u, rep),
            (Backend::Tensor, Side::Right) => tensor_unbind_right(rep, u),
            (Backend::Hadamard, _) => hadamard_unbind(u, rep),
            (Backend::Convolution, _) => conv_unbind(u, rep),
        }
    }

    pub fn detect(self, vs: &[&Embedding], rep: &BoundRep) -> Result<f64> {
        match self {
            Backend::Tensor => tensor_detect(vs, rep),
            Backend::Hadamard => hadamard_detect(vs, rep),
            Backend::Convolution => conv_detect(vs, rep),
        }
    }

    /// Factor applied to a single unbinding step so that unbinding a matched
    /// factor returns the remainder at unit scale.
    ///
    /// For raw ±1 codes a tensor contraction or a circular correlation picks
    /// up `<v,v> = d`, while the Hadamard product is already exact.
    pub fn unbind_scale(self, kind: CodebookKind, dim: usize) -> f64 {
        match (self, kind) {
            (Backend::Hadamard, _) => 1.0,
            (_, CodebookKind::Rademacher) => 1.0 / dim as f64,
            _ => 1.0,
        }
    }

    /// Factor that maps the unscaled detection score of a matched order-`n`
    /// tuple to 1. Scores are always reported unscaled; this is metadata.
    pub fn score_scale(self, kind: CodebookKind, dim: usize, order: usize) -> f64 {
        let d = dim as f64;
        match (self, kind) {
            (Backend::Hadamard, CodebookKind::Rademacher) => 1.0 / d,
            (_, CodebookKind::Rademacher) => d.powi(-(order as i32)),
            _ => 1.0,
        }
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Backend {
    type Err = VsaError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "tensor" => Ok(Backend::Tensor),
            "hadamard" => Ok(Backend::Hadamard),
            "convolution" | "conv" => Ok(Backend::Convolution),
            other => Err(VsaError::InvalidParameter(format!("unknown backend `{other}`"))),
        }
    }
}

/// Which slot an unbinding removes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    Right,
}

/// A bound representation of an `order`-tuple of `dim`-dimensional embeddings.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundRep {
    backend: Backend,
    order: usize,
    dim: usize,
    values: Vec<f64>,
}

impl BoundRep {
    pub fn new(backend: Backend, order: usize, dim: usize, values: Vec<f64>) -> Result<Self> {
        if order == 0 || dim == 0 {
            return Err(VsaError::InvalidParameter(format!(
                "bound representation needs order >= 1 and dim >= 1 (got order={order}, dim={dim})"
            )));
        }
        let len = backend.rep_len(dim, order)?;
        if values.len() != len {
            return Err(VsaError::InvalidParameter(format!(
                "{backend} representation of order {order}, dim {dim} needs {len} values, got {}",
                values.len()
            )));
        }
        Ok(Self {
            backend,
            order,
            dim,
            values,
        })
    }

    pub fn zeros(backend: Backend, order: usize, dim: usize) -> Result<Self> {
        let len = backend.rep_len(dim, order)?;
        Self::new(backend, order, dim, vec![0.0; len])
    }

    pub fn backend(&self) -> Backend {
        self.backend
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn scaled(&self, alpha: f64) -> BoundRep {
        BoundRep {
            values: self.values.iter().map(|x| alpha * x).collect(),
            ..self.clone()
        }
    }

    /// `self += alpha * other`.
    pub fn add_scaled(&mut self, other: &BoundRep, alpha: f64) -> Result<()> {
        self.expect_shape(other)?;
        self.values
            .iter_mut()
            .zip(&other.values)
            .for_each(|(a, b)| *a += alpha * b);
        Ok(())
    }

    /// Largest absolute entrywise difference.
    pub fn max_abs_diff(&self, other: &BoundRep) -> Result<f64> {
        self.expect_shape(other)?;
        Ok(max_abs_diff(&self.values, &other.values))
    }

    /// Order-1 contents as an embedding.
    pub fn to_embedding(&self) -> Result<Embedding> {
        if self.order != 1 {
            return Err(VsaError::OrderMismatch {
                expected: 1,
                found: self.order,
            });
        }
        Embedding::new(self.values.clone())
    }

    pub(crate) fn expect_backend(&self, backend: Backend) -> Result<()> {
        if self.backend == backend {
            Ok(())
        } else {
            Err(VsaError::BackendMismatch {
                expected: backend,
                found: self.backend,
            })
        }
    }

    pub(crate) fn expect_shape(&self, other: &BoundRep) -> Result<()> {
        other.expect_backend(self.backend)?;
        ensure_dim(self.dim, other.dim)?;
        if self.order != other.order {
            return Err(VsaError::OrderMismatch {
                expected: self.order,
                found: other.order,
            });
        }
        Ok(())
    }
}

pub(crate) fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Checks that `vs` is a non-empty tuple of equal-dimension embeddings and
/// returns the common dimension.
pub(crate) fn tuple_dim(vs: &[&Embedding]) -> Result<usize> {
    let first = vs
        .first()
        .ok_or(VsaError::Empty("binding needs at least one embedding"))?;
    let d = first.dim();
    for v in &vs[1..] {
        ensure_dim(d, v.dim())?;
    }
    Ok(d)
}

pub(crate) fn expect_order(rep: &BoundRep, order: usize) -> Result<()> {
    if rep.order() == order {
        Ok(())
    } else {
        Err(VsaError::OrderMismatch {
            expected: rep.order(),
            found: order,
        })
    }
}

pub(crate) fn expect_unbindable(rep: &BoundRep) -> Result<()> {
    if rep.order() < 2 {
        Err(VsaError::OrderTooLow {
            required: 2,
            found: rep.order(),
        })
    } else {
        Ok(())
    }
}

/// Indices of an `n`-tuple of codebook entries.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TupleIndex(Vec<usize>);

impl TupleIndex {
    pub fn new(indices: Vec<usize>) -> Result<Self> {
        if indices.is_empty() {
            return Err(VsaError::Empty("tuple index"));
        }
        Ok(Self(indices))
    }

    pub fn order(&self) -> usize {
        self.0.len()
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    /// Looks the tuple up in `cb`.
    pub fn resolve<'a>(&self, cb: &'a Codebook) -> Result<Vec<&'a Embedding>> {
        self.0.iter().map(|&i| cb.get(i)).collect()
    }

    /// Every `n`-tuple over `0..m`, in lexicographic order.
    pub fn all(m: usize, n: usize) -> impl Iterator<Item = TupleIndex> {
        let total = (m as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
        let total = if m == 0 || n == 0 { 0 } else { total };
        (0..total).map(move |mut code| {
            let mut idx = vec![0usize; n];
            for slot in idx.iter_mut().rev() {
                *slot = (code % m as u128) as usize;
                code /= m as u128;
            }
            TupleIndex(idx)
        })
    }
}

impl From<TupleIndex> for Vec<usize> {
    fn from(t: TupleIndex) -> Self {
        t.0
    }
}

/// How far a single unbinding of `u` from `bind(v, w)` lands from the
/// errorless answer `Z·w`, with `Z = <u,v>/d` for ±1 codes.
///
/// Each backend's unbind is rescaled by [`Backend::unbind_scale`] first. The
/// tensor backend returns zero here for any `u`; iterated backends do not.
pub fn spurious_unbind_residual(
    backend: Backend,
    kind: CodebookKind,
    u: &Embedding,
    v: &Embedding,
    w: &Embedding,
) -> Result<f64> {
    let d = v.dim();
    let bound = backend.bind(&[v, w])?;
    let unbound = backend.unbind(u, &bound, Side::Left)?;
    let scale = backend.unbind_scale(kind, d);
    let z = crate::codebook::normalized_dot(u, v, kind.dot_scale())?;
    Ok(unbound
        .values()
        .iter()
        .zip(w.values())
        .map(|(x, wi)| {
            let r = scale * x - z * wi;
            r * r
        })
        .sum::<f64>()
        .sqrt())
}
