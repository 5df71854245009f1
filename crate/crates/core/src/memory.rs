//! Superposition memories: weighted sums of bound tuples, queried by
//! unbinding or by detection.

use serde::Serialize;

use crate::binding::{Backend, BoundRep, Side, TupleIndex};
use crate::codebook::{Codebook, Embedding};
use crate::error::{ensure_dim, Result, VsaError};

/// A weighted superposition of bound tuples plus the tuples themselves,
/// kept as ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct Memory {
    rep: BoundRep,
    stored: Vec<(TupleIndex, f64)>,
}

impl Memory {
    /// `Σ_i weights[i] · bind(tuples[i])`. `weights` defaults to all ones.
    /// Repeated tuples and negative weights are allowed.
    pub fn bundle(cb: &Codebook, tuples: &[TupleIndex], weights: Option<&[f64]>, backend: Backend) -> Result<Self> {
        let first = tuples.first().ok_or(VsaError::Empty("no tuples to bundle"))?;
        let order = first.order();
        if let Some(w) = weights {
            if w.len() != tuples.len() {
                return Err(VsaError::InvalidParameter(format!(
                    "{} weights for {} tuples",
                    w.len(),
                    tuples.len()
                )));
            }
        }
        let mut rep = BoundRep::zeros(backend, order, cb.dim())?;
        let mut stored = Vec::with_capacity(tuples.len());
        for (i, tuple) in tuples.iter().enumerate() {
            if tuple.order() != order {
                return Err(VsaError::OrderMismatch {
                    expected: order,
                    found: tuple.order(),
                });
            }
            let weight = weights.map_or(1.0, |w| w[i]);
            let vs = tuple.resolve(cb)?;
            backend.bind_accumulate(&vs, weight, rep.values_mut())?;
            stored.push((tuple.clone(), weight));
        }
        Ok(Self { rep, stored })
    }

    pub fn rep(&self) -> &BoundRep {
        &self.rep
    }

    pub fn stored(&self) -> &[(TupleIndex, f64)] {
        &self.stored
    }

    pub fn backend(&self) -> Backend {
        self.rep.backend()
    }

    pub fn order(&self) -> usize {
        self.rep.order()
    }

    pub fn dim(&self) -> usize {
        self.rep.dim()
    }

    /// Rebuilds the superposition one bound tuple at a time from the stored
    /// ground truth.
    pub fn reconstruct(&self, cb: &Codebook) -> Result<BoundRep> {
        let mut acc = BoundRep::zeros(self.backend(), self.order(), self.dim())?;
        for (tuple, weight) in &self.stored {
            let bound = self.backend().bind(&tuple.resolve(cb)?)?;
            acc.add_scaled(&bound, *weight)?;
        }
        Ok(acc)
    }

    /// Unbinds `u` from the whole superposition.
    pub fn query_unbind(&self, u: &Embedding, side: Side) -> Result<BoundRep> {
        self.backend().unbind(u, &self.rep, side)
    }

    /// Scores every candidate tuple against the superposition.
    pub fn query_detect(&self, candidates: &[TupleIndex], cb: &Codebook) -> Result<Detection> {
        if candidates.is_empty() {
            return Err(VsaError::Empty("no candidate tuples"));
        }
        ensure_dim(self.dim(), cb.dim())?;
        let scores = candidates
            .iter()
            .map(|t| self.backend().detect(&t.resolve(cb)?, &self.rep))
            .collect::<Result<Vec<f64>>>()?;
        Ok(Detection::from_scores(scores))
    }
}

/// Detection scores for a candidate list, with the winning candidate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Detection {
    pub scores: Vec<f64>,
    /// Index of the highest score; the lowest index among tied maxima.
    pub best: usize,
    /// Whether another candidate shares the maximum score.
    pub tied: bool,
}

impl Detection {
    pub fn from_scores(scores: Vec<f64>) -> Self {
        let mut best = 0;
        let mut tied = false;
        for (i, &s) in scores.iter().enumerate().skip(1) {
            if s > scores[best] {
                best = i;
                tied = false;
            } else if s == scores[best] {
                tied = true;
            }
        }
        Self { scores, best, tied }
    }
}
