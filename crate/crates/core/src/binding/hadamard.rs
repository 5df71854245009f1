use crate::codebook::Embedding;
use crate::error::{ensure_dim, Result};

use super::{expect_order, expect_unbindable, tuple_dim, Backend, BoundRep};

/// Entrywise product of all `n` embeddings.
pub fn hadamard_bind(vs: &[&Embedding]) -> Result<BoundRep> {
    let d = tuple_dim(vs)?;
    let mut values = vec![1.0; d];
    for v in vs {
        values.iter_mut().zip(v.iter()).for_each(|(a, &x)| *a *= x);
    }
    BoundRep::new(Backend::Hadamard, vs.len(), d, values)
}

/// `u ⊙ h`, dropping the order by one. Exact inverse of binding only when
/// `u` has ±1 entries.
pub fn hadamard_unbind(u: &Embedding, h: &BoundRep) -> Result<BoundRep> {
    h.expect_backend(Backend::Hadamard)?;
    expect_unbindable(h)?;
    ensure_dim(h.dim(), u.dim())?;
    let values = h.values().iter().zip(u.iter()).map(|(a, b)| a * b).collect();
    BoundRep::new(Backend::Hadamard, h.order() - 1, h.dim(), values)
}

/// Unbinds every query embedding entrywise, then sums the coordinates.
/// Unscaled: a matched ±1 tuple scores `d`.
pub fn hadamard_detect(vs: &[&Embedding], h: &BoundRep) -> Result<f64> {
    h.expect_backend(Backend::Hadamard)?;
    let d = tuple_dim(vs)?;
    ensure_dim(h.dim(), d)?;
    expect_order(h, vs.len())?;
    Ok((0..d).map(|c| vs.iter().fold(h.values()[c], |acc, v| acc * v[c])).sum())
}

/// Main diagonal `T[i, i, …, i]` of an order-`n` tensor. This is the linear
/// map that carries `tensor_bind(vs)` onto `hadamard_bind(vs)`.
pub fn hadamard_from_tensor(t: &BoundRep) -> Result<BoundRep> {
    t.expect_backend(Backend::Tensor)?;
    let d = t.dim();
    // Offset of (i,…,i) is i * (d^{n-1} + … + d + 1).
    let step: usize = (0..t.order()).map(|j| d.pow(j as u32)).sum();
    let values = (0..d).map(|i| t.values()[i * step]).collect();
    BoundRep::new(Backend::Hadamard, t.order(), d, values)
}
