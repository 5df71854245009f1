use crate::codebook::Embedding;
use crate::error::{ensure_dim, Result, VsaError};

use super::{expect_order, expect_unbindable, tuple_dim, Backend, BoundRep};

/// Largest tensor (in stored values) any operation will allocate.
pub const MAX_TENSOR_VALUES: usize = 1 << 24;

pub(super) fn checked_len(dim: usize, order: usize) -> Result<usize> {
    let len = (dim as u128).checked_pow(order as u32).unwrap_or(u128::MAX);
    if len > MAX_TENSOR_VALUES as u128 {
        return Err(VsaError::SizeGuard {
            what: "d^n",
            value: len,
            limit: MAX_TENSOR_VALUES as u128,
        });
    }
    Ok(len as usize)
}

/// Outer product `v_1 ⊗ … ⊗ v_n`, row-major with the last index fastest.
pub fn tensor_bind(vs: &[&Embedding]) -> Result<BoundRep> {
    let d = tuple_dim(vs)?;
    let mut values = vec![0.0; checked_len(d, vs.len())?];
    outer_accumulate(vs, 1.0, &mut values)?;
    BoundRep::new(Backend::Tensor, vs.len(), d, values)
}

/// `out += weight * (v_1 ⊗ … ⊗ v_n)`.
pub(super) fn outer_accumulate(vs: &[&Embedding], weight: f64, out: &mut [f64]) -> Result<()> {
    let d = tuple_dim(vs)?;
    let len = checked_len(d, vs.len())?;
    ensure_dim(len, out.len())?;

    let (last, prefix) = vs.split_last().expect("tuple_dim rejects empty tuples");
    // Coefficients of the first n-1 modes, scaled by weight.
    let mut coeff = vec![weight];
    for v in prefix {
        coeff = coeff.iter().flat_map(|&c| v.iter().map(move |&x| c * x)).collect();
    }
    for (block, &c) in out.chunks_exact_mut(d).zip(&coeff) {
        if c != 0.0 {
            block.iter_mut().zip(last.iter()).for_each(|(o, &x)| *o += c * x);
        }
    }
    Ok(())
}

/// Contracts `u` against the first mode of an order-`n` tensor.
pub fn tensor_unbind_left(u: &Embedding, t: &BoundRep) -> Result<BoundRep> {
    t.expect_backend(Backend::Tensor)?;
    expect_unbindable(t)?;
    let d = t.dim();
    ensure_dim(d, u.dim())?;
    let stride = t.values().len() / d;
    let mut out = vec![0.0; stride];
    for (slab, &ui) in t.values().chunks_exact(stride).zip(u.iter()) {
        if ui != 0.0 {
            out.iter_mut().zip(slab).for_each(|(o, &x)| *o += ui * x);
        }
    }
    BoundRep::new(Backend::Tensor, t.order() - 1, d, out)
}

/// Contracts `u` against the last mode of an order-`n` tensor.
pub fn tensor_unbind_right(t: &BoundRep, u: &Embedding) -> Result<BoundRep> {
    t.expect_backend(Backend::Tensor)?;
    expect_unbindable(t)?;
    let d = t.dim();
    ensure_dim(d, u.dim())?;
    let out = contract_last(t.values(), u.values());
    BoundRep::new(Backend::Tensor, t.order() - 1, d, out)
}

fn contract_last(values: &[f64], u: &[f64]) -> Vec<f64> {
    values
        .chunks_exact(u.len())
        .map(|row| row.iter().zip(u).map(|(a, b)| a * b).sum())
        .collect()
}

/// Full contraction `Σ T[i_1..i_n] Π_j v_j[i_j]`.
pub fn tensor_detect(vs: &[&Embedding], t: &BoundRep) -> Result<f64> {
    t.expect_backend(Backend::Tensor)?;
    let d = tuple_dim(vs)?;
    ensure_dim(t.dim(), d)?;
    expect_order(t, vs.len())?;
    let mut acc = t.values().to_vec();
    for v in vs.iter().rev() {
        acc = contract_last(&acc, v.values());
    }
    debug_assert_eq!(acc.len(), 1);
    Ok(acc[0])
}
