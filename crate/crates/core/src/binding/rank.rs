use nalgebra::DMatrix;

use crate::codebook::Codebook;
use crate::error::{Result, VsaError};

use super::{Backend, TupleIndex};

/// Singular values at or below this fraction of the largest are treated as
/// zero.
pub const RANK_REL_TOL: f64 = 1e-8;

/// Largest row or column count [`detection_matrix`] will build.
pub const RANK_MAX_SIDE: usize = 4096;

/// Matrix whose rows are the detection functionals of every `n`-tuple of
/// `cb`, written in the coordinates of the bound space.
///
/// All three detection functionals are inner products with the bound tuple,
/// so row `s` is simply `bind(s)`.
pub fn detection_matrix(cb: &Codebook, backend: Backend, n: usize) -> Result<DMatrix<f64>> {
    if n == 0 {
        return Err(VsaError::InvalidParameter("order must be >= 1".into()));
    }
    let rows = guard("m^n", cb.len(), n)?;
    let cols = match backend {
        Backend::Tensor => guard("d^n", cb.dim(), n)?,
        Backend::Hadamard | Backend::Convolution => cb.dim(),
    };
    let mut data = Vec::with_capacity(rows * cols);
    for tuple in TupleIndex::all(cb.len(), n) {
        let vs = tuple.resolve(cb)?;
        data.extend_from_slice(backend.bind(&vs)?.values());
    }
    Ok(DMatrix::from_row_slice(rows, cols, &data))
}

fn guard(what: &'static str, base: usize, n: usize) -> Result<usize> {
    let value = (base as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if value > RANK_MAX_SIDE as u128 {
        return Err(VsaError::SizeGuard {
            what,
            value,
            limit: RANK_MAX_SIDE as u128,
        });
    }
    Ok(value as usize)
}

/// Number of singular values above `rel_tol` times the largest one.
pub fn numerical_rank(matrix: &DMatrix<f64>, rel_tol: f64) -> usize {
    if matrix.is_empty() {
        return 0;
    }
    let sv = matrix.singular_values();
    let largest = sv.iter().copied().fold(0.0, f64::max);
    if largest == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_tol * largest).count()
}

/// Numerical rank of the detection functionals of `cb` at order `n`.
pub fn detection_rank(cb: &Codebook, backend: Backend, n: usize) -> Result<usize> {
    Ok(numerical_rank(&detection_matrix(cb, backend, n)?, RANK_REL_TOL))
}
