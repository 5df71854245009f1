use crate::codebook::{dot, Embedding};
use crate::error::{ensure_dim, Result};

use super::{expect_order, expect_unbindable, tuple_dim, Backend, BoundRep};

/// `(a ⊛ b)[k] = Σ_j a[j] b[(k − j) mod d]`, computed directly in O(d²).
pub fn circular_convolution(a: &[f64], b: &[f64]) -> Vec<f64> {
    let d = a.len();
    debug_assert_eq!(d, b.len());
    let mut out = vec![0.0; d];
    for (j, &aj) in a.iter().enumerate() {
        if aj == 0.0 {
            continue;
        }
        // k − j ranges over all residues as k does.
        for (k, o) in out.iter_mut().enumerate() {
            *o += aj * b[(k + d - j) % d];
        }
    }
    out
}

/// `(u ⋆ c)[k] = Σ_j u[j] c[(j + k) mod d]`, the adjoint of convolving by `u`.
pub fn circular_correlation(u: &[f64], c: &[f64]) -> Vec<f64> {
    let d = u.len();
    debug_assert_eq!(d, c.len());
    let mut out = vec![0.0; d];
    for (j, &uj) in u.iter().enumerate() {
        if uj == 0.0 {
            continue;
        }
        for (k, o) in out.iter_mut().enumerate() {
            *o += uj * c[(j + k) % d];
        }
    }
    out
}

/// Iterated circular convolution `v_1 ⊛ (v_2 ⊛ (… ⊛ v_n))`.
pub fn conv_bind(vs: &[&Embedding]) -> Result<BoundRep> {
    let d = tuple_dim(vs)?;
    let (last, rest) = vs.split_last().expect("tuple_dim rejects empty tuples");
    let values = rest
        .iter()
        .rev()
        .fold(last.values().to_vec(), |acc, v| circular_convolution(v.values(), &acc));
    BoundRep::new(Backend::Convolution, vs.len(), d, values)
}

/// Circular correlation of `u` with `c`. Approximate inverse of binding only.
pub fn conv_unbind(u: &Embedding, c: &BoundRep) -> Result<BoundRep> {
    c.expect_backend(Backend::Convolution)?;
    expect_unbindable(c)?;
    ensure_dim(c.dim(), u.dim())?;
    let values = circular_correlation(u.values(), c.values());
    BoundRep::new(Backend::Convolution, c.order() - 1, c.dim(), values)
}

/// Correlates away the first `n − 1` query embeddings and takes the inner
/// product of the remainder with the last one. Since correlation is the
/// adjoint of convolution this equals `<c, conv_bind(vs)>`.
pub fn conv_detect(vs: &[&Embedding], c: &BoundRep) -> Result<f64> {
    c.expect_backend(Backend::Convolution)?;
    let d = tuple_dim(vs)?;
    ensure_dim(c.dim(), d)?;
    expect_order(c, vs.len())?;
    let (last, rest) = vs.split_last().expect("tuple_dim rejects empty tuples");
    let remainder = rest
        .iter()
        .fold(c.values().to_vec(), |acc, v| circular_correlation(v.values(), &acc));
    Ok(dot(&remainder, last.values()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codebook::{Codebook, CodebookKind};

    fn emb(v: &[f64]) -> Embedding {
        Embedding::new(v.to_vec()).unwrap()
    }

    #[test]
    fn delta_examples() {
        let e0 = emb(&[1.0, 0.0, 0.0]);
        let e1 = emb(&[0.0, 1.0, 0.0]);
        assert_eq!(conv_bind(&[&e0, &e1]).unwrap().values(), &[0.0, 1.0, 0.0]);
        let c = BoundRep::new(Backend::Convolution, 2, 3, vec![0.0, 1.0, 0.0]).unwrap();
        assert_eq!(conv_unbind(&e0, &c).unwrap().values(), &[0.0, 1.0, 0.0]);
        // Shifting by one then correlating with the same shift undoes it.
        let shifted = conv_bind(&[&e1, &e1]).unwrap();
        assert_eq!(shifted.values(), &[0.0, 0.0, 1.0]);
        assert_eq!(conv_unbind(&e1, &shifted).unwrap().values(), &[0.0, 1.0, 0.0]);
    }

    #[test]
    fn convolution_commutes() {
        let a = [0.5, -1.0, 2.0, 0.25];
        let b = [1.5, 0.0, -0.5, 3.0];
        let ab = circular_convolution(&a, &b);
        let ba = circular_convolution(&b, &a);
        for (x, y) in ab.iter().zip(&ba) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn correlation_is_adjoint() {
        let u = [0.5, -1.0, 2.0, 0.25, 1.0];
        let c = [1.5, 0.0, -0.5, 3.0, -2.0];
        let w = [-0.3, 0.8, 1.1, 0.0, 0.6];
        let lhs = dot(&circular_correlation(&u, &c), &w);
        let rhs = dot(&c, &circular_convolution(&u, &w));
        assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn unbinding_leaves_a_residual() {
        let d = 256;
        let cb = Codebook::generate(CodebookKind::Rademacher, d, 2, 17).unwrap();
        let norm = (d as f64).sqrt();
        let v = cb[0].scaled(1.0 / norm);
        let w = cb[1].scaled(1.0 / norm);
        let c = conv_bind(&[&v, &w]).unwrap();
        let back = conv_unbind(&v, &c).unwrap();
        let residual: f64 = back
            .values()
            .iter()
            .zip(w.values())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        assert!(residual > 0.0);
    }

    #[test]
    fn detect_equals_inner_product_with_binding() {
        let cb = Codebook::generate(CodebookKind::Orthonormal, 7, 6, 2).unwrap();
        let stored = conv_bind(&[&cb[0], &cb[1], &cb[2]]).unwrap();
        let query = [&cb[3], &cb[4], &cb[5]];
        let via_detect = conv_detect(&query, &stored).unwrap();
        let via_dot = dot(stored.values(), conv_bind(&query).unwrap().values());
        assert!((via_detect - via_dot).abs() < 1e-12);
    }
}
