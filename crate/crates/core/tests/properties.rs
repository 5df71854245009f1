use approx::assert_abs_diff_eq;
use proptest::prelude::*;
use vsa_core::binding::hadamard_from_tensor;
use vsa_core::{Backend, Codebook, CodebookKind, Embedding, Side};

fn vector(d: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-4.0f64..4.0, d)
}

fn backend() -> impl Strategy<Value = Backend> {
    prop::sample::select(Backend::ALL.to_vec())
}

fn emb(v: &[f64]) -> Embedding {
    Embedding::new(v.to_vec()).unwrap()
}

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.iter()
        .zip(b)
        .all(|(x, y)| (x - y).abs() <= tol * (1.0 + x.abs().max(y.abs())))
}

proptest! {
    #[test]
    fn bind_is_linear_in_each_slot(
        backend in backend(),
        (a, b, c) in (2usize..7).prop_flat_map(|d| (vector(d), vector(d), vector(d))),
        alpha in -3.0f64..3.0,
        beta in -3.0f64..3.0,
    ) {
        let (a, b, c) = (emb(&a), emb(&b), emb(&c));
        let mix = a.combine(alpha, &b, beta).unwrap();
        for slot in 0..2 {
            let with = |x: &Embedding| if slot == 0 { backend.bind(&[x, &c]) } else { backend.bind(&[&c, x]) };
            let lhs = with(&mix).unwrap();
            let mut rhs = with(&a).unwrap().scaled(alpha);
            rhs.add_scaled(&with(&b).unwrap(), beta).unwrap();
            prop_assert!(close(lhs.values(), rhs.values(), 1e-12));
        }
    }

    #[test]
    fn unbind_is_linear_in_the_bound_argument(
        backend in backend(),
        (u, v, w, x) in (2usize..7).prop_flat_map(|d| (vector(d), vector(d), vector(d), vector(d))),
        alpha in -3.0f64..3.0,
    ) {
        let (u, v, w, x) = (emb(&u), emb(&v), emb(&w), emb(&x));
        let p = backend.bind(&[&v, &w]).unwrap();
        let q = backend.bind(&[&w, &x]).unwrap();
        let mut sum = p.scaled(alpha);
        sum.add_scaled(&q, 1.0).unwrap();
        let lhs = backend.unbind(&u, &sum, Side::Left).unwrap();
        let mut rhs = backend.unbind(&u, &p, Side::Left).unwrap().scaled(alpha);
        rhs.add_scaled(&backend.unbind(&u, &q, Side::Left).unwrap(), 1.0).unwrap();
        prop_assert!(close(lhs.values(), rhs.values(), 1e-12));
    }

    #[test]
    fn tensor_left_unbind_is_dot_times_remainder(
        (u, v, w) in (1usize..9).prop_flat_map(|d| (vector(d), vector(d), vector(d))),
    ) {
        let z: f64 = u.iter().zip(&v).map(|(a, b)| a * b).sum();
        let (u, v, w) = (emb(&u), emb(&v), emb(&w));
        let t = Backend::Tensor.bind(&[&v, &w]).unwrap();
        let got = Backend::Tensor.unbind(&u, &t, Side::Left).unwrap();
        for (g, wi) in got.values().iter().zip(w.values()) {
            assert_abs_diff_eq!(*g, z * wi, epsilon = 1e-10);
        }
    }

    #[test]
    fn hadamard_is_the_tensor_diagonal(
        n in 2usize..4,
        d in 1usize..6,
        seed in any::<u64>(),
    ) {
        let cb = Codebook::generate(CodebookKind::Rademacher, d, n, seed).unwrap();
        let vs: Vec<&Embedding> = cb.embeddings().iter().collect();
        let t = Backend::Tensor.bind(&vs).unwrap();
        let h = Backend::Hadamard.bind(&vs).unwrap();
        let diag = hadamard_from_tensor(&t).unwrap();
        prop_assert_eq!(diag.values(), h.values());
    }

    #[test]
    fn codebooks_regenerate_from_seed(
        kind in prop::sample::select(vec![CodebookKind::Rademacher, CodebookKind::Orthonormal, CodebookKind::Canonical]),
        d in 1usize..24,
        seed in any::<u64>(),
    ) {
        let m = d.min(5);
        let a = Codebook::generate(kind, d, m, seed).unwrap();
        let b = Codebook::from_spec(a.spec()).unwrap();
        prop_assert_eq!(a.embeddings(), b.embeddings());
    }
}
