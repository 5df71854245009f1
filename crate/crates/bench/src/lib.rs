//! Fixtures shared by the criterion benchmarks.

use vsa_core::{Backend, Codebook, CodebookKind, Memory, TupleIndex};

/// Rademacher codebook holding `k` disjoint stored `n`-tuples followed by
/// spare entries for `m` probes.
pub fn codebook(d: usize, n: usize, k: usize, m: usize) -> Codebook {
    Codebook::generate(CodebookKind::Rademacher, d, (k + m) * n, 0x5eed).expect("valid codebook")
}

/// The `i`-th disjoint tuple of `n` consecutive codebook entries.
pub fn tuple(i: usize, n: usize) -> TupleIndex {
    TupleIndex::new((i * n..(i + 1) * n).collect()).expect("non-empty tuple")
}

pub fn memory(cb: &Codebook, backend: Backend, n: usize, k: usize) -> Memory {
    let stored: Vec<TupleIndex> = (0..k).map(|i| tuple(i, n)).collect();
    Memory::bundle(cb, &stored, None, backend).expect("valid memory")
}
