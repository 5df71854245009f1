//! Vector-symbolic binding over seeded codebooks.
//!
//! The crate provides three binding operators (tensor product, iterated
//! Hadamard product, iterated circular convolution) together with their
//! unbinding and detection functionals, weighted superposition memories, and
//! Monte Carlo capacity experiments that compare empirical detection accuracy
//! against closed-form lower bounds.
//!
//! ```
//! use vsa_core::{Backend, Codebook, CodebookKind, Memory, TupleIndex};
//!
//! let cb = Codebook::generate(CodebookKind::Orthonormal, 4, 4, 7).unwrap();
//! let stored = [TupleIndex::new(vec![0, 1]).unwrap(), TupleIndex::new(vec![2, 3]).unwrap()];
//! let mem = Memory::bundle(&cb, &stored, None, Backend::Tensor).unwrap();
//! let probe = [TupleIndex::new(vec![0, 1]).unwrap(), TupleIndex::new(vec![1, 0]).unwrap()];
//! let det = mem.query_detect(&probe, &cb).unwrap();
//! assert!((det.scores[0] - 1.0).abs() < 1e-12);
//! assert!(det.scores[1].abs() < 1e-12);
//! ```

pub mod binding;
pub mod capacity;
pub mod codebook;
pub mod error;
pub mod memory;
pub mod rng;
pub mod stats;
pub mod verify;

pub use binding::{Backend, BoundRep, Side, TupleIndex};
pub use capacity::{ExperimentConfig, ExperimentResult};
pub use codebook::{Codebook, CodebookKind, CodebookSpec, DotScale, DotStatistics, Embedding};
pub use error::{Result, VsaError};
pub use memory::{Detection, Memory};

#[cfg(doctest)]
#[doc = include_str!("../../../README.md")]
struct ReadmeDoctests;
