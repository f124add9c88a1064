//! Generalized contractive fixed points of maps `f: ℓ∞(ℝ) → ℝ`.
//!
//! A map `f` that reads a whole bounded sequence and returns one real number
//! drives the recursion
//!
//! ```text
//! x^{k+1} = f(x^k, x^{k-1}, ..., x^1, x_0, x_1, ...)
//! ```
//!
//! which prepends each new value to the starting sequence. When `f` is a
//! contraction with respect to a geometrically weighted metric on sequences,
//! the recursion converges to the unique point with `f(x*, x*, ...) = x*`,
//! and the error after `k` steps is bounded before iterating.
//!
//! The crate is organised as:
//!
//! - [`sequences`]: eventually constant sequences, the representable subset of ℓ∞.
//! - [`metrics`]: weighted supremum and weighted `p`-metrics, evaluated exactly.
//! - [`maps`]: the [`maps::SeqMap`] trait and its linear, sup and finite-arity instances.
//! - [`solver`]: generalized iterates, certificates, a priori bounds and the
//!   Secelean, Prešić and truncation schemes.
//! - [`cli`]: the JSON-config batch runner behind the `gcfp` binary.
//!
//! ```
//! use gcfp::maps::LinearSeqMap;
//! use gcfp::sequences::BoundedSeq;
//! use gcfp::solver::{solve_gcfp, ContractionCertificate};
//!
//! // x^k = 1 + Σ_j x^{k-1-j} / (3·2^j)
//! let f = LinearSeqMap::new(vec![1.0 / 3.0], 1.0 / 6.0, 0.5, 1.0)?;
//! let cert = ContractionCertificate::sup_q(0.8, f.lip_sq(0.8)?)?;
//! let sol = solve_gcfp(&f, &BoundedSeq::zero(), &cert, 1e-6)?;
//! assert!((sol.x_star - 3.0).abs() <= 1e-6);
//! assert_eq!(sol.k_used, 136);
//! # Ok::<(), gcfp::Error>(())
//! ```

pub mod cli;
pub mod error;
pub mod maps;
pub mod metrics;
pub mod sequences;
pub mod solver;

pub use error::{Error, Result};
pub use maps::{FiniteArityMap, LinearSeqMap, MapRef, SeqMap, SupHalfMap};
pub use metrics::{PExponent, WeightSeq};
pub use sequences::BoundedSeq;
pub use solver::{ContractionCertificate, IterationTrace};
