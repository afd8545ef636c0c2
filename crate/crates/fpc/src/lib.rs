//! Straggler-tolerant distributed computation of A * A^T.
//!
//! A master node splits A into an m x p grid of blocks, encodes the grid
//! into N polynomial evaluations (one per worker), and reconstructs the
//! full Gram matrix A * A^T from the first R worker products, tolerating
//! up to N - R stragglers. The folded scheme exploits the target's symmetry
//! to drive R below the thresholds of straight polynomial interpolation;
//! MatDot and entangled-polynomial baselines are included for comparison.
//!
//! Module map:
//! - [`field`]: scalar carriers (prime fields, GF(2^w), rationals, f64).
//! - [`linalg`]: dense matrices, counted LU solving, SVD conditioning,
//!   block partitioning, binary matrix I/O.
//! - [`folded`]: the term-polynomial combinatorics the decoder rests on.
//! - [`codes`]: encoders, decoders, thresholds, point selection.
//! - [`sim`]: deterministic straggler simulation and condition sweeps.

pub mod codes;
pub mod error;
pub mod field;
pub mod folded;
pub mod linalg;
pub mod sim;

pub use error::{Error, Result};
