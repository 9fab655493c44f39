//! Certification statistics for event-ready CHSH Bell tests.
//!
//! * [`events`]: trial records, correlation tables and S estimators.
//! * [`pvalues`]: martingale and game-formalism P-value bounds.
//! * [`lhv`]: local hidden-variable strategies and Monte-Carlo runs.
//! * [`qrng`]: bias, serial correlation and predictability of setting bits.
//! * [`spacetime`]: latency chains and spacelike-separation margins.
//! * [`nosignaling`]: setting independence and no-signaling tests.
//! * [`report`]: run manifests and the full certification report.
//! * [`fixtures`]: published coincidence counts of the reference runs.

// `!(x >= 0.0)` rejects NaN along with negatives.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod events;
pub mod fixtures;
pub mod lhv;
pub mod nosignaling;
pub mod pvalues;
pub mod qrng;
pub mod report;
pub mod spacetime;
pub mod stats;

pub use error::{Error, ErrorKind, Result};
