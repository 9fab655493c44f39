//! Auditing of setting-choice bit streams.

mod audit;
mod bits;
mod budget;

pub use audit::*;
pub use bits::*;
pub use budget::*;
