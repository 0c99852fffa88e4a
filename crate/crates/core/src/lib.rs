//! Exhaustive polyomino clustering of phased-array apertures, scored by
//! zero-forcing multi-user sum-rate capacity.

// `!(x > 0.0)` is used on purpose so NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod array;
pub mod channel;
pub mod error;
pub mod ledger;
pub mod linalg;
pub mod metrics;
pub mod optimizer;
pub mod scenario;
pub mod tiling;
pub mod units;
pub mod zf;

pub use error::{Error, Result};
