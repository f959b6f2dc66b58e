#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod embed;
pub mod energy;
pub mod error;
pub mod extend;
mod par;
pub mod qspace;
pub mod random;
pub mod verify;

pub use error::{Error, Result};
pub use qspace::{dist, Matching, MetricKind, QTuple};
