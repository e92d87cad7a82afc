// `!(x > 0.0)` is used on purpose so NaN lands in the rejecting branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod fmt;
pub mod numerics;
pub mod tensor;
pub mod phase;
pub mod analysis;
pub mod control;
pub mod fixtures;
pub mod cli;
