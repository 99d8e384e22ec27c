//! A small probabilistic language with discontinuous control flow.

// `!(x > 0.0)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod density;
pub mod frontend;
pub mod graph;
pub mod monitor;
pub mod oracle;
pub mod samplers;
pub mod stats;
