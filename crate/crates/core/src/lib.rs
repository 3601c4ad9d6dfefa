//! Weight sequences in log domain, their associated weight functions,
//! regularity condition (b) with Lusky-number search, and solid hull/core
//! block statistics for weighted spaces of entire functions and of functions
//! on discs.

// `!(x > 0.0)` is used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod assoc;
pub mod condition_b;
pub mod disk;
pub mod error;
pub mod growth;
pub mod hull;
pub mod io;
pub mod numeric;
pub mod sequence;

pub use error::{Error, Result};
