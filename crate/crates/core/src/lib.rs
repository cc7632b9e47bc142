//! Numerical machinery for compact Calderón–Zygmund operators on the line.
//!
//! The crate is `no_std` with `alloc`; everything that touches files,
//! threads or the command line lives in the `czkit` companion crate.
//! Heavy loops take an [`exec::Executor`] so a caller can run them in
//! parallel while the results stay bit-identical to the sequential run.

#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod admissible;
pub mod bumps;
pub mod dyadic;
pub mod error;
pub mod exec;
pub mod jet;
pub mod kernels;
pub mod operators;
pub mod paraproduct;
pub mod quad;
pub mod spaces;
pub mod wavelets;

mod hilbert;
mod math;

pub use error::{Error, Result};
