//! Command-line front end for `czk-core`: run configuration, the binary
//! matrix cache, JSON reports and the five subcommands.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cache;
pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod exec;
pub mod hexfloat;
pub mod report;

pub use czk_core;
