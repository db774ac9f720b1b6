//! File formats, batch pipeline and command line for the gazemark toolkit.
//!
//! The numerical work lives in `gazemark_core`; this crate reads and writes
//! the CSV, ARFF and TOML files around it, runs stages in parallel and
//! checks the golden fixtures.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod formats;
pub mod golden;
pub mod outdir;
pub mod pipeline;

pub use gazemark_core as core;
