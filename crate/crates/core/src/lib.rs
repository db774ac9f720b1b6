//! Allocation-only core of the gazemark toolkit: gaze geometry, event
//! detection, main-sequence models, AOI analytics, feature construction,
//! classifiers with cross-validation, cohort statistics and a synthetic
//! reading-span cohort generator.
//!
//! Nothing in this crate performs IO. File formats and the command line
//! live in the `gazemark` crate.
#![no_std]
// `!(x > 0.0)` rejects NaN along with the out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod events;
pub mod features;
pub mod geometry;
pub mod ingest;
pub mod aoi;
pub mod mainseq;
pub mod ml;
pub mod rng;
pub mod stats;
pub mod synth;
