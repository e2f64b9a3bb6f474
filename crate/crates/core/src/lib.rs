//! Losses, regularization and label-repair tools for multi-label learning
//! from single positive labels, plus a small deterministic training harness
//! to exercise them on synthetic data.
//!
//! The crate is organized bottom-up:
//!
//! * [`numkit`]: matrices, the seeded stream, stabilized log-sums, logdet
//!   and the finite-difference oracle.
//! * [`labels`]: tri-state observations, datasets, the single-positive
//!   transform, synthetic generation and JSONL I/O.
//! * [`losses`]: BCE, focal, asymmetric, ZLPR and the OPML family with
//!   analytic gradients.
//! * [`regularizer`]: the high-rank log-determinant penalty.
//! * [`metrics`]: AP, mAP and confidence histograms.
//! * [`correction`]: AP-weighted smoothing and label correction.
//! * [`trainer`]: models, SGD, gradient checking and evaluation.
//! * [`benchmark`]: the standard synthetic single-positive benchmark.
//! * [`cli`]: the `opml` command line.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod benchmark;
pub mod cli;
pub mod correction;
pub mod error;
pub mod labels;
pub mod losses;
pub mod metrics;
pub mod numkit;
pub mod regularizer;
pub mod trainer;

pub use error::{Error, Result};
