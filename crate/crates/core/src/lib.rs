//! Digital-analog transmission of task-oriented semantic features.
//!
//! The crate simulates a link in which a compact set of transform
//! coefficients (the semantic feature) is sent with linear analog coding,
//! while a parity-only convolutional code refines every coefficient using
//! the analog estimates as decoder side information. Around that core sit a
//! joint rate/power allocator, a model-update protocol that corrects stale
//! integer parameters from parity alone, and a Monte-Carlo sweep harness.
//!
//! Module map:
//!
//! - [`source`]: synthetic sources and PGM ingestion.
//! - [`semantic`]: orthonormal transform, task-weighted selection, metrics.
//! - [`channel`]: AWGN / quasi-static Rayleigh channel and multiplexer.
//! - [`analog`]: power-scaled linear mapping and MMSE estimation.
//! - [`digital`]: quantizer, CRC, punctured RSC code, modem, side-info
//!   decoding and refinement.
//! - [`allocator`]: distortion models, FER tables, greedy and exhaustive
//!   allocation.
//! - [`seu`]: parameter update over the hybrid link.
//! - [`harness`]: sweeps, CSV output and effect detection.

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod allocator;
pub mod analog;
pub mod channel;
pub mod digital;
pub mod error;
pub mod harness;
pub mod link;
pub mod rng;
pub mod semantic;
pub mod seu;
pub mod source;

pub use error::{Error, Result};
