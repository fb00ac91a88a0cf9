//! Sequential embedding rank models (SEER / T-SEER / GT-SEER) for
//! point-of-interest recommendation.
//!
//! The crate is `no_std` (with `alloc`) and holds the algorithmic core:
//! check-in segmentation and analysis, great-circle geography, negative and
//! preference sampling, the joint SGD trainer, and top-N evaluation.
//! File formats, the CLI, and the lock-free parallel driver live in the
//! companion `gtseer` crate.

#![no_std]

extern crate alloc;

pub mod checkin;
pub mod geo;
pub mod metrics;
pub mod model;
pub mod sampling;
pub mod trainer;

pub use checkin::{Checkin, Dataset, DaySequence, TemporalState};
pub use geo::GeoPoint;
pub use model::{HyperParams, ModelParams, Variant};
