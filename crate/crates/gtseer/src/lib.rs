//! Filesystem, CLI, and parallel-training companion to `gtseer-core`.

pub mod io;
pub mod parallel;
pub mod report;
pub mod synth;
