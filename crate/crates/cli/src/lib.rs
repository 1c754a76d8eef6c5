//! Experiment runner for the voter-core toolkit: JSON configs in, CSV or
//! JSON artifacts out.

pub mod config;
pub mod emit;
pub mod error;
pub mod presets;
pub mod runner;
