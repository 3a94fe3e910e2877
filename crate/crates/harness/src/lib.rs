//! Experiment harness: configuration files, runs and sweeps with CSV traces
//! and SVG plots, the property-check report and the `shampoo-lab` CLI.

pub mod cli;
pub mod config;
pub mod error;
pub mod experiment;
pub mod plot;
pub mod repro;
pub mod trace_io;
pub mod verify;

pub use error::{HarnessError, Result};
