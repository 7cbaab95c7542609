//! Experiment harness for [`otasec_core`]: TOML configuration, parallel
//! sweeps, result files and the building blocks of the `otasec` binary.

pub mod check;
pub mod config;
pub mod design;
pub mod output;
pub mod sweep;

pub use otasec_core as core;
