//! Experiment runner for toda-core: presets, config files and reports.

pub mod config;
pub mod presets;
pub mod report;

pub use config::{ExperimentConfig, Preset};
pub use report::{Cmp, Row};
