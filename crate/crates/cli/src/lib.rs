//! Experiment harness for adaptive Dirac filtering: plans, presets, grid
//! execution and CSV output behind the `dirac` command.

pub mod cli;
pub mod output;
pub mod plan;
pub mod presets;
pub mod run;

pub use plan::{BenchPlan, DatasetSource, ExperimentPlan, LearnParams, SignalPlan};
pub use run::Runner;
