//! Configured end-to-end runs and their artifacts.

pub mod commands;
pub mod config;
pub mod figures;
pub mod output;
pub mod run;

pub use config::ScenarioConfig;
