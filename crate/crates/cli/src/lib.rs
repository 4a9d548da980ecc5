//! Orchestration for the `srpf` binary: TOML run configs, a persistent
//! result cache and the task runners that emit CSV and JSON.

pub mod cache;
pub mod config;
pub mod run;

pub use config::{ConfigError, RunConfig};
pub use run::{Context, Outcome};
