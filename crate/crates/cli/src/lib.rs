//! Command-line front end: TOML configs in, CSV series and a JSON manifest out.

pub mod commands;
pub mod config;

pub use commands::{cmd_ensemble, cmd_preset, cmd_run, cmd_sweep, Overrides, Preset, RunManifest};
pub use config::{parse_config, Config, SweepSettings};
