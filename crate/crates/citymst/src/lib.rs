//! Experiment harness around `citymst-core`: JSON configuration, Monte Carlo
//! runners on a rayon pool, CSV output with a metadata sidecar, and the
//! library side of the `citymst` command.

pub mod commands;
pub mod config;
pub mod dispatch;
pub mod experiments;
pub mod output;

pub use config::{parse_config, parse_config_str, ConfigError, ExperimentConfig, LayoutSpec};
pub use dispatch::{dispatch, dry_run, RunError, RunManifest};
pub use experiments::{
    run_city_moment_lemmas, run_mstc_scaling, run_one_point_diff, run_unconstrained, ExperimentError, ExperimentKind,
    ExperimentOutput, RunOptions,
};
pub use output::{read_points, write_points, write_tree, Table};
