//! Command-line driver, configuration files, result persistence and figures.

pub mod commands;
pub mod config;
pub mod manifest;
pub mod output;
pub mod svg;

pub use commands::{run, CliError, Command, Options};
pub use config::{ConfigError, RunConfig, SystemKind};
pub use manifest::RunManifest;
pub use svg::{render_heatmap_svg, render_marginal_svg, render_scatter_svg, Panel};
