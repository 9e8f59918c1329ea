//! File formats, configuration and the `cyborg` command-line pipeline built
//! on `cyborg-core`.

pub mod archive;
pub mod cli;
pub mod config;
pub mod error;
pub mod formats;
pub mod pipeline;
pub mod timefmt;

pub use config::PipelineConfig;
pub use error::{CliError, CliResult};
pub use pipeline::{Pipeline, Stage, Workspace};
