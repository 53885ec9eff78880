//! Stage orchestration for the `chainvalue` command.

pub mod config;
pub mod error;
pub mod manifest;
pub mod stages;

pub use config::{Overrides, PipelineConfig};
pub use error::{CliError, Result};
pub use manifest::Manifest;
pub use stages::{Pipeline, StageName};
