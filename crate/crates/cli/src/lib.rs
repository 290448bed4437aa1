//! The `clarq` pipeline driver: configuration, work-directory bookkeeping
//! and one function per subcommand.

pub mod commands;
pub mod config;
pub mod error;
pub mod workdir;

pub use config::{Overrides, PipelineConfig};
pub use error::{CliError, CliResult};
pub use workdir::{Manifest, WorkDir};
