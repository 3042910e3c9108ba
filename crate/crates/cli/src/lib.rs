//! File formats, workload generators and the experiment harness behind the
//! `fclsh` command-line tool.

pub mod bench;
pub mod binarize;
pub mod clock;
pub mod error;
pub mod experiment;
pub mod format;
pub mod oracle;
pub mod synth;

pub use error::{CliError, Result};
