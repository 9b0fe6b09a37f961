//! File formats, report generation and the command line for `mtperf-core`.

pub mod cli;
pub mod error;
pub mod io;
pub mod report;
pub mod svg;
pub mod table;

pub use error::{Error, Result};
