//! Batch front-end for floquet-sense: configuration parsing, experiment
//! dispatch and CSV result tables.

pub mod config;
pub mod error;
pub mod run;
pub mod table;

pub use config::{parse, Experiment, RunConfig};
pub use error::{CliError, ErrorReport, Result};
pub use run::run;
pub use table::{diff_tables, ResultTable, Tolerances};
