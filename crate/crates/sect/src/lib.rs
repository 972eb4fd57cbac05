//! File formats, run artifacts and the `sect` command-line tool built on
//! `sect-core`.

pub mod checkpoint;
pub mod cli;
pub mod curves;
pub mod error;
pub mod io;
pub mod run;

pub use error::{ErrorKind, Result, SectError};
