//! Sequence driver, reports and command-line front end for `kktlu`.

pub mod cli;
pub mod config;
pub mod driver;
pub mod report;
