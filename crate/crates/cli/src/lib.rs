//! Library surface of the `fdbeam` command-line tool: configuration file
//! parsing, the registered experiments, and run orchestration.

pub mod config;
pub mod experiments;
pub mod run;
