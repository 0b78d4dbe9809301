//! Configuration parsing, trace files, single runs and the acceptance suite
//! behind the `surfmin` binary.

pub mod config;
pub mod output;
pub mod run;
pub mod suite;
