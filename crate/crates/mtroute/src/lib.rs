//! File formats, experiment runner and command-line front end for
//! `mtroute-core`.

pub mod cli;
pub mod config;
pub mod diag;
pub mod experiment;
pub mod formats;
pub mod output;

pub use mtroute_core as core;
