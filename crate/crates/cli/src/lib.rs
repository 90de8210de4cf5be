//! Config ingestion, trace files, plots and figure presets behind the
//! `otslab` binary.

pub mod commands;
pub mod config;
pub mod error;
pub mod plot;
pub mod presets;
pub mod trace_csv;
