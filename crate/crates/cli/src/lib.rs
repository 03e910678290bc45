//! Experiment runner for nonlocal-game multiple access channels: sweeps to
//! CSV, the verification suite, the comparison table and file formats.

pub mod commands;
pub mod config;
pub mod csv_io;
pub mod format;
