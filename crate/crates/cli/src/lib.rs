//! Configuration, CSV logging and SVG plotting around the simulator.

pub mod app;
pub mod config;
pub mod csv_log;
pub mod plot;
