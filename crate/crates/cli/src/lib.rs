//! Experiment harness for layered paging: configuration, experiment
//! drivers, result tables and SVG charts.

pub mod config;
pub mod experiments;
pub mod svg;
pub mod table;
