//! Benchmark harness for `structmg-core`: experiment families, table
//! reproduction, CSV/markdown output and the theory certificate report.

pub mod certify;
pub mod config;
pub mod corrections;
pub mod experiment;
pub mod report;
pub mod tables;
