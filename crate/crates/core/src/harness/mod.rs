//! Experiment harness: curve streams, configuration, pipelines, reports and
//! verification suites.

pub mod adversary;
pub mod config;
pub mod pipelines;
pub mod report;
pub mod suites;
