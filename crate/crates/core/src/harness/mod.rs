//! Experiment orchestration: configuration, synthetic data, h-sweeps, rate
//! fitting, reports and trajectory snapshots.

pub mod config;
pub mod data;
pub mod experiments;
pub mod rate;
pub mod report;
pub mod snapshot;
