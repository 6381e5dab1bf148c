pub mod config;
pub mod dataset;
pub mod diff;
pub mod error;
pub mod eval;
pub mod experiment;
pub mod fixture;
pub mod forest;
pub mod java;
pub mod metrics;
pub mod modules;
pub mod repo;
pub mod report;
pub mod stats;
pub mod tracker;

pub use error::{Error, Result};
