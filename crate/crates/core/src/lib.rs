#![allow(clippy::needless_range_loop)]

pub mod error;
pub mod jets;
pub mod metrics;
pub mod tensor;
pub mod canonical;
pub mod curvature;
pub mod config;
pub mod calibration;
pub mod report;
pub mod runner;
pub mod fixtures;

pub use error::{Error, Result};
