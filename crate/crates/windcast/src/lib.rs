//! Short-term wind power forecasting toolkit.
//!
//! The pipeline mirrors a similar-day forecasting architecture: SCADA-style
//! 10-minute records are cleaned and feature-selected, historical days are
//! clustered by meteorological and power day-signatures to pick training
//! days similar to the forecast day, and a bagged ensemble of three-layer
//! back-propagation networks predicts the next day's power.

pub mod bagging;
pub mod bpnn;
pub mod config;
pub mod dataset;
pub mod error;
pub mod kv;
pub mod metrics;
pub mod pipeline;
pub mod preprocess;
pub mod seeding;
pub mod similar_days;

pub use error::{Error, Result};
