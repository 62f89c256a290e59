//! Core library: code model extraction, smell detection with intensity
//! scoring, change-history mining and change-proneness model evaluation.

pub mod dataset;
pub mod error;
pub mod history;
pub mod intensity;
pub mod metrics;
pub mod ml;
pub mod model;
pub mod parser;
pub mod real;
pub mod smells;

pub use error::{Error, Result};
pub use real::Real;

/// Default scalar precision for metrics, features and statistics.
pub type Value = f64;
