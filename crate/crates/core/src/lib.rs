pub mod config;
pub mod dataset;
pub mod encoders;
pub mod eval;
pub mod error;
pub mod kpi;
pub mod rng;

pub use error::{Error, Result};
