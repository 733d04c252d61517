pub mod augment;
pub mod cli;
pub mod config;
pub mod data;
pub mod error;
pub mod image;
pub mod metrics;
pub mod rng;
pub mod synthetic;
pub mod train;
pub mod vit;

pub use error::{Error, Result};
