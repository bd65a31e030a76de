pub mod bounds;
pub mod coherence;
pub mod config;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod linalg;
pub mod rng;
pub mod signal;
pub mod solver;
pub mod textio;

pub use error::{Error, Result};
