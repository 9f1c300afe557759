//! Quantum-enhanced greedy search for maximum independent set.

pub mod error;
pub mod graph;
pub mod lightcone;
pub mod noise;
pub mod qaoa;
pub mod solver;

pub use error::{Error, Result};
