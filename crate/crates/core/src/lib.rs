//! Optimizers with look-ahead weight prediction, plus a small experiment harness.

pub mod error;
pub mod harness;
pub mod numerics;
pub mod optimizers;
pub mod predictor;
pub mod problems;

pub use error::{Error, Result};
