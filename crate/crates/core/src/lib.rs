pub mod error;
pub mod mdp;

pub use error::{Error, Result};
pub mod learner;
pub mod transfer;
pub mod curriculum;
pub mod stats;
pub mod optimizers;
pub mod harness;
