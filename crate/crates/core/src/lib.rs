pub mod analysis;
pub mod cli;
pub mod corpus;
pub mod eigen;
pub mod envelope;
pub mod error;
pub mod pitch;
pub mod signal;
pub mod vocoder;

pub use error::{Error, Result};
