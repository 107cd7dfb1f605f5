pub mod bounds;
pub mod config;
pub mod error;
pub mod experiments;
pub mod forward;
pub mod geometry;
pub mod linearised;
pub mod phantom;
pub mod phase_space;
pub mod reconstruct;
pub mod recovery;

pub use error::{Error, Result};
