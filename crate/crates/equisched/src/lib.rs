//! Schedules for classical matrix multiplication derived from equivariant
//! maps between finite group actions, plus a replaying verifier that checks
//! them and counts their communication.

pub mod actions;
pub mod cli;
pub mod equivariant;
pub mod error;
pub mod groups;
pub mod machines;
pub mod matmul;
pub mod simulate;

pub use error::{Error, Result};
