//! Controllability analysis for networks of identical linear nodes whose
//! control and transmission channels are sampled by zero-order holds.

pub mod analyzer;
pub mod error;
pub mod multirate;
pub mod numkernel;
pub mod oracle;
pub mod spectral;
pub mod sysmodel;

pub use error::{Error, Result};
