//! Simulation and exact analysis of fragmented constrained dynamics on 1D
//! chains coupled to boundary noise.

pub mod chain;
pub mod counting;
pub mod dynamics;
pub mod error;
pub mod exec;
pub mod fit;
pub mod krylov;
pub mod spectral;

pub use error::{Error, Result};
pub use exec::Executor;
