//! Krein strings and the operators `ψ(-Δ)` they generate.

pub mod catalog;
pub mod cli;
pub mod cbf;
pub mod error;
pub mod extension;
pub mod nodal;
pub mod ode;
pub mod quad;
pub mod random;
pub mod selftest;
pub mod spectral;
pub mod special;
pub mod string;

pub use error::{KreinError, Result};
