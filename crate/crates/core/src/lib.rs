//! Locally exact integrators for autonomous ODEs and energy-preserving
//! discrete-gradient schemes for canonical Hamiltonian systems.

pub mod cli;
pub mod disgrad;
pub mod error;
pub mod exact_linear;
pub mod integrators;
pub mod matfun;
pub mod model;
pub mod oracle;

pub use error::{Error, Result};
