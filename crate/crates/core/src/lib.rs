//! Evolution and diagnostics for the reduced Einstein–Maxwell system in wave and Lorenz gauge.

pub mod config;
pub mod diagnostics;
pub mod error;
pub mod evolution;
pub mod families;
pub mod frame;
pub mod grid;
pub mod initial_data;
pub mod io;
pub mod oracle;
pub mod rhs;
pub mod run;
pub mod stencil;
pub mod tensor;
pub mod verify;

pub use error::{Error, Result};
