//! Finite-difference solvers and diagnostics for singular-degenerate
//! reaction-diffusion equations of porous-medium type.

pub mod attractor;
pub mod diagnostics;
pub mod error;
pub mod grid;
pub mod initial;
pub mod io;
pub mod linalg;
pub mod nonlinearity;
pub mod solver;

pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
