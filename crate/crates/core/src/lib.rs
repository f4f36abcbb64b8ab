//! Exact multidimensional Chinese remainder theorem over integer matrix moduli.

pub mod config;
pub mod crt;
pub mod drange;
pub mod error;
pub mod lattice;
pub mod linalg;
pub mod multistage;
pub mod numeric;
pub mod robust;
pub mod simkit;
pub mod svp_search;

pub use error::{Error, Result};
pub use linalg::{IntMatrix, IntVector, RatVector};
