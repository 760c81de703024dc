//! Command-line front end for resolution codes: parameter sweeps written as
//! CSV, symbol stream generation from seeded or file-backed fair bits, and
//! empirical validation of generated streams.

pub mod bits;
pub mod curve;
pub mod error;
pub mod formats;
pub mod run;

pub use error::{CliError, Result};
