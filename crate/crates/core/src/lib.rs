//! Fixed-to-variable length resolution coding.
//!
//! A resolution code turns fair random bits into a symbol stream whose
//! distribution approximates a target discrete memoryless source. The code in
//! this crate reads `m` fair bits, maps them deterministically onto a leaf of a
//! Tunstall codebook for the target, and emits that leaf's path. The leaf
//! distribution generated by the map is the KL-optimal `2^m`-type
//! approximation of the branching distribution the target induces on the
//! codebook.
//!
//! The crate is `no_std` (it needs `alloc`). File formats, the PRNG, and the
//! command-line front end live in the companion `rescode` crate.
//!
//! ```
//! use rescode_core::{encoder, metrics, Pmf};
//!
//! let target = Pmf::new(vec![0.8, 0.2]).unwrap();
//! let code = encoder::build_code(&target, 3, 3).unwrap();
//! assert_eq!(code.counts().counts(), &[5, 1, 2]);
//!
//! let report = metrics::rate_report(&code, &target);
//! assert!(report.rate >= report.entropy_rate);
//! ```

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod baseline;
pub mod codetree;
pub mod encoder;
mod error;
pub mod metrics;
pub mod mtype;
pub mod probdist;
pub mod tunstall;

pub use codetree::{Codebook, LeafDistribution};
pub use encoder::{ResolutionCode, Scheme};
pub use error::{Error, KraftDeficit, Result};
pub use metrics::RateReport;
pub use probdist::{Masses, Pmf, TypedPmf};
