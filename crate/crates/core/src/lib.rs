//! Collective-excitation dynamics of mesoscopic atomic ensembles under dipole
//! blockade.
//!
//! The crate is `no_std` and needs only `alloc`. Units are fixed throughout:
//! angular frequencies in rad/μs, times in μs, lengths in μm.

#![no_std]
extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod analysis;
pub mod dynamics;
pub mod error;
pub mod error_budget;
pub mod geometry;
pub mod hilbert;
pub mod linalg;
pub mod protocol;
pub mod units;

pub use error::{Error, Result};
