//! Open-system simulation of optomechanical photon and phonon blockade.
//!
//! All frequencies and rates are expressed in units of the cavity decay rate κ.
pub mod analytics;
pub mod dynamics;
pub mod error;
pub mod hilbert;
pub mod models;
pub mod parallel;
pub mod scan;
pub mod sparse;

pub use error::{Error, Result};

pub type C64 = num_complex::Complex64;
