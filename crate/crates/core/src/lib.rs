//! Lattice Schrödinger operators with quasi-periodic and tabulated potentials.
//!
//! Torus arithmetic runs on big-integer fixed point; everything spectral runs
//! in `f64`. The crate needs only `alloc`.
#![no_std]

extern crate alloc;
#[cfg(feature = "std")]
extern crate std;

pub mod arithmetic;
pub mod cocycle;
pub mod density;
pub mod dynamics;
pub mod error;
pub mod potential;
pub mod resonance;
pub mod spectral;

pub use arithmetic::{
    construct_phase, continued_fraction, delta_alpha_theta, diophantine_check, torus_norm,
    ContinuedFraction, FrequencySpec, PhaseOptions, ResonanceCertificate, TorusScalar,
};
pub use error::{Error, Result};
pub use potential::PotentialSpec;
pub use spectral::{EigenSystem, Profile, Truncation};
