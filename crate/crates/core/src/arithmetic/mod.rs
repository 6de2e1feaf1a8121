//! Fixed-point torus arithmetic: continued fractions, Diophantine scans, the
//! resonance exponent of a phase, and phases built to have a prescribed one.

mod cf;
mod phase;
mod torus;

pub use cf::{continued_fraction, diophantine_check, ContinuedFraction, DiophantineReport};
pub use phase::{
    construct_phase, default_n_min, delta_alpha_theta, required_bits, CertificateCheck,
    DeltaEstimate, FrequencySpec, PhaseOptions, ResonanceCertificate,
};
pub use torus::{torus_norm, TorusScalar, DEFAULT_BITS, MIN_BITS};
