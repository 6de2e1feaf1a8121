//! Model instances: materialized frequency and phase, potential, eigensystem.

use std::path::Path;

use qplab_core::arithmetic::{required_bits, PhaseOptions};
use qplab_core::spectral::{build_truncation, eigendecompose};
use qplab_core::{
    construct_phase, EigenSystem, FrequencySpec, PotentialSpec, ResonanceCertificate, TorusScalar,
};

use crate::config::{Model, PhaseSpec};
use crate::LabError;

/// `ln(4π·2⁵²)`: past `b·n` this large, `e^{−b n}` is below the resolution of an `f64`
/// eigenvector entry relative to the sine it multiplies.
pub fn f64_resolution_depth() -> f64 {
    (4.0 * std::f64::consts::PI).ln() + 52.0 * std::f64::consts::LN_2
}

/// Largest power of two `n` with `b·n` inside the `f64` depth, at most `L/4`.
pub fn witness_scale(b: f64, half_width: i64) -> u64 {
    let cap = prev_power_of_two((half_width / 4).max(1) as u64);
    if b <= 0.0 {
        return cap;
    }
    let raw = (f64_resolution_depth() / b).floor();
    if raw < 1.0 {
        return 1;
    }
    prev_power_of_two(raw as u64).min(cap)
}

fn prev_power_of_two(n: u64) -> u64 {
    1u64 << (63 - n.max(1).leading_zeros())
}

#[derive(Clone, Debug)]
pub struct Instance {
    pub lambda: f64,
    pub alpha: TorusScalar,
    /// `None` for tabulated potentials.
    pub theta: Option<TorusScalar>,
    pub target_b: Option<f64>,
    pub witness_scale: Option<u64>,
    pub certificate: Option<ResonanceCertificate>,
    pub bits: u32,
    pub half_width: i64,
    pub potential: PotentialSpec,
}

pub fn parse_theta(s: &str, bits: u32) -> Result<TorusScalar, LabError> {
    let t = s.trim();
    let r = match t.split_once('/') {
        Some((p, q)) => {
            let p: i64 = p
                .trim()
                .parse()
                .map_err(|e| LabError::Config(format!("theta `{s}`: {e}")))?;
            let q: i64 = q
                .trim()
                .parse()
                .map_err(|e| LabError::Config(format!("theta `{s}`: {e}")))?;
            TorusScalar::from_ratio(p, q, bits)
        }
        None => TorusScalar::from_decimal_str(t, bits),
    };
    r.map_err(|e| LabError::Config(format!("theta `{s}`: {e}")))
}

impl Instance {
    /// Builds the model at half-width `half_width`, raising precision as the phase construction needs.
    pub fn build(model: &Model, half_width: i64, precision_bits: u32) -> Result<Self, LabError> {
        match &model.phase {
            PhaseSpec::TargetB {
                b,
                witness_scale: ws,
            } if model.table.is_none() => Self::with_target_b(
                model.lambda,
                &model.alpha,
                *b,
                *ws,
                half_width,
                precision_bits,
            ),
            phase => {
                let bits = precision_bits;
                let alpha = model.alpha.materialize(bits)?;
                if let Some(path) = &model.table {
                    let potential = crate::io::load_potential_csv(Path::new(path))?;
                    return Ok(Self {
                        lambda: model.lambda,
                        alpha,
                        theta: None,
                        target_b: None,
                        witness_scale: None,
                        certificate: None,
                        bits,
                        half_width,
                        potential,
                    });
                }
                let PhaseSpec::Theta(s) = phase else {
                    unreachable!("target_b handled above")
                };
                let theta = parse_theta(s, bits)?;
                Ok(Self {
                    lambda: model.lambda,
                    potential: PotentialSpec::almost_mathieu(
                        model.lambda,
                        alpha.clone(),
                        theta.clone(),
                    ),
                    alpha,
                    theta: Some(theta),
                    target_b: None,
                    witness_scale: None,
                    certificate: None,
                    bits,
                    half_width,
                })
            }
        }
    }

    /// Phase with one certified witness at `n_w` and the floor checked on `(n_w/2, n_w]`.
    pub fn with_target_b(
        lambda: f64,
        alpha: &FrequencySpec,
        b: f64,
        ws: Option<u64>,
        half_width: i64,
        precision_bits: u32,
    ) -> Result<Self, LabError> {
        let n_w = ws.unwrap_or_else(|| witness_scale(b, half_width)).max(10);
        let bits = precision_bits.max(required_bits(b, n_w) + 64);
        let alpha = alpha.materialize(bits)?;
        let opts = PhaseOptions {
            n_min: Some(n_w / 2 + 1),
            ..Default::default()
        };
        let cert = construct_phase(&alpha, b, n_w, &opts)?;
        let theta = cert.theta.clone();
        Ok(Self {
            lambda,
            potential: PotentialSpec::almost_mathieu(lambda, alpha.clone(), theta.clone()),
            alpha,
            theta: Some(theta),
            target_b: Some(b),
            witness_scale: Some(n_w),
            certificate: Some(cert),
            bits,
            half_width,
        })
    }

    pub fn eigensystem(&self) -> Result<EigenSystem, LabError> {
        Ok(eigendecompose(&build_truncation(
            &self.potential,
            self.half_width,
        )?)?)
    }

    pub fn theta_string(&self) -> Option<String> {
        self.theta.as_ref().map(|t| t.to_decimal_string(40))
    }
}
