use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use super::torus::{f64_to_mant, TorusScalar};
use crate::error::{Error, Result};

/// Symbolic frequency, materialized at a chosen precision.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(
    feature = "serde",
    serde(rename_all = "snake_case", deny_unknown_fields)
)]
pub enum FrequencySpec {
    Golden,
    SqrtTwoMinusOne,
    Rational {
        num: i64,
        den: i64,
    },
    Decimal {
        value: String,
    },
    /// `[0; prefix…, 1, 1, …]`.
    PartialQuotients {
        prefix: Vec<u64>,
    },
}

impl FrequencySpec {
    pub fn materialize(&self, bits: u32) -> Result<TorusScalar> {
        match self {
            Self::Golden => Ok(TorusScalar::golden(bits)),
            Self::SqrtTwoMinusOne => Ok(TorusScalar::sqrt2_minus_1(bits)),
            Self::Rational { num, den } => TorusScalar::from_ratio(*num, *den, bits),
            Self::Decimal { value } => TorusScalar::from_decimal_str(value, bits),
            Self::PartialQuotients { prefix } => Ok(TorusScalar::from_cf_tail(prefix, bits)),
        }
    }
}

/// Lower cutoff for limsup windows: `max(20, ⌈N/10⌉)`.
pub fn default_n_min(n: u64) -> u64 {
    n.div_ceil(10).max(20)
}

/// Output of [`delta_alpha_theta`].
#[derive(Clone, Debug, PartialEq)]
pub struct DeltaEstimate {
    /// Max of `−ln‖2θ+nα‖/|n|` over `n_min ≤ |n| ≤ n_max`.
    pub estimate: f64,
    pub argmax: i64,
    pub n_min: u64,
    pub n_max: u64,
    /// `(n, exponent)` at each new minimum of `‖2θ+nα‖`, scanning `|n|` upward from `n_min`.
    pub records: Vec<(i64, f64)>,
}

/// Finite-range estimate of `limsup −ln‖2θ+nα‖/|n|`.
pub fn delta_alpha_theta(
    alpha: &TorusScalar,
    theta: &TorusScalar,
    n_max: u64,
    n_min: Option<u64>,
) -> Result<DeltaEstimate> {
    if n_max < 10 {
        return Err(Error::InvalidArgument("N must be at least 10".into()));
    }
    let n_min = n_min.unwrap_or_else(|| default_n_min(n_max)).max(1);
    if n_min > n_max {
        return Err(Error::InvalidArgument("N_min exceeds N".into()));
    }
    let bits = alpha.precision_bits().max(theta.precision_bits());
    let alpha = alpha.with_precision(bits);
    let two_theta = theta.with_precision(bits).mul_int(2).frac();
    let mut xp = two_theta.clone();
    let mut xm = two_theta;
    let mut best = (0i64, f64::NEG_INFINITY);
    let mut min_ln = f64::INFINITY;
    let mut records = Vec::new();
    for k in 1..=n_max {
        xp = xp.add(&alpha).frac();
        xm = xm.sub(&alpha).frac();
        for (n, x) in [(-(k as i64), &xm), (k as i64, &xp)] {
            if x.is_integer() {
                return Err(Error::DegenerateExactResonance { n });
            }
            if k < n_min {
                continue;
            }
            let v = x.torus_norm();
            if v.ln_lower().is_none() {
                return Err(Error::PrecisionExhausted(format!(
                    "‖2θ+{n}α‖ below error bound"
                )));
            }
            let ln_v = v.ln_abs();
            let e = -ln_v / k as f64;
            if ln_v < min_ln {
                min_ln = ln_v;
                records.push((n, e));
            }
            if e > best.1 {
                best = (n, e);
            }
        }
    }
    Ok(DeltaEstimate {
        estimate: best.1,
        argmax: best.0,
        n_min,
        n_max,
        records,
    })
}

/// Tuning of [`construct_phase`].
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseOptions {
    /// Floor range starts here; default `max(20, ⌈n_max/10⌉)`.
    pub n_min: Option<u64>,
    /// Exclusion balls have radius `e^{−b(1+floor_margin)|n|}`.
    pub floor_margin: f64,
    /// Certificates need `ε̄ ≤ floor_ratio · b`.
    pub floor_ratio: f64,
    /// Witness targets `[1+inset, min(2−inset, e^{0.9·floor_ratio·b·n})]·e^{−b n}`.
    pub window_inset: f64,
}

impl Default for PhaseOptions {
    fn default() -> Self {
        Self {
            n_min: None,
            floor_margin: 0.04,
            floor_ratio: 0.05,
            window_inset: 0.05,
        }
    }
}

/// Bits needed by [`construct_phase`] for `e^{−b n_max}` with guard digits.
pub fn required_bits(b: f64, n_max: u64) -> u32 {
    libm::ceil(1.5 * b * n_max as f64 / core::f64::consts::LN_2) as u32 + 64
}

/// Phase with `‖2θ+n_jα‖ ≈ e^{−b n_j}` at witness times and a floor elsewhere.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct ResonanceCertificate {
    pub theta: TorusScalar,
    pub alpha: TorusScalar,
    #[cfg_attr(feature = "serde", serde(with = "f64_string"))]
    pub target_b: f64,
    pub witness_times: Vec<u64>,
    /// Certified `[lo_j, hi_j] ∋ ‖2θ+n_jα‖`.
    pub witness_bounds: Vec<(TorusScalar, TorusScalar)>,
    /// `ε̄` with `‖2θ+nα‖ ≥ e^{−(b+ε̄)|n|}` on the checked range.
    #[cfg_attr(feature = "serde", serde(with = "f64_string"))]
    pub floor_exponent: f64,
    /// Checked range `n_min ≤ |n| ≤ n_max`.
    pub checked_range: (u64, u64),
    #[cfg_attr(feature = "serde", serde(with = "f64_string"))]
    pub floor_ratio: f64,
}

#[cfg(feature = "serde")]
mod f64_string {
    use alloc::string::{String, ToString};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&x.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        String::deserialize(d)?
            .parse()
            .map_err(serde::de::Error::custom)
    }
}

/// Result of an independent linear rescan of a certificate.
#[derive(Clone, Debug, PartialEq)]
pub struct CertificateCheck {
    /// Smallest `ε̄` the floor alone requires.
    pub floor_needed: f64,
    /// Smallest `ε̄` the witness intervals require.
    pub witness_needed: f64,
}

fn two_theta_plus(theta: &TorusScalar, alpha: &TorusScalar, n: i64) -> TorusScalar {
    theta.mul_int(2).add(&alpha.mul_int(n))
}

impl ResonanceCertificate {
    /// Rescans every `n` in the checked range and every witness from scratch.
    pub fn verify(&self) -> Result<CertificateCheck> {
        let b = self.target_b;
        let reject = |m: String| Err(Error::CertificateRejected(m));
        let (n_min, n_max) = self.checked_range;
        if self.witness_times.len() != self.witness_bounds.len() {
            return reject("witness arrays differ in length".into());
        }
        for w in self.witness_times.windows(2) {
            if w[1] < 2 * w[0] {
                return reject(format!("witness times {} and {} not sparse", w[0], w[1]));
            }
        }
        let mut floor_needed = 0.0f64;
        for k in n_min..=n_max {
            for n in [-(k as i64), k as i64] {
                let v = two_theta_plus(&self.theta, &self.alpha, n).torus_norm();
                let Some(ln_lo) = v.ln_lower() else {
                    return Err(Error::PrecisionExhausted(format!(
                        "‖2θ+{n}α‖ not certified positive"
                    )));
                };
                floor_needed = floor_needed.max(-ln_lo / k as f64 - b);
            }
        }
        let mut witness_needed = 0.0f64;
        for (&n, (lo, hi)) in self.witness_times.iter().zip(&self.witness_bounds) {
            if n > n_max || n == 0 {
                return reject(format!("witness {n} outside (0, {n_max}]"));
            }
            let v = two_theta_plus(&self.theta, &self.alpha, n as i64).torus_norm();
            let (vlo, vhi) = v.bounds();
            if lo.cmp_value(&vlo).is_gt() || hi.cmp_value(&vhi).is_lt() {
                return reject(format!(
                    "stored interval at n = {n} does not enclose the rescan"
                ));
            }
            let Some(ln_lo) = lo.ln_lower() else {
                return reject(format!("lower bound at n = {n} not positive"));
            };
            let ln_hi = hi.ln_upper();
            let nf = n as f64;
            if ln_lo < -b * nf || ln_hi > core::f64::consts::LN_2 - b * nf {
                return reject(format!("witness at n = {n} outside [e^(-bn), 2e^(-bn)]"));
            }
            witness_needed = witness_needed.max(-ln_lo / nf - b).max(b + ln_hi / nf);
        }
        if self.floor_exponent < floor_needed || self.floor_exponent < witness_needed {
            return reject(format!(
                "floor exponent {} below required {}",
                self.floor_exponent,
                floor_needed.max(witness_needed)
            ));
        }
        if b > 0.0 && self.floor_exponent > self.floor_ratio * b {
            return reject(format!(
                "floor exponent {} exceeds {}·b",
                self.floor_exponent, self.floor_ratio
            ));
        }
        Ok(CertificateCheck {
            floor_needed,
            witness_needed,
        })
    }
}

/// Half-open arcs of `[0, 1)` at `2^-bits` resolution.
struct ArcSet {
    one: BigInt,
    parts: Vec<(BigInt, BigInt)>,
}

impl ArcSet {
    fn full(bits: u32) -> Self {
        let one = BigInt::one() << bits as usize;
        Self {
            parts: alloc::vec![(BigInt::zero(), one.clone())],
            one,
        }
    }

    /// `[c − r, c + r)` reduced mod 1, as at most two plain arcs.
    fn ball(&self, c: &BigInt, r: &BigInt) -> Vec<(BigInt, BigInt)> {
        let s = c - r;
        let e = c + r;
        self.arc(s, e)
    }

    fn arc(&self, s: BigInt, e: BigInt) -> Vec<(BigInt, BigInt)> {
        let s = s.mod_floor(&self.one);
        let len = &e - &s.clone();
        let len = if len >= self.one {
            self.one.clone()
        } else {
            len
        };
        let e = &s + len;
        if e > self.one {
            alloc::vec![(s, self.one.clone()), (BigInt::zero(), e - &self.one)]
        } else {
            alloc::vec![(s, e)]
        }
    }

    fn remove(&mut self, pieces: &[(BigInt, BigInt)]) {
        for (s, e) in pieces {
            let mut out = Vec::with_capacity(self.parts.len() + 1);
            for (a, b) in self.parts.drain(..) {
                if &b <= s || &a >= e {
                    out.push((a, b));
                    continue;
                }
                if &a < s {
                    out.push((a, s.clone()));
                }
                if &b > e {
                    out.push((e.clone(), b));
                }
            }
            self.parts = out;
        }
    }

    fn intersect(&self, pieces: &[(BigInt, BigInt)]) -> Vec<(BigInt, BigInt)> {
        let mut out = Vec::new();
        for (a, b) in &self.parts {
            for (s, e) in pieces {
                let lo = if a > s { a } else { s };
                let hi = if b < e { b } else { e };
                if lo < hi {
                    out.push((lo.clone(), hi.clone()));
                }
            }
        }
        out.sort();
        out
    }

    fn widest(&self) -> Option<&(BigInt, BigInt)> {
        // first widest arc wins, keeping the choice deterministic
        let mut best: Option<&(BigInt, BigInt)> = None;
        for p in &self.parts {
            if best.is_none_or(|q| &p.1 - &p.0 > &q.1 - &q.0) {
                best = Some(p);
            }
        }
        best
    }
}

/// Builds θ with `δ(α,θ) ≈ b` on `|n| ≤ n_max` by nested intervals, then rescans it.
///
/// `b = 0` returns θ = 1/4 (so 2θ = 1/2): no witnesses, and the floor exponent
/// is whatever the rescan measures.
pub fn construct_phase(
    alpha: &TorusScalar,
    b: f64,
    n_max: u64,
    opts: &PhaseOptions,
) -> Result<ResonanceCertificate> {
    if !(b >= 0.0 && b.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "b = {b} must be finite and nonnegative"
        )));
    }
    if n_max < 10 {
        return Err(Error::InvalidArgument("n_max must be at least 10".into()));
    }
    let n_min = opts
        .n_min
        .unwrap_or_else(|| default_n_min(n_max))
        .clamp(1, n_max);
    let bits = alpha.precision_bits();
    if b == 0.0 {
        let theta = TorusScalar::from_ratio(1, 4, bits)?;
        let mut cert = ResonanceCertificate {
            theta,
            alpha: alpha.clone(),
            target_b: 0.0,
            witness_times: Vec::new(),
            witness_bounds: Vec::new(),
            floor_exponent: f64::INFINITY,
            checked_range: (n_min, n_max),
            floor_ratio: opts.floor_ratio,
        };
        let check = cert.verify()?;
        cert.floor_exponent = check.floor_needed;
        cert.verify()?;
        return Ok(cert);
    }
    let need = required_bits(b, n_max);
    if bits < need {
        return Err(Error::PrecisionExhausted(format!(
            "b = {b}, n_max = {n_max} needs {need} bits, alpha carries {bits}"
        )));
    }
    let alpha_f = alpha.frac();
    let mut set = ArcSet::full(bits);
    for k in n_min..=n_max {
        let r = f64_to_mant(
            libm::exp(-b * (1.0 + opts.floor_margin) * k as f64),
            bits,
            true,
        );
        for n in [k as i64, -(k as i64)] {
            let c = alpha_f.mul_int(-n).frac();
            let ball = set.ball(c.mantissa(), &r);
            set.remove(&ball);
        }
    }
    let mut witnesses = Vec::new();
    let mut cand = n_min.next_power_of_two();
    let min_width = BigInt::one() << 64usize;
    while cand <= n_max {
        let scale = libm::exp(-b * cand as f64);
        let w_lo = f64_to_mant(scale * (1.0 + opts.window_inset), bits, true);
        // upper edge also capped so the witness alone keeps ε̄ within floor_ratio·b
        let cap = libm::exp(0.9 * opts.floor_ratio * b * cand as f64);
        let ratio_hi = (2.0 - opts.window_inset).min(cap);
        if ratio_hi <= 1.0 + 2.0 * opts.window_inset {
            cand *= 2;
            continue;
        }
        let w_hi = f64_to_mant(scale * ratio_hi, bits, false);
        let shift = alpha_f.mul_int(-(cand as i64)).frac();
        let s = shift.mantissa();
        let mut pieces = set.arc(s + &w_lo, s + &w_hi);
        pieces.extend(set.arc(s - &w_hi, s - &w_lo));
        let inter = set.intersect(&pieces);
        if inter.iter().any(|(a, b)| b - a >= min_width) {
            set.parts = inter;
            witnesses.push(cand);
            cand *= 2;
        }
        cand *= 2;
    }
    if witnesses.is_empty() {
        return Err(Error::InfeasibleWindow(format!(
            "no witness time in [{n_min}, {n_max}] survives the floor"
        )));
    }
    let (lo, hi) = set
        .widest()
        .ok_or_else(|| Error::InfeasibleWindow("empty admissible set".into()))?
        .clone();
    let mut x: BigInt = (&lo + &hi) >> 1usize;
    if x.is_odd() {
        x -= 1;
    }
    let theta = TorusScalar::from_mantissa(x >> 1usize, bits);
    let mut witness_bounds = Vec::with_capacity(witnesses.len());
    for &n in &witnesses {
        witness_bounds.push(
            two_theta_plus(&theta, alpha, n as i64)
                .torus_norm()
                .bounds(),
        );
    }
    let mut cert = ResonanceCertificate {
        theta,
        alpha: alpha.clone(),
        target_b: b,
        witness_times: witnesses,
        witness_bounds,
        floor_exponent: f64::INFINITY,
        checked_range: (n_min, n_max),
        floor_ratio: f64::INFINITY,
    };
    let check = cert.verify()?;
    cert.floor_exponent = check.floor_needed.max(check.witness_needed);
    cert.floor_ratio = opts.floor_ratio;
    cert.verify()?;
    Ok(cert)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_theta_zero_is_nonresonant() {
        let a = TorusScalar::golden(256);
        let d = delta_alpha_theta(&a, &TorusScalar::zero(256), 10_000, None).unwrap();
        assert_eq!(d.n_min, 1000);
        assert!(d.estimate <= 0.01, "{}", d.estimate);
    }

    #[test]
    fn exact_resonance_flagged() {
        let a = TorusScalar::golden(256);
        let theta = a.half();
        let r = delta_alpha_theta(&a, &theta, 100, None);
        assert_eq!(r, Err(Error::DegenerateExactResonance { n: -1 }));
    }

    #[test]
    fn construct_and_recover() {
        let a = TorusScalar::golden(1024);
        for b in [0.1, 0.3] {
            let c = construct_phase(&a, b, 512, &PhaseOptions::default()).unwrap();
            let d = delta_alpha_theta(&a, &c.theta, 512, None).unwrap();
            assert!(c.floor_exponent <= 0.05 * b);
            assert!(
                (d.estimate - b).abs() <= 0.15 * b,
                "b={b} est={}",
                d.estimate
            );
            assert!(d.estimate <= b + c.floor_exponent + 1e-12);
        }
    }

    #[test]
    fn underprecise_alpha_rejected() {
        let a = TorusScalar::golden(256);
        let r = construct_phase(&a, 5.0, 512, &PhaseOptions::default());
        assert!(matches!(r, Err(Error::PrecisionExhausted(_))));
    }
}
