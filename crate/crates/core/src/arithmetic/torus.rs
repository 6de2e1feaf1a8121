use alloc::format;
use alloc::string::{String, ToString};
use core::cmp::Ordering;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Smallest precision a [`TorusScalar`] is ever built with.
pub const MIN_BITS: u32 = 64;
/// Default working precision for frequencies and phases.
pub const DEFAULT_BITS: u32 = 512;
const GUARD: u32 = 64;

/// Signed binary fixed point `mant / 2^bits` with a running error bound of
/// `err_ulps` units in the last place.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TorusScalar {
    mant: BigInt,
    bits: u32,
    err_ulps: u64,
}

fn pow2(bits: u32) -> BigInt {
    BigInt::one() << bits as usize
}

/// round(a / b) for b > 0, halves away from minus infinity.
fn div_round(a: &BigInt, b: &BigInt) -> BigInt {
    let two = BigInt::from(2u8);
    (a * &two + b).div_floor(&(b * &two))
}

/// Exact dyadic expansion of a finite double: x = m * 2^e.
fn f64_parts(x: f64) -> (i64, i32) {
    if x == 0.0 {
        return (0, 0);
    }
    let raw = x.to_bits();
    let sign = if raw >> 63 == 1 { -1 } else { 1 };
    let exp = ((raw >> 52) & 0x7ff) as i32;
    let frac = raw & ((1u64 << 52) - 1);
    let (m, e) = if exp == 0 {
        (frac as i64, -1074)
    } else {
        ((frac | (1u64 << 52)) as i64, exp - 1075)
    };
    (sign * m, e)
}

/// Nearest fixed-point mantissa at `bits` for a finite double (rounded up when `ceil`).
pub(crate) fn f64_to_mant(x: f64, bits: u32, ceil: bool) -> BigInt {
    let (m, e) = f64_parts(x);
    let m = BigInt::from(m);
    let shift = e + bits as i32;
    if shift >= 0 {
        m << shift as usize
    } else {
        let d = pow2((-shift) as u32);
        if ceil {
            m.div_ceil(&d)
        } else {
            div_round(&m, &d)
        }
    }
}

/// `(top, shift)` with `|mant| ~ top * 2^shift` and `top` holding at most 64 bits.
fn top_bits(mant: &BigInt) -> (f64, i64) {
    let nb = mant.bits() as i64;
    let shift = (nb - 64).max(0);
    let top = (mant.abs() >> shift as usize)
        .to_f64()
        .unwrap_or(f64::INFINITY);
    (top, shift)
}

impl TorusScalar {
    fn raw(mant: BigInt, bits: u32, err_ulps: u64) -> Self {
        Self {
            mant,
            bits,
            err_ulps,
        }
    }

    /// Exact value `mant / 2^bits`.
    pub fn from_mantissa(mant: BigInt, bits: u32) -> Self {
        Self::raw(mant, bits, 0).with_precision(bits.max(MIN_BITS))
    }

    pub fn zero(bits: u32) -> Self {
        Self::raw(BigInt::zero(), bits.max(MIN_BITS), 0)
    }

    pub fn from_int(n: i64, bits: u32) -> Self {
        let bits = bits.max(MIN_BITS);
        Self::raw(BigInt::from(n) << bits as usize, bits, 0)
    }

    /// `num / den` rounded to nearest.
    pub fn from_ratio(num: i64, den: i64, bits: u32) -> Result<Self> {
        if den == 0 {
            return Err(Error::InvalidArgument("zero denominator".into()));
        }
        let bits = bits.max(MIN_BITS);
        let (num, den) = if den < 0 { (-num, -den) } else { (num, den) };
        let scaled = BigInt::from(num) << bits as usize;
        let den = BigInt::from(den);
        let exact = (&scaled % &den).is_zero();
        Ok(Self::raw(div_round(&scaled, &den), bits, u64::from(!exact)))
    }

    pub fn from_f64(x: f64, bits: u32) -> Result<Self> {
        if !x.is_finite() {
            return Err(Error::InvalidArgument(format!("non-finite value {x}")));
        }
        let bits = bits.max(MIN_BITS);
        let mant = f64_to_mant(x, bits, false);
        let (_, e) = f64_parts(x);
        let exact = x == 0.0 || e + bits as i32 >= 0 || {
            let (m, _) = f64_parts(x);
            m.trailing_zeros() as i32 >= -(e + bits as i32)
        };
        Ok(Self::raw(mant, bits, u64::from(!exact)))
    }

    /// Parses `[-]digits[.digits][e[-]digits]`, rounding to nearest.
    pub fn from_decimal_str(s: &str, bits: u32) -> Result<Self> {
        let bits = bits.max(MIN_BITS);
        let bad = || Error::InvalidArgument(format!("not a decimal number: {s:?}"));
        let s = s.trim();
        let (neg, body) = match s.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s.strip_prefix('+').unwrap_or(s)),
        };
        let (num, exp) = match body.find(['e', 'E']) {
            Some(i) => (&body[..i], body[i + 1..].parse::<i64>().map_err(|_| bad())?),
            None => (body, 0),
        };
        let (ip, fp) = match num.find('.') {
            Some(i) => (&num[..i], &num[i + 1..]),
            None => (num, ""),
        };
        if ip.is_empty() && fp.is_empty() {
            return Err(bad());
        }
        if !ip.chars().chain(fp.chars()).all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let mut digits = String::with_capacity(ip.len() + fp.len());
        digits.push_str(ip);
        digits.push_str(fp);
        let d = BigInt::parse_bytes(
            if digits.is_empty() {
                b"0"
            } else {
                digits.as_bytes()
            },
            10,
        )
        .ok_or_else(bad)?;
        let scale = fp.len() as i64 - exp;
        let scaled = d << bits as usize;
        let (mant, exact) = if scale >= 0 {
            let den = num_traits::pow(BigInt::from(10u8), scale as usize);
            let exact = (&scaled % &den).is_zero();
            (div_round(&scaled, &den), exact)
        } else {
            (
                scaled * num_traits::pow(BigInt::from(10u8), (-scale) as usize),
                true,
            )
        };
        let mant = if neg { -mant } else { mant };
        Ok(Self::raw(mant, bits, u64::from(!exact)))
    }

    /// (√5 − 1)/2.
    pub fn golden(bits: u32) -> Self {
        Self::from_cf_tail(&[], bits)
    }

    /// √2 − 1.
    pub fn sqrt2_minus_1(bits: u32) -> Self {
        let bits = bits.max(MIN_BITS);
        let g = bits + GUARD;
        let s = (BigInt::from(2u8) << (2 * g) as usize).sqrt();
        let v = s - pow2(g);
        Self::raw(div_round(&v, &pow2(GUARD)), bits, 1)
    }

    /// `[0; a_1, …, a_K, 1, 1, 1, …]`: the given partial quotients followed by a golden tail.
    pub fn from_cf_tail(prefix: &[u64], bits: u32) -> Self {
        let bits = bits.max(MIN_BITS);
        let g = bits + GUARD;
        let one = pow2(g);
        // y = (1 + √5)/2 at 2^g scale
        let y = ((BigInt::from(5u8) << (2 * g) as usize).sqrt() + &one) >> 1usize;
        let (mut p0, mut q0) = (BigInt::one(), BigInt::zero());
        let (mut p1, mut q1) = (BigInt::zero(), BigInt::one());
        for &a in prefix {
            let a = BigInt::from(a);
            let p2 = &a * &p1 + &p0;
            let q2 = &a * &q1 + &q0;
            p0 = core::mem::replace(&mut p1, p2);
            q0 = core::mem::replace(&mut q1, q2);
        }
        let num = &p1 * &y + &p0 * &one;
        let den = &q1 * &y + &q0 * &one;
        let v = (num << g as usize).div_floor(&den);
        Self::raw(div_round(&v, &pow2(GUARD)), bits, 1)
    }

    pub fn precision_bits(&self) -> u32 {
        self.bits
    }

    pub fn err_ulps(&self) -> u64 {
        self.err_ulps
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.mant
    }

    /// Absolute error bound `err_ulps · 2^-bits`.
    pub fn error_bound(&self) -> f64 {
        libm::ldexp(self.err_ulps as f64, -(self.bits as i32))
    }

    /// Same value at another precision; lowering rounds and charges one ulp.
    pub fn with_precision(&self, bits: u32) -> Self {
        let bits = bits.max(MIN_BITS);
        match bits.cmp(&self.bits) {
            Ordering::Equal => self.clone(),
            Ordering::Greater => {
                let k = bits - self.bits;
                let err = if k >= 63 {
                    u64::MAX
                } else {
                    self.err_ulps.saturating_mul(1 << k)
                };
                Self::raw(&self.mant << k as usize, bits, err)
            }
            Ordering::Less => {
                let k = self.bits - bits;
                let d = pow2(k);
                let exact = (&self.mant % &d).is_zero();
                let err = if k >= 64 {
                    u64::from(self.err_ulps > 0)
                } else {
                    self.err_ulps.div_ceil(1 << k)
                };
                Self::raw(div_round(&self.mant, &d), bits, err + u64::from(!exact))
            }
        }
    }

    fn aligned(&self, other: &Self) -> (Self, Self) {
        let bits = self.bits.max(other.bits);
        (self.with_precision(bits), other.with_precision(bits))
    }

    pub fn add(&self, other: &Self) -> Self {
        let (a, b) = self.aligned(other);
        Self::raw(
            a.mant + b.mant,
            a.bits,
            a.err_ulps.saturating_add(b.err_ulps),
        )
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        Self::raw(-&self.mant, self.bits, self.err_ulps)
    }

    pub fn mul_int(&self, n: i64) -> Self {
        Self::raw(
            &self.mant * n,
            self.bits,
            self.err_ulps.saturating_mul(n.unsigned_abs()),
        )
    }

    /// Exact halving; precision grows by one bit.
    pub fn half(&self) -> Self {
        Self::raw(
            self.mant.clone(),
            self.bits + 1,
            self.err_ulps.saturating_mul(2),
        )
    }

    /// Rounded product at the larger of the two precisions.
    pub fn mul(&self, other: &Self) -> Self {
        let (a, b) = self.aligned(other);
        let prod = &a.mant * &b.mant;
        let mant = div_round(&prod, &pow2(a.bits));
        let ia = (a.mant.abs() >> a.bits as usize)
            .to_u64()
            .unwrap_or(u64::MAX)
            .saturating_add(1);
        let ib = (b.mant.abs() >> b.bits as usize)
            .to_u64()
            .unwrap_or(u64::MAX)
            .saturating_add(1);
        let err = ia
            .saturating_mul(b.err_ulps)
            .saturating_add(ib.saturating_mul(a.err_ulps))
            .saturating_add(1);
        Self::raw(mant, a.bits, err)
    }

    /// Representative in `[0, 1)`.
    pub fn frac(&self) -> Self {
        Self::raw(
            self.mant.mod_floor(&pow2(self.bits)),
            self.bits,
            self.err_ulps,
        )
    }

    /// Distance to the nearest integer, as a scalar in `[0, 1/2]`.
    pub fn torus_norm(&self) -> Self {
        let one = pow2(self.bits);
        let r = self.mant.mod_floor(&one);
        let r = if (&r << 1usize) > one { one - r } else { r };
        Self::raw(r, self.bits, self.err_ulps)
    }

    pub fn is_zero(&self) -> bool {
        self.mant.is_zero()
    }

    /// True when the representative is an integer (exact resonance in torus terms).
    pub fn is_integer(&self) -> bool {
        (&self.mant % pow2(self.bits)).is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.mant.sign() == Sign::Minus
    }

    pub fn to_f64(&self) -> f64 {
        if self.mant.is_zero() {
            return 0.0;
        }
        let (top, shift) = top_bits(&self.mant);
        let e = (shift - self.bits as i64).clamp(-4000, 4000) as i32;
        let v = libm::ldexp(top, e);
        if self.is_negative() {
            -v
        } else {
            v
        }
    }

    /// `ln |x|`, valid far below the `f64` range.
    pub fn ln_abs(&self) -> f64 {
        if self.mant.is_zero() {
            return f64::NEG_INFINITY;
        }
        let (top, shift) = top_bits(&self.mant);
        libm::log(top) + (shift - self.bits as i64) as f64 * core::f64::consts::LN_2
    }

    /// `ln` of the certified lower bound `|x| − err`; `None` when that bound is not positive.
    pub fn ln_lower(&self) -> Option<f64> {
        let lo = self.mant.abs() - BigInt::from(self.err_ulps);
        if lo.sign() != Sign::Plus {
            return None;
        }
        Some(Self::raw(lo, self.bits, 0).ln_abs())
    }

    /// `ln` of the certified upper bound `|x| + err`.
    pub fn ln_upper(&self) -> f64 {
        let hi = self.mant.abs() + BigInt::from(self.err_ulps);
        Self::raw(hi, self.bits, 0).ln_abs()
    }

    /// Interval `[x − err, x + err]` as two exact scalars.
    pub fn bounds(&self) -> (Self, Self) {
        let e = BigInt::from(self.err_ulps);
        (
            Self::raw(&self.mant - &e, self.bits, 0),
            Self::raw(&self.mant + &e, self.bits, 0),
        )
    }

    /// Compares represented values (error bounds ignored).
    pub fn cmp_value(&self, other: &Self) -> Ordering {
        let (a, b) = self.aligned(other);
        a.mant.cmp(&b.mant)
    }

    /// Decimal digits sufficient for an exact round trip at this precision.
    pub fn decimal_digits(&self) -> usize {
        (self.bits as f64 * core::f64::consts::LOG10_2) as usize + 3
    }

    /// Truncated decimal expansion with `digits` fractional digits.
    pub fn to_decimal_string(&self, digits: usize) -> String {
        let neg = self.is_negative();
        let scaled =
            (self.mant.abs() * num_traits::pow(BigInt::from(10u8), digits)) >> self.bits as usize;
        let mut s = scaled.to_string();
        if s.len() <= digits {
            let pad = digits + 1 - s.len();
            let mut p = String::with_capacity(pad + s.len());
            for _ in 0..pad {
                p.push('0');
            }
            p.push_str(&s);
            s = p;
        }
        let (ip, fp) = s.split_at(s.len() - digits);
        let mut out = String::new();
        if neg {
            out.push('-');
        }
        out.push_str(ip);
        if digits > 0 {
            out.push('.');
            out.push_str(fp);
        }
        out
    }
}

impl core::fmt::Display for TorusScalar {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        let digits = f.precision().unwrap_or_else(|| self.decimal_digits());
        f.write_str(&self.to_decimal_string(digits))
    }
}

/// `‖x‖_{ℝ/ℤ}`.
pub fn torus_norm(x: &TorusScalar) -> TorusScalar {
    x.torus_norm()
}

#[cfg(feature = "serde")]
mod serde_impl {
    use super::*;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(deny_unknown_fields)]
    struct Repr {
        value: String,
        precision_bits: u32,
        err_ulps: u64,
    }

    impl Serialize for TorusScalar {
        fn serialize<S: Serializer>(&self, s: S) -> core::result::Result<S::Ok, S::Error> {
            Repr {
                value: self.to_decimal_string(self.decimal_digits()),
                precision_bits: self.bits,
                err_ulps: self.err_ulps,
            }
            .serialize(s)
        }
    }

    impl<'de> Deserialize<'de> for TorusScalar {
        fn deserialize<D: Deserializer<'de>>(d: D) -> core::result::Result<Self, D::Error> {
            let r = Repr::deserialize(d)?;
            let mut x = TorusScalar::from_decimal_str(&r.value, r.precision_bits)
                .map_err(serde::de::Error::custom)?;
            x.err_ulps = r.err_ulps;
            Ok(x)
        }
    }
}
