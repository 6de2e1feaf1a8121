use alloc::format;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::torus::TorusScalar;
use crate::error::{Error, Result};

/// Continued fraction `α = a_0 + [0; a_1, a_2, …]` with certified quotients.
#[derive(Clone, Debug, PartialEq)]
pub struct ContinuedFraction {
    pub alpha: TorusScalar,
    pub integer_part: BigInt,
    /// `a_1, a_2, …`; every entry is shared by the whole uncertainty interval of `alpha`.
    pub partial_quotients: Vec<u64>,
    /// `(p_k, q_k)` for `k = 0..=len`, starting from `(a_0, 1)`.
    pub convergents: Vec<(BigInt, BigInt)>,
    /// The expansion terminated: `alpha` equals the last convergent to working precision.
    pub rational: bool,
}

fn euclid_step(num: &mut BigInt, den: &mut BigInt) -> BigInt {
    let (a, r) = num.div_mod_floor(den);
    *num = core::mem::replace(den, r);
    a
}

/// Partial quotients of `alpha` up to `depth`, certified against its error bound.
pub fn continued_fraction(alpha: &TorusScalar, depth: usize) -> Result<ContinuedFraction> {
    if depth == 0 {
        return Err(Error::InvalidArgument("depth must be at least 1".into()));
    }
    let one = BigInt::one() << alpha.precision_bits() as usize;
    let e = BigInt::from(alpha.err_ulps());
    let (mut n1, mut d1) = (alpha.mantissa() - &e, one.clone());
    let (mut n2, mut d2) = (alpha.mantissa() + &e, one.clone());
    let a0 = euclid_step(&mut n1, &mut d1);
    let a0b = euclid_step(&mut n2, &mut d2);
    if a0 != a0b {
        return Err(Error::PrecisionExhausted(
            "integer part not certified".into(),
        ));
    }
    let mut quotients = Vec::new();
    let mut conv = alloc::vec![(a0.clone(), BigInt::one())];
    let (mut pm, mut qm) = (BigInt::one(), BigInt::zero());
    let mut rational = false;
    while quotients.len() < depth {
        let z1 = d1.is_zero();
        let z2 = d2.is_zero();
        if z1 && z2 {
            rational = true;
            break;
        }
        if z1 || z2 {
            break;
        }
        let a = euclid_step(&mut n1, &mut d1);
        let b = euclid_step(&mut n2, &mut d2);
        if a != b {
            break;
        }
        let Some(a) = a.to_u64() else { break };
        let (p, q) = conv.last().unwrap().clone();
        let np = BigInt::from(a) * &p + &pm;
        let nq = BigInt::from(a) * &q + &qm;
        pm = p;
        qm = q;
        quotients.push(a);
        conv.push((np, nq));
    }
    if quotients.len() < depth && !rational {
        // Uncertainty interval straddles a cylinder boundary. If it contains one of
        // the midpoint's convergents, alpha is rational at this precision.
        if let Some(k) = rational_match(alpha, quotients.len() + 3) {
            let cf = midpoint_expansion(alpha, k);
            return Ok(ContinuedFraction {
                alpha: alpha.clone(),
                integer_part: a0,
                partial_quotients: cf.0,
                convergents: cf.1,
                rational: true,
            });
        }
        return Err(Error::PrecisionExhausted(format!(
            "only {} of {} partial quotients certified at {} bits",
            quotients.len(),
            depth,
            alpha.precision_bits()
        )));
    }
    Ok(ContinuedFraction {
        alpha: alpha.clone(),
        integer_part: a0,
        partial_quotients: quotients,
        convergents: conv,
        rational,
    })
}

/// Expansion of the exact dyadic midpoint, `k` quotients.
fn midpoint_expansion(alpha: &TorusScalar, k: usize) -> (Vec<u64>, Vec<(BigInt, BigInt)>) {
    let mut num = alpha.mantissa().clone();
    let mut den = BigInt::one() << alpha.precision_bits() as usize;
    let a0 = euclid_step(&mut num, &mut den);
    let mut qs = Vec::new();
    let mut conv = alloc::vec![(a0, BigInt::one())];
    let (mut pm, mut qm) = (BigInt::one(), BigInt::zero());
    while qs.len() < k && !den.is_zero() {
        let a = euclid_step(&mut num, &mut den);
        let a = a.to_u64().unwrap_or(u64::MAX);
        let (p, q) = conv.last().unwrap().clone();
        let np = BigInt::from(a) * &p + &pm;
        let nq = BigInt::from(a) * &q + &qm;
        pm = p;
        qm = q;
        qs.push(a);
        conv.push((np, nq));
    }
    (qs, conv)
}

/// Index `k` of the first midpoint convergent `p_k/q_k` with `|α − p_k/q_k| ≤ err`.
fn rational_match(alpha: &TorusScalar, max_k: usize) -> Option<usize> {
    let (_, conv) = midpoint_expansion(alpha, max_k);
    let bits = alpha.precision_bits() as usize;
    let e = BigInt::from(alpha.err_ulps());
    // an irrational's convergents only enter the interval once q ~ 2^(bits/2)
    let q_max = BigInt::one() << (bits / 4);
    conv.iter().enumerate().find_map(|(k, (p, q))| {
        let gap = (alpha.mantissa() * q - (p << bits)).abs();
        (q < &q_max && gap <= &e * q).then_some(k)
    })
}

/// Outcome of a finite-range Diophantine scan.
#[derive(Clone, Debug, PartialEq)]
pub struct DiophantineReport {
    pub holds: bool,
    /// Minimizer of `‖kα‖·k^κ` over the scanned range.
    pub worst_k: u64,
    pub worst_value: f64,
}

/// Checks `‖kα‖ ≥ τ/k^κ` for `1 ≤ k ≤ n`.
pub fn diophantine_check(
    cf: &ContinuedFraction,
    kappa: f64,
    tau: f64,
    n: u64,
) -> Result<DiophantineReport> {
    if !(kappa > 0.0 && tau > 0.0 && n >= 1) {
        return Err(Error::InvalidArgument(
            "need kappa > 0, tau > 0, N >= 1".into(),
        ));
    }
    let alpha = &cf.alpha;
    let mut x = alpha.frac();
    let step = x.clone();
    let mut holds = true;
    let mut worst = (0u64, f64::INFINITY);
    for k in 1..=n {
        if k > 1 {
            x = x.add(&step).frac();
        }
        let v = x.torus_norm().to_f64();
        let thr = tau / libm::pow(k as f64, kappa);
        let slack = alpha.error_bound() * k as f64 + 4.0 * f64::EPSILON * v.max(thr);
        if (v - thr).abs() <= slack {
            return Err(Error::PrecisionExhausted(format!(
                "‖{k}α‖ too close to τ/k^κ to certify"
            )));
        }
        if v < thr {
            holds = false;
        }
        let w = v * libm::pow(k as f64, kappa);
        if w < worst.1 {
            worst = (k, w);
        }
    }
    Ok(DiophantineReport {
        holds,
        worst_k: worst.0,
        worst_value: worst.1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_all_ones() {
        let cf = continued_fraction(&TorusScalar::golden(256), 10).unwrap();
        assert_eq!(cf.partial_quotients, alloc::vec![1u64; 10]);
        assert!(!cf.rational);
        let q: Vec<u64> = cf
            .convergents
            .iter()
            .map(|c| c.1.to_u64().unwrap())
            .collect();
        assert_eq!(q, [1, 1, 2, 3, 5, 8, 13, 21, 34, 55, 89]);
    }

    #[test]
    fn rational_flag() {
        let x = TorusScalar::from_ratio(3, 10, 512).unwrap();
        let cf = continued_fraction(&x, 20).unwrap();
        assert!(cf.rational);
        let (p, q) = cf.convergents.last().unwrap();
        assert_eq!((p.to_i64().unwrap(), q.to_i64().unwrap()), (3, 10));
        let d = TorusScalar::from_f64(0.375, 64).unwrap();
        let cf = continued_fraction(&d, 20).unwrap();
        assert!(cf.rational);
        assert_eq!(cf.partial_quotients, [2, 1, 2]);
    }

    #[test]
    fn shallow_precision_exhausts() {
        let g = TorusScalar::golden(64);
        assert!(matches!(
            continued_fraction(&g, 200),
            Err(Error::PrecisionExhausted(_))
        ));
    }
}
