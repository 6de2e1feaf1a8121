//! Resonance sites `L₀`, the two-case eigenfunction decay bound, the
//! nearest-resonance envelope check and the palindromic defect.

use alloc::vec::Vec;
use core::cmp::Ordering;
use core::f64::consts::PI;

use crate::arithmetic::TorusScalar;
use crate::error::{Error, Result};
use crate::spectral::{EigenSystem, Profile};

/// Minimizer of `|sin π(2θ + xα)|` over `|x| ≤ search_radius`.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ResonanceSite {
    pub l0: i64,
    pub min_sin_value: f64,
    /// `ln |sin π(2θ + L₀α)|`, finite far below the `f64` range.
    pub ln_min_sin: f64,
    pub search_radius: i64,
    /// The winner beats the runner-up by more than the combined rounding bounds.
    pub certified: bool,
}

/// `ln sin(π t)` for `t ∈ [0, 1/2]` given as a scalar.
fn ln_sin_pi(t: &TorusScalar) -> f64 {
    if t.is_zero() {
        return f64::NEG_INFINITY;
    }
    let tf = t.to_f64();
    if tf > 1e-6 {
        libm::log(libm::sin(PI * tf))
    } else {
        // sin(πt)/(πt) = 1 − (πt)²/6 + …
        let x = PI * tf;
        t.ln_abs() + libm::log(PI) + libm::log1p(-x * x / 6.0)
    }
}

/// Exhaustive scan in the order `0, −1, 1, −2, 2, …` keeping the first strict minimum.
pub fn find_resonance(
    theta: &TorusScalar,
    alpha: &TorusScalar,
    radius: i64,
) -> Result<ResonanceSite> {
    if radius < 1 {
        return Err(Error::InvalidArgument(
            "resonance search radius must be at least 1".into(),
        ));
    }
    let two_theta = theta.mul_int(2);
    let mut best = (0i64, two_theta.torus_norm());
    let mut second: Option<TorusScalar> = None;
    let mut consider = |x: i64, v: TorusScalar, best: &mut (i64, TorusScalar)| {
        if v.cmp_value(&best.1) == Ordering::Less {
            let old = core::mem::replace(best, (x, v));
            second = Some(old.1);
        } else if second
            .as_ref()
            .is_none_or(|s| v.cmp_value(s) == Ordering::Less)
        {
            second = Some(v);
        }
    };
    let mut left = two_theta.clone();
    let mut right = two_theta;
    for k in 1..=radius {
        left = left.sub(alpha);
        right = right.add(alpha);
        consider(-k, left.torus_norm(), &mut best);
        consider(k, right.torus_norm(), &mut best);
    }
    let certified = second.as_ref().is_none_or(|s| {
        let (_, hi) = best.1.bounds();
        let (lo, _) = s.bounds();
        hi.cmp_value(&lo) == Ordering::Less
    });
    let t = &best.1;
    Ok(ResonanceSite {
        l0: best.0,
        min_sin_value: libm::sin(PI * t.to_f64()),
        ln_min_sin: ln_sin_pi(t),
        search_radius: radius,
        certified,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum DecayCase {
    OppositeSide,
    SameSideEta,
    NearestResonance,
}

impl DecayCase {
    pub fn tag(self) -> &'static str {
        match self {
            Self::OppositeSide => "opposite-side",
            Self::SameSideEta => "same-side-eta",
            Self::NearestResonance => "nearest-resonance",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KeyBound {
    /// Bound on `|φ_s(ℓ)| / |φ_s(m_s)|`.
    pub bound: f64,
    pub log_bound: f64,
    pub case: DecayCase,
}

/// Two-case bound on `|φ_s(ℓ)|/|φ_s(m_s)|` given the resonance offset `k₀`.
///
/// `eta` is validated whenever supplied. On the resonant side the caller must
/// pass `ln_sine = ln|sin π(2θ+α(2m_s+k₀))|`, and it must clear `−η|ℓ−m_s|`.
pub fn key_bound(
    ell: i64,
    m_s: i64,
    k0: i64,
    lambda: f64,
    eta: Option<f64>,
    eps: f64,
    ln_sine: Option<f64>,
) -> Result<KeyBound> {
    if !(lambda > 1.0) {
        return Err(Error::InvalidArgument(alloc::format!(
            "lambda = {lambda} must exceed 1"
        )));
    }
    if !(eps >= 0.0) {
        return Err(Error::InvalidArgument("eps must be nonnegative".into()));
    }
    if ell == m_s {
        return Err(Error::InvalidArgument("ell must differ from m_s".into()));
    }
    let ln_l = libm::log(lambda);
    let upper = ln_l - eps;
    if let Some(eta) = eta {
        if !(eta >= 0.0 && eta < upper) {
            return Err(Error::EtaOutOfRange { eta, upper });
        }
    }
    let d = ell.abs_diff(m_s) as f64;
    let side = (ell - m_s).signum() * k0.signum();
    let (rate, case) = if side < 0 {
        (upper, DecayCase::OppositeSide)
    } else {
        let eta = eta.ok_or(Error::HypothesisNotCertified)?;
        match ln_sine {
            Some(s) if s >= -eta * d => {}
            _ => return Err(Error::HypothesisNotCertified),
        }
        (upper - eta, DecayCase::SameSideEta)
    };
    let log_bound = -rate * d;
    Ok(KeyBound {
        bound: libm::exp(log_bound),
        log_bound,
        case,
    })
}

/// `ln e^{0.1·k}`: finite-size slack at scale `k`.
pub fn default_log_slack(k: u64) -> f64 {
    0.1 * k as f64
}

/// One `(s, ℓ)` comparison of the nearest-resonance envelope.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DecayRow {
    pub s: usize,
    pub ell: i64,
    pub m_s: i64,
    /// `‖(φ_s(ℓ), φ_s(ℓ−1))‖`.
    pub observed: f64,
    pub predicted: f64,
    pub case: DecayCase,
    /// `ln observed − ln(predicted · slack)`; nonpositive means pass.
    pub margin: f64,
    pub pass: bool,
}

fn u_norm(p: &Profile<'_>, y: i64) -> f64 {
    libm::hypot(p.at(y), p.at(y - 1))
}

/// Checks `‖U(ℓ)‖ ≤ e^{εk} max{‖U(m_s)‖e^{−(lnλ−ε)|ℓ−m_s|}, ‖U(L₀−m_s)‖e^{−(lnλ−ε)|ℓ−(L₀−m_s)|}}·slack`
/// for every trusted `φ_s` and every `ℓ` in the trust region, with `k = max(|m_s|, ⌈trust/3⌉)`.
/// `log_slack = None` uses [`default_log_slack`] at each eigenfunction's `k`.
pub fn verify_decay(
    sys: &EigenSystem,
    site: &ResonanceSite,
    lambda: f64,
    eps: f64,
    log_slack: Option<f64>,
) -> Result<Vec<DecayRow>> {
    if !(lambda > 1.0) {
        return Err(Error::InvalidArgument(alloc::format!(
            "lambda = {lambda} must exceed 1"
        )));
    }
    let trust = sys.trust_region;
    if site.search_radius < trust {
        return Err(Error::InvalidArgument(alloc::format!(
            "resonance radius {} is below the trust region {trust}",
            site.search_radius
        )));
    }
    let rate = libm::log(lambda) - eps;
    let mut rows = Vec::new();
    for s in sys.trusted() {
        let p = sys.profile(s);
        let m_s = sys.centers()[s];
        let mirror = site.l0 - m_s;
        let k = m_s.unsigned_abs().max((trust as u64).div_ceil(3));
        let slack = log_slack.unwrap_or_else(|| default_log_slack(k));
        let ln_um = libm::log(u_norm(&p, m_s));
        let ln_ur = libm::log(u_norm(&p, mirror));
        for ell in -trust..=trust {
            let obs = u_norm(&p, ell);
            let a = ln_um - rate * ell.abs_diff(m_s) as f64;
            let b = ln_ur - rate * ell.abs_diff(mirror) as f64;
            let ln_pred = eps * k as f64 + a.max(b);
            let margin = libm::log(obs) - ln_pred - slack;
            rows.push(DecayRow {
                s,
                ell,
                m_s,
                observed: obs,
                predicted: libm::exp(ln_pred),
                case: DecayCase::NearestResonance,
                margin,
                pass: !(margin > 0.0),
            });
        }
    }
    Ok(rows)
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PalindromeDefect {
    pub iota: i8,
    pub defect: f64,
    /// The site `m_i` at which both vectors are compared.
    pub site: i64,
    /// `‖Φ(m_i)‖`.
    pub phi_norm: f64,
}

/// `min_ι ‖Φ(m_i) + ιΦ_i(m_i)‖` with `u_i(n) = u(k_i − n)`; `m_i = k_i/2` for even
/// `k_i`, `(k_i − 1)/2 + 1` for odd. Ties pick `ι = −1`.
pub fn palindrome_defect(u: &Profile<'_>, k_i: i64) -> Result<PalindromeDefect> {
    let m = if k_i.rem_euclid(2) == 0 {
        k_i.div_euclid(2)
    } else {
        (k_i - 1).div_euclid(2) + 1
    };
    for n in [m, m - 1, k_i - m, k_i - m + 1] {
        if !u.contains(n) {
            return Err(Error::OutOfWindow {
                n,
                lo: u.first_site,
                hi: u.last_site(),
            });
        }
    }
    let phi = [u.at(m), u.at(m - 1)];
    let phi_i = [u.at(k_i - m), u.at(k_i - m + 1)];
    let d = |iota: f64| libm::hypot(phi[0] + iota * phi_i[0], phi[1] + iota * phi_i[1]);
    let (minus, plus) = (d(-1.0), d(1.0));
    let (iota, defect) = if plus < minus { (1, plus) } else { (-1, minus) };
    Ok(PalindromeDefect {
        iota,
        defect,
        site: m,
        phi_norm: libm::hypot(phi[0], phi[1]),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn theta_zero_resonates_at_origin() {
        let a = TorusScalar::golden(128);
        let r = find_resonance(&TorusScalar::zero(128), &a, 10).unwrap();
        assert_eq!(r.l0, 0);
        assert_eq!(r.min_sin_value, 0.0);
        assert_eq!(r.ln_min_sin, f64::NEG_INFINITY);
    }

    #[test]
    fn key_bound_cases() {
        let ln2 = core::f64::consts::LN_2;
        let b = key_bound(50, 0, -3, 2.0, None, 0.05, None).unwrap();
        assert_eq!(b.case, DecayCase::OppositeSide);
        assert!((b.log_bound + (ln2 - 0.05) * 50.0).abs() < 1e-12);
        let b = key_bound(50, 0, 3, 2.0, Some(0.3), 0.05, Some(-1.0)).unwrap();
        assert!((b.log_bound + (ln2 - 0.35) * 50.0).abs() < 1e-12);
        assert!(matches!(
            key_bound(50, 0, 3, 2.0, Some(ln2), 0.05, Some(0.0)),
            Err(Error::EtaOutOfRange { .. })
        ));
        assert_eq!(
            key_bound(50, 0, 3, 2.0, Some(0.3), 0.05, None),
            Err(Error::HypothesisNotCertified)
        );
        assert_eq!(
            key_bound(50, 0, 3, 2.0, Some(0.3), 0.05, Some(-20.0)),
            Err(Error::HypothesisNotCertified)
        );
    }

    #[test]
    fn odd_center_uses_upper_site() {
        let v = [1.0, 2.0, 2.0, 1.0];
        let p = Profile::new(0, &v);
        let d = palindrome_defect(&p, 3).unwrap();
        assert_eq!(d.site, 2);
        assert_eq!((d.iota, d.defect), (-1, 0.0));
        assert!(palindrome_defect(&p, 9).is_err());
    }
}
