//! Per-eigenfunction statistics shared by the experiments.

use qplab_core::resonance::palindrome_defect;
use qplab_core::spectral::{decay_fit, sule_log_constant, Side};
use qplab_core::{torus_norm, EigenSystem, TorusScalar};
use serde::Serialize;

/// Two-sided decay rate of every trusted eigenfunction; `None` when the fit degenerates.
pub fn decay_rates(sys: &EigenSystem, tail: (u64, u64)) -> Vec<(usize, i64, Option<f64>)> {
    sys.trusted()
        .into_iter()
        .map(|s| {
            let m = sys.centers()[s];
            (
                s,
                m,
                decay_fit(&sys.profile(s), m, tail, Side::Both)
                    .ok()
                    .map(|f| f.rate),
            )
        })
        .collect()
}

/// `ln C_s/|m_s|` over the trust window for trusted eigenfunctions with `m_s ≠ 0`.
pub fn sule_statistics(sys: &EigenSystem, gamma: f64) -> Vec<(usize, i64, f64)> {
    let t = sys.trust_region;
    sys.trusted()
        .into_iter()
        .filter(|&s| sys.centers()[s] != 0)
        .map(|s| {
            let m = sys.centers()[s];
            let p = sys.profile(s);
            (
                s,
                m,
                sule_log_constant(&p.restrict(-t, t), m, gamma) / m.unsigned_abs() as f64,
            )
        })
        .collect()
}

/// Signed witness `±n` whose `‖2θ+nα‖` is smaller.
pub fn signed_witness(theta: &TorusScalar, alpha: &TorusScalar, n: u64) -> i64 {
    let n = n as i64;
    let at = |k: i64| torus_norm(&theta.mul_int(2).add(&alpha.mul_int(k)));
    if at(-n).cmp_value(&at(n)).is_lt() {
        -n
    } else {
        n
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResonantRow {
    pub s: usize,
    pub m: i64,
    pub mirror: i64,
    /// `−ln(bump/|φ(m)|)/|k − 2m|` with the bump the largest entry within `|k|/16` of the mirror.
    pub toward: f64,
    /// Fitted rate on the side facing away from the mirror.
    pub opposite: Option<f64>,
}

/// Trusted eigenfunctions centered within `|k|/8` of the origin, for a resonance at `k`.
pub fn resonant_rates(sys: &EigenSystem, k: i64, opposite_tail: (u64, u64)) -> Vec<ResonantRow> {
    let kk = k.abs();
    let w = (kk / 16).max(1);
    sys.trusted()
        .into_iter()
        .filter(|&s| sys.centers()[s].abs() <= kk / 8)
        .map(|s| {
            let m = sys.centers()[s];
            let p = sys.profile(s);
            let mirror = k - m;
            let bump = p
                .restrict(mirror - w, mirror + w)
                .values
                .iter()
                .fold(0.0f64, |x, v| x.max(v.abs()));
            let toward = -(bump / p.at(m).abs()).ln() / (k - 2 * m).abs().max(1) as f64;
            let side = if mirror > m { Side::Left } else { Side::Right };
            let opposite = decay_fit(&p, m, opposite_tail, side).ok().map(|f| f.rate);
            ResonantRow {
                s,
                m,
                mirror,
                toward,
                opposite,
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PalindromeRow {
    pub s: usize,
    pub m: i64,
    pub iota: i8,
    /// `defect/‖Φ(m_i)‖`.
    pub relative: f64,
}

/// Palindromic defect at scale `k` for trusted eigenfunctions centered within `|k|/4` of `k/2`.
pub fn palindrome_scan(sys: &EigenSystem, k: i64) -> Vec<PalindromeRow> {
    let kk = k.abs();
    sys.trusted()
        .into_iter()
        .filter(|&s| (2 * sys.centers()[s] - k).abs() <= kk / 2)
        .filter_map(|s| {
            let d = palindrome_defect(&sys.profile(s), k).ok()?;
            Some(PalindromeRow {
                s,
                m: sys.centers()[s],
                iota: d.iota,
                relative: d.defect / d.phi_norm,
            })
        })
        .collect()
}

/// Median of the finite entries; `None` if there are none.
pub fn median(values: impl IntoIterator<Item = f64>) -> Option<f64> {
    let mut v: Vec<f64> = values.into_iter().filter(|x| x.is_finite()).collect();
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    })
}

pub fn fraction(hits: usize, total: usize) -> f64 {
    if total == 0 {
        0.0
    } else {
        hits as f64 / total as f64
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Classification {
    #[serde(rename = "delocalized-signature")]
    DelocalizedSignature,
    #[serde(rename = "localized-no-SULE")]
    LocalizedNoSule,
    #[serde(rename = "SULE-consistent")]
    SuleConsistent,
    #[serde(rename = "unclassified")]
    Unclassified,
}

impl Classification {
    pub fn label(self) -> &'static str {
        match self {
            Self::DelocalizedSignature => "delocalized-signature",
            Self::LocalizedNoSule => "localized-no-SULE",
            Self::SuleConsistent => "SULE-consistent",
            Self::Unclassified => "unclassified",
        }
    }

    /// Regime the arithmetic exponent alone predicts.
    pub fn expected(b: f64, lambda: f64) -> Self {
        let ln_l = lambda.ln();
        if b > ln_l {
            Self::DelocalizedSignature
        } else if b > 0.0 {
            Self::LocalizedNoSule
        } else {
            Self::SuleConsistent
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct ClassifyInput {
    pub lambda: f64,
    /// Median toward-mirror rate over the resonant set, if there is one.
    pub toward_median: Option<f64>,
    pub sule_max: f64,
    pub sule_violations: usize,
}

#[derive(Clone, Copy, Debug)]
pub struct ClassifyRule {
    pub delocalized_rate_fraction: f64,
    pub min_violations: usize,
    pub consistent_max: f64,
}

/// First matching rule wins: collapsed toward-mirror decay, then SULE violations, then a uniform SULE bound.
pub fn classify(x: &ClassifyInput, r: &ClassifyRule) -> Classification {
    if let Some(t) = x.toward_median {
        if t <= r.delocalized_rate_fraction * x.lambda.ln() {
            return Classification::DelocalizedSignature;
        }
    }
    if x.sule_violations >= r.min_violations {
        return Classification::LocalizedNoSule;
    }
    if x.sule_max <= r.consistent_max {
        return Classification::SuleConsistent;
    }
    Classification::Unclassified
}
