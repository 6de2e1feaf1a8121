use alloc::vec::Vec;

use super::Profile;
use crate::error::{Error, Result};

/// Global maximum of `|φ|`; ties go to smaller `|n|`, then to negative `n`.
pub fn localization_center(p: &Profile<'_>) -> i64 {
    let mut best: Option<(f64, i64)> = None;
    for (n, v) in p.iter() {
        let a = libm::fabs(v);
        let better = match best {
            None => true,
            Some((b, m)) => a > b || (a == b && (n.abs(), n) < (m.abs(), m)),
        };
        if better {
            best = Some((a, n));
        }
    }
    best.map_or(p.first_site, |b| b.1)
}

/// `{ n : |φ(n)| ≥ max|φ| / K }`.
pub fn almost_maxima(p: &Profile<'_>, k: f64) -> Result<Vec<i64>> {
    if !(k >= 1.0) {
        return Err(Error::InvalidArgument("K must be at least 1".into()));
    }
    let top = p.values.iter().fold(0.0f64, |m, v| m.max(libm::fabs(*v)));
    let thr = top / k;
    Ok(p.iter()
        .filter(|&(_, v)| libm::fabs(v) >= thr)
        .map(|(n, _)| n)
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Both,
    /// Sites `n < m_s`.
    Left,
    /// Sites `n > m_s`.
    Right,
}

/// Least-squares fit `ln|φ(n)| ≈ c − γ|n − m_s|`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecayFit {
    pub rate: f64,
    pub intercept: f64,
    /// RMS deviation in `ln|φ|`.
    pub residual: f64,
    pub points: usize,
}

/// Fit over sites with `tail.0 ≤ |n − m_s| ≤ tail.1` on the chosen side, skipping `|φ| ≤ 1e−300`.
pub fn decay_fit(p: &Profile<'_>, m_s: i64, tail: (u64, u64), side: Side) -> Result<DecayFit> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (n, v) in p.iter() {
        let d = n.abs_diff(m_s);
        let on_side = match side {
            Side::Both => true,
            Side::Left => n < m_s,
            Side::Right => n > m_s,
        };
        if on_side && d >= tail.0 && d <= tail.1 && libm::fabs(v) > 1e-300 {
            xs.push(-(d as f64));
            ys.push(libm::log(libm::fabs(v)));
        }
    }
    let k = xs.len();
    if k < 10 {
        return Err(Error::DegenerateFit { points: k });
    }
    let kf = k as f64;
    let mx = xs.iter().sum::<f64>() / kf;
    let my = ys.iter().sum::<f64>() / kf;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::DegenerateFit { points: k });
    }
    let rate = sxy / sxx;
    let intercept = my - rate * mx;
    let ss: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let r = y - intercept - rate * x;
            r * r
        })
        .sum();
    Ok(DecayFit {
        rate,
        intercept,
        residual: libm::sqrt(ss / kf),
        points: k,
    })
}

/// `ln max_n |φ(n)| e^{γ|n − m_s|}` over the profile.
pub fn sule_log_constant(p: &Profile<'_>, m_s: i64, gamma: f64) -> f64 {
    p.iter()
        .filter(|&(_, v)| v != 0.0)
        .map(|(n, v)| libm::log(libm::fabs(v)) + gamma * n.abs_diff(m_s) as f64)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// `C_s = max_n |φ(n)| e^{γ|n − m_s|}` over the profile.
pub fn sule_constant(p: &Profile<'_>, m_s: i64, gamma: f64) -> f64 {
    libm::exp(sule_log_constant(p, m_s, gamma))
}
