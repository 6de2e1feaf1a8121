//! Time evolution `e^{−itH}` on a diagonalized truncation.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::EigenSystem;

fn cis(x: f64) -> Complex64 {
    Complex64::new(libm::cos(x), libm::sin(x))
}

/// `(δ_n, e^{−itH} δ_m) = Σ_s e^{−itE_s} φ_s(n) φ_s(m)`.
pub fn amplitude(sys: &EigenSystem, n: i64, m: i64, t: f64) -> Result<Complex64> {
    let i = sys.index_of(n)?;
    let j = sys.index_of(m)?;
    let mut acc = Complex64::new(0.0, 0.0);
    for (s, &e) in sys.eigenvalues().iter().enumerate() {
        let v = sys.vector(s);
        let w = v[i] * v[j];
        if w != 0.0 {
            acc += cis(-t * e) * w;
        }
    }
    Ok(acc)
}

/// Full state `e^{−itH} δ_m` over the window.
pub fn evolve(sys: &EigenSystem, m: i64, t: f64) -> Result<Vec<Complex64>> {
    let j = sys.index_of(m)?;
    let dim = sys.dim();
    let mut re = vec![0.0; dim];
    let mut im = vec![0.0; dim];
    for (s, &e) in sys.eigenvalues().iter().enumerate() {
        let v = sys.vector(s);
        if v[j] == 0.0 {
            continue;
        }
        let c = cis(-t * e) * v[j];
        for ((r, i), x) in re.iter_mut().zip(im.iter_mut()).zip(v) {
            *r += c.re * x;
            *i += c.im * x;
        }
    }
    Ok(re
        .into_iter()
        .zip(im)
        .map(|(r, i)| Complex64::new(r, i))
        .collect())
}

/// `|Σ_n |(δ_n, e^{−itH}δ_m)|² − 1|`.
pub fn unitarity_defect(sys: &EigenSystem, m: i64, t: f64) -> Result<f64> {
    let psi = evolve(sys, m, t)?;
    Ok(libm::fabs(
        psi.iter().map(|z| z.norm_sqr()).sum::<f64>() - 1.0,
    ))
}

/// `Σ_n |n|^p |(δ_n, e^{−itH}δ_source)|²`.
pub fn moment(sys: &EigenSystem, p: f64, t: f64, source: i64) -> Result<f64> {
    if !(p > 0.0) {
        return Err(Error::InvalidArgument(
            "moment order must be positive".into(),
        ));
    }
    let psi = evolve(sys, source, t)?;
    let first = sys.first_site();
    Ok(psi
        .iter()
        .enumerate()
        .map(|(i, z)| {
            let n = (first + i as i64).unsigned_abs() as f64;
            libm::pow(n, p) * z.norm_sqr()
        })
        .sum())
}

/// Amplitudes from one source over a set of targets and times.
#[derive(Clone, Debug, PartialEq)]
pub struct EvolutionProbe {
    pub source: i64,
    pub targets: Vec<i64>,
    pub t_grid: Vec<f64>,
    /// `amplitudes[a][k]` is the amplitude at `targets[a]`, time `t_grid[k]`.
    pub amplitudes: Vec<Vec<Complex64>>,
}

pub fn probe(
    sys: &EigenSystem,
    source: i64,
    targets: &[i64],
    t_grid: &[f64],
) -> Result<EvolutionProbe> {
    let idx = targets
        .iter()
        .map(|&n| sys.index_of(n))
        .collect::<Result<Vec<_>>>()?;
    let mut amplitudes = vec![Vec::with_capacity(t_grid.len()); targets.len()];
    for &t in t_grid {
        let psi = evolve(sys, source, t)?;
        for (row, &i) in amplitudes.iter_mut().zip(&idx) {
            row.push(psi[i]);
        }
    }
    Ok(EvolutionProbe {
        source,
        targets: targets.to_vec(),
        t_grid: t_grid.to_vec(),
        amplitudes,
    })
}

/// Uniform times `0, Δ, …, steps·Δ`.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TimeGrid {
    pub dt: f64,
    pub steps: usize,
}

impl TimeGrid {
    /// `Δ = 0.1/‖H‖` up to `t_max`, with `‖H‖` replaced by `max|g| + 2`.
    pub fn for_system(sys: &EigenSystem, t_max: f64) -> Self {
        let dt = 0.1 / sys.norm_bound();
        Self {
            dt,
            steps: libm::ceil(t_max / dt) as usize,
        }
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.steps).map(move |k| k as f64 * self.dt)
    }
}

/// Time-sup of one amplitude: sampled on a grid, and the eigenbasis bound valid for all `t`.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SupAmplitude {
    pub sampled: f64,
    /// `Σ_s |φ_s(n) φ_s(m)|`.
    pub bound: f64,
    /// Weight `Σ|φ_s(n)φ_s(m)|` of the terms too small to enter the sampled sum.
    pub pruned: f64,
}

/// `Σ_s |φ_s(n) φ_s(m)|`.
pub fn amplitude_bound(sys: &EigenSystem, n: i64, m: i64) -> Result<f64> {
    let i = sys.index_of(n)?;
    let j = sys.index_of(m)?;
    Ok((0..sys.dim())
        .map(|s| {
            let v = sys.vector(s);
            libm::fabs(v[i] * v[j])
        })
        .sum())
}

/// Phase factors are rebuilt exactly this often to stop drift in `z^k`.
const RESYNC: usize = 4096;

pub fn sup_amplitude(sys: &EigenSystem, n: i64, m: i64, grid: &TimeGrid) -> Result<SupAmplitude> {
    let i = sys.index_of(n)?;
    let j = sys.index_of(m)?;
    let mut w = Vec::new();
    let mut e = Vec::new();
    let mut bound = 0.0;
    for s in 0..sys.dim() {
        let v = sys.vector(s);
        let x = v[i] * v[j];
        bound += libm::fabs(x);
        w.push(x);
        e.push(sys.eigenvalues()[s]);
    }
    // terms below 1e-16 of the bound cannot move the sup beyond rounding
    let cut = 1e-16 * bound;
    let mut pruned = 0.0;
    let mut keep_w = Vec::new();
    let mut keep_e = Vec::new();
    for (x, en) in w.into_iter().zip(e) {
        if libm::fabs(x) > cut {
            keep_w.push(x);
            keep_e.push(en);
        } else {
            pruned += libm::fabs(x);
        }
    }
    let k = keep_w.len();
    let zr: Vec<f64> = keep_e.iter().map(|en| libm::cos(-grid.dt * en)).collect();
    let zi: Vec<f64> = keep_e.iter().map(|en| libm::sin(-grid.dt * en)).collect();
    let mut ar = vec![0.0; k];
    let mut ai = vec![0.0; k];
    let mut best = 0.0f64;
    for step in 0..=grid.steps {
        if step % RESYNC == 0 {
            let t = step as f64 * grid.dt;
            for s in 0..k {
                let c = cis(-t * keep_e[s]) * keep_w[s];
                ar[s] = c.re;
                ai[s] = c.im;
            }
        }
        let mut sr = [0.0; 4];
        let mut si = [0.0; 4];
        for s in 0..k {
            sr[s % 4] += ar[s];
            si[s % 4] += ai[s];
            let (r, im) = (ar[s], ai[s]);
            ar[s] = r * zr[s] - im * zi[s];
            ai[s] = r * zi[s] + im * zr[s];
        }
        let re = (sr[0] + sr[1]) + (sr[2] + sr[3]);
        let im = (si[0] + si[1]) + (si[2] + si[3]);
        best = best.max(libm::hypot(re, im));
    }
    Ok(SupAmplitude {
        sampled: best,
        bound,
        pruned,
    })
}

/// Pairs of consecutive eigenvalues closer than `gap`.
pub fn near_degenerate_pairs(sys: &EigenSystem, gap: f64) -> Vec<usize> {
    let e = sys.eigenvalues();
    (1..e.len())
        .filter(|&s| e[s] - e[s - 1] < gap)
        .map(|s| s - 1)
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub enum SupMethod {
    /// Eigenbasis bound `Σ_s|φ_s(n)φ_s(m)|`.
    Bound,
    Sampled(TimeGrid),
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SudlRow {
    pub m: i64,
    /// `ln Ĉ_m`.
    pub ln_prefactor: f64,
    /// `γ̂_m`; infinite when no off-site amplitude is ever nonzero.
    pub rate: f64,
    pub decoupled: bool,
    /// `ln Ĉ_m / |m|`, absent at `m = 0`.
    pub statistic: Option<f64>,
    pub points: usize,
}

/// Least-squares `ln sup_t|(δ_n, e^{−itH}δ_m)| ≈ ln Ĉ_m − γ̂_m |n−m|` over `|n−m| ≤ radius`.
pub fn sudl_profile(
    sys: &EigenSystem,
    m_list: &[i64],
    radius: i64,
    method: &SupMethod,
) -> Result<Vec<SudlRow>> {
    if m_list.is_empty() || radius < 1 {
        return Err(Error::InvalidArgument(
            "sudl_profile needs sources and a positive radius".into(),
        ));
    }
    let mut out = Vec::with_capacity(m_list.len());
    for &m in m_list {
        sys.index_of(m)?;
        let lo = (m - radius).max(sys.first_site());
        let hi = (m + radius).min(sys.last_site());
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        let mut at_m = 0.0;
        for n in lo..=hi {
            let v = match method {
                SupMethod::Bound => amplitude_bound(sys, n, m)?,
                SupMethod::Sampled(g) => sup_amplitude(sys, n, m, g)?.sampled,
            };
            if n == m {
                at_m = v;
            }
            if v > 0.0 {
                xs.push(n.abs_diff(m) as f64);
                ys.push(libm::log(v));
            }
        }
        let statistic = |c: f64| {
            if m == 0 {
                None
            } else {
                Some(c / m.unsigned_abs() as f64)
            }
        };
        if xs.len() == 1 && at_m > 0.0 {
            let c = libm::log(at_m);
            out.push(SudlRow {
                m,
                ln_prefactor: c,
                rate: f64::INFINITY,
                decoupled: true,
                statistic: statistic(c),
                points: 1,
            });
            continue;
        }
        let (slope, icpt) = line_fit(&xs, &ys).ok_or(Error::DegenerateFit { points: xs.len() })?;
        out.push(SudlRow {
            m,
            ln_prefactor: icpt,
            rate: -slope,
            decoupled: false,
            statistic: statistic(icpt),
            points: xs.len(),
        });
    }
    Ok(out)
}

/// Ordinary least squares `y ≈ icpt + slope·x`; `None` with fewer than two distinct `x`.
fn line_fit(xs: &[f64], ys: &[f64]) -> Option<(f64, f64)> {
    let k = xs.len() as f64;
    if xs.len() < 2 {
        return None;
    }
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

/// Envelope `ln|φ_s(n)φ_s(ℓ)| ≤ −C₁|n−ℓ| + C₂|n| + ln C` over trusted `s`.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ProductBoundFit {
    pub c1: f64,
    pub c2: f64,
    pub ln_c: f64,
    pub points: usize,
}

/// Fits `max_s ln|φ_s(n)φ_s(ℓ)|` on a strided grid of the trust region by least
/// squares in `(|n−ℓ|, |n|)`, then lifts the intercept so the plane bounds every point.
pub fn product_bound_fit(sys: &EigenSystem, stride: usize) -> Result<ProductBoundFit> {
    let stride = stride.max(1);
    let trust = sys.trust_region;
    let sites: Vec<i64> = (-trust..=trust).step_by(stride).collect();
    let idx = sites
        .iter()
        .map(|&n| sys.index_of(n))
        .collect::<Result<Vec<_>>>()?;
    let trusted = sys.trusted();
    let mut rows: Vec<[f64; 3]> = Vec::new();
    for (a, &n) in sites.iter().enumerate() {
        for (b, &l) in sites.iter().enumerate() {
            let top = trusted.iter().fold(0.0f64, |acc, &s| {
                let v = sys.vector(s);
                acc.max(libm::fabs(v[idx[a]] * v[idx[b]]))
            });
            if top > 0.0 {
                rows.push([
                    n.abs_diff(l) as f64,
                    n.unsigned_abs() as f64,
                    libm::log(top),
                ]);
            }
        }
    }
    if rows.len() < 3 {
        return Err(Error::DegenerateFit { points: rows.len() });
    }
    // normal equations for y = c0 + c1·x1 + c2·x2
    let k = rows.len() as f64;
    let mean = |c: usize| rows.iter().map(|r| r[c]).sum::<f64>() / k;
    let (m1, m2, my) = (mean(0), mean(1), mean(2));
    let (mut s11, mut s12, mut s22, mut s1y, mut s2y) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for r in &rows {
        let (a, b, y) = (r[0] - m1, r[1] - m2, r[2] - my);
        s11 += a * a;
        s12 += a * b;
        s22 += b * b;
        s1y += a * y;
        s2y += b * y;
    }
    let det = s11 * s22 - s12 * s12;
    if det.abs() <= 1e-12 * s11 * s22 {
        return Err(Error::DegenerateFit { points: rows.len() });
    }
    let beta1 = (s1y * s22 - s2y * s12) / det;
    let beta2 = (s2y * s11 - s1y * s12) / det;
    let ln_c = rows
        .iter()
        .map(|r| r[2] - beta1 * r[0] - beta2 * r[1])
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(ProductBoundFit {
        c1: -beta1,
        c2: beta2,
        ln_c,
        points: rows.len(),
    })
}
