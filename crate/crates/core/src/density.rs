//! Counting localization centers and almost maxima in growing windows.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::spectral::{almost_maxima, EigenSystem};

/// Which admissible almost maximum stands in for `m_s`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Selection {
    /// Closest to the origin; ties to the negative site.
    Nearest,
    /// Farthest from the origin; ties to the negative site.
    Farthest,
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case", tag = "kind"))]
pub enum Flavor {
    Maxima,
    AlmostMaxima { k: f64, selection: Selection },
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DensityCurve {
    pub l_values: Vec<i64>,
    pub counts: Vec<usize>,
    /// `counts / (2L + 1)`.
    pub densities: Vec<f64>,
    pub flavor: Flavor,
    /// Eigenfunctions centered outside the trust region, left out of every count.
    pub boundary_excluded: usize,
}

fn check_grid(sys: &EigenSystem, grid: &[i64]) -> Result<()> {
    for &l in grid {
        if l < 0 || l > sys.trust_region {
            return Err(Error::GridExceedsTrustRegion {
                l,
                trust: sys.trust_region,
            });
        }
    }
    Ok(())
}

fn curve(sites: &[i64], grid: &[i64], flavor: Flavor, excluded: usize) -> DensityCurve {
    let counts: Vec<usize> = grid
        .iter()
        .map(|&l| sites.iter().filter(|m| m.abs() <= l).count())
        .collect();
    let densities = grid
        .iter()
        .zip(&counts)
        .map(|(&l, &c)| c as f64 / (2 * l + 1) as f64)
        .collect();
    DensityCurve {
        l_values: grid.to_vec(),
        counts,
        densities,
        flavor,
        boundary_excluded: excluded,
    }
}

/// `#{s trusted : |m_s| ≤ L} / (2L + 1)` along the grid.
pub fn center_density(sys: &EigenSystem, grid: &[i64]) -> Result<DensityCurve> {
    check_grid(sys, grid)?;
    let trusted = sys.trusted();
    let sites: Vec<i64> = trusted.iter().map(|&s| sys.centers()[s]).collect();
    Ok(curve(
        &sites,
        grid,
        Flavor::Maxima,
        sys.dim() - trusted.len(),
    ))
}

/// Almost maximum of `φ_s` picked by `selection` among `{n : |φ_s(n)| ≥ max|φ_s|/K}`.
pub fn select_almost_maximum(
    sys: &EigenSystem,
    s: usize,
    k: f64,
    selection: Selection,
) -> Result<i64> {
    let cands = almost_maxima(&sys.profile(s), k)?;
    let key = |n: &i64| (n.abs(), *n);
    let pick = match selection {
        Selection::Nearest => cands.iter().min_by_key(|n| key(n)),
        Selection::Farthest => cands.iter().max_by_key(|n| (n.abs(), -**n)),
    };
    Ok(*pick.expect("a profile always has a maximum"))
}

/// Density of the selected almost maxima of trusted eigenfunctions.
pub fn almost_density(
    sys: &EigenSystem,
    k: f64,
    grid: &[i64],
    selection: Selection,
) -> Result<DensityCurve> {
    if !(k >= 1.0) {
        return Err(Error::InvalidArgument("K must be at least 1".into()));
    }
    check_grid(sys, grid)?;
    let trusted = sys.trusted();
    let mut sites = Vec::with_capacity(trusted.len());
    for &s in &trusted {
        sites.push(select_almost_maximum(sys, s, k, selection)?);
    }
    Ok(curve(
        &sites,
        grid,
        Flavor::AlmostMaxima { k, selection },
        sys.dim() - trusted.len(),
    ))
}

/// `Σ_{s trusted, m_s ∈ J} Σ_{n ∈ window} |φ_s(n)|²`.
pub fn window_mass(sys: &EigenSystem, j: &BTreeSet<i64>, window: (i64, i64)) -> f64 {
    let mut total = 0.0;
    for s in sys.trusted() {
        if !j.contains(&sys.centers()[s]) {
            continue;
        }
        let p = sys.profile(s).restrict(window.0, window.1);
        total += p.values.iter().map(|x| x * x).sum::<f64>();
    }
    total
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BoundsRow {
    pub l: i64,
    pub density: f64,
    pub lower: f64,
    pub upper: f64,
    /// `density − lower`.
    pub margin_lower: f64,
    /// `upper − density`.
    pub margin_upper: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BoundsReport {
    pub pass: bool,
    pub rows: Vec<BoundsRow>,
}

/// Band `[1 − b/ln λ − tol, 1 + b/(2 ln λ) + tol]` at every grid point.
pub fn density_bounds_check(
    curve: &DensityCurve,
    b: f64,
    lambda: f64,
    tol: f64,
) -> Result<BoundsReport> {
    if !(lambda > 1.0) {
        return Err(Error::InvalidArgument(alloc::format!(
            "lambda = {lambda} must exceed 1"
        )));
    }
    let ln_l = libm::log(lambda);
    if !(b >= 0.0 && b < ln_l) {
        return Err(Error::InvalidArgument(alloc::format!(
            "b = {b} must lie in [0, ln λ = {ln_l})"
        )));
    }
    let lower = 1.0 - b / ln_l - tol;
    let upper = 1.0 + b / (2.0 * ln_l) + tol;
    let rows: Vec<BoundsRow> = curve
        .l_values
        .iter()
        .zip(&curve.densities)
        .map(|(&l, &d)| BoundsRow {
            l,
            density: d,
            lower,
            upper,
            margin_lower: d - lower,
            margin_upper: upper - d,
            pass: d >= lower && d <= upper,
        })
        .collect();
    Ok(BoundsReport {
        pass: rows.iter().all(|r| r.pass),
        rows,
    })
}
