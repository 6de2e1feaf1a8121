//! Dirichlet truncations `H_L` on `[−L, L]`, their full eigendecomposition and
//! per-eigenfunction localization diagnostics.

mod diag;
pub mod ql;

use alloc::vec;
use alloc::vec::Vec;

pub use diag::{
    almost_maxima, decay_fit, localization_center, sule_constant, sule_log_constant, DecayFit, Side,
};

use crate::error::{Error, Result};
use crate::potential::PotentialSpec;

/// `H_L = Δ + g` restricted to `[−L, L]`, `u(±(L+1)) = 0`.
#[derive(Clone, Debug)]
pub struct Truncation {
    pub potential: PotentialSpec,
    pub half_width: i64,
    pub diagonal: Vec<f64>,
}

impl Truncation {
    pub fn dim(&self) -> usize {
        self.diagonal.len()
    }

    /// All ones; the hopping is fixed.
    pub fn offdiagonal(&self) -> Vec<f64> {
        vec![1.0; self.dim().saturating_sub(1)]
    }

    pub fn first_site(&self) -> i64 {
        -self.half_width
    }
}

pub fn build_truncation(g: &PotentialSpec, l: i64) -> Result<Truncation> {
    if l < 0 {
        return Err(Error::InvalidArgument("L must be nonnegative".into()));
    }
    Ok(Truncation {
        potential: g.clone(),
        half_width: l,
        diagonal: g.sample(-l, l)?,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Ql,
    Bisection,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EigenOptions {
    pub max_dim: usize,
    pub method: Method,
    /// Retry with bisection when QL hits its sweep cap.
    pub fallback: bool,
    /// Rebuild eigenvector tails by recurrence from the Dirichlet ends.
    pub refine_tails: bool,
    /// Tails start where `|φ| < tail_tau · max|φ|`.
    pub tail_tau: f64,
    /// Eigenvalues closer than this times `‖H‖` are re-orthonormalized together after refinement.
    pub cluster_gap: f64,
    /// Half-width of the boundary-clean region; default `L/2`.
    pub trust_region: Option<i64>,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self {
            max_dim: 4001,
            method: Method::Ql,
            fallback: true,
            refine_tails: true,
            tail_tau: 1e-8,
            cluster_gap: 1e-6,
            trust_region: None,
        }
    }
}

/// Window view `values[i] = φ(first_site + i)`.
#[derive(Clone, Copy, Debug)]
pub struct Profile<'a> {
    pub first_site: i64,
    pub values: &'a [f64],
}

impl<'a> Profile<'a> {
    pub fn new(first_site: i64, values: &'a [f64]) -> Self {
        Self { first_site, values }
    }

    pub fn last_site(&self) -> i64 {
        self.first_site + self.values.len() as i64 - 1
    }

    pub fn contains(&self, n: i64) -> bool {
        n >= self.first_site && n <= self.last_site()
    }

    /// `φ(n)`, zero outside the window.
    pub fn at(&self, n: i64) -> f64 {
        if self.contains(n) {
            self.values[(n - self.first_site) as usize]
        } else {
            0.0
        }
    }

    /// Sub-window `[lo, hi] ∩ window`.
    pub fn restrict(&self, lo: i64, hi: i64) -> Profile<'a> {
        let lo = lo.max(self.first_site);
        let hi = hi.min(self.last_site());
        if hi < lo {
            return Profile {
                first_site: lo,
                values: &[],
            };
        }
        let a = (lo - self.first_site) as usize;
        let b = (hi - self.first_site) as usize;
        Profile {
            first_site: lo,
            values: &self.values[a..=b],
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(move |(i, &v)| (self.first_site + i as i64, v))
    }
}

/// Eigenpairs of a truncation, eigenvalues ascending.
#[derive(Clone, Debug)]
pub struct EigenSystem {
    first_site: i64,
    dim: usize,
    eigenvalues: Vec<f64>,
    vectors: Vec<f64>,
    diagonal: Vec<f64>,
    centers: Vec<i64>,
    pub residual_max: f64,
    pub trust_region: i64,
    pub method: Method,
}

pub fn eigendecompose(t: &Truncation) -> Result<EigenSystem> {
    eigendecompose_with(t, &EigenOptions::default())
}

pub fn eigendecompose_with(t: &Truncation, opts: &EigenOptions) -> Result<EigenSystem> {
    let n = t.dim();
    if n > opts.max_dim {
        return Err(Error::DimensionTooLarge {
            dim: n,
            max: opts.max_dim,
        });
    }
    let off = t.offdiagonal();
    let (dec, method) = match opts.method {
        Method::Bisection => (
            ql::bisection_decompose(&t.diagonal, &off),
            Method::Bisection,
        ),
        Method::Ql => match ql::ql_decompose(&t.diagonal, &off) {
            Ok(d) => (d, Method::Ql),
            Err(e) if !opts.fallback => return Err(e),
            Err(_) => (
                ql::bisection_decompose(&t.diagonal, &off),
                Method::Bisection,
            ),
        },
    };
    let mut vectors = dec.vectors;
    if opts.refine_tails {
        let vals = &dec.values;
        for (s, v) in vectors.chunks_exact_mut(n).enumerate() {
            refine_tails(&t.diagonal, vals[s], v, opts.tail_tau);
        }
        // near-degenerate pairs only fix their span; restore orthonormality inside clusters
        let scale = t
            .diagonal
            .iter()
            .fold(2.0f64, |m, x| m.max(libm::fabs(*x) + 2.0));
        let mut start = 0;
        for s in 1..=n {
            if s == n || vals[s] - vals[s - 1] > opts.cluster_gap * scale {
                if s - start > 1 {
                    orthonormalize(&mut vectors[start * n..s * n], n);
                }
                start = s;
            }
        }
    }
    let trust = opts.trust_region.unwrap_or(t.half_width / 2);
    Ok(EigenSystem::from_parts(
        t.first_site(),
        dec.values,
        vectors,
        t.diagonal.clone(),
        trust,
        method,
    ))
}

/// Inner product with eight independent partial sums.
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0; 8];
    let ca = a.chunks_exact(8);
    let cb = b.chunks_exact(8);
    let tail: f64 = ca
        .remainder()
        .iter()
        .zip(cb.remainder())
        .map(|(x, y)| x * y)
        .sum();
    for (x, y) in ca.zip(cb) {
        for k in 0..8 {
            acc[k] += x[k] * y[k];
        }
    }
    ((acc[0] + acc[1]) + (acc[2] + acc[3])) + ((acc[4] + acc[5]) + (acc[6] + acc[7])) + tail
}

/// Modified Gram–Schmidt, two passes, over consecutive vectors of length `n`.
fn orthonormalize(vs: &mut [f64], n: usize) {
    let k = vs.len() / n;
    for _ in 0..2 {
        for i in 0..k {
            let (done, rest) = vs.split_at_mut(i * n);
            let v = &mut rest[..n];
            for u in done.chunks_exact(n) {
                let d = dot(u, v);
                for (x, y) in v.iter_mut().zip(u) {
                    *x -= d * y;
                }
            }
            let nrm = libm::sqrt(v.iter().map(|x| x * x).sum::<f64>());
            for x in v.iter_mut() {
                *x /= nrm;
            }
        }
    }
}

/// Replaces the sub-threshold tails of `v` by the Dirichlet solution of the
/// recurrence, matched at the outermost significant site.
fn refine_tails(diag: &[f64], e: f64, v: &mut [f64], tau: f64) {
    let n = v.len();
    if n < 4 {
        return;
    }
    let vmax = v.iter().fold(0.0f64, |m, x| m.max(libm::fabs(*x)));
    let thr = tau * vmax;
    let big = libm::ldexp(1.0, 600);
    let small = libm::ldexp(1.0, -600);
    // right end: w(n) = 0, w(n−1) = 1, w(i−1) = (E − d_i) w(i) − w(i+1)
    if let Some(j) = v.iter().rposition(|x| libm::fabs(*x) >= thr) {
        if j + 2 < n {
            let mut w = vec![0.0; n + 1];
            w[n - 1] = 1.0;
            for i in (j + 1..n).rev() {
                w[i - 1] = (e - diag[i]) * w[i] - w[i + 1];
                if libm::fabs(w[i - 1]) > big {
                    for x in &mut w[i - 1..n] {
                        *x *= small;
                    }
                }
            }
            if w[j] != 0.0 {
                let c = v[j] / w[j];
                for i in j + 1..n {
                    v[i] = c * w[i];
                }
            }
        }
    }
    // left end: w(−1) = 0, w(0) = 1, w(i+1) = (E − d_i) w(i) − w(i−1)
    if let Some(j) = v.iter().position(|x| libm::fabs(*x) >= thr) {
        if j >= 2 {
            let mut w = vec![0.0; j + 1];
            w[0] = 1.0;
            let mut prev = 0.0;
            for i in 0..j {
                let next = (e - diag[i]) * w[i] - prev;
                prev = w[i];
                w[i + 1] = next;
                if libm::fabs(next) > big {
                    for x in &mut w[..=i + 1] {
                        *x *= small;
                    }
                    prev *= small;
                }
            }
            if w[j] != 0.0 {
                let c = v[j] / w[j];
                for i in 0..j {
                    v[i] = c * w[i];
                }
            }
        }
    }
}

impl EigenSystem {
    /// Assembles a system from raw eigenpairs; `vectors` holds vector `s` at `s*dim..(s+1)*dim`.
    pub fn from_parts(
        first_site: i64,
        eigenvalues: Vec<f64>,
        vectors: Vec<f64>,
        diagonal: Vec<f64>,
        trust_region: i64,
        method: Method,
    ) -> Self {
        let dim = eigenvalues.len();
        assert_eq!(vectors.len(), dim * dim, "vector storage must be dim²");
        assert_eq!(diagonal.len(), dim, "diagonal must have dim entries");
        let centers = vectors
            .chunks_exact(dim.max(1))
            .map(|v| localization_center(&Profile::new(first_site, v)))
            .collect();
        let mut sys = Self {
            first_site,
            dim,
            eigenvalues,
            vectors,
            diagonal,
            centers,
            residual_max: 0.0,
            trust_region,
            method,
        };
        sys.residual_max = (0..dim).map(|s| sys.residual(s)).fold(0.0, f64::max);
        sys
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn first_site(&self) -> i64 {
        self.first_site
    }

    pub fn last_site(&self) -> i64 {
        self.first_site + self.dim as i64 - 1
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diagonal
    }

    pub fn vector(&self, s: usize) -> &[f64] {
        &self.vectors[s * self.dim..(s + 1) * self.dim]
    }

    pub fn profile(&self, s: usize) -> Profile<'_> {
        Profile::new(self.first_site, self.vector(s))
    }

    /// `φ_s(n)`.
    pub fn value(&self, s: usize, n: i64) -> Result<f64> {
        let i = self.index_of(n)?;
        Ok(self.vectors[s * self.dim + i])
    }

    pub fn index_of(&self, n: i64) -> Result<usize> {
        if n < self.first_site || n > self.last_site() {
            return Err(Error::OutOfWindow {
                n,
                lo: self.first_site,
                hi: self.last_site(),
            });
        }
        Ok((n - self.first_site) as usize)
    }

    /// Localization centers `m_s`.
    pub fn centers(&self) -> &[i64] {
        &self.centers
    }

    pub fn is_trusted(&self, s: usize) -> bool {
        self.centers[s].abs() <= self.trust_region
    }

    /// Indices of eigenfunctions centered inside the trust region.
    pub fn trusted(&self) -> Vec<usize> {
        (0..self.dim).filter(|&s| self.is_trusted(s)).collect()
    }

    /// `max |g| + 2`, a bound on `‖H‖`.
    pub fn norm_bound(&self) -> f64 {
        self.diagonal
            .iter()
            .fold(0.0f64, |m, x| m.max(libm::fabs(*x)))
            + 2.0
    }

    /// `‖Hφ_s − E_sφ_s‖₂`.
    pub fn residual(&self, s: usize) -> f64 {
        let v = self.vector(s);
        let e = self.eigenvalues[s];
        let n = self.dim;
        let mut acc = 0.0;
        for i in 0..n {
            let mut r = (self.diagonal[i] - e) * v[i];
            if i > 0 {
                r += v[i - 1];
            }
            if i + 1 < n {
                r += v[i + 1];
            }
            acc += r * r;
        }
        libm::sqrt(acc)
    }

    /// Largest pointwise residual of `u(n+1) + u(n−1) + g(n)u(n) = E u(n)` over all pairs.
    pub fn pointwise_residual(&self) -> f64 {
        let n = self.dim;
        let mut worst = 0.0f64;
        for s in 0..n {
            let v = self.vector(s);
            let e = self.eigenvalues[s];
            for i in 0..n {
                let mut r = (self.diagonal[i] - e) * v[i];
                if i > 0 {
                    r += v[i - 1];
                }
                if i + 1 < n {
                    r += v[i + 1];
                }
                worst = worst.max(libm::fabs(r));
            }
        }
        worst
    }

    /// `max |⟨φ_s, φ_r⟩ − δ_{sr}|`; cubic cost.
    pub fn orthonormality_defect(&self) -> f64 {
        let n = self.dim;
        let mut worst = 0.0f64;
        for s in 0..n {
            let a = self.vector(s);
            for r in s..n {
                let b = self.vector(r);
                let dot = dot(a, b);
                let want = if r == s { 1.0 } else { 0.0 };
                worst = worst.max(libm::fabs(dot - want));
            }
        }
        worst
    }

    /// `max_n |Σ_s φ_s(n)² − 1|`.
    pub fn completeness_defect(&self) -> f64 {
        let n = self.dim;
        let mut sums = vec![0.0; n];
        for v in self.vectors.chunks_exact(n) {
            for (acc, x) in sums.iter_mut().zip(v) {
                *acc += x * x;
            }
        }
        sums.iter().fold(0.0f64, |m, x| m.max(libm::fabs(x - 1.0)))
    }
}
