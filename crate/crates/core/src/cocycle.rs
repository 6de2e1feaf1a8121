//! Transfer matrices `A_n(E)`, overflow-safe products `A_{n,k}(E)` and the
//! finite-scale Lyapunov estimate.

use alloc::vec::Vec;
use core::f64::consts::LN_2;

use crate::error::{Error, Result};
use crate::potential::PotentialSpec;

/// Renormalize once the max-row-sum norm passes `2^512`.
pub const RENORM_LOG2: i32 = 512;

/// `[[a, b], [c, d]]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransferMatrix {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl TransferMatrix {
    pub const IDENTITY: Self = Self {
        a: 1.0,
        b: 0.0,
        c: 0.0,
        d: 1.0,
    };

    pub fn det(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    /// `|ad − bc − s| / (|ad| + |bc|)`: determinant mismatch relative to the cancellation scale.
    pub fn det_defect(&self, expected: f64) -> f64 {
        let scale = libm::fabs(self.a * self.d) + libm::fabs(self.b * self.c);
        libm::fabs(self.det() - expected) / scale.max(f64::MIN_POSITIVE)
    }

    /// `self · rhs`.
    pub fn mul(&self, r: &Self) -> Self {
        Self {
            a: self.a * r.a + self.b * r.c,
            b: self.a * r.b + self.b * r.d,
            c: self.c * r.a + self.d * r.c,
            d: self.c * r.b + self.d * r.d,
        }
    }

    /// `[[d, −b], [−c, a]]`; the inverse when the determinant is one.
    pub fn adjugate(&self) -> Self {
        Self {
            a: self.d,
            b: -self.b,
            c: -self.c,
            d: self.a,
        }
    }

    pub fn apply(&self, v: [f64; 2]) -> [f64; 2] {
        [self.a * v[0] + self.b * v[1], self.c * v[0] + self.d * v[1]]
    }

    pub fn norm_inf(&self) -> f64 {
        (libm::fabs(self.a) + libm::fabs(self.b)).max(libm::fabs(self.c) + libm::fabs(self.d))
    }

    /// Largest singular value, closed form.
    pub fn norm2(&self) -> f64 {
        let p = libm::hypot(self.a + self.d, self.b - self.c);
        let q = libm::hypot(self.a - self.d, self.b + self.c);
        0.5 * (p + q)
    }

    fn scaled(&self, e: i32) -> Self {
        Self {
            a: libm::ldexp(self.a, e),
            b: libm::ldexp(self.b, e),
            c: libm::ldexp(self.c, e),
            d: libm::ldexp(self.d, e),
        }
    }
}

/// `A_n(E) = [[E − g(n), −1], [1, 0]]`.
pub fn one_step(e: f64, g_n: f64) -> TransferMatrix {
    TransferMatrix {
        a: e - g_n,
        b: -1.0,
        c: 1.0,
        d: 0.0,
    }
}

/// `A_{n,k}(E) = e^{log_scale} · matrix`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CocycleProduct {
    pub matrix: TransferMatrix,
    pub log_scale: f64,
    /// `(k, n)`.
    pub span: (i64, i64),
}

impl CocycleProduct {
    pub fn identity(at: i64) -> Self {
        Self {
            matrix: TransferMatrix::IDENTITY,
            log_scale: 0.0,
            span: (at, at),
        }
    }

    /// `ln ‖A_{n,k}‖₂`.
    pub fn log_norm(&self) -> f64 {
        self.log_scale + libm::log(self.matrix.norm2())
    }

    /// Pulls a power of two out of the matrix when it is large.
    fn renormalize(&mut self) -> Result<()> {
        let nrm = self.matrix.norm_inf();
        if nrm > libm::ldexp(1.0, RENORM_LOG2) {
            let (_, e) = libm::frexp(nrm);
            self.matrix = self.matrix.scaled(1 - e);
            self.log_scale += (e - 1) as f64 * LN_2;
            if !self.log_scale.is_finite() {
                return Err(Error::Overflow);
            }
        }
        Ok(())
    }

    /// `A_{n,m} A_{m,k} = A_{n,k}`; `self` is the later factor.
    pub fn compose(&self, earlier: &Self) -> Result<Self> {
        let mut out = Self {
            matrix: self.matrix.mul(&earlier.matrix),
            log_scale: self.log_scale + earlier.log_scale,
            span: (earlier.span.0, self.span.1),
        };
        out.renormalize()?;
        Ok(out)
    }

    /// `A_{n,k}^{-1} = A_{k,n}`. With unit determinant the inverse is the adjugate at the same scale.
    pub fn inverse(&self) -> Self {
        Self {
            matrix: self.matrix.adjugate(),
            log_scale: self.log_scale,
            span: (self.span.1, self.span.0),
        }
    }

    /// Determinant defect of the true product `e^{2 log_scale} det(matrix) − 1`, relative.
    pub fn det_defect(&self) -> f64 {
        self.matrix.det_defect(libm::exp(-2.0 * self.log_scale))
    }
}

/// Product from sampled values: `g[i] = g(k + i)`, result `A_{k+len, k}`.
pub fn product_from_samples(g: &[f64], e: f64, k: i64) -> Result<CocycleProduct> {
    let mut p = CocycleProduct::identity(k);
    for (i, &gv) in g.iter().enumerate() {
        p.matrix = one_step(e, gv).mul(&p.matrix);
        if i % 64 == 63 {
            p.renormalize()?;
        }
    }
    p.renormalize()?;
    p.span = (k, k + g.len() as i64);
    Ok(p)
}

/// `A_{n,k}(E)`: identity for `k = n`, ordered product for `k < n`, inverse of `A_{k,n}` for `k > n`.
pub fn product(g: &PotentialSpec, e: f64, k: i64, n: i64) -> Result<CocycleProduct> {
    if k == n {
        return Ok(CocycleProduct::identity(k));
    }
    if k < n {
        let s = g.sample(k, n - 1)?;
        product_from_samples(&s, e, k)
    } else {
        Ok(product(g, e, n, k)?.inverse())
    }
}

/// `e^{log_scale} · vector`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Propagated {
    pub vector: [f64; 2],
    pub log_scale: f64,
}

impl Propagated {
    pub fn log_norm(&self) -> f64 {
        self.log_scale + libm::log(libm::hypot(self.vector[0], self.vector[1]))
    }

    pub fn to_vec(&self) -> [f64; 2] {
        let s = libm::exp(self.log_scale);
        [self.vector[0] * s, self.vector[1] * s]
    }
}

/// `(φ(m+k), φ(m+k−1))` from `(φ(m), φ(m−1))`.
pub fn propagate(g: &PotentialSpec, e: f64, u0: [f64; 2], m: i64, k: i64) -> Result<Propagated> {
    if k == 0 {
        return Ok(Propagated {
            vector: u0,
            log_scale: 0.0,
        });
    }
    let p = product(g, e, m, m + k)?;
    let v = p.matrix.apply(u0);
    let nrm = libm::hypot(v[0], v[1]);
    if nrm == 0.0 || !nrm.is_finite() {
        return Ok(Propagated {
            vector: v,
            log_scale: p.log_scale,
        });
    }
    Ok(Propagated {
        vector: [v[0] / nrm, v[1] / nrm],
        log_scale: p.log_scale + libm::log(nrm),
    })
}

/// `max ln ‖A_n(E)‖` over the given potential values and energy interval.
pub fn step_log_bound(g_values: &[f64], e_lo: f64, e_hi: f64) -> f64 {
    let x = g_values
        .iter()
        .map(|&gv| libm::fabs(e_lo - gv).max(libm::fabs(e_hi - gv)))
        .fold(0.0, f64::max);
    // σ_max of [[x, −1], [1, 0]]
    libm::log(0.5 * (libm::sqrt(x * x + 4.0) + x))
}

/// `0, n, −n, 2n, −2n, …` (`count` entries).
pub fn spread_base_points(n: u64, count: usize) -> Vec<i64> {
    let n = n as i64;
    let mut out = Vec::with_capacity(count);
    out.push(0);
    let mut j = 1;
    while out.len() < count {
        out.push(j * n);
        if out.len() < count {
            out.push(-j * n);
        }
        j += 1;
    }
    out
}

/// `max_k ln ‖A_{n+k,k}(E)‖ / n` over the base points.
pub fn lyapunov_estimate(g: &PotentialSpec, e: f64, n: u64, base_points: &[i64]) -> Result<f64> {
    if n == 0 || base_points.is_empty() {
        return Err(Error::InvalidArgument(
            "need n ≥ 1 and at least one base point".into(),
        ));
    }
    let mut best = f64::NEG_INFINITY;
    for &k in base_points {
        let p = product(g, e, k, k + n as i64)?;
        best = best.max(p.log_norm() / n as f64);
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_step_examples() {
        assert_eq!(
            one_step(0.0, 0.0),
            TransferMatrix {
                a: 0.0,
                b: -1.0,
                c: 1.0,
                d: 0.0
            }
        );
        assert_eq!(
            one_step(2.0, 0.0),
            TransferMatrix {
                a: 2.0,
                b: -1.0,
                c: 1.0,
                d: 0.0
            }
        );
        assert_eq!(one_step(1.7, -0.4).det(), 1.0);
    }

    #[test]
    fn norm2_matches_eigen_formula() {
        let m = TransferMatrix {
            a: 3.0,
            b: -1.0,
            c: 2.0,
            d: 0.5,
        };
        // σ² are eigenvalues of MᵀM
        let (p, q, r) = (
            m.a * m.a + m.c * m.c,
            m.a * m.b + m.c * m.d,
            m.b * m.b + m.d * m.d,
        );
        let l = 0.5 * (p + r + libm::sqrt((p - r) * (p - r) + 4.0 * q * q));
        assert!((m.norm2() - libm::sqrt(l)).abs() < 1e-12);
    }

    #[test]
    fn free_elliptic_bounded() {
        let g = PotentialSpec::callback(0.0, |_| 0.0);
        let l = lyapunov_estimate(&g, 0.0, 1000, &[0, 5]).unwrap();
        assert!(l < 0.01);
    }
}
