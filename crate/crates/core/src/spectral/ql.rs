//! Symmetric tridiagonal eigensolver: implicit-shift QL with accumulated
//! rotations, plus a Sturm-bisection / inverse-iteration fallback.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 60;
const LANES: usize = 32;
const FLUSH_FACTOR: usize = 8;

/// Eigenvalues (ascending) and eigenvectors (vector `s` at `s*n..(s+1)*n`).
pub struct Decomposition {
    pub values: Vec<f64>,
    pub vectors: Vec<f64>,
}

/// Number of eigenvalues of `T(diag, off)` strictly below `x`.
pub fn sturm_count(diag: &[f64], off: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0f64;
    for i in 0..diag.len() {
        let e2 = if i == 0 { 0.0 } else { off[i - 1] * off[i - 1] };
        q = diag[i] - x - if i == 0 { 0.0 } else { e2 / q };
        if q == 0.0 {
            q = -f64::EPSILON * (libm::fabs(x) + 1.0);
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Gershgorin interval.
pub fn gershgorin(diag: &[f64], off: &[f64]) -> (f64, f64) {
    let n = diag.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r = if i > 0 { libm::fabs(off[i - 1]) } else { 0.0 }
            + if i + 1 < n { libm::fabs(off[i]) } else { 0.0 };
        lo = lo.min(diag[i] - r);
        hi = hi.max(diag[i] + r);
    }
    (lo, hi)
}

/// QL iteration on `(d, e)`, `e[i]` coupling `i` and `i+1`.
pub fn ql_decompose(diag: &[f64], off: &[f64]) -> Result<Decomposition> {
    let n = diag.len();
    let mut d = diag.to_vec();
    let mut e = vec![0.0; n];
    e[..n.saturating_sub(1)].copy_from_slice(&off[..n.saturating_sub(1)]);
    // Rows of Z are stored in interleaved blocks of LANES: z[b*n + i][j] is
    // component b*LANES + j of column i, so one rotation updates LANES
    // independent rows at once.
    let blocks = n.div_ceil(LANES);
    let mut z = vec![[0.0f64; LANES]; blocks * n];
    for k in 0..n {
        z[(k / LANES) * n + k][k % LANES] = 1.0;
    }
    let mut rot: Vec<(usize, f64, f64)> = Vec::with_capacity(n);
    // rotations of several sweeps are applied in one pass so each block of Z stays cached
    let mut pending: Vec<(usize, f64, f64)> = Vec::with_capacity(FLUSH_FACTOR * n + n);
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = libm::fabs(d[m]) + libm::fabs(d[m + 1]);
                if libm::fabs(e[m]) <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > MAX_SWEEPS {
                return Err(Error::ConvergenceFailure { index: l });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = libm::hypot(g, 1.0);
            g = d[m] - d[l] + e[l] / (g + if g >= 0.0 { r } else { -r });
            let (mut s, mut c, mut p) = (1.0f64, 1.0f64, 0.0f64);
            rot.clear();
            let mut i = m;
            let mut early = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = libm::hypot(f, g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    early = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                rot.push((i, c, s));
            }
            pending.extend_from_slice(&rot);
            if pending.len() >= FLUSH_FACTOR * n {
                apply_rotations(&mut z, n, &pending);
                pending.clear();
            }
            if early {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    apply_rotations(&mut z, n, &pending);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]).then(a.cmp(&b)));
    let mut vectors = vec![0.0; n * n];
    for (s, &col) in order.iter().enumerate() {
        let out = &mut vectors[s * n..(s + 1) * n];
        for (k, o) in out.iter_mut().enumerate() {
            *o = z[(k / LANES) * n + col][k % LANES];
        }
    }
    Ok(Decomposition {
        values: order.iter().map(|&i| d[i]).collect(),
        vectors,
    })
}

fn apply_rotations(z: &mut [[f64; LANES]], n: usize, rot: &[(usize, f64, f64)]) {
    for blk in z.chunks_exact_mut(n) {
        for &(i, c, s) in rot {
            let (lo, hi) = blk.split_at_mut(i + 1);
            let zi = &mut lo[i];
            let zf = &mut hi[0];
            for j in 0..LANES {
                let f = zf[j];
                let x = zi[j];
                zf[j] = s * x + c * f;
                zi[j] = c * x - s * f;
            }
        }
    }
}

/// `j`-th smallest eigenvalue (0-based) by Sturm bisection.
pub fn bisect_eigenvalue(diag: &[f64], off: &[f64], j: usize) -> f64 {
    let (mut lo, mut hi) = gershgorin(diag, off);
    lo -= 1e-12 * (1.0 + libm::fabs(lo));
    hi += 1e-12 * (1.0 + libm::fabs(hi));
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(diag, off, mid) > j {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Solves `(T − σ) x = b` by Gaussian elimination with partial pivoting.
fn tridiag_solve(diag: &[f64], off: &[f64], sigma: f64, b: &mut [f64]) {
    let n = diag.len();
    // LU with pivoting on a tridiagonal band: rows carry up to two super-diagonals
    let mut a = vec![0.0; n];
    let mut c = vec![0.0; n];
    let mut c2 = vec![0.0; n];
    for i in 0..n {
        a[i] = diag[i] - sigma;
        if i + 1 < n {
            c[i] = off[i];
        }
    }
    let tiny = f64::EPSILON * (gershgorin(diag, off).1.abs() + 1.0);
    for i in 0..n.saturating_sub(1) {
        let sub = off[i];
        if libm::fabs(sub) > libm::fabs(a[i]) {
            let (ai, ci, c2i) = (a[i], c[i], c2[i]);
            a[i] = sub;
            c[i] = a[i + 1];
            c2[i] = if i + 2 < n { c[i + 1] } else { 0.0 };
            let m = ai / sub;
            a[i + 1] = ci - m * c[i];
            c[i + 1] = c2i - m * c2[i];
            b.swap(i, i + 1);
            b[i + 1] -= m * b[i];
        } else {
            if a[i] == 0.0 {
                a[i] = tiny;
            }
            let m = sub / a[i];
            a[i + 1] -= m * c[i];
            b[i + 1] -= m * b[i];
        }
    }
    if a[n - 1] == 0.0 {
        a[n - 1] = tiny;
    }
    for i in (0..n).rev() {
        let mut v = b[i];
        if i + 1 < n {
            v -= c[i] * b[i + 1];
        }
        if i + 2 < n {
            v -= c2[i] * b[i + 2];
        }
        b[i] = v / a[i];
    }
}

/// Fallback: bisection for every eigenvalue, inverse iteration for vectors,
/// Gram–Schmidt inside clusters.
pub fn bisection_decompose(diag: &[f64], off: &[f64]) -> Decomposition {
    let n = diag.len();
    let values: Vec<f64> = (0..n).map(|j| bisect_eigenvalue(diag, off, j)).collect();
    let (glo, ghi) = gershgorin(diag, off);
    let scale = glo.abs().max(ghi.abs()).max(1.0);
    let mut vectors = vec![0.0; n * n];
    let mut cluster_start = 0;
    for s in 0..n {
        if s > 0 && values[s] - values[s - 1] > 1e-7 * scale {
            cluster_start = s;
        }
        let shift = values[s] + 1e-14 * scale * (s - cluster_start) as f64;
        // deterministic, non-degenerate start vector
        let mut x: Vec<f64> = (0..n)
            .map(|i| 1.0 + 0.1 * libm::sin(1.0 + i as f64 * 0.7 + s as f64))
            .collect();
        for _ in 0..4 {
            tridiag_solve(diag, off, shift, &mut x);
            for r in cluster_start..s {
                let v = &vectors[r * n..(r + 1) * n];
                let dot: f64 = v.iter().zip(&x).map(|(a, b)| a * b).sum();
                for (xi, vi) in x.iter_mut().zip(v) {
                    *xi -= dot * vi;
                }
            }
            let nrm = libm::sqrt(x.iter().map(|v| v * v).sum::<f64>());
            for xi in &mut x {
                *xi /= nrm;
            }
        }
        vectors[s * n..(s + 1) * n].copy_from_slice(&x);
    }
    Decomposition { values, vectors }
}
