//! Potentials `g: ℤ → ℝ` and their distance to reflected shifts.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::arithmetic::{default_n_min, TorusScalar};
use crate::error::{Error, Result};

/// Precision used when sampling cosine potentials into doubles.
const SAMPLE_BITS: u32 = 128;

/// Rule for `g(n)`.
#[derive(Clone)]
pub enum PotentialSpec {
    /// `2λ cos 2π(θ + nα)`.
    AlmostMathieu {
        lambda: f64,
        alpha: TorusScalar,
        theta: TorusScalar,
    },
    /// `values[i] = g(offset + i)`; anything else is out of window.
    Table { offset: i64, values: Vec<f64> },
    /// Pure function of `n` with a declared bound.
    Callback {
        rule: Arc<dyn Fn(i64) -> f64 + Send + Sync>,
        bound: f64,
    },
}

impl core::fmt::Debug for PotentialSpec {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Self::AlmostMathieu {
                lambda,
                alpha,
                theta,
            } => f
                .debug_struct("AlmostMathieu")
                .field("lambda", lambda)
                .field("alpha", &alpha.to_f64())
                .field("theta", &theta.to_f64())
                .finish(),
            Self::Table { offset, values } => f
                .debug_struct("Table")
                .field("offset", offset)
                .field("len", &values.len())
                .finish(),
            Self::Callback { bound, .. } => {
                f.debug_struct("Callback").field("bound", bound).finish()
            }
        }
    }
}

fn cos_turns(x: f64) -> f64 {
    // reduce to [-1/2, 1/2] before scaling by 2π
    let r = x - libm::round(x);
    libm::cos(2.0 * PI * r)
}

impl PotentialSpec {
    pub fn almost_mathieu(lambda: f64, alpha: TorusScalar, theta: TorusScalar) -> Self {
        Self::AlmostMathieu {
            lambda,
            alpha,
            theta,
        }
    }

    pub fn table(offset: i64, values: Vec<f64>) -> Self {
        Self::Table { offset, values }
    }

    pub fn callback(bound: f64, rule: impl Fn(i64) -> f64 + Send + Sync + 'static) -> Self {
        Self::Callback {
            rule: Arc::new(rule),
            bound,
        }
    }

    /// `B_g` with `|g(n)| ≤ B_g`.
    pub fn bound(&self) -> f64 {
        match self {
            Self::AlmostMathieu { lambda, .. } => 2.0 * lambda.abs(),
            Self::Table { values, .. } => values.iter().fold(0.0, |m, v| m.max(v.abs())),
            Self::Callback { bound, .. } => *bound,
        }
    }

    /// Stored sites for tables; `None` means every site is available.
    pub fn window(&self) -> Option<(i64, i64)> {
        match self {
            Self::Table { offset, values } => Some((*offset, offset + values.len() as i64 - 1)),
            _ => None,
        }
    }

    fn check(&self, lo: i64, hi: i64) -> Result<()> {
        if let Some((a, b)) = self.window() {
            for n in [lo, hi] {
                if n < a || n > b {
                    return Err(Error::OutOfWindow { n, lo: a, hi: b });
                }
            }
        }
        Ok(())
    }

    pub fn eval(&self, n: i64) -> Result<f64> {
        match self {
            Self::AlmostMathieu {
                lambda,
                alpha,
                theta,
            } => {
                let x = theta
                    .add(&alpha.mul_int(n))
                    .frac()
                    .with_precision(SAMPLE_BITS);
                Ok(2.0 * lambda * cos_turns(x.to_f64()))
            }
            Self::Table { offset, values } => {
                self.check(n, n)?;
                Ok(values[(n - offset) as usize])
            }
            Self::Callback { rule, .. } => Ok(rule(n)),
        }
    }

    /// `g(lo), …, g(hi)`.
    pub fn sample(&self, lo: i64, hi: i64) -> Result<Vec<f64>> {
        if hi < lo {
            return Ok(Vec::new());
        }
        match self {
            Self::AlmostMathieu {
                lambda,
                alpha,
                theta,
            } => {
                let step = alpha
                    .frac()
                    .with_precision(SAMPLE_BITS.max(alpha.precision_bits().min(256)));
                let mut x = theta
                    .add(&alpha.mul_int(lo))
                    .frac()
                    .with_precision(step.precision_bits());
                let mut out = Vec::with_capacity((hi - lo + 1) as usize);
                for _ in lo..=hi {
                    out.push(2.0 * lambda * cos_turns(x.to_f64()));
                    x = x.add(&step).frac();
                }
                Ok(out)
            }
            Self::Table { offset, values } => {
                self.check(lo, hi)?;
                Ok(values[(lo - offset) as usize..=(hi - offset) as usize].to_vec())
            }
            Self::Callback { rule, .. } => Ok((lo..=hi).map(|n| rule(n)).collect()),
        }
    }

    /// `ln sup_{|m| ≤ W} |g(n−m) − g(m)|`; `−∞` for an exact palindrome.
    ///
    /// Cosine potentials use `|g(n−m) − g(m)| = 4λ|sin π(2θ+nα)|·|sin π(n−2m)α|`,
    /// so resonances far below double resolution stay visible.
    pub fn reflection_log_distance(&self, n: i64, w: i64) -> Result<f64> {
        if w < 1 {
            return Err(Error::InvalidArgument("W must be at least 1".into()));
        }
        match self {
            Self::AlmostMathieu {
                lambda,
                alpha,
                theta,
            } => {
                let v = theta.mul_int(2).add(&alpha.mul_int(n)).torus_norm();
                if v.is_zero() {
                    return Ok(f64::NEG_INFINITY);
                }
                let vf = v.to_f64();
                let ln_sin = if vf > 1e-8 {
                    libm::log(libm::sin(PI * vf))
                } else {
                    libm::log(PI) + v.ln_abs()
                };
                let af = alpha.frac().to_f64();
                let mut s = 0.0f64;
                for m in -w..=w {
                    let k = (n - 2 * m) as f64;
                    s = s.max(libm::fabs(libm::sin(PI * (k * af - libm::round(k * af)))));
                }
                Ok(libm::log(4.0 * lambda.abs()) + ln_sin + libm::log(s))
            }
            _ => {
                let a = self.sample(n - w, n + w)?;
                let b = self.sample(-w, w)?;
                // a[j] = g(n − w + j) and g(n − m) sits at j = w − m; b[m + w] = g(m)
                let mut d = 0.0f64;
                for m in -w..=w {
                    let gm = b[(m + w) as usize];
                    let gnm = a[(w - m) as usize];
                    d = d.max(libm::fabs(gnm - gm));
                }
                Ok(libm::log(d))
            }
        }
    }

    /// `sup_{|m| ≤ W} |g(n−m) − g(m)|`, a finite-window proxy for `d(RTⁿg, g)`.
    pub fn reflection_distance(&self, n: i64, w: i64) -> Result<f64> {
        self.reflection_log_distance(n, w).map(libm::exp)
    }
}

/// Output of [`delta_g`].
#[derive(Clone, Debug, PartialEq)]
pub struct ReflectionScan {
    pub estimate: f64,
    pub argmax: i64,
    pub n_min: u64,
    pub n_max: u64,
    pub window_w: i64,
    /// `(n, ln d_W(RTⁿg, g))` for `n_min ≤ |n| ≤ n_max`, negative shifts first.
    pub log_distances: Vec<(i64, f64)>,
    /// `(n, exponent)` at each new minimum of the distance.
    pub records: Vec<(i64, f64)>,
    /// Largest relative change of the estimate when `W → 2W`; `None` if `2W` left the table.
    pub doubling_change: Option<f64>,
}

/// Finite-range estimate of `δ(g) = limsup −ln d(RTⁿg, g)/|n|`.
pub fn delta_g(
    g: &PotentialSpec,
    n_max: u64,
    w: i64,
    n_min: Option<u64>,
) -> Result<ReflectionScan> {
    if n_max < 10 || w < n_max as i64 {
        return Err(Error::InvalidArgument(format!(
            "need N ≥ 10 and W ≥ N, got N = {n_max}, W = {w}"
        )));
    }
    let n_min = n_min.unwrap_or_else(|| default_n_min(n_max)).max(1);
    let mut log_distances = Vec::new();
    let mut records = Vec::new();
    let mut best = (0i64, f64::NEG_INFINITY);
    let mut min_ld = f64::INFINITY;
    for k in 1..=n_max as i64 {
        for n in [-k, k] {
            let ld = g.reflection_log_distance(n, w)?;
            if ld == f64::NEG_INFINITY {
                return Err(Error::DegenerateExactPalindrome { n });
            }
            if (k as u64) < n_min {
                continue;
            }
            log_distances.push((n, ld));
            let e = -ld / k as f64;
            if ld < min_ld {
                min_ld = ld;
                records.push((n, e));
            }
            if e > best.1 {
                best = (n, e);
            }
        }
    }
    let doubling_change = {
        let mut worst = 0.0f64;
        let mut ok = true;
        for &(n, ld) in &log_distances {
            match g.reflection_log_distance(n, 2 * w) {
                Ok(ld2) => {
                    let e1 = -ld / n.unsigned_abs() as f64;
                    let e2 = -ld2 / n.unsigned_abs() as f64;
                    worst = worst.max(libm::fabs(e2 - e1) / libm::fabs(e1).max(1e-12));
                }
                Err(Error::OutOfWindow { .. }) => {
                    ok = false;
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        ok.then_some(worst)
    };
    Ok(ReflectionScan {
        estimate: best.1,
        argmax: best.0,
        n_min,
        n_max,
        window_w: w,
        log_distances,
        records,
        doubling_change,
    })
}
