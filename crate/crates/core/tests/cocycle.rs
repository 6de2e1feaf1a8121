use proptest::prelude::*;
use qplab_core::cocycle::*;
use qplab_core::PotentialSpec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_table(seed: u64, lo: i64, len: usize, bound: f64) -> PotentialSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    PotentialSpec::table(
        lo,
        (0..len).map(|_| rng.random_range(-bound..bound)).collect(),
    )
}

/// Relative distance between two scaled products.
fn rel_diff(p: &CocycleProduct, q: &CocycleProduct) -> f64 {
    let s = (p.log_scale - q.log_scale).exp();
    let (a, b) = (&p.matrix, &q.matrix);
    let d = [a.a * s - b.a, a.b * s - b.b, a.c * s - b.c, a.d * s - b.d];
    d.iter().map(|x| x.abs()).fold(0.0, f64::max) / b.norm_inf()
}

#[test]
fn identity_at_equal_ends() {
    let g = random_table(1, -5, 11, 3.0);
    let p = product(&g, 0.4, 2, 2).unwrap();
    assert_eq!(p.matrix, TransferMatrix::IDENTITY);
    assert_eq!(p.log_scale, 0.0);
}

#[test]
fn parabolic_power() {
    let g = PotentialSpec::callback(0.0, |_| 0.0);
    let n = 1000i64;
    let p = product(&g, 2.0, 0, n).unwrap();
    assert_eq!(p.log_scale, 0.0);
    let nf = n as f64;
    assert_eq!(
        p.matrix,
        TransferMatrix {
            a: nf + 1.0,
            b: -nf,
            c: nf,
            d: -(nf - 1.0)
        }
    );
    assert!((p.log_norm().exp() - 2.0 * nf).abs() / (2.0 * nf) < 1e-3);
}

#[test]
fn inverse_convention() {
    let g = random_table(2, -100, 201, 4.0);
    let fwd = product(&g, 0.3, -40, 60).unwrap();
    let back = product(&g, 0.3, 60, -40).unwrap();
    assert_eq!(back.span, (60, -40));
    let id = back.compose(&fwd).unwrap();
    let m = id.matrix;
    let s = id.log_scale.exp();
    // entries cancel from size ‖A‖², so rounding is relative to that
    let scale = (2.0 * fwd.log_norm()).exp();
    let tol = 1e-13 * scale;
    assert!((m.a * s - 1.0).abs() < tol && (m.d * s - 1.0).abs() < tol);
    assert!((m.b * s).abs() < tol && (m.c * s).abs() < tol);
}

#[test]
fn long_span_renormalizes() {
    let g = random_table(3, 0, 10_000, 6.0);
    let p = product(&g, 0.0, 0, 10_000).unwrap();
    assert!(p.log_scale > 700.0);
    assert!(p.matrix.norm_inf() <= 2f64.powi(RENORM_LOG2 + 1));
    assert!(p.det_defect() < 1e-10);
}

#[test]
fn out_of_window_is_reported() {
    let g = random_table(4, 0, 10, 1.0);
    assert!(product(&g, 0.0, 0, 20).is_err());
}

#[test]
fn propagation_matches_direct_recursion() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for trial in 0..20u64 {
        let g = random_table(100 + trial, -600, 1201, 4.0);
        let e: f64 = rng.random_range(-6.0..6.0);
        let m: i64 = rng.random_range(-200..200);
        let k: i64 = rng.random_range(1..300);
        let u0 = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
        let (mut cur, mut prev) = (u0[0], u0[1]);
        let mut scale = 0.0f64;
        for n in m..m + k {
            let next = (e - g.eval(n).unwrap()) * cur - prev;
            prev = cur;
            cur = next;
            let r = cur.abs().max(prev.abs());
            if r > 1e100 {
                cur /= r;
                prev /= r;
                scale += r.ln();
            }
        }
        let p = propagate(&g, e, u0, m, k).unwrap();
        let want_ln = scale + cur.hypot(prev).ln();
        assert!(
            (p.log_norm() - want_ln).abs() < 1e-10 * want_ln.abs().max(1.0),
            "trial {trial}"
        );
        let nrm = cur.hypot(prev);
        assert!((p.vector[0] - cur / nrm).abs() < 1e-9 && (p.vector[1] - prev / nrm).abs() < 1e-9);
    }
}

#[test]
fn propagate_zero_steps() {
    let g = random_table(6, 0, 5, 1.0);
    let p = propagate(&g, 1.0, [0.3, -0.7], 2, 0).unwrap();
    assert_eq!(p.to_vec(), [0.3, -0.7]);
}

#[test]
fn lyapunov_free_elliptic_and_off_spectrum() {
    let free = PotentialSpec::callback(0.0, |_| 0.0);
    assert!(lyapunov_estimate(&free, 0.0, 5000, &spread_base_points(5000, 4)).unwrap() < 0.01);
    let a = qplab_core::TorusScalar::golden(256);
    let g = PotentialSpec::almost_mathieu(2.0, a, qplab_core::TorusScalar::zero(256));
    let e = 2.0 + 4.0 + 1.0;
    let l = lyapunov_estimate(&g, e, 2000, &spread_base_points(2000, 8)).unwrap();
    assert!(l >= 2f64.ln() + 0.2, "{l}");
}

#[test]
fn periodic_shift_invariance() {
    let period = [0.7, -1.3, 2.2, 0.1, -0.4];
    let p = period.len() as i64;
    let g = PotentialSpec::callback(2.2, move |n| period[n.rem_euclid(p) as usize]);
    let base = spread_base_points(100, 16);
    let shifted: Vec<i64> = base.iter().map(|k| k + 3 * p).collect();
    for e in [-1.0, 0.5, 3.0] {
        let a = lyapunov_estimate(&g, e, 400, &base).unwrap();
        let b = lyapunov_estimate(&g, e, 400, &shifted).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }
}

#[test]
fn base_points_lattice() {
    assert_eq!(spread_base_points(10, 5), vec![0, 10, -10, 20, -20]);
    assert_eq!(spread_base_points(7, 64).len(), 64);
}

proptest! {
    #[test]
    fn one_step_unimodular(e in -10.0f64..10.0, gn in -10.0f64..10.0) {
        prop_assert_eq!(one_step(e, gn).det(), 1.0);
    }

    #[test]
    fn cocycle_identity(seed in 0u64..1000, e in -5.0f64..5.0, k in -2000i64..0, mid in 0i64..2000, n in 2000i64..4000) {
        let g = random_table(seed, -2000, 6001, 3.0);
        let whole = product(&g, e, k, n).unwrap();
        let left = product(&g, e, k, mid).unwrap();
        let right = product(&g, e, mid, n).unwrap();
        let joined = right.compose(&left).unwrap();
        prop_assert!(rel_diff(&joined, &whole) < 1e-10, "{}", rel_diff(&joined, &whole));
        prop_assert!(whole.det_defect() < 1e-10);
    }

    #[test]
    fn two_sided_growth_bound(seed in 0u64..1000, e in -5.0f64..5.0, m in -500i64..500, k in -500i64..500, a in -1.0f64..1.0, b in -1.0f64..1.0) {
        prop_assume!(a.hypot(b) > 1e-3);
        let g = random_table(seed, -1000, 2001, 3.0);
        let vals = g.sample(-1000, 1000).unwrap();
        let bnd = step_log_bound(&vals, e, e);
        let p = propagate(&g, e, [a, b], m, k).unwrap();
        let ratio = p.log_norm() - a.hypot(b).ln();
        let lim = bnd * k.abs() as f64;
        prop_assert!(ratio <= lim * (1.0 + 1e-10) + 1e-12 && ratio >= -lim * (1.0 + 1e-10) - 1e-12);
    }
}
