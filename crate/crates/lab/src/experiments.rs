//! The experiment kinds behind each subcommand.

use qplab_core::arithmetic::{required_bits, PhaseOptions};
use qplab_core::cocycle::{lyapunov_estimate, spread_base_points};
use qplab_core::density::{
    almost_density, center_density, density_bounds_check, BoundsReport, Selection,
};
use qplab_core::dynamics::{
    amplitude, amplitude_bound, evolve, moment, probe, product_bound_fit, sudl_profile,
    sup_amplitude, unitarity_defect, SupMethod, TimeGrid,
};
use qplab_core::potential::delta_g;
use qplab_core::resonance::{find_resonance, verify_decay};
use qplab_core::spectral::{build_truncation, decay_fit, eigendecompose, Side};
use qplab_core::{construct_phase, delta_alpha_theta, EigenSystem};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::config::{ExperimentConfig, Kind, PhaseSpec};
use crate::diagnostics::{self as diag, Classification, ClassifyInput, ClassifyRule};
use crate::instance::Instance;
use crate::io::{eigensystem_binary, eigensystem_csv, num, Table};
use crate::report::{Check, Report};
use crate::LabError;

/// Labels for the result each check or row exercises.
pub mod tags {
    pub const EIGENPROBLEM: &str = "truncated-eigenproblem";
    pub const LYAPUNOV: &str = "lyapunov-exponent";
    pub const ARITHMETIC: &str = "arithmetic-exponent";
    pub const REFLECTION: &str = "reflection-exponent";
    pub const PHASE: &str = "phase-construction";
    pub const DECAY: &str = "two-case-decay";
    pub const ENVELOPE: &str = "nearest-resonance-envelope";
    pub const PALINDROME: &str = "palindromic-defect";
    pub const SULE: &str = "sule-criterion";
    pub const CENTER_DENSITY: &str = "center-density";
    pub const ALMOST_DENSITY: &str = "almost-maxima-density";
    pub const UNITARY: &str = "unitary-evolution";
    pub const DYNAMICAL: &str = "dynamical-localization";
    pub const SUDL: &str = "sudl";
    pub const PRODUCT: &str = "product-bound";
    pub const TRICHOTOMY: &str = "trichotomy";
}

pub fn run(cfg: &ExperimentConfig) -> Result<Report, LabError> {
    let mut cfg = cfg.clone();
    cfg.resolve();
    cfg.validate()?;
    match cfg.kind {
        Kind::Spectrum => spectrum(cfg),
        Kind::Lyapunov => lyapunov(cfg),
        Kind::Delta => delta(cfg),
        Kind::Phase => phase(cfg),
        Kind::Dynamics => dynamics(cfg),
        Kind::Density => density(cfg),
        Kind::Trichotomy => trichotomy(cfg),
        Kind::Verify => verify(cfg),
    }
}

fn report(
    config: ExperimentConfig,
    checks: Vec<Check>,
    summary: serde_json::Value,
    tables: Vec<Table>,
) -> Report {
    Report {
        config,
        checks,
        summary,
        tables,
        attachments: Vec::new(),
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn linspace(t_max: f64, samples: usize) -> Vec<f64> {
    let k = samples.max(2) - 1;
    (0..=k).map(|i| t_max * i as f64 / k as f64).collect()
}

fn symmetric_m_list(range: (i64, i64)) -> Vec<i64> {
    let (lo, hi) = (range.0.max(1), range.1);
    (-hi..=-lo).chain(lo..=hi).collect()
}

fn require_theta(inst: &Instance) -> Result<&qplab_core::TorusScalar, LabError> {
    inst.theta.as_ref().ok_or_else(|| {
        LabError::Config("this experiment needs an almost Mathieu model, not a table".into())
    })
}

fn spectrum(cfg: ExperimentConfig) -> Result<Report, LabError> {
    let inst = Instance::build(&cfg.model, cfg.window, cfg.precision_bits)?;
    let sys = inst.eigensystem()?;
    let tol = cfg.tolerances.eigen;
    let hn = sys.norm_bound();
    let orth = sys.orthonormality_defect();
    let comp = sys.completeness_defect();
    let checks = vec![
        Check::new(
            "residual",
            tags::EIGENPROBLEM,
            sys.residual_max <= tol * (hn + 1.0),
            sys.residual_max,
            format!("<= {tol:e}·(‖H‖+1)"),
        ),
        Check::new(
            "orthonormality",
            tags::EIGENPROBLEM,
            orth <= tol,
            orth,
            format!("<= {tol:e}"),
        ),
        Check::new(
            "completeness",
            tags::EIGENPROBLEM,
            comp <= tol,
            comp,
            format!("<= {tol:e}"),
        ),
    ];
    let mut t = Table::new(
        "eigenfunctions",
        &[
            "theorem",
            "s",
            "energy",
            "center",
            "trusted",
            "decay_rate",
            "residual",
        ],
    );
    for s in 0..sys.dim() {
        let m = sys.centers()[s];
        let rate = if sys.is_trusted(s) {
            decay_fit(&sys.profile(s), m, cfg.grids.decay_tail, Side::Both)
                .ok()
                .map(|f| f.rate)
        } else {
            None
        };
        t.push(vec![
            tags::EIGENPROBLEM.into(),
            s.to_string(),
            num(sys.eigenvalues()[s]),
            m.to_string(),
            sys.is_trusted(s).to_string(),
            opt(rate),
            num(sys.residual(s)),
        ]);
    }
    let e = sys.eigenvalues();
    let summary = json!({
        "dim": sys.dim(),
        "first_site": sys.first_site(),
        "trust_region": sys.trust_region,
        "trusted": sys.trusted().len(),
        "method": format!("{:?}", sys.method),
        "norm_bound": hn,
        "residual_max": sys.residual_max,
        "pointwise_residual": sys.pointwise_residual(),
        "orthonormality_defect": orth,
        "completeness_defect": comp,
        "spectrum": [e[0], e[e.len() - 1]],
        "theta": inst.theta_string(),
        "precision_bits": inst.bits,
    });
    let mut r = report(cfg, checks, summary, vec![t]);
    if r.config.output.eigensystem_dump {
        r.attachments
            .push(("spectrum_eigensystem.csv".into(), eigensystem_csv(&sys)));
        r.attachments
            .push(("spectrum_eigensystem.bin".into(), eigensystem_binary(&sys)));
    }
    Ok(r)
}

/// Evenly spread eigenvalues of the model truncation, `(2i+1)·N/(2count)` by index.
pub fn spread_eigenvalues(sys: &EigenSystem, count: usize) -> Vec<f64> {
    let n = sys.dim();
    (0..count)
        .map(|i| sys.eigenvalues()[((2 * i + 1) * n / (2 * count)).min(n - 1)])
        .collect()
}

fn lyapunov(cfg: ExperimentConfig) -> Result<Report, LabError> {
    let inst = Instance::build(&cfg.model, cfg.window, cfg.precision_bits)?;
    let g = &cfg.grids;
    let energies = if g.energies.is_empty() {
        spread_eigenvalues(&inst.eigensystem()?, g.energy_count)
    } else {
        g.energies.clone()
    };
    let cells: Vec<(f64, u64)> = energies
        .iter()
        .flat_map(|&e| g.lyapunov_n.iter().map(move |&n| (e, n)))
        .collect();
    let values: Vec<f64> = cells
        .par_iter()
        .map(|&(e, n)| {
            lyapunov_estimate(
                &inst.potential,
                e,
                n,
                &spread_base_points(n, g.lyapunov_base_points),
            )
        })
        .collect::<Result<_, _>>()?;
    let reference = inst.lambda.ln().max(0.0);
    let mut t = Table::new("rows", &["theorem", "energy", "n", "estimate", "reference"]);
    for (&(e, n), v) in cells.iter().zip(&values) {
        t.push(vec![
            tags::LYAPUNOV.into(),
            num(e),
            n.to_string(),
            num(*v),
            num(reference),
        ]);
    }
    let n_top = *g
        .lyapunov_n
        .iter()
        .max()
        .ok_or_else(|| LabError::Config("grids.lyapunov_n is empty".into()))?;
    let width = if reference > 0.0 {
        cfg.tolerances.lyapunov_rel * reference
    } else {
        cfg.tolerances.lyapunov_rel
    };
    let hits = cells
        .iter()
        .zip(&values)
        .filter(|((_, n), v)| *n == n_top && (**v - reference).abs() <= width)
        .count();
    let need = (cfg.tolerances.lyapunov_fraction * energies.len() as f64).ceil() as usize;
    let checks = vec![Check::new(
        "near_reference",
        tags::LYAPUNOV,
        hits >= need,
        hits as f64,
        format!(
            ">= {need} of {} energies within ±{width} of {reference} at n = {n_top}",
            energies.len()
        ),
    )];
    let summary =
        json!({ "energies": energies, "reference": reference, "n_max": n_top, "hits": hits });
    Ok(report(cfg, checks, summary, vec![t]))
}

fn delta(cfg: ExperimentConfig) -> Result<Report, LabError> {
    let inst = Instance::build(&cfg.model, cfg.window, cfg.precision_bits)?;
    let n = cfg.grids.delta_n_max;
    let scan = delta_g(&inst.potential, n, n as i64, None)?;
    let mut refl = Table::new("reflection_records", &["theorem", "n", "exponent"]);
    for &(k, x) in &scan.records {
        refl.push(vec![tags::REFLECTION.into(), k.to_string(), num(x)]);
    }
    let mut checks = Vec::new();
    let mut tables = vec![refl];
    let mut summary = json!({
        "reflection": {
            "estimate": scan.estimate,
            "argmax": scan.argmax,
            "n_min": scan.n_min,
            "n_max": scan.n_max,
            "window": scan.window_w,
            "doubling_change": scan.doubling_change,
        }
    });
    if let Some(theta) = &inst.theta {
        let d = delta_alpha_theta(&inst.alpha, theta, n, None)?;
        let mut arith = Table::new("arithmetic_records", &["theorem", "n", "exponent"]);
        for &(k, x) in &d.records {
            arith.push(vec![tags::ARITHMETIC.into(), k.to_string(), num(x)]);
        }
        tables.push(arith);
        // both exponents see the same sine; the reflection distance carries an extra factor up to 4πλ
        let offset = (4.0 * std::f64::consts::PI * inst.lambda).ln().max(0.0)
            / scan.argmax.unsigned_abs().max(1) as f64;
        let gap = (scan.estimate - d.estimate).abs();
        let limit = cfg.tolerances.delta_agreement + offset;
        checks.push(Check::new(
            "reflection_matches_arithmetic",
            tags::REFLECTION,
            gap <= limit,
            gap,
            format!("<= {limit}"),
        ));
        summary["arithmetic"] = json!({ "estimate": d.estimate, "argmax": d.argmax, "n_min": d.n_min, "n_max": d.n_max });
    }
    Ok(report(cfg, checks, summary, tables))
}

fn phase(cfg: ExperimentConfig) -> Result<Report, LabError> {
    let PhaseSpec::TargetB { b, .. } = cfg.model.phase else {
        return Err(LabError::Config(
            "phase experiments need model.phase.target_b".into(),
        ));
    };
    let n_max = cfg.grids.phase_n_max;
    let bits = cfg.precision_bits.max(required_bits(b, n_max) + 64);
    let alpha = cfg.model.alpha.materialize(bits)?;
    let opts = PhaseOptions {
        floor_ratio: cfg.tolerances.floor_ratio,
        ..Default::default()
    };
    let cert = construct_phase(&alpha, b, n_max, &opts)?;
    let check = cert.verify();
    let d = delta_alpha_theta(&alpha, &cert.theta, n_max, None)?;
    let mut checks = vec![Check::new(
        "certificate_verifies",
        tags::PHASE,
        check.is_ok(),
        cert.floor_exponent,
        "independent rescan accepts",
    )];
    if b > 0.0 {
        let lim = cfg.tolerances.floor_ratio * b;
        checks.push(Check::new(
            "floor_exponent",
            tags::PHASE,
            cert.floor_exponent <= lim,
            cert.floor_exponent,
            format!("<= {lim}"),
        ));
        let rel = (d.estimate - b).abs() / b;
        let lim = cfg.tolerances.phase_recovery_rel;
        checks.push(Check::new(
            "delta_recovers_b",
            tags::ARITHMETIC,
            rel <= lim,
            rel,
            format!("relative error <= {lim}"),
        ));
    }
    let mut t = Table::new("witnesses", &["theorem", "n", "lower", "upper"]);
    for (n, (lo, hi)) in cert.witness_times.iter().zip(&cert.witness_bounds) {
        t.push(vec![
            tags::PHASE.into(),
            n.to_string(),
            lo.to_decimal_string(30),
            hi.to_decimal_string(30),
        ]);
    }
    let summary = json!({
        "theta": cert.theta.to_decimal_string(cert.theta.decimal_digits()),
        "precision_bits": bits,
        "witness_times": cert.witness_times,
        "floor_exponent": cert.floor_exponent,
        "checked_range": cert.checked_range,
        "verification": check.as_ref().map(|c| json!({"floor_needed": c.floor_needed, "witness_needed": c.witness_needed})).map_err(|e| e.to_string()),
        "delta_hat": d.estimate,
        "delta_argmax": d.argmax,
    });
    let mut r = report(cfg, checks, summary, vec![t]);
    let mut bytes = serde_json::to_vec_pretty(&cert).expect("certificate serializes");
    bytes.push(b'\n');
    r.attachments.push(("phase_certificate.json".into(), bytes));
    Ok(r)
}

/// Second moment on an evenly spaced grid over `[0, t_max]`.
pub fn moment_series(
    sys: &EigenSystem,
    source: i64,
    t_max: f64,
    samples: usize,
) -> Result<Vec<(f64, f64)>, LabError> {
    let ts = linspace(t_max, samples);
    let vals: Vec<f64> = ts
        .par_iter()
        .map(|&t| moment(sys, 2.0, t, source))
        .collect::<Result<_, _>>()?;
    Ok(ts.into_iter().zip(vals).collect())
}

/// `sup/inf` over `t ≥ t_max/10` of the running mean `(1/k)Σ_{i<k} M(t_i)` of an evenly sampled series.
pub fn last_decade_ratio(series: &[(f64, f64)], t_max: f64) -> f64 {
    let mut acc = 0.0;
    let mut hi = f64::NEG_INFINITY;
    let mut lo = f64::INFINITY;
    for (i, &(t, v)) in series.iter().enumerate() {
        acc += v;
        if t >= t_max / 10.0 {
            let mean = acc / (i + 1) as f64;
            hi = hi.max(mean);
            lo = lo.min(mean);
        }
    }
    hi / lo
}

fn dynamics(cfg: ExperimentConfig) -> Result<Report, LabError> {
    let inst = Instance::build(&cfg.model, cfg.window, cfg.precision_bits)?;
    let sys = inst.eigensystem()?;
    let g = &cfg.grids;
    let tol = &cfg.tolerances;
    let mut checks = Vec::new();

    let mut id_err = 0.0f64;
    for &m in &g.unitarity_sources {
        let psi = evolve(&sys, m, 0.0)?;
        let j = sys.index_of(m)?;
        for (i, z) in psi.iter().enumerate() {
            let want = if i == j { 1.0 } else { 0.0 };
            id_err = id_err.max((z.re - want).hypot(z.im));
        }
    }
    checks.push(Check::new(
        "identity_at_zero",
        tags::UNITARY,
        id_err <= tol.identity,
        id_err,
        format!("<= {:e}", tol.identity),
    ));

    let ts = linspace(g.t_max, g.unitarity_samples);
    let cells: Vec<(i64, f64)> = g
        .unitarity_sources
        .iter()
        .flat_map(|&m| ts.iter().map(move |&t| (m, t)))
        .collect();
    let defects: Vec<f64> = cells
        .par_iter()
        .map(|&(m, t)| unitarity_defect(&sys, m, t))
        .collect::<Result<_, _>>()?;
    let worst = defects.iter().cloned().fold(0.0, f64::max);
    checks.push(Check::new(
        "unitarity",
        tags::UNITARY,
        worst <= tol.unitarity,
        worst,
        format!("<= {:e}", tol.unitarity),
    ));

    let series = moment_series(&sys, g.probe_source, g.t_max, g.moment_samples)?;
    let ratio = last_decade_ratio(&series, g.t_max);
    checks.push(Check::new(
        "moment_last_decade",
        tags::DYNAMICAL,
        ratio < tol.moment_ratio,
        ratio,
        format!("sup/inf < {}", tol.moment_ratio),
    ));
    let mut mt = Table::new("moment", &["theorem", "t", "moment_p2"]);
    for (t, v) in &series {
        mt.push(vec![tags::DYNAMICAL.into(), num(*t), num(*v)]);
    }

    let m_list = symmetric_m_list(g.sudl_m);
    let rows = sudl_profile(&sys, &m_list, g.sudl_radius, &SupMethod::Bound)?;
    let mut st = Table::new(
        "sudl",
        &[
            "theorem",
            "m",
            "ln_prefactor",
            "rate",
            "statistic",
            "decoupled",
            "points",
        ],
    );
    for r in &rows {
        st.push(vec![
            tags::SUDL.into(),
            r.m.to_string(),
            num(r.ln_prefactor),
            num(r.rate),
            opt(r.statistic),
            r.decoupled.to_string(),
            r.points.to_string(),
        ]);
    }
    let sudl_max = rows
        .iter()
        .filter_map(|r| r.statistic)
        .fold(f64::NEG_INFINITY, f64::max);
    let fit = product_bound_fit(&sys, g.product_stride)?;
    checks.push(Check::new(
        "product_bound_decay",
        tags::PRODUCT,
        fit.c1 > 0.0,
        fit.c1,
        "c1 > 0",
    ));

    let times = linspace(g.t_max, g.probe_samples);
    let pr = probe(&sys, g.probe_source, &g.probe_targets, &times)?;
    let mut pt = Table::new("probe", &["theorem", "n", "m", "t", "re", "im"]);
    for (i, &t) in pr.t_grid.iter().enumerate() {
        for (j, &n) in pr.targets.iter().enumerate() {
            let z = pr.amplitudes[j][i];
            pt.push(vec![
                tags::UNITARY.into(),
                n.to_string(),
                pr.source.to_string(),
                num(t),
                num(z.re),
                num(z.im),
            ]);
        }
    }
    let grid = TimeGrid::for_system(&sys, g.t_max);
    let sups = g
        .probe_targets
        .par_iter()
        .map(|&n| {
            let s = sup_amplitude(&sys, n, g.probe_source, &grid)?;
            Ok(json!({ "n": n, "m": g.probe_source, "sampled": s.sampled, "bound": s.bound, "pruned": s.pruned }))
        })
        .collect::<Result<Vec<_>, LabError>>()?;
    let summary = json!({
        "norm_bound": sys.norm_bound(),
        "time_grid": grid,
        "identity_error": id_err,
        "unitarity_defect": worst,
        "moment_last_decade_ratio": ratio,
        "sup": sups,
        "sudl_max": sudl_max,
        "product_fit": fit,
        "amplitude_bound_origin": amplitude_bound(&sys, g.probe_source, g.probe_source)?,
        "amplitude_at_t_max": amplitude(&sys, g.probe_source, g.probe_source, g.t_max)?.norm(),
    });
    Ok(report(cfg, checks, summary, vec![mt, st, pt]))
}

/// Arithmetic exponent used for density bands: the target when one was set, else a finite-range estimate.
fn band_exponent(inst: &Instance, n: u64) -> Result<Option<f64>, LabError> {
    if let Some(b) = inst.target_b {
        return Ok(Some(b));
    }
    match &inst.theta {
        Some(th) => Ok(Some(delta_alpha_theta(&inst.alpha, th, n, None)?.estimate)),
        None => Ok(None),
    }
}

fn density(cfg: ExperimentConfig) -> Result<Report, LabError> {
    let inst = Instance::build(&cfg.model, cfg.window, cfg.precision_bits)?;
    let sys = inst.eigensystem()?;
    let grid = &cfg.grids.density_l;
    let k = cfg.grids.almost_k;
    let curves = [
        ("maxima", tags::CENTER_DENSITY, center_density(&sys, grid)?),
        (
            "nearest",
            tags::ALMOST_DENSITY,
            almost_density(&sys, k, grid, Selection::Nearest)?,
        ),
        (
            "farthest",
            tags::ALMOST_DENSITY,
            almost_density(&sys, k, grid, Selection::Farthest)?,
        ),
    ];
    let b = band_exponent(&inst, cfg.grids.delta_n_max)?;
    let mut t = Table::new("curves", &["theorem", "flavor", "l", "count", "density"]);
    let mut checks = Vec::new();
    let mut bounds: Vec<(&str, BoundsReport)> = Vec::new();
    for (name, tag, c) in &curves {
        for ((l, n), d) in c.l_values.iter().zip(&c.counts).zip(&c.densities) {
            t.push(vec![
                tag.to_string(),
                name.to_string(),
                l.to_string(),
                n.to_string(),
                num(*d),
            ]);
        }
        if let Some(b) = b.filter(|b| *b < inst.lambda.ln()) {
            let r = density_bounds_check(c, b, inst.lambda, cfg.tolerances.density)?;
            let worst = r
                .rows
                .iter()
                .map(|x| x.margin_lower.min(x.margin_upper))
                .fold(f64::INFINITY, f64::min);
            let lo = r.rows.first().map_or(f64::NAN, |x| x.lower);
            let hi = r.rows.first().map_or(f64::NAN, |x| x.upper);
            checks.push(Check::new(
                &format!("{name}_band"),
                tag,
                r.pass,
                worst,
                format!("density in [{lo}, {hi}]"),
            ));
            bounds.push((name, r));
        }
    }
    let summary = json!({
        "band_exponent": b,
        "boundary_excluded": curves[0].2.boundary_excluded,
        "curves": curves.iter().map(|(n, _, c)| json!({"name": n, "curve": c})).collect::<Vec<_>>(),
        "bounds": bounds.iter().map(|(n, r)| json!({"name": n, "report": r})).collect::<Vec<_>>(),
    });
    Ok(report(cfg, checks, summary, vec![t]))
}

fn verify(cfg: ExperimentConfig) -> Result<Report, LabError> {
    let inst = Instance::build(&cfg.model, cfg.window, cfg.precision_bits)?;
    let theta = require_theta(&inst)?;
    let sys = inst.eigensystem()?;
    let eps = cfg.tolerances.verify_eps;
    let site = find_resonance(theta, &inst.alpha, cfg.window)?;
    let rows = verify_decay(&sys, &site, inst.lambda, eps, None)?;
    let failures: Vec<_> = rows.iter().filter(|r| !r.pass).collect();
    let near = (eps * cfg.window as f64).ceil() as u64;
    let near_mirror = failures
        .iter()
        .filter(|r| r.ell.abs_diff(site.l0 - r.m_s) <= near)
        .count();
    let frac = diag::fraction(failures.len(), rows.len());
    let mut checks = vec![Check::new(
        "envelope_failures",
        tags::ENVELOPE,
        frac <= cfg.tolerances.verify_failure_fraction,
        frac,
        format!(
            "<= {} of {} rows",
            cfg.tolerances.verify_failure_fraction,
            rows.len()
        ),
    )];
    let header = [
        "theorem",
        "s",
        "ell",
        "observed",
        "predicted",
        "case",
        "margin",
    ];
    let mut dt = Table::new(
        if cfg.output.full_decay_table {
            "decay"
        } else {
            "decay_failures"
        },
        &header,
    );
    for r in rows
        .iter()
        .filter(|r| cfg.output.full_decay_table || !r.pass)
    {
        dt.push(vec![
            tags::ENVELOPE.into(),
            r.s.to_string(),
            r.ell.to_string(),
            num(r.observed),
            num(r.predicted),
            r.case.tag().into(),
            num(r.margin),
        ]);
    }
    let mut per = Table::new(
        "per_eigenfunction",
        &["theorem", "s", "center", "rows", "failures", "max_margin"],
    );
    for chunk in rows.chunk_by(|a, b| a.s == b.s) {
        let fails = chunk.iter().filter(|r| !r.pass).count();
        let mx = chunk
            .iter()
            .map(|r| r.margin)
            .fold(f64::NEG_INFINITY, f64::max);
        per.push(vec![
            tags::ENVELOPE.into(),
            chunk[0].s.to_string(),
            chunk[0].m_s.to_string(),
            chunk.len().to_string(),
            fails.to_string(),
            num(mx),
        ]);
    }
    let mut tables = vec![per, dt];
    let mut summary = json!({
        "resonance": site,
        "rows": rows.len(),
        "failures": failures.len(),
        "failures_near_mirror": near_mirror,
        "near_radius": near,
    });
    if let (Some(n_w), Some(b)) = (inst.witness_scale, inst.target_b.filter(|b| *b > 0.0)) {
        let k = diag::signed_witness(theta, &inst.alpha, n_w);
        let pal = diag::palindrome_scan(&sys, k);
        let thr =
            (-b * k.unsigned_abs() as f64 * cfg.tolerances.palindrome_exponent_fraction).exp();
        let passing = pal.iter().filter(|p| p.relative <= thr).count();
        let best = pal.iter().map(|p| p.relative).fold(f64::INFINITY, f64::min);
        checks.push(Check::new(
            "palindrome_at_witness",
            tags::PALINDROME,
            passing >= 1,
            best,
            format!("some relative defect <= {thr:e}"),
        ));
        let mut pt = Table::new(
            "palindrome",
            &["theorem", "k", "s", "center", "iota", "relative_defect"],
        );
        for p in &pal {
            pt.push(vec![
                tags::PALINDROME.into(),
                k.to_string(),
                p.s.to_string(),
                p.m.to_string(),
                p.iota.to_string(),
                num(p.relative),
            ]);
        }
        tables.push(pt);
        summary["palindrome"] = json!({ "k": k, "threshold": thr, "passing": passing, "best": best, "tested": pal.len() });
    }
    Ok(report(cfg, checks, summary, tables))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrichotomyCell {
    pub b: f64,
    pub theta: String,
    pub witness_scale: u64,
    pub signed_witness: i64,
    pub precision_bits: u32,
    pub floor_exponent: f64,
    pub delta_hat: f64,
    pub delta_argmax: i64,
    pub trusted: usize,
    pub decay_in_band: f64,
    pub decay_median: Option<f64>,
    pub resonant_count: usize,
    pub toward_median: Option<f64>,
    pub toward_in_band: f64,
    pub opposite_in_band: f64,
    pub palindrome_best: Option<f64>,
    pub palindrome_passing: usize,
    pub palindrome_threshold: Option<f64>,
    pub sule_gamma: f64,
    pub sule_max: f64,
    pub sule_violations: usize,
    pub sudl_max: f64,
    pub sudl_argmax: i64,
    pub density_l: i64,
    pub density_maxima: f64,
    pub density_nearest: f64,
    pub density_farthest: f64,
    pub density_band: Option<bool>,
    pub expected: Classification,
    pub classification: Classification,
}

/// Per-eigenfunction rows kept alongside a cell.
#[derive(Clone, Debug, Default)]
pub struct CellRows {
    pub eigen: Vec<(usize, f64, i64, Option<f64>, Option<f64>)>,
    pub resonant: Vec<diag::ResonantRow>,
}

/// Every trichotomy statistic for one instance and its eigensystem.
pub fn analyze_cell(
    inst: &Instance,
    sys: &EigenSystem,
    cfg: &ExperimentConfig,
) -> Result<(TrichotomyCell, CellRows), LabError> {
    let g = &cfg.grids;
    let tol = &cfg.tolerances;
    let b = inst.target_b.unwrap_or(0.0);
    let theta = require_theta(inst)?;
    let n_w = inst
        .witness_scale
        .unwrap_or_else(|| crate::instance::witness_scale(b, inst.half_width));
    let ln_l = inst.lambda.ln();

    let d = delta_alpha_theta(&inst.alpha, theta, n_w.max(10), Some(n_w / 2 + 1))?;
    let rates = diag::decay_rates(sys, g.decay_tail);
    let (lo, hi) = tol.decay_band;
    let in_band = rates
        .iter()
        .filter(|r| r.2.is_some_and(|x| x >= lo && x <= hi))
        .count();

    let gamma = ln_l - tol.sule_gamma_offset;
    let sule = diag::sule_statistics(sys, gamma);
    let sule_max = sule.iter().map(|x| x.2).fold(f64::NEG_INFINITY, f64::max);
    let sule_violations = sule.iter().filter(|x| x.2 >= tol.sule_violation).count();

    let k = diag::signed_witness(theta, &inst.alpha, n_w);
    let (resonant, pal) = if b > 0.0 {
        (
            diag::resonant_rates(sys, k, g.opposite_tail),
            diag::palindrome_scan(sys, k),
        )
    } else {
        (Vec::new(), Vec::new())
    };
    let toward_target = ln_l - b;
    let toward_in = resonant
        .iter()
        .filter(|r| (r.toward - toward_target).abs() <= tol.toward_rel * toward_target.abs())
        .count();
    let opp_in = resonant
        .iter()
        .filter(|r| {
            r.opposite
                .is_some_and(|x| (x - ln_l).abs() <= tol.opposite_rel * ln_l)
        })
        .count();
    let toward_median = diag::median(resonant.iter().map(|r| r.toward));
    let pal_thr = (b > 0.0).then(|| (-b * n_w as f64 * tol.palindrome_exponent_fraction).exp());
    let pal_best = pal.iter().map(|p| p.relative).reduce(f64::min);
    let pal_pass = pal
        .iter()
        .filter(|p| pal_thr.is_some_and(|t| p.relative <= t))
        .count();

    let sudl = sudl_profile(
        sys,
        &symmetric_m_list(g.sudl_m),
        g.sudl_radius,
        &SupMethod::Bound,
    )?;
    let (sudl_max, sudl_argmax) = sudl
        .iter()
        .filter_map(|r| r.statistic.map(|x| (x, r.m)))
        .fold(
            (f64::NEG_INFINITY, 0),
            |acc, x| if x.0 > acc.0 { x } else { acc },
        );

    let l = g.density_l[0];
    let dm = center_density(sys, &[l])?;
    let dn = almost_density(sys, g.almost_k, &[l], Selection::Nearest)?;
    let df = almost_density(sys, g.almost_k, &[l], Selection::Farthest)?;
    let density_band = if b < ln_l && inst.lambda > 1.0 {
        let mut ok = true;
        for c in [&dm, &dn, &df] {
            ok &= density_bounds_check(c, b, inst.lambda, tol.density)?.pass;
        }
        Some(ok)
    } else {
        None
    };

    let classification = diag::classify(
        &ClassifyInput {
            lambda: inst.lambda,
            toward_median,
            sule_max,
            sule_violations,
        },
        &ClassifyRule {
            delocalized_rate_fraction: tol.delocalized_rate_fraction,
            min_violations: tol.sule_min_violations,
            consistent_max: tol.sule_consistent_max,
        },
    );
    let sule_of: std::collections::BTreeMap<usize, f64> = sule.iter().map(|x| (x.0, x.2)).collect();
    let rows = CellRows {
        eigen: rates
            .iter()
            .map(|&(s, m, r)| (s, sys.eigenvalues()[s], m, r, sule_of.get(&s).copied()))
            .collect(),
        resonant: resonant.clone(),
    };
    let cell = TrichotomyCell {
        b,
        theta: inst.theta_string().unwrap_or_default(),
        witness_scale: n_w,
        signed_witness: k,
        precision_bits: inst.bits,
        floor_exponent: inst
            .certificate
            .as_ref()
            .map_or(f64::NAN, |c| c.floor_exponent),
        delta_hat: d.estimate,
        delta_argmax: d.argmax,
        trusted: rates.len(),
        decay_in_band: diag::fraction(in_band, rates.len()),
        decay_median: diag::median(rates.iter().filter_map(|r| r.2)),
        resonant_count: resonant.len(),
        toward_median,
        toward_in_band: diag::fraction(toward_in, resonant.len()),
        opposite_in_band: diag::fraction(opp_in, resonant.len()),
        palindrome_best: pal_best,
        palindrome_passing: pal_pass,
        palindrome_threshold: pal_thr,
        sule_gamma: gamma,
        sule_max,
        sule_violations,
        sudl_max,
        sudl_argmax,
        density_l: l,
        density_maxima: dm.densities[0],
        density_nearest: dn.densities[0],
        density_farthest: df.densities[0],
        density_band,
        expected: Classification::expected(b, inst.lambda),
        classification,
    };
    Ok((cell, rows))
}

fn trichotomy(cfg: ExperimentConfig) -> Result<Report, LabError> {
    let results: Vec<(TrichotomyCell, CellRows)> = cfg
        .grids
        .b_list
        .par_iter()
        .map(|&b| {
            let inst = Instance::with_target_b(
                cfg.model.lambda,
                &cfg.model.alpha,
                b,
                None,
                cfg.window,
                cfg.precision_bits,
            )?;
            let sys = eigendecompose(&build_truncation(&inst.potential, inst.half_width)?)?;
            analyze_cell(&inst, &sys, &cfg)
        })
        .collect::<Result<_, _>>()?;
    let mut checks = Vec::new();
    let mut cells_t = Table::new(
        "cells",
        &[
            "theorem",
            "b",
            "theta",
            "witness_scale",
            "delta_hat",
            "decay_in_band",
            "toward_median",
            "opposite_in_band",
            "palindrome_best",
            "sule_max",
            "sule_violations",
            "sudl_max",
            "density_maxima",
            "density_band",
            "expected",
            "classification",
        ],
    );
    let mut eigen_t = Table::new(
        "eigenfunctions",
        &[
            "theorem",
            "b",
            "s",
            "energy",
            "center",
            "decay_rate",
            "sule_statistic",
        ],
    );
    let mut res_t = Table::new(
        "resonant",
        &[
            "theorem",
            "b",
            "s",
            "center",
            "mirror",
            "toward_rate",
            "opposite_rate",
        ],
    );
    for (c, rows) in &results {
        checks.push(Check::new(
            &format!("classification_b={}", num(c.b)),
            tags::TRICHOTOMY,
            c.classification == c.expected,
            c.b,
            format!(
                "expected {}, got {}",
                c.expected.label(),
                c.classification.label()
            ),
        ));
        let tol = &cfg.tolerances;
        let tag_b = |name: &str| format!("{name}_b={}", num(c.b));
        if c.b < cfg.model.lambda.ln() {
            checks.push(Check::new(
                &tag_b("decay_in_band"),
                tags::DECAY,
                c.decay_in_band >= tol.decay_fraction,
                c.decay_in_band,
                format!(">= {}", tol.decay_fraction),
            ));
            if let Some(ok) = c.density_band {
                checks.push(Check::new(
                    &tag_b("density_band"),
                    tags::CENTER_DENSITY,
                    ok,
                    c.density_maxima,
                    "maxima and both almost-maxima selections in band",
                ));
            }
        }
        if c.b > 0.0 && c.b < cfg.model.lambda.ln() {
            let f = tol.resonant_fraction;
            checks.push(Check::new(
                &tag_b("toward_rate"),
                tags::DECAY,
                c.toward_in_band >= f,
                c.toward_in_band,
                format!(">= {f} of {} resonant", c.resonant_count),
            ));
            checks.push(Check::new(
                &tag_b("opposite_rate"),
                tags::DECAY,
                c.opposite_in_band >= f,
                c.opposite_in_band,
                format!(">= {f} of {} resonant", c.resonant_count),
            ));
        }
        if c.b > 0.0 {
            checks.push(Check::new(
                &tag_b("palindrome"),
                tags::PALINDROME,
                c.palindrome_passing >= 1,
                c.palindrome_best.unwrap_or(f64::NAN),
                "at least one defect under threshold",
            ));
        }
        cells_t.push(vec![
            tags::TRICHOTOMY.into(),
            num(c.b),
            c.theta.clone(),
            c.witness_scale.to_string(),
            num(c.delta_hat),
            num(c.decay_in_band),
            opt(c.toward_median),
            num(c.opposite_in_band),
            opt(c.palindrome_best),
            num(c.sule_max),
            c.sule_violations.to_string(),
            num(c.sudl_max),
            num(c.density_maxima),
            c.density_band.map(|x| x.to_string()).unwrap_or_default(),
            c.expected.label().into(),
            c.classification.label().into(),
        ]);
        for &(s, e, m, r, su) in &rows.eigen {
            eigen_t.push(vec![
                tags::SULE.into(),
                num(c.b),
                s.to_string(),
                num(e),
                m.to_string(),
                opt(r),
                opt(su),
            ]);
        }
        for r in &rows.resonant {
            res_t.push(vec![
                tags::DECAY.into(),
                num(c.b),
                r.s.to_string(),
                r.m.to_string(),
                r.mirror.to_string(),
                num(r.toward),
                opt(r.opposite),
            ]);
        }
    }
    let summary = json!({ "cells": results.iter().map(|r| &r.0).collect::<Vec<_>>() });
    Ok(report(cfg, checks, summary, vec![cells_t, eigen_t, res_t]))
}
