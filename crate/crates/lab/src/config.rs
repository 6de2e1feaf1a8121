//! JSON experiment configuration.

use std::path::Path;

use qplab_core::FrequencySpec;
use serde::{Deserialize, Serialize};

use crate::LabError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Spectrum,
    Lyapunov,
    Delta,
    Phase,
    Dynamics,
    Density,
    Trichotomy,
    Verify,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Spectrum => "spectrum",
            Kind::Lyapunov => "lyapunov",
            Kind::Delta => "delta",
            Kind::Phase => "phase",
            Kind::Dynamics => "dynamics",
            Kind::Density => "density",
            Kind::Trichotomy => "trichotomy",
            Kind::Verify => "verify",
        }
    }
}

/// Either an explicit phase or a target arithmetic exponent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum PhaseSpec {
    /// Decimal (`"0.25"`) or ratio (`"1/4"`).
    Theta(String),
    /// `witness_scale` overrides the automatic choice.
    TargetB { b: f64, witness_scale: Option<u64> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Model {
    pub lambda: f64,
    pub alpha: FrequencySpec,
    pub phase: PhaseSpec,
    /// CSV `(n, g)` file; replaces the almost Mathieu potential when set.
    /// `lambda` then only sets the reference rate `ln λ`.
    #[serde(default)]
    pub table: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Grids {
    /// Lyapunov energies; empty picks `energy_count` eigenvalues of the truncation.
    pub energies: Vec<f64>,
    pub energy_count: usize,
    pub lyapunov_n: Vec<u64>,
    pub lyapunov_base_points: usize,
    /// Arithmetic scan range; 0 means the window half-width.
    pub delta_n_max: u64,
    pub phase_n_max: u64,
    pub t_max: f64,
    pub moment_samples: usize,
    pub unitarity_samples: usize,
    pub unitarity_sources: Vec<i64>,
    pub probe_source: i64,
    pub probe_targets: Vec<i64>,
    pub probe_samples: usize,
    /// Density radii; empty means `L/8`.
    pub density_l: Vec<i64>,
    pub almost_k: f64,
    pub sudl_m: (i64, i64),
    pub sudl_radius: i64,
    pub product_stride: usize,
    pub b_list: Vec<f64>,
    pub decay_tail: (u64, u64),
    pub opposite_tail: (u64, u64),
}

impl Default for Grids {
    fn default() -> Self {
        Self {
            energies: Vec::new(),
            energy_count: 10,
            lyapunov_n: vec![10_000],
            lyapunov_base_points: 8,
            delta_n_max: 0,
            phase_n_max: 512,
            t_max: 1e4,
            moment_samples: 201,
            unitarity_samples: 21,
            unitarity_sources: vec![0, 7, -40],
            probe_source: 0,
            probe_targets: vec![0, 1, 5, 20],
            probe_samples: 101,
            density_l: Vec::new(),
            almost_k: 3.0,
            sudl_m: (20, 250),
            sudl_radius: 128,
            product_stride: 10,
            b_list: vec![0.0, 0.3, 1.0],
            decay_tail: (10, 500),
            opposite_tail: (10, 400),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub eigen: f64,
    pub decay_band: (f64, f64),
    pub decay_fraction: f64,
    pub toward_rel: f64,
    pub opposite_rel: f64,
    pub resonant_fraction: f64,
    pub sule_gamma_offset: f64,
    pub sule_violation: f64,
    pub sule_min_violations: usize,
    pub sule_consistent_max: f64,
    pub delocalized_rate_fraction: f64,
    pub density: f64,
    pub unitarity: f64,
    pub identity: f64,
    pub moment_ratio: f64,
    pub palindrome_exponent_fraction: f64,
    pub lyapunov_rel: f64,
    pub lyapunov_fraction: f64,
    pub phase_recovery_rel: f64,
    pub floor_ratio: f64,
    pub delta_agreement: f64,
    pub verify_eps: f64,
    pub verify_failure_fraction: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            eigen: 1e-10,
            decay_band: (0.55, 0.85),
            decay_fraction: 0.9,
            toward_rel: 0.35,
            opposite_rel: 0.2,
            resonant_fraction: 0.8,
            sule_gamma_offset: 0.35,
            sule_violation: 0.05,
            sule_min_violations: 5,
            sule_consistent_max: 0.02,
            delocalized_rate_fraction: 0.25,
            density: 0.15,
            unitarity: 1e-10,
            identity: 1e-12,
            moment_ratio: 2.0,
            palindrome_exponent_fraction: 0.25,
            lyapunov_rel: 0.1,
            lyapunov_fraction: 0.8,
            phase_recovery_rel: 0.15,
            floor_ratio: 0.05,
            delta_agreement: 0.05,
            verify_eps: 0.05,
            verify_failure_fraction: 0.01,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Output {
    pub dir: String,
    /// Also write the full eigensystem as CSV and little-endian binary.
    pub eigensystem_dump: bool,
    /// Write every `(s, ℓ)` decay row instead of failures only.
    pub full_decay_table: bool,
}

impl Default for Output {
    fn default() -> Self {
        Self {
            dir: "out".into(),
            eigensystem_dump: false,
            full_decay_table: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub kind: Kind,
    pub model: Model,
    /// Half-width `L`; the truncation has `N = 2L+1` sites.
    pub window: i64,
    #[serde(default = "default_bits")]
    pub precision_bits: u32,
    #[serde(default)]
    pub grids: Grids,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub output: Output,
}

fn default_bits() -> u32 {
    256
}

/// Command-line overrides; `None` keeps the file value.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub kind: Option<Kind>,
    pub out: Option<String>,
    pub precision_bits: Option<u32>,
}

impl ExperimentConfig {
    /// Parses JSON, reporting the failing field path and position.
    pub fn from_json(text: &str) -> Result<Self, LabError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            // the inner message already ends with the line and column
            LabError::Config(format!("field `{}`: {}", e.path(), e.inner()))
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, LabError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LabError::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| match e {
            LabError::Config(m) => LabError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(k) = o.kind {
            self.kind = k;
        }
        if let Some(d) = &o.out {
            self.output.dir = d.clone();
        }
        if let Some(b) = o.precision_bits {
            self.precision_bits = b;
        }
    }

    /// Fills window-dependent defaults so the stored config is fully explicit.
    pub fn resolve(&mut self) {
        if self.grids.delta_n_max == 0 {
            self.grids.delta_n_max = self.window as u64;
        }
        if self.grids.density_l.is_empty() {
            self.grids.density_l = vec![(2 * self.window + 1) / 8];
        }
    }

    pub fn validate(&self) -> Result<(), LabError> {
        let bad = |m: String| Err(LabError::Config(m));
        if self.schema_version != SCHEMA_VERSION {
            return bad(format!(
                "schema_version {} unsupported (expected {SCHEMA_VERSION})",
                self.schema_version
            ));
        }
        if self.window < 1 {
            return bad(format!("window must be positive, got {}", self.window));
        }
        if !(self.model.lambda > 0.0 && self.model.lambda.is_finite()) {
            return bad(format!(
                "model.lambda must be positive, got {}",
                self.model.lambda
            ));
        }
        if let PhaseSpec::TargetB { b, .. } = self.model.phase {
            if !(b >= 0.0 && b.is_finite()) {
                return bad(format!(
                    "model.phase.target_b.b must be finite and nonnegative, got {b}"
                ));
            }
        }
        if self
            .grids
            .b_list
            .iter()
            .any(|b| !(*b >= 0.0 && b.is_finite()))
        {
            return bad("grids.b_list entries must be finite and nonnegative".into());
        }
        if self.precision_bits < 64 {
            return bad(format!(
                "precision_bits must be at least 64, got {}",
                self.precision_bits
            ));
        }
        Ok(())
    }
}
