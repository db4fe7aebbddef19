//! Run configuration: TOML file overlaid by command-line flags.

use std::path::{Path, PathBuf};

use clap::Args;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use spectral_gibbs::dynamics::{FlowConfig, Integrator};
use spectral_gibbs::fourier_field::SeedPolicy;
use spectral_gibbs::gibbs::{CutoffSpec, EnsembleConfig};
use spectral_gibbs::kms::{Calibration, Family};
use spectral_gibbs::observables::{InteractionSpec, Potential};

use crate::CliError;

/// Every parameter a subcommand may read. Each field is both a flag
/// (`--kebab-name`) and a config-file key (`kebab-name`).
#[derive(Args, Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct Params {
    /// Spatial dimension (1, 2 or 3).
    #[arg(long)]
    pub d: Option<usize>,
    /// Frequency cutoff: modes with |k|_inf <= n.
    #[arg(long)]
    pub n: Option<usize>,
    /// Regularity s of the H^{-s} norm reported by `sample`.
    #[arg(long)]
    pub s: Option<f64>,
    /// off | cubic | quintic | hartree-1d | wick-hartree | nonlocal-quintic
    #[arg(long)]
    pub interaction: Option<String>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub v0: Option<f64>,
    /// Cube of the potential's Fourier coefficients (default 2n).
    #[arg(long)]
    pub potential_cutoff: Option<usize>,
    /// CSV of V̂ values (`k_1,...,k_d,value`) replacing the parametric family.
    #[arg(long)]
    pub potential_file: Option<PathBuf>,
    /// Mass cutoff radius R.
    #[arg(long)]
    pub radius: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    /// sharp | smooth | none
    #[arg(long)]
    pub shape: Option<String>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Total flow time T (negative runs backwards).
    #[arg(long, allow_hyphen_values = true)]
    pub time: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
    /// if-rk4 | strang-split
    #[arg(long)]
    pub integrator: Option<String>,
    #[arg(long)]
    pub checkpoint_every: Option<usize>,
    /// Allowed relative drift of h_n and M_n in `flow`.
    #[arg(long)]
    pub drift_tolerance: Option<f64>,
    /// Index of the free-field sample used as initial datum in `flow`.
    #[arg(long)]
    pub sample_index: Option<u64>,
    /// Binary field dump used as initial datum in `flow`.
    #[arg(long)]
    pub initial_field: Option<PathBuf>,
    /// Thresholds λ of the interaction tail.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub lambdas: Option<Vec<f64>>,
    /// Thresholds ρ of the concentration tail.
    #[arg(long, value_delimiter = ',')]
    pub thresholds: Option<Vec<f64>>,
    /// Radii of the positivity check.
    #[arg(long, value_delimiter = ',')]
    pub radii: Option<Vec<f64>>,
    /// Localization radius R' of G in `kms-check` (default 0.6 R).
    #[arg(long)]
    pub inner_radius: Option<f64>,
    /// Number of randomized test functions (or pairs, or triples).
    #[arg(long)]
    pub functions: Option<usize>,
    /// gaussian-poly | compact-bump
    #[arg(long)]
    pub family: Option<String>,
    /// Replace ∇h^I by −∇h^I in the vector field (calibration).
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub flip_interaction_gradient: Option<bool>,
    /// Replace A by −A in the vector field and the Gaussian score (calibration).
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub flip_a: Option<bool>,
    /// |z| above which an identity check reports a violation.
    #[arg(long)]
    pub z_threshold: Option<f64>,
    /// Largest moment p in the Orlicz norm estimates.
    #[arg(long)]
    pub max_moment: Option<u32>,
    /// shell-sum | linear-form | shift-matrix
    #[arg(long)]
    pub statistic: Option<String>,
    /// Shell M < |k| <= L of the shell statistics.
    #[arg(long)]
    pub shell_inner: Option<f64>,
    #[arg(long)]
    pub shell_outer: Option<f64>,
    /// Dyadic scale K of the shift matrix.
    #[arg(long)]
    pub matrix_scale: Option<f64>,
    /// Shift vector k of the shift matrix.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub shift: Option<Vec<i64>>,
    /// Number of leading samples written as binary field dumps by `sample`.
    #[arg(long)]
    pub dumps: Option<usize>,
    /// Write the per-sample weight table in `partition`.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub records: Option<bool>,
    /// Output directory (not echoed).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads; results do not depend on it (not echoed).
    #[arg(long)]
    pub threads: Option<usize>,
}

/// Keys that describe where and how to run, not what to compute.
const EXECUTION_KEYS: [&str; 2] = ["out", "threads"];

pub fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

impl Params {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| config_err(format!("config file: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// `self` with every value set in `flags` replaced.
    pub fn overlay(&self, flags: &Params) -> Result<Self, CliError> {
        let mut base = to_map(self)?;
        for (k, v) in to_map(flags)? {
            if !v.is_null() {
                base.insert(k, v);
            }
        }
        serde_json::from_value(Value::Object(base)).map_err(|e| config_err(e.to_string()))
    }

    /// The effective configuration as echoed into outputs.
    pub fn echo(&self) -> Result<Value, CliError> {
        let mut map = to_map(self)?;
        map.retain(|k, v| !v.is_null() && !EXECUTION_KEYS.contains(&k.as_str()));
        Ok(Value::Object(map))
    }

    pub fn d(&mut self) -> Result<usize, CliError> {
        let d = self.d.ok_or_else(|| config_err("missing required parameter `d`"))?;
        if !(1..=3).contains(&d) {
            return Err(config_err(format!("d must be 1, 2 or 3, got {d}")));
        }
        Ok(d)
    }

    pub fn n(&mut self) -> usize {
        *self.n.get_or_insert(8)
    }

    pub fn s(&mut self, d: usize) -> f64 {
        *self.s.get_or_insert([0.0, 0.25, 0.6][d - 1])
    }

    pub fn samples(&mut self, min: usize) -> Result<usize, CliError> {
        let n = *self.samples.get_or_insert(10_000);
        if n < min {
            return Err(config_err(format!("samples must be at least {min}, got {n}")));
        }
        Ok(n)
    }

    pub fn seed(&mut self) -> u64 {
        *self.seed.get_or_insert(0)
    }

    pub fn z_threshold(&mut self) -> Result<f64, CliError> {
        let z = *self.z_threshold.get_or_insert(3.0);
        positive("z-threshold", z)?;
        Ok(z)
    }

    /// Interaction for cutoff n, validated against d.
    pub fn interaction(&mut self, d: usize, n: usize) -> Result<InteractionSpec, CliError> {
        let name = self.interaction.get_or_insert_with(|| "off".into()).clone();
        let potential = |p: &mut Self| -> Result<Potential, CliError> {
            if let Some(path) = &p.potential_file {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
                return Ok(Potential::from_csv(d, &text)?);
            }
            let n_v = *p.potential_cutoff.get_or_insert(2 * n);
            let v0 = *p.v0.get_or_insert(1.0);
            let eps = *p.eps.get_or_insert(0.5);
            Ok(Potential::parametric(d, n_v, v0, eps)?)
        };
        let spec = match name.as_str() {
            "off" => InteractionSpec::Off,
            "cubic" => InteractionSpec::LocalPower { r: 3 },
            "quintic" => InteractionSpec::LocalPower { r: 5 },
            "hartree-1d" => InteractionSpec::Hartree1D(potential(self)?),
            "wick-hartree" => InteractionSpec::WickHartree(potential(self)?),
            "nonlocal-quintic" => InteractionSpec::NonlocalQuintic(potential(self)?),
            other => return Err(config_err(format!("unknown interaction `{other}`"))),
        };
        spec.validate(d, n)?;
        Ok(spec)
    }

    pub fn cutoff(&mut self) -> Result<CutoffSpec, CliError> {
        let default = if self.radius.is_some() { "sharp" } else { "none" };
        let shape = self.shape.get_or_insert_with(|| default.into()).clone();
        let radius = || self.radius.ok_or_else(|| config_err(format!("shape `{shape}` needs `radius`")));
        let spec = match shape.as_str() {
            "none" => {
                if self.radius.is_some() {
                    return Err(config_err("`radius` given with shape `none`"));
                }
                CutoffSpec::none()
            }
            "sharp" => {
                let r = radius()?;
                if self.delta.is_some_and(|d| d != 1.0) {
                    return Err(config_err("the sharp cutoff has delta = 1"));
                }
                self.delta = Some(1.0);
                CutoffSpec::sharp(r)?
            }
            "smooth" => {
                let r = radius()?;
                CutoffSpec::smooth(r, *self.delta.get_or_insert(0.9))?
            }
            other => return Err(config_err(format!("unknown cutoff shape `{other}`"))),
        };
        Ok(spec)
    }

    pub fn ensemble(&mut self, min_samples: usize) -> Result<EnsembleConfig, CliError> {
        let d = self.d()?;
        let n = self.n();
        Ok(EnsembleConfig {
            d,
            n,
            interaction: self.interaction(d, n)?,
            cutoff: self.cutoff()?,
            samples: self.samples(min_samples)?,
            seed: SeedPolicy::new(self.seed()),
        })
    }

    pub fn flow(&mut self, interaction: InteractionSpec) -> Result<FlowConfig, CliError> {
        let t = *self.time.get_or_insert(1.0);
        let dt = *self.dt.get_or_insert(1e-3);
        let mut cfg = FlowConfig::new(interaction, t, dt);
        cfg.integrator = match self.integrator.get_or_insert_with(|| "if-rk4".into()).as_str() {
            "if-rk4" => Integrator::IfRk4,
            "strang-split" => Integrator::StrangSplit,
            other => return Err(config_err(format!("unknown integrator `{other}`"))),
        };
        cfg.checkpoint_every = *self.checkpoint_every.get_or_insert(10);
        if cfg.checkpoint_every == 0 {
            return Err(config_err("checkpoint-every must be positive"));
        }
        cfg.steps()?;
        Ok(cfg)
    }

    pub fn family(&mut self) -> Result<Family, CliError> {
        match self.family.get_or_insert_with(|| "gaussian-poly".into()).as_str() {
            "gaussian-poly" => Ok(Family::GaussianPoly),
            "compact-bump" => Ok(Family::CompactBump),
            other => Err(config_err(format!("unknown test-function family `{other}`"))),
        }
    }

    pub fn functions(&mut self) -> Result<usize, CliError> {
        let f = *self.functions.get_or_insert(10);
        if f == 0 {
            return Err(config_err("functions must be positive"));
        }
        Ok(f)
    }

    pub fn calibration(&mut self) -> Calibration {
        Calibration {
            flip_interaction_gradient: *self.flip_interaction_gradient.get_or_insert(false),
            flip_a: *self.flip_a.get_or_insert(false),
        }
    }

    pub fn max_moment(&mut self) -> Result<u32, CliError> {
        let p = *self.max_moment.get_or_insert(spectral_gibbs::concentration::DEFAULT_MAX_MOMENT);
        if p == 0 {
            return Err(config_err("max-moment must be positive"));
        }
        Ok(p)
    }
}

pub fn positive(name: &str, v: f64) -> Result<(), CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(config_err(format!("{name} must be positive, got {v}")))
    }
}

/// Strictly increasing, finite and nonnegative.
pub fn increasing(name: &str, v: &[f64]) -> Result<(), CliError> {
    if v.is_empty() {
        return Err(config_err(format!("{name} must not be empty")));
    }
    if v.iter().any(|x| !x.is_finite() || *x < 0.0) || v.windows(2).any(|w| w[1] <= w[0]) {
        return Err(config_err(format!(
            "{name} must be nonnegative and strictly increasing"
        )));
    }
    Ok(())
}

fn to_map(p: &Params) -> Result<Map<String, Value>, CliError> {
    match serde_json::to_value(p).map_err(|e| config_err(e.to_string()))? {
        Value::Object(m) => Ok(m),
        _ => unreachable!("Params serializes to an object"),
    }
}
