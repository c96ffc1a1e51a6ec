//! Run configuration: profile defaults overlaid with an optional TOML file.

use std::fmt;
use std::path::Path;

use anyhow::{bail, Context, Result};
use hessiancone::solver::SolveConfig;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Profile {
    Fast,
    Full,
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Profile::Fast => "fast",
            Profile::Full => "full",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LemmaSweepConfig {
    /// Matrix sizes `n`.
    pub dims: Vec<usize>,
    pub eps: Vec<f64>,
    pub trials: usize,
    /// Corner as a multiple of the bound's threshold.
    pub corner_fraction: f64,
    /// Any of `strong`, `weak`, `distinct`.
    pub bounds: Vec<String>,
    pub deflation_dims: Vec<usize>,
    pub deflation_trials: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConeCheckConfig {
    /// Entries `kind/n`, e.g. `ma/2` or `quotient:1:3/3`.
    pub functions: Vec<String>,
    pub samples: usize,
    pub ray_samples: usize,
    pub gap_samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveSection {
    /// `trivial`, `manufactured`, `riemannian` or `custom`.
    pub preset: String,
    pub kinds: Vec<String>,
    /// Complex dimension of the model (`trivial`, `manufactured`, `custom`).
    pub n: usize,
    /// Real dimension of the cylinder (`riemannian`).
    pub real_dim: usize,
    pub resolutions: Vec<usize>,
    /// Amplitude of the manufactured solution.
    pub amplitude: f64,
    /// Depth of the bowl added to the manufactured solution for the subsolution.
    pub bowl: f64,
    /// Accepted range of observed convergence orders.
    pub order_range: [f64; 2],
    /// Residual reduction demanded of each of the last two Newton iterations.
    pub newton_reduction: f64,
    /// `custom` preset data.
    pub chi: String,
    pub psi: String,
    pub phi: String,
    pub subsolution: String,
    /// Write `u` of every solve as raw and CSV files.
    pub dump: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundaryScalingConfig {
    pub kind: String,
    pub n: usize,
    pub resolution: usize,
    pub psi: f64,
    pub phi0: String,
    pub scales: Vec<f64>,
    /// First bowl depth tried for the subsolution; doubled until admissible.
    pub k0: f64,
    /// Bound on `max r / min r` over the positive scales.
    pub max_ratio_spread: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DegenerateConfig {
    pub kind: String,
    pub n: usize,
    pub resolution: usize,
    /// Right-hand side; its minimum must be zero.
    pub psi: String,
    pub phi: String,
    /// Depth of the bowl subsolution `phi + bowl:depth`.
    pub bowl: f64,
    pub eps: Vec<f64>,
    /// Lower bound demanded of the subsolution's strictness.
    pub min_strictness: f64,
    /// Bound on `max / min` of `sup |Delta u|` across `eps`.
    pub max_laplacian_spread: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSettings {
    pub tolerance: f64,
    pub path_tolerance: f64,
    pub linear_tolerance: f64,
    pub max_linear_iterations: usize,
    pub max_newton: usize,
    pub dt_initial: f64,
    pub dt_min: f64,
    pub dt_max: f64,
}

impl From<SolverSettings> for SolveConfig {
    fn from(s: SolverSettings) -> Self {
        SolveConfig {
            tolerance: s.tolerance,
            path_tolerance: s.path_tolerance,
            linear_tolerance: s.linear_tolerance,
            max_linear_iterations: s.max_linear_iterations,
            max_newton: s.max_newton,
            dt_initial: s.dt_initial,
            dt_min: s.dt_min,
            dt_max: s.dt_max,
        }
    }
}

impl From<SolveConfig> for SolverSettings {
    fn from(s: SolveConfig) -> Self {
        SolverSettings {
            tolerance: s.tolerance,
            path_tolerance: s.path_tolerance,
            linear_tolerance: s.linear_tolerance,
            max_linear_iterations: s.max_linear_iterations,
            max_newton: s.max_newton,
            dt_initial: s.dt_initial,
            dt_min: s.dt_min,
            dt_max: s.dt_max,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    pub lemma_sweep: LemmaSweepConfig,
    pub cone_check: ConeCheckConfig,
    pub solve: SolveSection,
    pub boundary_scaling: BoundaryScalingConfig,
    pub degenerate: DegenerateConfig,
    pub solver: SolverSettings,
}

impl Settings {
    pub fn defaults(profile: Profile) -> Self {
        let full = profile == Profile::Full;
        Settings {
            lemma_sweep: LemmaSweepConfig {
                dims: if full { (2..=8).collect() } else { vec![2, 3, 4] },
                eps: vec![0.05, 0.2, 1.0],
                trials: if full { 10_000 } else { 1_000 },
                corner_fraction: 1.0,
                bounds: vec!["strong".into(), "weak".into(), "distinct".into()],
                deflation_dims: if full { (3..=8).collect() } else { vec![3, 4] },
                deflation_trials: 1_000,
            },
            cone_check: ConeCheckConfig {
                functions: [
                    "sigma1/3",
                    "sigmaK:2/3",
                    "sigmaK:3/4",
                    "ma/2",
                    "ma/3",
                    "quotient:1:3/3",
                    "quotient:2:4/4",
                ]
                .map(String::from)
                .to_vec(),
                samples: 1_000,
                ray_samples: 100,
                gap_samples: 1_000,
            },
            solve: SolveSection {
                preset: "manufactured".into(),
                kinds: if full {
                    vec!["sigma1".into(), "ma".into()]
                } else {
                    vec!["sigma1".into()]
                },
                n: 2,
                real_dim: 2,
                resolutions: vec![16, 32],
                amplitude: 0.02,
                bowl: 1.0,
                order_range: [1.7, 2.3],
                newton_reduction: 10.0,
                chi: "identity".into(),
                psi: "const:1".into(),
                phi: "zero".into(),
                subsolution: "zero".into(),
                dump: false,
            },
            boundary_scaling: BoundaryScalingConfig {
                kind: "ma".into(),
                n: 2,
                resolution: 16,
                psi: 1.0,
                phi0: "cos:x1:0.01+cos:y2:0.05".into(),
                scales: vec![0.0, 1.0, 2.0, 4.0, 8.0],
                k0: 1.0,
                max_ratio_spread: 10.0,
            },
            degenerate: DegenerateConfig {
                kind: "ma".into(),
                n: 2,
                resolution: 16,
                psi: "sin2:x1".into(),
                phi: "zero".into(),
                bowl: 3.0,
                eps: vec![0.1, 0.01, 0.001],
                min_strictness: 0.5,
                max_laplacian_spread: 2.0,
            },
            solver: SolveConfig::default().into(),
        }
    }

    /// Profile defaults with every key of `overlay` (a TOML document)
    /// replacing the matching default.
    pub fn resolve(profile: Profile, overlay: Option<&str>) -> Result<Self> {
        let defaults = Self::defaults(profile);
        let Some(text) = overlay else {
            return Ok(defaults);
        };
        let user: toml::Table = toml::from_str(text).context("config is not valid TOML")?;
        let mut base = toml::Table::try_from(&defaults).context("serializing defaults")?;
        merge(&mut base, user, "")?;
        toml::Value::Table(base).try_into().context("invalid configuration")
    }

    pub fn load(profile: Profile, path: Option<&Path>) -> Result<Self> {
        let text = path
            .map(|p| std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display())))
            .transpose()?;
        Self::resolve(profile, text.as_deref())
    }

    /// Canonical TOML of the resolved configuration.
    pub fn canonical(&self) -> String {
        toml::to_string(self).expect("settings serialize")
    }

    /// SHA-256 of the canonical TOML, hex encoded.
    pub fn hash(&self) -> String {
        Sha256::digest(self.canonical().as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

fn merge(base: &mut toml::Table, overlay: toml::Table, prefix: &str) -> Result<()> {
    for (key, value) in overlay {
        let path = if prefix.is_empty() { key.clone() } else { format!("{prefix}.{key}") };
        match (base.get_mut(&key), value) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge(b, o, &path)?,
            (Some(slot), value) => *slot = value,
            (None, _) => bail!("unknown config key {path}"),
        }
    }
    Ok(())
}
