//! Run configuration: defaults, then the JSON file, then command-line flags.

use std::path::{Path, PathBuf};

use alh::lattice::{BoundaryMode, LatticeWindow, NormExponent, Profile, WeightRule};
use alh::FlowSpec;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cli::{Cli, Command, Format};
use crate::CliError;

/// Environment variable that overrides the output directory of the file.
pub const OUT_DIR_ENV: &str = "AL_OUT_DIR";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FlowConfig {
    Preset { preset: String },
    Constants { c_minus: Vec<Complex64>, c_plus: Vec<Complex64> },
}

impl Default for FlowConfig {
    fn default() -> Self {
        FlowConfig::Preset {
            preset: "al_system".into(),
        }
    }
}

impl FlowConfig {
    pub fn resolve(&self) -> Result<FlowSpec, CliError> {
        match self {
            FlowConfig::Preset { preset } => FlowSpec::preset(preset).ok_or_else(|| {
                CliError::Validation(format!(
                    "unknown flow preset {preset:?} (expected al_system, dnls_1, dnls_2 or schur)"
                ))
            }),
            FlowConfig::Constants { c_minus, c_plus } => Ok(FlowSpec::new(c_minus.clone(), c_plus.clone())?),
        }
    }
}

/// Boundary as written in the file; a frozen band left out defaults to the flow's reach plus one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum BoundaryConfig {
    #[default]
    PadZero,
    Periodic,
    FrozenEdges {
        #[serde(default)]
        band: Option<usize>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WindowConfig {
    pub n_min: i64,
    pub n_max: i64,
    pub boundary: BoundaryConfig,
}

impl Default for WindowConfig {
    fn default() -> Self {
        Self {
            n_min: -100,
            n_max: 100,
            boundary: BoundaryConfig::PadZero,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NumericsConfig {
    pub h: f64,
    pub t1: f64,
    /// Record observables every `stride` steps.
    pub stride: usize,
}

impl Default for NumericsConfig {
    fn default() -> Self {
        Self {
            h: 1e-3,
            t1: 1.0,
            stride: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub format: Format,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("al-out"),
            format: Format::Csv,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ClosenessConfig {
    /// Added to `alpha(site)` of the background to form the second solution.
    pub perturbation: f64,
    pub site: i64,
    pub weight: WeightRule,
    pub p: NormExponent,
    pub samples: usize,
}

impl Default for ClosenessConfig {
    fn default() -> Self {
        Self {
            perturbation: 1e-3,
            site: 0,
            weight: WeightRule::OnePlusAbs,
            p: NormExponent::Infinity,
            samples: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AsymptoticsConfig {
    pub a: Complex64,
    pub b: Complex64,
    pub delta: f64,
    pub windows: Vec<usize>,
    pub p: NormExponent,
    pub samples: usize,
}

impl Default for AsymptoticsConfig {
    fn default() -> Self {
        Self {
            a: Complex64::new(0.3, 0.0),
            b: Complex64::new(0.3, 0.0),
            delta: 1.0,
            windows: vec![201, 401],
            p: NormExponent::Infinity,
            samples: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct HierarchyConfig {
    /// Ladder order; the flow's `max(r_-, r_+)` when absent.
    pub order: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub command: Option<Command>,
    pub flow: FlowConfig,
    pub window: WindowConfig,
    pub profile: Profile,
    pub numerics: NumericsConfig,
    pub output: OutputConfig,
    pub seed: u64,
    pub closeness: ClosenessConfig,
    pub asymptotics: AsymptoticsConfig,
    pub hierarchy: HierarchyConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            command: None,
            flow: FlowConfig::default(),
            window: WindowConfig::default(),
            profile: Profile::gaussian(0.3, 10.0),
            numerics: NumericsConfig::default(),
            output: OutputConfig::default(),
            seed: 2024,
            closeness: ClosenessConfig::default(),
            asymptotics: AsymptoticsConfig::default(),
            hierarchy: HierarchyConfig::default(),
        }
    }
}

/// Parses a config document, naming the offending field and position on failure.
pub fn parse_config(text: &str, origin: &Path) -> Result<RunConfig, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let inner = e.inner();
        CliError::Validation(format!(
            "{}:{}:{}: field `{}`: {}",
            origin.display(),
            inner.line(),
            inner.column(),
            e.path(),
            inner
        ))
    })
}

fn parse_complex(s: &str) -> Result<Complex64, CliError> {
    let bad = || CliError::Validation(format!("cannot read {s:?} as a complex number (use RE or RE,IM)"));
    let mut parts = s.split(',');
    let re: f64 = parts.next().ok_or_else(bad)?.trim().parse().map_err(|_| bad())?;
    let im: f64 = match parts.next() {
        Some(p) => p.trim().parse().map_err(|_| bad())?,
        None => 0.0,
    };
    if parts.next().is_some() {
        return Err(bad());
    }
    Ok(Complex64::new(re, im))
}

fn parse_boundary(s: &str) -> Result<BoundaryConfig, CliError> {
    match s {
        "pad_zero" => Ok(BoundaryConfig::PadZero),
        "periodic" => Ok(BoundaryConfig::Periodic),
        "frozen_edges" => Ok(BoundaryConfig::FrozenEdges { band: None }),
        _ => match s.strip_prefix("frozen_edges:").map(str::parse) {
            Some(Ok(band)) => Ok(BoundaryConfig::FrozenEdges { band: Some(band) }),
            _ => Err(CliError::Validation(format!(
                "unknown boundary mode {s:?} (pad_zero, periodic, frozen_edges or frozen_edges:BAND)"
            ))),
        },
    }
}

/// Builds the effective configuration: defaults, then `--config`, then the environment
/// override of the output directory, then flags.
pub fn resolve(cli: &Cli, env_out: Option<String>) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Validation(format!("cannot read config {}: {e}", path.display())))?;
            parse_config(&text, path)?
        }
        None => RunConfig::default(),
    };
    cfg.command = Some(cli.command);
    if let Some(dir) = env_out.filter(|s| !s.is_empty()) {
        cfg.output.dir = PathBuf::from(dir);
    }

    if cli.flow.is_some() && (cli.r.is_some() || !cli.c_plus.is_empty() || !cli.c_minus.is_empty()) {
        return Err(CliError::Validation("--flow cannot be combined with --r/--c-plus/--c-minus".into()));
    }
    if let Some(preset) = &cli.flow {
        cfg.flow = FlowConfig::Preset { preset: preset.clone() };
    }
    if let Some(r) = &cli.r {
        let (rm, rp) = (r[0], r[1]);
        let read = |v: &[String], len: usize, name: &str| -> Result<Vec<Complex64>, CliError> {
            if v.len() != len {
                return Err(CliError::Validation(format!("{name} needs {len} values for r = ({rm}, {rp}), got {}", v.len())));
            }
            v.iter().map(|s| parse_complex(s)).collect()
        };
        cfg.flow = FlowConfig::Constants {
            c_minus: read(&cli.c_minus, rm + 1, "--c-minus")?,
            c_plus: read(&cli.c_plus, rp + 1, "--c-plus")?,
        };
    } else if !cli.c_plus.is_empty() || !cli.c_minus.is_empty() {
        return Err(CliError::Validation("--c-plus/--c-minus need --r R- R+".into()));
    }
    if let Some(w) = &cli.window {
        cfg.window.n_min = w[0];
        cfg.window.n_max = w[1];
    }
    if let Some(b) = &cli.boundary {
        cfg.window.boundary = parse_boundary(b)?;
    }
    if let Some(h) = cli.h {
        cfg.numerics.h = h;
    }
    if let Some(t1) = cli.t1 {
        cfg.numerics.t1 = t1;
    }
    if let Some(out) = &cli.out {
        cfg.output.dir = out.clone();
    }
    if let Some(format) = cli.format {
        cfg.output.format = format;
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    // Fill in the band so the manifest records what was used.
    if let BoundaryConfig::FrozenEdges { band: None } = cfg.window.boundary {
        cfg.window.boundary = BoundaryConfig::FrozenEdges {
            band: Some(cfg.flow.resolve()?.frozen_band()),
        };
    }
    Ok(cfg)
}

impl RunConfig {
    pub fn spec(&self) -> Result<FlowSpec, CliError> {
        self.flow.resolve()
    }

    pub fn boundary(&self) -> Result<BoundaryMode, CliError> {
        Ok(match self.window.boundary {
            BoundaryConfig::PadZero => BoundaryMode::PadZero,
            BoundaryConfig::Periodic => BoundaryMode::Periodic,
            BoundaryConfig::FrozenEdges { band } => BoundaryMode::FrozenEdges {
                band: match band {
                    Some(b) => b,
                    None => self.spec()?.frozen_band(),
                },
            },
        })
    }

    pub fn lattice_window(&self) -> Result<LatticeWindow, CliError> {
        Ok(LatticeWindow::new(self.window.n_min, self.window.n_max, self.boundary()?)?)
    }
}
