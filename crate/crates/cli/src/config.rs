//! Run configuration: command-line flags layered over an optional TOML file,
//! with the tolerance preset chosen by `CRPC_TOLERANCE_PROFILE`.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use crpc_core::{k_from_a, BranchTag, Tolerances};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub const TOLERANCE_ENV: &str = "CRPC_TOLERANCE_PROFILE";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BranchChoice {
    Auto,
    Full,
    Minus,
    Plus,
}

impl BranchChoice {
    pub fn resolve(self, k: f64) -> BranchTag {
        match self {
            BranchChoice::Auto => BranchTag::default_for(k),
            BranchChoice::Full => BranchTag::Full,
            BranchChoice::Minus => BranchTag::Minus,
            BranchChoice::Plus => BranchTag::Plus,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Obj,
    Csv,
    Json,
    Svg,
    Poly,
}

impl Format {
    pub fn name(self) -> &'static str {
        match self {
            Format::Obj => "obj",
            Format::Csv => "csv",
            Format::Json => "json",
            Format::Svg => "svg",
            Format::Poly => "poly",
        }
    }
}

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Default, Args)]
pub struct ShapeArgs {
    /// Curvature constant k > 0, k != 1 (number or p/q).
    #[arg(long, allow_hyphen_values = true, conflicts_with = "a")]
    pub k: Option<String>,
    /// Principal curvature ratio a; k = |1 - a| / |1 + a|.
    #[arg(long, allow_hyphen_values = true)]
    pub a: Option<String>,
    /// Shape constant C > 0 (number or p/q).
    #[arg(long = "C", allow_hyphen_values = true)]
    pub c: Option<String>,
    /// Helical pitch [default: 0.5].
    #[arg(long, allow_hyphen_values = true)]
    pub pitch: Option<String>,
    /// Profile branch [default: auto].
    #[arg(long, value_enum)]
    pub branch: Option<BranchChoice>,
    /// Seed for reproducible jitter of certificate samples.
    #[arg(long)]
    pub seed: Option<u64>,
    /// TOML configuration file; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

/// Contents of a configuration file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub k: Option<toml::Value>,
    pub a: Option<toml::Value>,
    #[serde(rename = "C", alias = "c")]
    pub c: Option<toml::Value>,
    pub pitch: Option<toml::Value>,
    pub branch: Option<BranchChoice>,
    pub grid: Option<String>,
    pub v_range: Option<String>,
    pub format: Option<Format>,
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub plane_angle: Option<toml::Value>,
    pub tolerances: Option<toml::Table>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path.display().to_string(), e))?;
        toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {}", path.display(), e.message())))
    }
}

/// How the curvature was specified.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CurvatureInput {
    K(f64),
    A(f64),
}

/// Fully resolved configuration for one run.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub curvature: Option<CurvatureInput>,
    pub k: Option<f64>,
    #[serde(rename = "C")]
    pub c: Option<f64>,
    /// The `C` argument as written, kept for exact rational use.
    #[serde(skip)]
    pub c_text: Option<String>,
    pub pitch: f64,
    pub branch: BranchChoice,
    pub grid: (usize, usize),
    pub v_range: (f64, f64),
    pub format: Option<Format>,
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub plane_angle: Option<f64>,
    pub tolerance_profile: String,
    #[serde(skip)]
    pub tolerances: Tolerances,
}

pub const DEFAULT_GRID: (usize, usize) = (64, 64);
pub const DEFAULT_PITCH: f64 = 0.5;

/// Subcommand flags that may also come from the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub grid: Option<String>,
    pub v_range: Option<String>,
    pub format: Option<Format>,
    pub samples: Option<usize>,
    pub plane_angle: Option<String>,
}

impl RunConfig {
    pub fn resolve(shape: &ShapeArgs, over: Overrides) -> Result<Self> {
        let file = match &shape.config {
            Some(p) => FileConfig::load(p)?,
            None => FileConfig::default(),
        };
        Self::resolve_with(shape, over, file, std::env::var(TOLERANCE_ENV).ok())
    }

    pub fn resolve_with(shape: &ShapeArgs, over: Overrides, file: FileConfig, preset: Option<String>) -> Result<Self> {
        let file_a = file.a.as_ref().map(|v| value_number("a", v)).transpose()?;
        let file_k = file.k.as_ref().map(|v| value_number("k", v)).transpose()?;
        if file_a.is_some() && file_k.is_some() {
            return Err(CliError::Config("give exactly one of `k` and `a`".into()));
        }
        let flag_k = shape.k.as_deref().map(|t| parse_number("--k", t)).transpose()?;
        let flag_a = shape.a.as_deref().map(|t| parse_number("--a", t)).transpose()?;
        // a flag replaces the file's curvature input wholesale
        let curvature = match (flag_k, flag_a) {
            (Some(k), _) => Some(CurvatureInput::K(k)),
            (None, Some(a)) => Some(CurvatureInput::A(a)),
            (None, None) => match (file_k, file_a) {
                (Some(k), _) => Some(CurvatureInput::K(k)),
                (None, Some(a)) => Some(CurvatureInput::A(a)),
                (None, None) => None,
            },
        };
        let k = match curvature {
            Some(CurvatureInput::K(k)) => Some(k),
            Some(CurvatureInput::A(a)) => Some(k_from_a(a)?),
            None => None,
        };

        let (c, c_text) = match (&shape.c, &file.c) {
            (Some(t), _) => (Some(parse_number("--C", t)?), Some(t.clone())),
            (None, Some(v)) => (Some(value_number("C", v)?), Some(value_text(v))),
            (None, None) => (None, None),
        };
        let pitch = match (&shape.pitch, &file.pitch) {
            (Some(t), _) => parse_number("--pitch", t)?,
            (None, Some(v)) => value_number("pitch", v)?,
            (None, None) => DEFAULT_PITCH,
        };
        let grid = match over.grid.as_deref().or(file.grid.as_deref()) {
            Some(t) => parse_grid(t)?,
            None => DEFAULT_GRID,
        };
        let v_range = match over.v_range.as_deref().or(file.v_range.as_deref()) {
            Some(t) => parse_range(t)?,
            None => (0.0, std::f64::consts::TAU),
        };
        let plane_angle = match (&over.plane_angle, &file.plane_angle) {
            (Some(t), _) => Some(parse_number("--plane-angle", t)?),
            (None, Some(v)) => Some(value_number("plane_angle", v)?),
            (None, None) => None,
        };

        let profile_name = preset.unwrap_or_else(|| "default".to_string());
        let base = Tolerances::preset(&profile_name).ok_or_else(|| {
            CliError::InvalidArgs(format!(
                "unknown tolerance profile `{profile_name}` in {TOLERANCE_ENV} (expected default, strict or relaxed)"
            ))
        })?;
        let tolerances = match &file.tolerances {
            Some(table) => apply_tolerance_overrides(base, table)?,
            None => base,
        };

        Ok(RunConfig {
            curvature,
            k,
            c,
            c_text,
            pitch,
            branch: shape.branch.or(file.branch).unwrap_or(BranchChoice::Auto),
            grid,
            v_range,
            format: over.format.or(file.format),
            seed: shape.seed.or(file.seed),
            samples: over.samples.or(file.samples),
            plane_angle,
            tolerance_profile: profile_name.trim().to_ascii_lowercase(),
            tolerances,
        })
    }

    pub fn require_k(&self) -> Result<f64> {
        self.k
            .ok_or_else(|| CliError::InvalidArgs("the curvature must be given with --k or --a".into()))
    }

    pub fn require_c(&self) -> Result<f64> {
        self.c
            .ok_or_else(|| CliError::InvalidArgs("the shape constant must be given with --C".into()))
    }

    pub fn branch_tag(&self) -> Result<BranchTag> {
        Ok(self.branch.resolve(self.require_k()?))
    }

    /// The requested format, which must be one of `allowed`; the first entry
    /// is the default.
    pub fn format_in(&self, command: &str, allowed: &[Format]) -> Result<Format> {
        match self.format {
            None => Ok(allowed[0]),
            Some(f) if allowed.contains(&f) => Ok(f),
            Some(f) => Err(CliError::InvalidArgs(format!(
                "format `{}` is not available for `{command}` (expected one of {})",
                f.name(),
                allowed.iter().map(|f| f.name()).collect::<Vec<_>>().join(", ")
            ))),
        }
    }
}

fn apply_tolerance_overrides(base: Tolerances, overrides: &toml::Table) -> Result<Tolerances> {
    let mut table = toml::Table::try_from(base).map_err(|e| CliError::Config(e.to_string()))?;
    for (key, value) in overrides {
        let slot = table
            .get_mut(key)
            .ok_or_else(|| CliError::Config(format!("unknown tolerance `{key}`")))?;
        *slot = match (&*slot, value) {
            (toml::Value::Float(_), toml::Value::Integer(i)) => toml::Value::Float(*i as f64),
            _ => value.clone(),
        };
    }
    table
        .try_into()
        .map_err(|e: toml::de::Error| CliError::Config(format!("tolerances: {}", e.message())))
}

/// A finite number written as a decimal or as `p/q`.
pub fn parse_number(name: &str, text: &str) -> Result<f64> {
    let bad = || CliError::InvalidArgs(format!("{name}: `{text}` is not a finite number"));
    let text = text.trim();
    let value = match text.split_once('/') {
        Some((p, q)) => {
            let p: f64 = p.trim().parse().map_err(|_| bad())?;
            let q: f64 = q.trim().parse().map_err(|_| bad())?;
            p / q
        }
        None => text.parse().map_err(|_| bad())?,
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(bad())
    }
}

fn value_number(name: &str, value: &toml::Value) -> Result<f64> {
    match value {
        toml::Value::Integer(i) => Ok(*i as f64),
        toml::Value::Float(f) if f.is_finite() => Ok(*f),
        toml::Value::String(s) => parse_number(name, s).map_err(|e| CliError::Config(e.to_string())),
        other => Err(CliError::Config(format!("`{name}` must be a number, got {other}"))),
    }
}

fn value_text(value: &toml::Value) -> String {
    match value {
        toml::Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// `NVxNT` with both counts at least 2.
pub fn parse_grid(text: &str) -> Result<(usize, usize)> {
    let bad = || CliError::InvalidArgs(format!("grid `{text}` must look like 64x64 with both sizes >= 2"));
    let (a, b) = text.trim().split_once(['x', 'X']).ok_or_else(bad)?;
    let nv: usize = a.trim().parse().map_err(|_| bad())?;
    let nt: usize = b.trim().parse().map_err(|_| bad())?;
    if nv < 2 || nt < 2 {
        return Err(bad());
    }
    Ok((nv, nt))
}

/// `a:b` with `a < b`.
pub fn parse_range(text: &str) -> Result<(f64, f64)> {
    let bad = || CliError::InvalidArgs(format!("range `{text}` must look like 0:6.283 with start < end"));
    let (a, b) = text.trim().split_once(':').ok_or_else(bad)?;
    let (a, b) = (parse_number("--v-range", a)?, parse_number("--v-range", b)?);
    if !(a < b) {
        return Err(bad());
    }
    Ok((a, b))
}
