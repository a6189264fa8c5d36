//! Flat `key = value` run configuration.
//!
//! ```text
//! # PT dimer spectrum over three gain/loss strengths
//! command = spectrum
//! lattice.N = 2
//! lattice.Ns = 0
//! sweep.gamma = 0.2, 0.5, 0.9
//! output.format = json
//! ```
//!
//! Blank lines and `#` comments are ignored. Unknown or repeated keys are
//! errors.

use std::collections::HashSet;
use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: key `{key}` given twice")]
    Duplicate { line: usize, key: String },
    #[error("missing required key `{0}`")]
    Missing(&'static str),
    #[error("invalid value for `{key}`: {message}")]
    Invalid { key: String, message: String },
}

impl ConfigError {
    /// The config key the error is about, if any.
    pub fn key(&self) -> Option<&str> {
        match self {
            ConfigError::Parse { .. } => None,
            ConfigError::UnknownKey { key, .. }
            | ConfigError::Duplicate { key, .. }
            | ConfigError::Invalid { key, .. } => Some(key),
            ConfigError::Missing(key) => Some(key),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Spectrum,
    Roots,
    Scatter,
    Correspond,
    Evolve,
}

impl Command {
    pub const ALL: [Command; 5] =
        [Command::Spectrum, Command::Roots, Command::Scatter, Command::Correspond, Command::Evolve];

    pub fn as_str(&self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::Roots => "roots",
            Command::Scatter => "scatter",
            Command::Correspond => "correspond",
            Command::Evolve => "evolve",
        }
    }
}

impl FromStr for Command {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Command::ALL.into_iter().find(|c| c.as_str() == s).ok_or_else(|| format!("unknown command `{s}`"))
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format `{other}` (expected csv or json)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LatticeParams {
    pub n: Option<usize>,
    pub ns: usize,
    pub j: f64,
    pub gamma: f64,
    pub swap_gain_loss: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepAxes {
    pub gamma: Option<Vec<f64>>,
    pub n: Option<Vec<usize>>,
    pub ns: Option<Vec<usize>>,
    pub k: Option<Vec<f64>>,
    pub sigma: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScatterParams {
    pub v: f64,
    pub nu: f64,
    pub k: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PacketParams {
    pub k0: f64,
    pub sigma: f64,
    /// Lead-arm size; the smallest horizon-safe size when absent.
    pub l_total: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Option<Command>,
    pub lattice: LatticeParams,
    pub sweep: SweepAxes,
    pub scatter: ScatterParams,
    pub packet: PacketParams,
    pub output_path: Option<PathBuf>,
    pub format: Format,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            command: None,
            lattice: LatticeParams { n: None, ns: 0, j: 1.0, gamma: 0.0, swap_gain_loss: false },
            sweep: SweepAxes::default(),
            scatter: ScatterParams { v: 0.0, nu: 0.0, k: None },
            packet: PacketParams { k0: FRAC_PI_2, sigma: 20.0, l_total: None },
            output_path: None,
            format: Format::Csv,
        }
    }
}

impl RunConfig {
    pub fn n_values(&self) -> Vec<usize> {
        self.sweep.n.clone().unwrap_or_else(|| self.lattice.n.into_iter().collect())
    }

    pub fn ns_values(&self) -> Vec<usize> {
        self.sweep.ns.clone().unwrap_or_else(|| vec![self.lattice.ns])
    }

    pub fn gamma_values(&self) -> Vec<f64> {
        self.sweep.gamma.clone().unwrap_or_else(|| vec![self.lattice.gamma])
    }

    pub fn k_values(&self) -> Vec<f64> {
        self.sweep.k.clone().unwrap_or_else(|| self.scatter.k.into_iter().collect())
    }

    pub fn sigma_values(&self) -> Vec<f64> {
        self.sweep.sigma.clone().unwrap_or_else(|| vec![self.packet.sigma])
    }
}

fn invalid(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { key: key.to_string(), message: message.into() }
}

fn float(key: &str, value: &str) -> Result<f64, ConfigError> {
    let x: f64 = value.parse().map_err(|_| invalid(key, format!("`{value}` is not a number")))?;
    if !x.is_finite() {
        return Err(invalid(key, "must be finite"));
    }
    Ok(x)
}

fn count(key: &str, value: &str) -> Result<usize, ConfigError> {
    value.parse().map_err(|_| invalid(key, format!("`{value}` is not a non-negative integer")))
}

fn list<T>(key: &str, value: &str, item: impl Fn(&str, &str) -> Result<T, ConfigError>) -> Result<Vec<T>, ConfigError> {
    let items: Vec<T> =
        value.split(',').map(str::trim).filter(|s| !s.is_empty()).map(|s| item(key, s)).collect::<Result<_, _>>()?;
    if items.is_empty() {
        return Err(invalid(key, "sweep axis must not be empty"));
    }
    Ok(items)
}

fn boolean(key: &str, value: &str) -> Result<bool, ConfigError> {
    match value {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        other => Err(invalid(key, format!("`{other}` is not a boolean"))),
    }
}

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let mut cfg = RunConfig::default();
    let mut seen = HashSet::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| ConfigError::Parse { line, message: format!("expected `key = value`, got `{content}`") })?;
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() {
            return Err(ConfigError::Parse { line, message: "empty key".into() });
        }
        if !seen.insert(key.to_string()) {
            return Err(ConfigError::Duplicate { line, key: key.to_string() });
        }
        match key {
            "command" => cfg.command = Some(value.parse().map_err(|m: String| invalid(key, m))?),
            "lattice.N" => {
                let n = count(key, value)?;
                if n == 0 {
                    return Err(invalid(key, "must be positive"));
                }
                cfg.lattice.n = Some(n);
            }
            "lattice.Ns" => cfg.lattice.ns = count(key, value)?,
            "lattice.J" => {
                let j = float(key, value)?;
                if j <= 0.0 {
                    return Err(invalid(key, "must be positive"));
                }
                cfg.lattice.j = j;
            }
            "lattice.gamma" => cfg.lattice.gamma = float(key, value)?,
            "lattice.swap_gain_loss" => cfg.lattice.swap_gain_loss = boolean(key, value)?,
            "sweep.gamma" => cfg.sweep.gamma = Some(list(key, value, float)?),
            "sweep.N" => cfg.sweep.n = Some(list(key, value, count)?),
            "sweep.Ns" => cfg.sweep.ns = Some(list(key, value, count)?),
            "sweep.k" => cfg.sweep.k = Some(list(key, value, float)?),
            "sweep.sigma" => cfg.sweep.sigma = Some(list(key, value, float)?),
            "scatter.V" => cfg.scatter.v = float(key, value)?,
            "scatter.nu" => cfg.scatter.nu = float(key, value)?,
            "scatter.k" => cfg.scatter.k = Some(float(key, value)?),
            "packet.k0" => cfg.packet.k0 = float(key, value)?,
            "packet.sigma" => cfg.packet.sigma = float(key, value)?,
            "packet.L_total" => cfg.packet.l_total = Some(count(key, value)?),
            "output.path" => cfg.output_path = Some(PathBuf::from(value)),
            "output.format" => cfg.format = value.parse().map_err(|m: String| invalid(key, m))?,
            _ => return Err(ConfigError::UnknownKey { line, key: key.to_string() }),
        }
    }
    validate(&cfg)?;
    Ok(cfg)
}

fn validate(cfg: &RunConfig) -> Result<(), ConfigError> {
    if cfg.lattice.n.is_none() && cfg.sweep.n.is_none() {
        return Err(ConfigError::Missing("lattice.N"));
    }
    if cfg.sweep.n.as_ref().is_some_and(|ns| ns.contains(&0)) {
        return Err(invalid("sweep.N", "entries must be positive"));
    }
    if cfg.command == Some(Command::Scatter) && cfg.k_values().is_empty() {
        return Err(ConfigError::Missing("scatter.k"));
    }
    if cfg.sigma_values().iter().any(|s| *s <= 0.0) {
        return Err(invalid("packet.sigma", "widths must be positive"));
    }
    Ok(())
}
