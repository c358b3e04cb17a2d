//! TOML run configuration.
//!
//! ```toml
//! mode = "spectrum"            # eigens | spectrum | sweep | map-params | hardware
//!
//! [model]
//! form = "scaled"              # scaled | circuit | jt
//! k_eff = 1.0
//! delta = 1.0
//!
//! [dissipation]                # omitted keys take the default rates
//! kappa = 0.001
//!
//! [space]
//! dims = [2, 2]
//!
//! [sweep]                      # inclusive linspace
//! parameter = "j"
//! from = 0.0
//! to = 1.0
//! steps = 21
//!
//! [omega]
//! from = 0.0
//! to = 2.0
//! steps = 401
//!
//! [output]
//! format = "csv"
//! eigenvalues = 5
//! ```

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::DissipationParams;
use crate::model::{CircuitParams, HardwareParams, JTParams, ScaledParams};
use crate::operators::HilbertSpace;

/// Largest per-mode Fock dimension accepted from a configuration.
pub const MAX_MODE_DIM: usize = 8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },

    #[error("field `{field}`: {message}")]
    Field { field: String, message: String },
}

impl ConfigError {
    pub fn field(field: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError::Field { field: field.into(), message: message.into() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Eigens,
    Spectrum,
    Sweep,
    MapParams,
    Hardware,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Eigens => "eigens",
            Mode::Spectrum => "spectrum",
            Mode::Sweep => "sweep",
            Mode::MapParams => "map-params",
            Mode::Hardware => "hardware",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(ConfigError::field("format", format!("expected csv or json, got {other:?}"))),
        }
    }
}

/// Hamiltonian parameters, discriminated by `form`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "lowercase")]
pub enum ModelSpec {
    Scaled(ScaledParams),
    Circuit(CircuitParams),
    Jt(JTParams),
}

impl ModelSpec {
    pub fn form(&self) -> &'static str {
        match self {
            ModelSpec::Scaled(_) => "scaled",
            ModelSpec::Circuit(_) => "circuit",
            ModelSpec::Jt(_) => "jt",
        }
    }

    pub fn validate(&self) -> crate::Result<()> {
        match self {
            ModelSpec::Scaled(p) => p.validate(),
            ModelSpec::Circuit(p) => p.validate(),
            ModelSpec::Jt(p) => p.validate(),
        }
    }

    pub fn parameter_names(&self) -> &'static [&'static str] {
        match self {
            ModelSpec::Scaled(_) => &["k_eff", "k", "delta", "j", "qubit_detuning"],
            ModelSpec::Circuit(_) => &["omega", "omega1", "omega2", "lambda1", "lambda2", "j"],
            ModelSpec::Jt(_) => &["omega1", "omega2", "k1", "k2", "k", "qubit_splitting"],
        }
    }

    /// Copy with one named parameter replaced. For the scaled form `k` sets
    /// `k_eff = √2·k` and `j` sets `Δ = 2J`; for the JT form `k` sets both
    /// scaling factors.
    pub fn with_parameter(&self, name: &str, value: f64) -> Option<Self> {
        let mut out = *self;
        match &mut out {
            ModelSpec::Scaled(p) => match name {
                "k_eff" => p.k_eff = value,
                "k" => p.k_eff = std::f64::consts::SQRT_2 * value,
                "delta" => p.delta = value,
                "j" => p.delta = 2.0 * value,
                "qubit_detuning" => p.qubit_detuning = value,
                _ => return None,
            },
            ModelSpec::Circuit(p) => match name {
                "omega" => p.omega = value,
                "omega1" => p.omega1 = value,
                "omega2" => p.omega2 = value,
                "lambda1" => p.lambda1 = value,
                "lambda2" => p.lambda2 = value,
                "j" => p.j = value,
                _ => return None,
            },
            ModelSpec::Jt(p) => match name {
                "omega1" => p.omega1 = value,
                "omega2" => p.omega2 = value,
                "k1" => p.k1 = value,
                "k2" => p.k2 = value,
                "k" => {
                    p.k1 = value;
                    p.k2 = value;
                }
                "qubit_splitting" => p.qubit_splitting = value,
                _ => return None,
            },
        }
        Some(out)
    }
}

const DISSIPATION_PARAMETERS: [&str; 4] = ["kappa", "gamma", "gamma_phi", "n_th"];

fn with_dissipation(d: &DissipationParams, name: &str, value: f64) -> Option<DissipationParams> {
    let mut out = *d;
    match name {
        "kappa" => out.kappa = value,
        "gamma" => out.gamma = value,
        "gamma_phi" => out.gamma_phi = value,
        "n_th" => out.n_th = value,
        _ => return None,
    }
    Some(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceSpec {
    #[serde(default = "default_dims")]
    pub dims: [usize; 2],
}

fn default_dims() -> [usize; 2] {
    [2, 2]
}

impl Default for SpaceSpec {
    fn default() -> Self {
        Self { dims: default_dims() }
    }
}

/// Inclusive linear grid over one parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxis {
    pub parameter: String,
    pub from: f64,
    pub to: f64,
    pub steps: usize,
}

impl SweepAxis {
    pub fn values(&self) -> Vec<f64> {
        linspace(self.from, self.to, self.steps)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OmegaGrid {
    #[serde(default)]
    pub from: f64,
    #[serde(default = "default_omega_to")]
    pub to: f64,
    #[serde(default = "default_omega_steps")]
    pub steps: usize,
}

fn default_omega_to() -> f64 {
    2.0
}

fn default_omega_steps() -> usize {
    401
}

impl Default for OmegaGrid {
    fn default() -> Self {
        Self { from: 0.0, to: default_omega_to(), steps: default_omega_steps() }
    }
}

impl OmegaGrid {
    pub fn values(&self) -> Vec<f64> {
        linspace(self.from, self.to, self.steps)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub format: OutputFormat,
    /// Number of eigenvalues reported by `eigens`.
    #[serde(default = "default_eigenvalue_count")]
    pub eigenvalues: usize,
}

fn default_eigenvalue_count() -> usize {
    5
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self { path: None, format: OutputFormat::Csv, eigenvalues: default_eigenvalue_count() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<Mode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelSpec>,
    #[serde(default)]
    pub dissipation: DissipationParams,
    #[serde(default)]
    pub space: SpaceSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepAxis>,
    /// Second sweep axis for 2-D eigenvalue grids.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep_inner: Option<SweepAxis>,
    #[serde(default)]
    pub omega: OmegaGrid,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hardware: Option<HardwareParams>,
    /// Worker threads for sweep evaluation; `None` uses all cores.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jobs: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            mode: None,
            model: None,
            dissipation: DissipationParams::default(),
            space: SpaceSpec::default(),
            sweep: None,
            sweep_inner: None,
            omega: OmegaGrid::default(),
            output: OutputSpec::default(),
            hardware: None,
            jobs: None,
        }
    }
}

/// Inclusive linspace; `steps >= 2`.
pub fn linspace(from: f64, to: f64, steps: usize) -> Vec<f64> {
    match steps {
        0 => vec![],
        1 => vec![from],
        _ => {
            let h = (to - from) / (steps - 1) as f64;
            (0..steps).map(|i| if i == steps - 1 { to } else { from + h * i as f64 }).collect()
        }
    }
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let offset = offset.min(text.len());
    let before = &text[..offset];
    let line = before.matches('\n').count() + 1;
    let column = before.rfind('\n').map_or(offset, |p| offset - p - 1) + 1;
    (line, column)
}

/// Parses and validates a TOML configuration, applying defaults to omitted
/// fields.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let cfg: RunConfig = toml::from_str(text).map_err(|e| {
        let (line, column) = e.span().map_or((0, 0), |s| line_col(text, s.start));
        ConfigError::Syntax { line, column, message: e.message().trim().to_string() }
    })?;
    cfg.validate()?;
    Ok(cfg)
}

/// Parses `"d1,d2"`.
pub fn parse_dims(s: &str) -> Result<[usize; 2], ConfigError> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let bad = || ConfigError::field("dims", format!("expected `d1,d2`, got {s:?}"));
    if parts.len() != 2 {
        return Err(bad());
    }
    let d1 = parts[0].parse().map_err(|_| bad())?;
    let d2 = parts[1].parse().map_err(|_| bad())?;
    Ok([d1, d2])
}

fn check_axis(field: &str, axis: &SweepAxis, model: Option<&ModelSpec>) -> Result<(), ConfigError> {
    if axis.steps < 2 {
        return Err(ConfigError::field(format!("{field}.steps"), format!("must be >= 2, got {}", axis.steps)));
    }
    if !(axis.from.is_finite() && axis.to.is_finite() && axis.from < axis.to) {
        return Err(ConfigError::field(
            format!("{field}.from"),
            format!("need finite from < to, got {} .. {}", axis.from, axis.to),
        ));
    }
    let name = axis.parameter.as_str();
    let known = DISSIPATION_PARAMETERS.contains(&name)
        || model.is_some_and(|m| m.parameter_names().contains(&name));
    if !known {
        let forms = model.map_or(String::new(), |m| format!(" for form `{}`", m.form()));
        return Err(ConfigError::field(format!("{field}.parameter"), format!("unknown parameter {name:?}{forms}")));
    }
    Ok(())
}

impl RunConfig {
    pub fn hilbert_space(&self) -> crate::Result<HilbertSpace> {
        HilbertSpace::new(self.space.dims[0], self.space.dims[1])
    }

    /// Checks every invariant that does not depend on the run mode.
    pub fn validate(&self) -> Result<(), ConfigError> {
        for (i, &d) in self.space.dims.iter().enumerate() {
            if !(2..=MAX_MODE_DIM).contains(&d) {
                return Err(ConfigError::field(
                    format!("space.dims[{i}]"),
                    format!("must lie in [2, {MAX_MODE_DIM}], got {d}"),
                ));
            }
        }
        if let Some(model) = &self.model {
            model.validate().map_err(|e| ConfigError::field(format!("model ({})", model.form()), e.to_string()))?;
        }
        self.dissipation.validate().map_err(|e| ConfigError::field("dissipation", e.to_string()))?;
        if let Some(axis) = &self.sweep {
            check_axis("sweep", axis, self.model.as_ref())?;
        }
        if let Some(axis) = &self.sweep_inner {
            if self.sweep.is_none() {
                return Err(ConfigError::field("sweep_inner", "requires an outer [sweep]"));
            }
            check_axis("sweep_inner", axis, self.model.as_ref())?;
        }
        let w = &self.omega;
        if w.steps < 2 || !(w.from.is_finite() && w.to.is_finite() && w.from < w.to) {
            return Err(ConfigError::field("omega", format!("need steps >= 2 and from < to, got {w:?}")));
        }
        let n = 2 * self.space.dims[0] * self.space.dims[1];
        if self.output.eigenvalues == 0 || self.output.eigenvalues > n {
            return Err(ConfigError::field(
                "output.eigenvalues",
                format!("must lie in [1, {n}], got {}", self.output.eigenvalues),
            ));
        }
        if self.jobs == Some(0) {
            return Err(ConfigError::field("jobs", "must be >= 1"));
        }
        Ok(())
    }

    /// Checks the sections a given mode needs.
    pub fn validate_for(&self, mode: Mode) -> Result<(), ConfigError> {
        self.validate()?;
        match mode {
            Mode::Hardware => {
                if self.hardware.is_none() {
                    return Err(ConfigError::field("hardware", "hardware mode needs a [hardware] section"));
                }
                if self.sweep.is_some() {
                    return Err(ConfigError::field("sweep", "not supported by hardware mode"));
                }
            }
            _ => {
                if self.model.is_none() {
                    return Err(ConfigError::field("model", format!("{mode} mode needs a [model] section")));
                }
            }
        }
        if mode == Mode::Sweep && self.sweep.is_none() {
            return Err(ConfigError::field("sweep", "sweep mode needs a [sweep] section"));
        }
        if self.sweep_inner.is_some() && mode != Mode::Eigens {
            return Err(ConfigError::field("sweep_inner", "only supported by eigens mode"));
        }
        Ok(())
    }

    /// Model and dissipation with a sweep parameter applied.
    pub fn point(&self, assignments: &[(&str, f64)]) -> Result<(ModelSpec, DissipationParams), ConfigError> {
        let mut model = self.model.ok_or_else(|| ConfigError::field("model", "missing [model] section"))?;
        let mut diss = self.dissipation;
        for &(name, value) in assignments {
            if let Some(d) = with_dissipation(&diss, name, value) {
                diss = d;
            } else if let Some(m) = model.with_parameter(name, value) {
                model = m;
            } else {
                return Err(ConfigError::field("sweep.parameter", format!("unknown parameter {name:?}")));
            }
        }
        Ok((model, diss))
    }
}
