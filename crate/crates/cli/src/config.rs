//! JSON scenario files and their resolution against flags and defaults.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    SteadySweepTheta,
    Transient,
    ExcessSweepTheta,
    LambdaSweepGamma,
    CustomLindblad,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::SteadySweepTheta => "steady_sweep_theta",
            Kind::Transient => "transient",
            Kind::ExcessSweepTheta => "excess_sweep_theta",
            Kind::LambdaSweepGamma => "lambda_sweep_gamma",
            Kind::CustomLindblad => "custom_lindblad",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Initial Bloch vector of a transient run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Initial {
    /// `⟨σx⟩₀ = 1`.
    SigmaXPlus,
    /// `⟨σz⟩₀ = -Γ-/Γ+`, the stationary state before the measurement starts.
    MeasurementFree,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub path: Option<PathBuf>,
    pub format: Option<Format>,
}

/// A complex matrix entry: a bare number or `[re, im]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Real(f64),
    Complex([f64; 2]),
}

impl Entry {
    pub fn parts(self) -> (f64, f64) {
        match self {
            Entry::Real(re) => (re, 0.0),
            Entry::Complex([re, im]) => (re, im),
        }
    }
}

pub type MatrixSpec = Vec<Vec<Entry>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSpec {
    #[serde(default)]
    pub label: Option<String>,
    pub rate: f64,
    pub jump: MatrixSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasurementSpecJson {
    pub gamma: f64,
    /// Measured state; normalized on use.
    #[serde(default)]
    pub state: Option<Vec<Entry>>,
    #[serde(default)]
    pub projector: Option<MatrixSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomModel {
    pub dim: usize,
    pub hamiltonian: MatrixSpec,
    #[serde(default)]
    pub channels: Vec<ChannelSpec>,
    #[serde(default)]
    pub measurement: Option<MeasurementSpecJson>,
    /// Density matrix at `t = 0`; required for a time series.
    #[serde(default)]
    pub initial_state: Option<MatrixSpec>,
    #[serde(default = "default_true")]
    pub steady_state: bool,
}

fn default_true() -> bool {
    true
}

/// Everything a scenario file may contain. Fields that do not apply to the
/// chosen kind are rejected during resolution.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub kind: Option<Kind>,
    pub delta: Option<f64>,
    pub gamma_plus: Option<f64>,
    pub gamma_minus: Option<f64>,
    pub gammas: Option<Vec<f64>>,
    pub phi: Option<f64>,
    pub theta_points: Option<usize>,
    pub thetas: Option<Vec<f64>>,
    pub initial: Option<Initial>,
    pub dt: Option<f64>,
    pub t_end: Option<f64>,
    pub delta_small: Option<f64>,
    pub t_hot: Option<f64>,
    pub t_cold: Option<f64>,
    pub kappa_hot: Option<f64>,
    pub kappa_cold: Option<f64>,
    pub cutoff: Option<f64>,
    pub model: Option<CustomModel>,
    pub output: Option<OutputSpec>,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub dt: Option<f64>,
    pub t_end: Option<f64>,
    pub theta_points: Option<usize>,
    pub gammas: Vec<f64>,
}

impl Scenario {
    pub fn from_json(text: &str, origin: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| {
            let msg = e.to_string();
            let suffix = format!(" at line {} column {}", e.line(), e.column());
            let msg = msg.strip_suffix(&suffix).unwrap_or(&msg);
            CliError::Config(format!(
                "{origin}: parse error at line {}, column {}: {msg}",
                e.line(),
                e.column()
            ))
        })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Scenario::from_json(&text, &path.display().to_string())
    }

    /// Flag values replace file values.
    pub fn apply(&mut self, o: &Overrides) {
        if o.dt.is_some() {
            self.dt = o.dt;
        }
        if o.t_end.is_some() {
            self.t_end = o.t_end;
        }
        if o.theta_points.is_some() {
            self.theta_points = o.theta_points;
        }
        if !o.gammas.is_empty() {
            self.gammas = Some(o.gammas.clone());
        }
        if o.out.is_some() || o.format.is_some() {
            let out = self.output.get_or_insert_with(OutputSpec::default);
            if o.out.is_some() {
                out.path = o.out.clone();
            }
            if o.format.is_some() {
                out.format = o.format;
            }
        }
    }

    pub fn output_path(&self) -> Option<&Path> {
        self.output.as_ref().and_then(|o| o.path.as_deref())
    }

    pub fn format(&self) -> Format {
        self.output.as_ref().and_then(|o| o.format).unwrap_or_default()
    }

    /// Fails with the names of fields that are set but unused by `kind`.
    fn reject_unused(&self, kind: Kind, allowed: &[&str]) -> Result<(), CliError> {
        let set = [
            ("delta", self.delta.is_some()),
            ("gamma_plus", self.gamma_plus.is_some()),
            ("gamma_minus", self.gamma_minus.is_some()),
            ("gammas", self.gammas.is_some()),
            ("phi", self.phi.is_some()),
            ("theta_points", self.theta_points.is_some()),
            ("thetas", self.thetas.is_some()),
            ("initial", self.initial.is_some()),
            ("dt", self.dt.is_some()),
            ("t_end", self.t_end.is_some()),
            ("delta_small", self.delta_small.is_some()),
            ("t_hot", self.t_hot.is_some()),
            ("t_cold", self.t_cold.is_some()),
            ("kappa_hot", self.kappa_hot.is_some()),
            ("kappa_cold", self.kappa_cold.is_some()),
            ("cutoff", self.cutoff.is_some()),
            ("model", self.model.is_some()),
        ];
        let unused: Vec<&str> = set
            .iter()
            .filter(|(name, present)| *present && !allowed.contains(name))
            .map(|(name, _)| *name)
            .collect();
        if unused.is_empty() {
            Ok(())
        } else {
            Err(CliError::Config(format!(
                "field(s) {} do not apply to kind '{}'",
                unused.join(", "),
                kind.name()
            )))
        }
    }
}

fn positive(name: &str, v: f64) -> Result<f64, CliError> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(CliError::Config(format!("{name}: must be finite and positive, got {v}")))
    }
}

fn non_negative(name: &str, v: f64) -> Result<f64, CliError> {
    if v.is_finite() && v >= 0.0 {
        Ok(v)
    } else {
        Err(CliError::Config(format!("{name}: must be finite and non-negative, got {v}")))
    }
}

fn finite(name: &str, v: f64) -> Result<f64, CliError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::Config(format!("{name}: must be finite, got {v}")))
    }
}

fn gamma_list(name: &str, gammas: &[f64]) -> Result<Vec<f64>, CliError> {
    if gammas.is_empty() {
        return Err(CliError::Config(format!("{name}: at least one value is required")));
    }
    gammas
        .iter()
        .enumerate()
        .map(|(i, &g)| non_negative(&format!("{name}[{i}]"), g))
        .collect()
}

fn rates(s: &Scenario, gp_default: f64, gm_default: f64) -> Result<(f64, f64, f64), CliError> {
    let delta = positive("delta", s.delta.unwrap_or(1.0))?;
    let gp = non_negative("gamma_plus", s.gamma_plus.unwrap_or(gp_default))?;
    let gm = non_negative("gamma_minus", s.gamma_minus.unwrap_or(gm_default))?;
    if gm > gp {
        return Err(CliError::Config(format!(
            "gamma_minus: must not exceed gamma_plus ({gm} > {gp})"
        )));
    }
    Ok((delta, gp, gm))
}

/// `n` points from 0 to π inclusive.
pub fn theta_grid(n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![0.0];
    }
    (0..n).map(|i| (PI * i as f64 / (n - 1) as f64).min(PI)).collect()
}

fn theta_points(s: &Scenario) -> Result<usize, CliError> {
    match s.theta_points.unwrap_or(181) {
        0 => Err(CliError::Config("theta_points: must be at least 1".into())),
        n => Ok(n),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SteadySweep {
    pub kind: Kind,
    pub delta: f64,
    pub gamma_plus: f64,
    pub gamma_minus: f64,
    pub gammas: Vec<f64>,
    pub phi: f64,
    pub theta_points: usize,
}

impl SteadySweep {
    pub fn resolve(s: &Scenario) -> Result<Self, CliError> {
        let kind = Kind::SteadySweepTheta;
        s.reject_unused(kind, &["delta", "gamma_plus", "gamma_minus", "gammas", "phi", "theta_points"])?;
        let (delta, gamma_plus, gamma_minus) = rates(s, 0.01, 0.005)?;
        Ok(SteadySweep {
            kind,
            delta,
            gamma_plus,
            gamma_minus,
            gammas: gamma_list("gammas", s.gammas.as_deref().unwrap_or(&[0.001, 0.01, 0.05]))?,
            phi: finite("phi", s.phi.unwrap_or(0.0))?,
            theta_points: theta_points(s)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Transient {
    pub kind: Kind,
    pub delta: f64,
    pub gamma_plus: f64,
    pub gamma_minus: f64,
    pub gamma: f64,
    pub phi: f64,
    pub thetas: Vec<f64>,
    pub initial: Initial,
    pub dt: f64,
    pub t_end: f64,
}

impl Transient {
    pub fn resolve(s: &Scenario, default_initial: Initial) -> Result<Self, CliError> {
        let kind = Kind::Transient;
        s.reject_unused(
            kind,
            &["delta", "gamma_plus", "gamma_minus", "gammas", "phi", "thetas", "initial", "dt", "t_end"],
        )?;
        let (delta, gamma_plus, gamma_minus) = rates(s, 0.02, 0.01)?;
        let gammas = gamma_list("gammas", s.gammas.as_deref().unwrap_or(&[0.01]))?;
        if gammas.len() != 1 {
            return Err(CliError::Config(format!(
                "gammas: a transient run takes exactly one value, got {}",
                gammas.len()
            )));
        }
        let thetas = s.thetas.clone().unwrap_or_else(|| vec![0.0, PI / 6.0, PI / 4.0, PI / 3.0, PI / 2.0]);
        if thetas.is_empty() {
            return Err(CliError::Config("thetas: at least one value is required".into()));
        }
        for (i, &t) in thetas.iter().enumerate() {
            if !(0.0..=PI).contains(&t) {
                return Err(CliError::Config(format!("thetas[{i}]: must lie in [0, pi], got {t}")));
            }
        }
        let initial = s.initial.unwrap_or(default_initial);
        if initial == Initial::MeasurementFree && gamma_plus == 0.0 {
            return Err(CliError::Config(
                "gamma_plus: the measurement-free initial state needs gamma_plus > 0".into(),
            ));
        }
        Ok(Transient {
            kind,
            delta,
            gamma_plus,
            gamma_minus,
            gamma: gammas[0],
            phi: finite("phi", s.phi.unwrap_or(0.0))?,
            thetas,
            initial,
            dt: positive("dt", s.dt.unwrap_or(0.01))?,
            t_end: positive("t_end", s.t_end.unwrap_or(600.0))?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExcessSweep {
    pub kind: Kind,
    pub delta: f64,
    pub gamma_plus: f64,
    pub gamma_minus: f64,
    pub gammas: Vec<f64>,
    pub phi: f64,
    pub theta_points: usize,
    pub dt: f64,
    pub t_end: f64,
}

impl ExcessSweep {
    pub fn resolve(s: &Scenario) -> Result<Self, CliError> {
        let kind = Kind::ExcessSweepTheta;
        s.reject_unused(
            kind,
            &["delta", "gamma_plus", "gamma_minus", "gammas", "phi", "theta_points", "dt", "t_end"],
        )?;
        let (delta, gamma_plus, gamma_minus) = rates(s, 0.02, 0.01)?;
        if gamma_plus == 0.0 {
            return Err(CliError::Config("gamma_plus: excess heat needs gamma_plus > 0".into()));
        }
        Ok(ExcessSweep {
            kind,
            delta,
            gamma_plus,
            gamma_minus,
            gammas: gamma_list("gammas", s.gammas.as_deref().unwrap_or(&[0.01]))?,
            phi: finite("phi", s.phi.unwrap_or(0.0))?,
            theta_points: theta_points(s)?,
            dt: positive("dt", s.dt.unwrap_or(0.01))?,
            t_end: positive("t_end", s.t_end.unwrap_or(600.0))?,
        })
    }
}

/// 25 log-spaced points over `[1e-4, 1e-1]`.
pub fn default_lambda_gammas() -> Vec<f64> {
    (0..25).map(|i| 10f64.powf(-4.0 + 3.0 * i as f64 / 24.0)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LambdaSweep {
    pub kind: Kind,
    pub delta: f64,
    pub delta_small: f64,
    pub t_hot: f64,
    pub t_cold: f64,
    pub kappa_hot: f64,
    pub kappa_cold: f64,
    pub cutoff: f64,
    pub phi: f64,
    pub gammas: Vec<f64>,
}

impl LambdaSweep {
    pub fn resolve(s: &Scenario) -> Result<Self, CliError> {
        let kind = Kind::LambdaSweepGamma;
        s.reject_unused(
            kind,
            &["delta", "delta_small", "t_hot", "t_cold", "kappa_hot", "kappa_cold", "cutoff", "phi", "gammas"],
        )?;
        let delta = positive("delta", s.delta.unwrap_or(1.0))?;
        let delta_small = positive("delta_small", s.delta_small.unwrap_or(0.5 * delta))?;
        if delta_small >= delta {
            return Err(CliError::Config(format!(
                "delta_small: must be below delta ({delta_small} >= {delta})"
            )));
        }
        let gammas = match &s.gammas {
            Some(g) => gamma_list("gammas", g)?,
            None => default_lambda_gammas(),
        };
        Ok(LambdaSweep {
            kind,
            delta,
            delta_small,
            t_hot: non_negative("t_hot", s.t_hot.unwrap_or(5.0))?,
            t_cold: non_negative("t_cold", s.t_cold.unwrap_or(2.0))?,
            kappa_hot: non_negative("kappa_hot", s.kappa_hot.unwrap_or(0.01))?,
            kappa_cold: non_negative("kappa_cold", s.kappa_cold.unwrap_or(0.01))?,
            cutoff: positive("cutoff", s.cutoff.unwrap_or(10.0 * delta))?,
            phi: finite("phi", s.phi.unwrap_or(0.0))?,
            gammas,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Custom {
    pub kind: Kind,
    pub model: CustomModel,
    pub dt: Option<f64>,
    pub t_end: Option<f64>,
}

impl Custom {
    pub fn resolve(s: &Scenario) -> Result<Self, CliError> {
        let kind = Kind::CustomLindblad;
        s.reject_unused(kind, &["model", "dt", "t_end"])?;
        let model = s
            .model
            .clone()
            .ok_or_else(|| CliError::Config("model: required for kind 'custom_lindblad'".into()))?;
        let dt = s.dt.map(|v| positive("dt", v)).transpose()?;
        let t_end = s.t_end.map(|v| positive("t_end", v)).transpose()?;
        if t_end.is_some() && model.initial_state.is_none() {
            return Err(CliError::Config(
                "model.initial_state: required when t_end requests a time series".into(),
            ));
        }
        if t_end.is_none() && !model.steady_state {
            return Err(CliError::Config(
                "model.steady_state: nothing to compute without a steady state or t_end".into(),
            ));
        }
        Ok(Custom { kind, model, dt, t_end })
    }
}
