//! Experiment configuration, read from TOML.

use std::path::{Path, PathBuf};

use fracwave_core::mode_solver::SolveMethod;
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Lemmas,
    OdeRegularity,
    PdeRegularity,
    Convergence,
    Manufactured,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Lemmas => "lemmas",
            Self::OdeRegularity => "ode-regularity",
            Self::PdeRegularity => "pde-regularity",
            Self::Convergence => "convergence",
            Self::Manufactured => "manufactured",
        }
    }

    /// Refinement levels needed to derive the kind's outputs.
    fn min_levels(&self) -> usize {
        match self {
            Self::Lemmas | Self::Manufactured => 1,
            Self::Convergence => 2,
            Self::OdeRegularity | Self::PdeRegularity => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    /// Time intervals N per refinement level.
    pub ladder: Vec<usize>,
    /// Mode counts K, either one value or one per level.
    #[serde(default = "default_modes")]
    pub modes: Vec<usize>,
    /// Spatial quadrature nodes M.
    #[serde(default = "default_resolution")]
    pub spatial_resolution: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSection {
    /// Named data cases; empty selects the kind's default family.
    #[serde(default)]
    pub cases: Vec<String>,
    #[serde(default = "default_lambdas")]
    pub lambdas: Vec<f64>,
    #[serde(default = "default_method")]
    pub method: SolveMethod,
}

impl Default for DataSection {
    fn default() -> Self {
        Self { cases: Vec::new(), lambdas: default_lambdas(), method: default_method() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Operator identity discrepancy relative to the input scale.
    pub identity: f64,
    /// Required discrepancy decay between the last two levels.
    pub decay: f64,
    /// Allowed relative spread of a ratio across levels.
    pub stability: f64,
    pub band_low: f64,
    pub band_high: f64,
    /// Allowed spread (max/min) of estimate ratios over a lambda sweep.
    pub lambda_spread: f64,
    pub slope: f64,
    pub weak_form: f64,
    pub manufactured: f64,
    pub decoupling: f64,
    pub residual: f64,
    /// Allowed relative deviation of an observed growth exponent from theory.
    pub growth: f64,
    /// Allowed shortfall of an observed convergence order.
    pub order_slack: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            identity: 1e-3,
            decay: 2.0,
            stability: 0.2,
            band_low: 0.1,
            band_high: 10.0,
            lambda_spread: 10.0,
            slope: 5e-2,
            weak_form: 1e-3,
            manufactured: 1e-3,
            decoupling: 1e-10,
            residual: 1e-2,
            growth: 0.25,
            order_slack: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub path: Option<PathBuf>,
    pub format: Option<OutputFormat>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: Option<ExperimentKind>,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_final_time")]
    pub final_time: f64,
    #[serde(default)]
    pub seed: u64,
    pub grid: GridSection,
    #[serde(default)]
    pub data: DataSection,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub output: OutputSection,
}

fn default_alpha() -> f64 {
    1.5
}
fn default_final_time() -> f64 {
    1.0
}
fn default_modes() -> Vec<usize> {
    vec![8]
}
fn default_resolution() -> usize {
    1024
}
fn default_lambdas() -> Vec<f64> {
    vec![1.0]
}
fn default_method() -> SolveMethod {
    SolveMethod::ClosedForm
}

fn strictly_increasing<T: PartialOrd>(v: &[T]) -> bool {
    v.windows(2).all(|w| w[0] < w[1])
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str, origin: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| HarnessError::Config { path: origin.into(), message: e.to_string() })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io { path: path.into(), source })?;
        Self::from_toml_str(&text, &path.display().to_string())
    }

    /// Resolves the experiment kind against the one requested on the command
    /// line and checks every invariant of the configuration.
    pub fn validate(&mut self, requested: ExperimentKind) -> Result<()> {
        let usage = |m: String| Err(HarnessError::Usage(m));
        match self.kind {
            Some(k) if k != requested => {
                return usage(format!("config declares kind '{}' but '{}' was requested", k.name(), requested.name()))
            }
            _ => self.kind = Some(requested),
        }
        if !(self.alpha > 1.0 && self.alpha < 2.0) {
            return usage(format!("alpha = {} must lie in (1, 2)", self.alpha));
        }
        if !(self.final_time.is_finite() && self.final_time > 0.0) {
            return usage(format!("final_time = {} must be positive", self.final_time));
        }
        let ladder = &self.grid.ladder;
        if ladder.is_empty() {
            return usage("grid.ladder is empty".into());
        }
        if ladder.len() < requested.min_levels() {
            return usage(format!(
                "'{}' needs at least {} refinement levels, grid.ladder has {}",
                requested.name(),
                requested.min_levels(),
                ladder.len()
            ));
        }
        if !strictly_increasing(ladder) {
            return usage("grid.ladder must be strictly increasing".into());
        }
        let base = ladder[0];
        if base < 8 {
            return usage(format!("grid.ladder starts at N = {base}, at least 8 is required"));
        }
        if let Some(n) = ladder.iter().find(|&&n| n % base != 0 || !(n / base).is_power_of_two()) {
            return usage(format!("grid.ladder entry {n} is not a power of two times {base}"));
        }
        let modes = &self.grid.modes;
        if modes.is_empty() || modes.contains(&0) || !strictly_increasing(modes) {
            return usage("grid.modes must be a non-empty strictly increasing list of positive integers".into());
        }
        if modes.len() != 1 && modes.len() != ladder.len() {
            return usage("grid.modes must have one entry or one per ladder level".into());
        }
        if self.data.lambdas.is_empty() || self.data.lambdas.iter().any(|l| !(l.is_finite() && *l >= 0.0)) {
            return usage("data.lambdas must be a non-empty list of non-negative numbers".into());
        }
        Ok(())
    }

    pub fn kind(&self) -> ExperimentKind {
        self.kind.expect("validated configuration has a kind")
    }

    /// K at refinement level i.
    pub fn modes_at(&self, level: usize) -> usize {
        if self.grid.modes.len() == 1 {
            self.grid.modes[0]
        } else {
            self.grid.modes[level]
        }
    }
}
