//! TOML run configuration. Every section is optional except where a
//! command needs inputs that have no sensible default (`eval`, `invert`).

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::ReportError;
use crate::bounds::BoundedRange;
use crate::rates::RateFamily;
use crate::simulate::Scenario;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub eval: Option<EvalConfig>,
    pub invert: Option<InvertConfig>,
    #[serde(default)]
    pub constants: ConstantsConfig,
    #[serde(default)]
    pub complexity: ComplexityConfig,
    #[serde(default)]
    pub simulate: SimulateConfig,
    #[serde(default)]
    pub rates: RatesConfig,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, ReportError> {
        toml::from_str(text).map_err(|e| ReportError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, ReportError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ReportError::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::from_toml(&text)?;
        // Relative matrix paths are resolved against the config file.
        if let Some(m) = cfg.complexity.matrix.as_mut() {
            if m.is_relative() {
                if let Some(dir) = path.parent() {
                    let joined = dir.join(&*m);
                    if joined.exists() {
                        *m = joined;
                    }
                }
            }
        }
        Ok(cfg)
    }
}

fn unit_range() -> [f64; 2] {
    [0.0, 1.0]
}

pub(crate) fn range_of(r: [f64; 2]) -> Result<BoundedRange, ReportError> {
    BoundedRange::new(r[0], r[1]).map_err(|e| ReportError::Config(format!("range: {e}")))
}

/// Forward evaluation of a tail bound over a ξ grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalConfig {
    pub family: EvalFamily,
    pub n: u64,
    pub xi: Vec<f64>,
    #[serde(default = "unit_range")]
    pub range: [f64; 2],
    #[serde(default)]
    pub log_uen: f64,
    /// Bounded-difference constant; defaults to `(b − a)/N`.
    pub c: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalFamily {
    HoeffdingUen,
    BennettSum,
    BennettBdiff,
    BennettUen,
}

/// Backward evaluation: confidence to radius.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InvertConfig {
    pub family: InvertFamily,
    pub n: Vec<u64>,
    pub eps: Vec<f64>,
    #[serde(default = "unit_range")]
    pub range: [f64; 2],
    #[serde(default)]
    pub log_uen: f64,
    pub beta1: Option<f64>,
    pub gamma_exp: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InvertFamily {
    Hoeffding,
    Bernstein,
    BernsteinScaled,
    BennettAlt,
    BennettExact,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConstantsConfig {
    pub x_max: f64,
    pub betas: Vec<f64>,
    pub fig1_points: usize,
    pub fig2_points: usize,
    pub fig2_beta: f64,
    pub fig3_points: usize,
    pub fig3_x_max: f64,
    pub limit_betas: Vec<f64>,
    pub limit_xs: Vec<f64>,
}

impl Default for ConstantsConfig {
    fn default() -> Self {
        Self {
            x_max: 0.125,
            betas: vec![0.05, 0.1, 0.2, 0.3, 0.4, 0.4434, 0.47],
            fig1_points: 500,
            fig2_points: 1001,
            fig2_beta: 0.4804,
            fig3_points: 1001,
            fig3_x_max: 1.0,
            limit_betas: vec![0.1, 0.2, 0.3, 0.4],
            limit_xs: vec![1e-4, 1e-6, 1e-8],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ComplexityConfig {
    /// Evaluation matrix CSV: rows are functions, columns are samples.
    pub matrix: Option<PathBuf>,
    /// Value range; fitted to the data when absent.
    pub range: Option<[f64; 2]>,
    pub radii: Vec<f64>,
    pub p: f64,
    pub rademacher_trials: u64,
}

impl Default for ComplexityConfig {
    fn default() -> Self {
        Self {
            matrix: None,
            range: None,
            radii: vec![0.05, 0.1, 0.2, 0.3, 0.4, 0.5],
            p: 1.0,
            rademacher_trials: 100_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulateConfig {
    pub trials: u64,
    pub workers: usize,
    pub slack_sigmas: f64,
    /// Explicit scenarios; the built-in pack when empty.
    pub scenario: Vec<Scenario>,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        Self { trials: 1_000_000, workers: 1, slack_sigmas: 3.0, scenario: Vec::new() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RatesConfig {
    pub eps: f64,
    pub log_uen: f64,
    pub range: [f64; 2],
    pub n_min: u64,
    pub n_max: u64,
    pub points: usize,
    pub families: Vec<RateFamily>,
    pub profile_betas: Vec<f64>,
    pub profile_points: usize,
    /// Fixed deviation for the convergence diagnostic.
    pub convergence_xi: f64,
    pub convergence_models: Vec<UenGrowth>,
}

impl Default for RatesConfig {
    fn default() -> Self {
        Self {
            eps: 0.05,
            log_uen: 5.0,
            range: unit_range(),
            n_min: 1_000,
            n_max: 1_000_000_000,
            points: 25,
            families: vec![
                RateFamily::Hoeffding,
                RateFamily::Bernstein,
                RateFamily::BernsteinScaled,
                RateFamily::BennettAlt { beta1: 0.3, gamma_exp: 1.6 },
                RateFamily::BennettExact,
            ],
            profile_betas: vec![0.1, 0.4, 0.47],
            profile_points: 200,
            convergence_xi: 0.5,
            convergence_models: vec![
                UenGrowth::Constant { value: 5.0 },
                UenGrowth::Power { coef: 1.0, exponent: 0.5 },
                UenGrowth::Power { coef: 2.0, exponent: 1.0 },
            ],
        }
    }
}

/// `log_uen` as a function of N.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum UenGrowth {
    Constant { value: f64 },
    /// `coef · N^exponent`
    Power { coef: f64, exponent: f64 },
}

impl UenGrowth {
    pub fn eval(&self, n: u64) -> f64 {
        match *self {
            UenGrowth::Constant { value } => value,
            UenGrowth::Power { coef, exponent } => coef * (n as f64).powf(exponent),
        }
    }

    pub fn label(&self) -> String {
        match *self {
            UenGrowth::Constant { value } => format!("constant_{value}"),
            UenGrowth::Power { coef, exponent } => format!("power_{coef}x{exponent}"),
        }
    }
}
