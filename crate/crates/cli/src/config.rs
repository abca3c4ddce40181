//! JSON experiment configuration.
//!
//! The load coupling is stored as `g_w`; `g_T` is accepted as an alias both
//! in the engine section and as a sweep parameter name.

use std::path::Path;

use collective_engine::engine::{self, EngineParams, Model};
use collective_engine::schur_weyl;
use collective_engine::spectra::{RegressionGenerator, DEFAULT_N_TAU, DEFAULT_WINDOW_LINEWIDTHS};
use collective_engine::su3::IrrepLabel;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ModelName {
    #[default]
    TwoBath,
    Load,
    Driven,
}

impl From<ModelName> for Model {
    fn from(m: ModelName) -> Self {
        match m {
            ModelName::TwoBath => Model::TwoBath,
            ModelName::Load => Model::DissipativeLoad,
            ModelName::Driven => Model::Driven,
        }
    }
}

impl std::str::FromStr for ModelName {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "two_bath" => Ok(ModelName::TwoBath),
            "load" => Ok(ModelName::Load),
            "driven" => Ok(ModelName::Driven),
            other => Err(CliError::Config(format!(
                "unknown model '{other}' (two_bath, load, driven)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum RegressionName {
    #[default]
    Full,
    TwoBath,
}

impl From<RegressionName> for RegressionGenerator {
    fn from(r: RegressionName) -> Self {
        match r {
            RegressionName::Full => RegressionGenerator::Full,
            RegressionName::TwoBath => RegressionGenerator::TwoBath,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EngineSection {
    pub omega_c: f64,
    pub omega_h: f64,
    pub beta_c: f64,
    pub beta_h: f64,
    pub g_u: f64,
    pub g_v: f64,
    #[serde(alias = "g_T")]
    pub g_w: f64,
    pub alpha: f64,
    pub beta_0: f64,
}

impl Default for EngineSection {
    fn default() -> Self {
        let p = EngineParams::default();
        EngineSection {
            omega_c: p.omega_c,
            omega_h: p.omega_h,
            beta_c: p.beta_c,
            beta_h: p.beta_h,
            g_u: p.g_u,
            g_v: p.g_v,
            g_w: p.g_w,
            alpha: p.alpha,
            beta_0: p.beta_0,
        }
    }
}

pub const PARAMETER_NAMES: [&str; 9] = [
    "omega_c", "omega_h", "beta_c", "beta_h", "g_u", "g_v", "g_w", "alpha", "beta_0",
];

fn canonical_name(name: &str) -> Option<&'static str> {
    let name = if name == "g_T" { "g_w" } else { name };
    PARAMETER_NAMES.iter().copied().find(|&p| p == name)
}

impl EngineSection {
    pub fn params(&self, model: ModelName) -> EngineParams {
        EngineParams {
            omega_c: self.omega_c,
            omega_h: self.omega_h,
            beta_c: self.beta_c,
            beta_h: self.beta_h,
            g_u: self.g_u,
            g_v: self.g_v,
            g_w: self.g_w,
            alpha: self.alpha,
            beta_0: self.beta_0,
            model: model.into(),
        }
    }

    fn set(&mut self, name: &str, value: f64) -> Result<()> {
        let slot = match canonical_name(name) {
            Some("omega_c") => &mut self.omega_c,
            Some("omega_h") => &mut self.omega_h,
            Some("beta_c") => &mut self.beta_c,
            Some("beta_h") => &mut self.beta_h,
            Some("g_u") => &mut self.g_u,
            Some("g_v") => &mut self.g_v,
            Some("g_w") => &mut self.g_w,
            Some("alpha") => &mut self.alpha,
            Some("beta_0") => &mut self.beta_0,
            _ => return Err(CliError::Config(format!("unknown sweep parameter '{name}'"))),
        };
        *slot = value;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxis {
    pub parameter: String,
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl SweepAxis {
    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.min];
        }
        (0..self.points)
            .map(|k| self.min + (self.max - self.min) * k as f64 / (self.points - 1) as f64)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockWeight {
    pub p: u32,
    pub q: u32,
    pub weight: f64,
}

/// How the irrep weights `p^λ` are prepared.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Preparation {
    /// Product of single-particle Gibbs states; `beta_0` from the engine section.
    Thermal,
    /// Product of a single-particle state with populations `r`.
    Product { r: [f64; 3] },
    /// Explicit weights.
    Weights { weights: Vec<BlockWeight> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: Option<String>,
    pub prefix: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectrumSection {
    pub n_tau: usize,
    pub window_linewidths: f64,
}

impl Default for SpectrumSection {
    fn default() -> Self {
        SpectrumSection {
            n_tau: DEFAULT_N_TAU,
            window_linewidths: DEFAULT_WINDOW_LINEWIDTHS,
        }
    }
}

fn yes() -> bool {
    true
}

fn thermal() -> Preparation {
    Preparation::Thermal
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub model: ModelName,
    #[serde(default)]
    pub n: Option<u32>,
    /// Explicit `(p, q)` list; all irreps of `n` when absent.
    #[serde(default)]
    pub irreps: Option<Vec<[u32; 2]>>,
    #[serde(default)]
    pub engine: EngineSection,
    #[serde(default)]
    pub sweep: Vec<SweepAxis>,
    #[serde(default = "thermal")]
    pub preparation: Preparation,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub regression_generator: RegressionName,
    #[serde(default)]
    pub spectrum: SpectrumSection,
    /// Add a row for `n` distinguishable, independently coupled particles.
    #[serde(default = "yes")]
    pub independent_baseline: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            model: ModelName::default(),
            n: None,
            irreps: None,
            engine: EngineSection::default(),
            sweep: Vec::new(),
            preparation: Preparation::Thermal,
            output: OutputSection::default(),
            regression_generator: RegressionName::default(),
            spectrum: SpectrumSection::default(),
            independent_baseline: true,
        }
    }
}

/// One grid point: the swept values in axis order and the engine section there.
#[derive(Debug, Clone)]
pub struct GridPoint {
    pub values: Vec<f64>,
    pub engine: EngineSection,
}

impl ExperimentConfig {
    pub fn from_json(text: &str, path: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|source| CliError::Parse {
            path: path.to_string(),
            source,
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text, &path.display().to_string())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// SHA-256 of the compact serialization.
    pub fn hash(&self) -> String {
        let compact = serde_json::to_string(self).expect("config serializes");
        format!("{:x}", Sha256::digest(compact.as_bytes()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.n.is_none() && self.irreps.is_none() {
            return Err(CliError::Config("either 'n' or 'irreps' must be given".into()));
        }
        if self.n == Some(0) {
            return Err(CliError::Config("'n' must be positive".into()));
        }
        if let (Some(list), Some(n)) = (&self.irreps, self.n) {
            for &[p, q] in list {
                IrrepLabel::new(p, q).check_for(n)?;
            }
        }
        if self.irreps.as_ref().is_some_and(|l| l.is_empty()) {
            return Err(CliError::Config("'irreps' is empty".into()));
        }
        for axis in &self.sweep {
            if canonical_name(&axis.parameter).is_none() {
                return Err(CliError::Config(format!(
                    "unknown sweep parameter '{}' (expected one of {})",
                    axis.parameter,
                    PARAMETER_NAMES.join(", ")
                )));
            }
            if axis.points == 0 || !axis.min.is_finite() || !axis.max.is_finite() || axis.min > axis.max {
                return Err(CliError::Config(format!(
                    "sweep over '{}' needs points ≥ 1 and finite min ≤ max",
                    axis.parameter
                )));
            }
        }
        match &self.preparation {
            Preparation::Thermal => {}
            Preparation::Product { r } => {
                let total: f64 = r.iter().sum();
                if r.iter().any(|&x| !(0.0..=1.0).contains(&x)) || (total - 1.0).abs() > 1e-12 {
                    return Err(CliError::Config(format!(
                        "preparation r={r:?} is not a probability vector"
                    )));
                }
            }
            Preparation::Weights { weights } => {
                if weights.iter().any(|w| w.weight.is_nan() || w.weight < 0.0) {
                    return Err(CliError::Config("negative block weight".into()));
                }
            }
        }
        if self.spectrum.n_tau < 16
            || self.spectrum.window_linewidths.is_nan()
            || self.spectrum.window_linewidths <= 0.0
        {
            return Err(CliError::Config(
                "spectrum needs n_tau ≥ 16 and a positive window".into(),
            ));
        }
        for point in self.grid()? {
            point.engine.params(self.model).validate()?;
        }
        Ok(())
    }

    /// Cartesian product of the sweep axes, first axis slowest.
    pub fn grid(&self) -> Result<Vec<GridPoint>> {
        let mut points = vec![GridPoint {
            values: Vec::new(),
            engine: self.engine,
        }];
        for axis in &self.sweep {
            let mut next = Vec::with_capacity(points.len() * axis.points);
            for point in &points {
                for v in axis.values() {
                    let mut engine = point.engine;
                    engine.set(&axis.parameter, v)?;
                    let mut values = point.values.clone();
                    values.push(v);
                    next.push(GridPoint { values, engine });
                }
            }
            points = next;
        }
        Ok(points)
    }

    pub fn axis_names(&self) -> Vec<String> {
        self.sweep
            .iter()
            .map(|a| canonical_name(&a.parameter).unwrap_or(&a.parameter).to_string())
            .collect()
    }

    pub fn labels(&self) -> Vec<IrrepLabel> {
        match (&self.irreps, self.n) {
            (Some(list), _) => list.iter().map(|&[p, q]| IrrepLabel::new(p, q)).collect(),
            (None, Some(n)) => schur_weyl::irrep_labels(n),
            (None, None) => Vec::new(),
        }
    }

    /// `p^λ` for the listed irreps at one grid point, if determined.
    pub fn block_weights(&self, engine: &EngineSection) -> Result<Option<Vec<(IrrepLabel, f64)>>> {
        let from_r = |r: [f64; 3]| -> Result<Option<Vec<(IrrepLabel, f64)>>> {
            match self.n {
                Some(n) => Ok(Some(engine::product_block_weights(n, r)?)),
                None => Ok(None),
            }
        };
        match &self.preparation {
            Preparation::Thermal => from_r(engine::boltzmann_factors(engine.beta_0, engine.omega_c, engine.omega_h)),
            Preparation::Product { r } => from_r(*r),
            Preparation::Weights { weights } => Ok(Some(
                weights.iter().map(|w| (IrrepLabel::new(w.p, w.q), w.weight)).collect(),
            )),
        }
    }

    pub fn prefix(&self, command: &str) -> String {
        match &self.output.prefix {
            Some(p) => format!("{p}_{command}"),
            None => command.to_string(),
        }
    }
}
