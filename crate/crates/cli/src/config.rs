//! TOML run configuration.
//!
//! A config file is parsed into [`RunConfig`], whose optional fields are
//! filled from library defaults by [`RunConfig::resolve`]. The resolved form
//! is what gets written to the run manifest, so re-running from a manifest
//! never depends on defaults that might change between versions.

use onfwer::procedures::{GraphWeights, ProcedureKind, Schedule, SpendingFunction, SpendingSequence};
use onfwer::sim::{AutocorrScenario, EffectScaling, PlatformScenario, WeightScheme};
use onfwer::{ProcedureConfig, ResamplePlan, Scenario, ThresholdPlan};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::{Path, PathBuf};

/// A schema violation, located by a dotted field path.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{path}: {message}")]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

impl ConfigError {
    fn new(path: impl Into<String>, message: impl fmt::Display) -> Self {
        ConfigError {
            path: path.into(),
            message: message.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub replications: usize,
    pub output: PathBuf,
    /// Worker threads; all available cores when unset.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    /// Written into manifests; informational on input.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub library_version: Option<String>,
    pub scenario: ScenarioSpec,
    #[serde(default)]
    pub procedures: Vec<ProcedureSpec>,
    #[serde(default, skip_serializing_if = "Sweep::is_empty")]
    pub sweep: Sweep,
}

fn default_alpha() -> f64 {
    0.05
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioKind {
    Autocorr,
    Platform,
}

impl ScenarioKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioKind::Autocorr => "autocorr",
            ScenarioKind::Platform => "platform",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightKind {
    Bootstrap,
    Threshold,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EffectScalingSpec {
    Fixed,
    InverseSqrtN,
}

/// Scenario block. `n_hypotheses` is the number of treatment arms for the
/// platform trial. Fields that do not apply to `kind` are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub kind: ScenarioKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_hypotheses: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_size: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pi1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub effect: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<WeightKind>,
    /// m(n) = ⌊n^e⌋ for bootstrap weights; ⌊√n⌋ when unset.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resample_exponent: Option<f64>,
    // autocorr only
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    // platform only
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entry_spacing: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub effect_scaling: Option<EffectScalingSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProcedureId {
    AlphaSpending,
    AdaptiveSpending,
    OnlineFallback,
    Geometric,
    ContinuousGraph,
    ContinuousSpending,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum GammaSpec {
    InverseSquare,
    Geometric { pi: f64 },
    Explicit { values: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SpendingSpec {
    /// Interpolation of the procedure's γ.
    Interpolation,
    Power {
        coef: f64,
        exponent: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProcedureSpec {
    pub id: ProcedureId,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub closed: bool,
    /// Defaults to the scenario's λ.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<GammaSpec>,
    /// Constant Πᵢ; required for `geometric`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pi: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spending: Option<SpendingSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pi1: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_hypotheses: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_size: Option<Vec<usize>>,
}

impl Sweep {
    pub fn is_empty(&self) -> bool {
        self.pi1.is_none() && self.rho.is_none() && self.n_hypotheses.is_none() && self.sample_size.is_none()
    }
}

/// One point of the sweep grid with its scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub spec: ScenarioSpec,
    pub scenario: Scenario,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let de = toml::Deserializer::parse(text).map_err(|e| ConfigError::new("<document>", e.message()))?;
        let config: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let path = if path == "." { "<document>".to_string() } else { path };
            ConfigError::new(path, e.inner().message())
        })?;
        config.check()?;
        Ok(config)
    }

    pub fn from_path(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| anyhow::anyhow!("cannot read {}: {e}", path.display()))?;
        Ok(Self::from_toml(&text)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run config serializes to TOML")
    }

    /// Schema checks beyond what deserialization enforces. Every sweep point
    /// and procedure is built once so parameter errors surface before any
    /// simulation starts.
    pub fn check(&self) -> Result<(), ConfigError> {
        if self.replications == 0 {
            return Err(ConfigError::new("replications", "must be at least 1"));
        }
        if self.threads == Some(0) {
            return Err(ConfigError::new("threads", "must be at least 1"));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(ConfigError::new(
                "alpha",
                format!("must lie in (0, 1), got {}", self.alpha),
            ));
        }
        if self.procedures.is_empty() {
            return Err(ConfigError::new("procedures", "at least one procedure is required"));
        }
        self.scenario.check_applicable("scenario")?;
        let sweep = &self.sweep;
        for (name, empty) in [
            ("pi1", sweep.pi1.as_ref().is_some_and(Vec::is_empty)),
            ("rho", sweep.rho.as_ref().is_some_and(Vec::is_empty)),
            ("n_hypotheses", sweep.n_hypotheses.as_ref().is_some_and(Vec::is_empty)),
            ("sample_size", sweep.sample_size.as_ref().is_some_and(Vec::is_empty)),
        ] {
            if empty {
                return Err(ConfigError::new(format!("sweep.{name}"), "grid must not be empty"));
            }
        }
        if sweep.rho.is_some() && self.scenario.kind == ScenarioKind::Platform {
            return Err(ConfigError::new("sweep.rho", "only applies to the autocorr scenario"));
        }
        let points = self.sweep_points()?;
        for point in &points {
            for (k, spec) in self.procedures.iter().enumerate() {
                spec.build(self.alpha, point.spec.lambda.unwrap_or_default())
                    .map_err(|e| ConfigError::new(format!("procedures[{k}].{}", e.path), e.message))?;
            }
        }
        Ok(())
    }

    /// Fills every optional field from library defaults.
    pub fn resolve(&self) -> Result<RunConfig, ConfigError> {
        let mut resolved = self.clone();
        resolved.scenario = self.scenario.resolve();
        let lambda = resolved.scenario.lambda.unwrap_or_default();
        for spec in &mut resolved.procedures {
            spec.resolve(lambda);
        }
        resolved.library_version = Some(onfwer::VERSION.to_string());
        resolved.check()?;
        Ok(resolved)
    }

    /// Cartesian product of the sweep grids in the order π₁, ρ, N, n, with
    /// the last grid varying fastest.
    pub fn sweep_points(&self) -> Result<Vec<SweepPoint>, ConfigError> {
        let base = self.scenario.resolve();
        let one = |v: Option<f64>| vec![v];
        let pi1s: Vec<Option<f64>> = match &self.sweep.pi1 {
            Some(g) => g.iter().map(|&v| Some(v)).collect(),
            None => one(base.pi1),
        };
        let rhos: Vec<Option<f64>> = match &self.sweep.rho {
            Some(g) => g.iter().map(|&v| Some(v)).collect(),
            None => one(base.rho),
        };
        let ns: Vec<Option<usize>> = match &self.sweep.n_hypotheses {
            Some(g) => g.iter().map(|&v| Some(v)).collect(),
            None => vec![base.n_hypotheses],
        };
        let sizes: Vec<Option<usize>> = match &self.sweep.sample_size {
            Some(g) => g.iter().map(|&v| Some(v)).collect(),
            None => vec![base.sample_size],
        };
        let mut points = Vec::new();
        for &pi1 in &pi1s {
            for &rho in &rhos {
                for &n_hypotheses in &ns {
                    for &sample_size in &sizes {
                        let spec = ScenarioSpec {
                            pi1,
                            rho,
                            n_hypotheses,
                            sample_size,
                            ..base.clone()
                        };
                        let scenario = spec.build().map_err(|e| {
                            let path = if self.sweep.is_empty() {
                                format!("scenario.{}", e.path)
                            } else {
                                format!("scenario.{} (sweep point)", e.path)
                            };
                            ConfigError::new(path, e.message)
                        })?;
                        points.push(SweepPoint { spec, scenario });
                    }
                }
            }
        }
        Ok(points)
    }

    /// Procedures for one sweep point, in config order.
    pub fn procedures_for(&self, point: &SweepPoint) -> Result<Vec<ProcedureConfig>, ConfigError> {
        let lambda = point.spec.resolve().lambda.unwrap_or_default();
        self.procedures
            .iter()
            .enumerate()
            .map(|(k, spec)| {
                spec.build(self.alpha, lambda)
                    .map_err(|e| ConfigError::new(format!("procedures[{k}].{}", e.path), e.message))
            })
            .collect()
    }
}

impl ScenarioSpec {
    fn check_applicable(&self, prefix: &str) -> Result<(), ConfigError> {
        let misplaced = match self.kind {
            ScenarioKind::Autocorr => [
                ("sigma", self.sigma.is_some()),
                ("rate", self.rate.is_some()),
                ("entry_spacing", self.entry_spacing.is_some()),
                ("effect_scaling", self.effect_scaling.is_some()),
            ]
            .into_iter()
            .find(|(_, set)| *set),
            ScenarioKind::Platform => [("rho", self.rho.is_some())].into_iter().find(|(_, set)| *set),
        };
        if let Some((field, _)) = misplaced {
            return Err(ConfigError::new(
                format!("{prefix}.{field}"),
                format!("does not apply to the {} scenario", self.kind.as_str()),
            ));
        }
        if self.resample_exponent.is_some() && self.weights == Some(WeightKind::Threshold) {
            return Err(ConfigError::new(
                format!("{prefix}.resample_exponent"),
                "only applies to bootstrap weights",
            ));
        }
        Ok(())
    }

    /// Copy with every applicable field set.
    pub fn resolve(&self) -> ScenarioSpec {
        match self.kind {
            ScenarioKind::Autocorr => {
                let d = AutocorrScenario::default();
                ScenarioSpec {
                    kind: self.kind,
                    n_hypotheses: Some(self.n_hypotheses.unwrap_or(d.n_hypotheses)),
                    sample_size: Some(self.sample_size.unwrap_or(d.sample_size)),
                    pi1: Some(self.pi1.unwrap_or(d.pi1)),
                    effect: Some(self.effect.unwrap_or(d.effect)),
                    lambda: Some(self.lambda.unwrap_or(d.lambda)),
                    weights: Some(self.weights.unwrap_or(WeightKind::Bootstrap)),
                    resample_exponent: self.resample_exponent,
                    rho: Some(self.rho.unwrap_or(d.rho)),
                    sigma: None,
                    rate: None,
                    entry_spacing: None,
                    effect_scaling: None,
                }
            }
            ScenarioKind::Platform => {
                let d = PlatformScenario::default();
                let scaling = match d.effect_scaling {
                    EffectScaling::Fixed => EffectScalingSpec::Fixed,
                    EffectScaling::InverseSqrtN => EffectScalingSpec::InverseSqrtN,
                };
                ScenarioSpec {
                    kind: self.kind,
                    n_hypotheses: Some(self.n_hypotheses.unwrap_or(d.n_treatments)),
                    sample_size: Some(self.sample_size.unwrap_or(d.sample_size)),
                    pi1: Some(self.pi1.unwrap_or(d.pi1)),
                    effect: Some(self.effect.unwrap_or(d.effect)),
                    lambda: Some(self.lambda.unwrap_or(d.lambda)),
                    weights: Some(self.weights.unwrap_or(WeightKind::Bootstrap)),
                    resample_exponent: self.resample_exponent,
                    rho: None,
                    sigma: Some(self.sigma.unwrap_or(d.sigma)),
                    rate: Some(self.rate.unwrap_or(d.rate)),
                    entry_spacing: Some(self.entry_spacing.unwrap_or(d.entry_spacing)),
                    effect_scaling: Some(self.effect_scaling.unwrap_or(scaling)),
                }
            }
        }
    }

    fn weight_scheme(&self) -> WeightScheme {
        match self.weights.unwrap_or(WeightKind::Bootstrap) {
            WeightKind::Threshold => WeightScheme::Threshold(ThresholdPlan::QuarterPower),
            WeightKind::Bootstrap => WeightScheme::Bootstrap(match self.resample_exponent {
                Some(exponent) => ResamplePlan::Power { exponent },
                None => ResamplePlan::Sqrt,
            }),
        }
    }

    pub fn build(&self) -> Result<Scenario, ConfigError> {
        let r = self.resolve();
        let weights = self.weight_scheme();
        let scenario = match self.kind {
            ScenarioKind::Autocorr => Scenario::Autocorr(AutocorrScenario {
                n_hypotheses: r.n_hypotheses.unwrap_or_default(),
                sample_size: r.sample_size.unwrap_or_default(),
                pi1: r.pi1.unwrap_or_default(),
                rho: r.rho.unwrap_or_default(),
                effect: r.effect.unwrap_or_default(),
                lambda: r.lambda.unwrap_or_default(),
                weights,
            }),
            ScenarioKind::Platform => Scenario::Platform(PlatformScenario {
                n_treatments: r.n_hypotheses.unwrap_or_default(),
                sample_size: r.sample_size.unwrap_or_default(),
                sigma: r.sigma.unwrap_or_default(),
                rate: r.rate.unwrap_or_default(),
                entry_spacing: r.entry_spacing.unwrap_or_default(),
                pi1: r.pi1.unwrap_or_default(),
                effect: r.effect.unwrap_or_default(),
                effect_scaling: match r.effect_scaling {
                    Some(EffectScalingSpec::InverseSqrtN) => EffectScaling::InverseSqrtN,
                    _ => EffectScaling::Fixed,
                },
                lambda: r.lambda.unwrap_or_default(),
                weights,
            }),
        };
        scenario.validate().map_err(|e| core_error_path(&e))?;
        Ok(scenario)
    }
}

/// Maps a library parameter error onto the config field of the same name.
fn core_error_path(e: &onfwer::Error) -> ConfigError {
    match e {
        onfwer::Error::InvalidParameter { name, reason } => {
            let field = match *name {
                "n_treatments" => "n_hypotheses",
                "resample.exponent" => "resample_exponent",
                other => other,
            };
            ConfigError::new(field, reason)
        }
        other => ConfigError::new("<value>", other),
    }
}

impl ProcedureSpec {
    fn resolve(&mut self, scenario_lambda: f64) {
        let uses_lambda = !matches!(self.id, ProcedureId::AlphaSpending | ProcedureId::OnlineFallback);
        if uses_lambda && self.lambda.is_none() {
            self.lambda = Some(scenario_lambda);
        }
        let uses_gamma = self.id != ProcedureId::Geometric;
        if uses_gamma && self.gamma.is_none() {
            self.gamma = Some(GammaSpec::InverseSquare);
        }
        if self.id == ProcedureId::ContinuousSpending && self.spending.is_none() {
            self.spending = Some(SpendingSpec::Interpolation);
        }
    }

    /// Display name for output: the label if set, the id otherwise.
    pub fn name(&self) -> String {
        self.label.clone().unwrap_or_else(|| self.id_str().to_string())
    }

    pub fn id_str(&self) -> &'static str {
        match self.id {
            ProcedureId::AlphaSpending => "alpha-spending",
            ProcedureId::AdaptiveSpending => "adaptive-spending",
            ProcedureId::OnlineFallback => "online-fallback",
            ProcedureId::Geometric => "geometric",
            ProcedureId::ContinuousGraph => "continuous-graph",
            ProcedureId::ContinuousSpending => "continuous-spending",
        }
    }

    /// Builds the library procedure; error paths are relative to this entry.
    pub fn build(&self, alpha: f64, scenario_lambda: f64) -> Result<ProcedureConfig, ConfigError> {
        let reject = |field: &str, present: bool| -> Result<(), ConfigError> {
            if present {
                Err(ConfigError::new(field, format!("does not apply to {}", self.id_str())))
            } else {
                Ok(())
            }
        };
        let closable = matches!(self.id, ProcedureId::ContinuousGraph | ProcedureId::ContinuousSpending);
        reject("closed", self.closed && !closable)?;
        reject("pi", self.pi.is_some() && self.id != ProcedureId::Geometric)?;
        reject("gamma", self.gamma.is_some() && self.id == ProcedureId::Geometric)?;
        reject(
            "spending",
            self.spending.is_some() && self.id != ProcedureId::ContinuousSpending,
        )?;
        reject(
            "lambda",
            self.lambda.is_some() && matches!(self.id, ProcedureId::AlphaSpending | ProcedureId::OnlineFallback),
        )?;

        let lambda = self.lambda.unwrap_or(scenario_lambda);
        let gamma = match self.gamma.clone().unwrap_or(GammaSpec::InverseSquare) {
            GammaSpec::InverseSquare => SpendingSequence::InverseSquare,
            GammaSpec::Geometric { pi } => SpendingSequence::Geometric { pi },
            GammaSpec::Explicit { values } => SpendingSequence::Explicit(values),
        };
        gamma
            .validate()
            .map_err(|e| ConfigError::new("gamma", strip_name(&e)))?;
        let graph = GraphWeights::Shifted(gamma.clone());
        let kind = match self.id {
            ProcedureId::AlphaSpending => ProcedureKind::AlphaSpending { gamma },
            ProcedureId::AdaptiveSpending => ProcedureKind::AdaptiveSpending { gamma, lambda },
            ProcedureId::OnlineFallback => ProcedureKind::OnlineFallback { gamma, graph },
            ProcedureId::Geometric => {
                let pi = self
                    .pi
                    .ok_or_else(|| ConfigError::new("pi", "required for geometric"))?;
                ProcedureKind::Geometric {
                    pi: Schedule::Constant(pi),
                    lambda: Schedule::Constant(lambda),
                }
            }
            ProcedureId::ContinuousGraph => ProcedureKind::ContinuousGraph {
                gamma,
                graph,
                lambda: Schedule::Constant(lambda),
                closed: self.closed,
            },
            ProcedureId::ContinuousSpending => {
                let function = match self.spending.clone().unwrap_or(SpendingSpec::Interpolation) {
                    SpendingSpec::Interpolation => SpendingFunction::interpolation(gamma, lambda),
                    SpendingSpec::Power { coef, exponent } => SpendingFunction::power(coef, exponent, lambda),
                }
                .map_err(|e| ConfigError::new("spending", strip_name(&e)))?;
                ProcedureKind::ContinuousSpending {
                    function,
                    closed: self.closed,
                }
            }
        };
        ProcedureConfig::new(alpha, kind).map_err(|e| match e {
            onfwer::Error::InvalidParameter { name, reason } => ConfigError::new(name, reason),
            other => ConfigError::new("<value>", other),
        })
    }
}

fn strip_name(e: &onfwer::Error) -> String {
    match e {
        onfwer::Error::InvalidParameter { name, reason } => format!("{name} {reason}"),
        other => other.to_string(),
    }
}
