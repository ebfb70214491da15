//! Experiment configuration, read from TOML.

use std::path::{Path, PathBuf};

use cgqmc_core::emulator::{EvolutionMode, HyperparameterRanges, DEFAULT_DENSE_CAP};
use cgqmc_core::ising::DEFAULT_ENUMERATION_CAP;
use cgqmc_core::spectral::{SamplingMode, DEFAULT_SPECTRAL_CAP};
use cgqmc_core::{ModelClass, ProposalStrategy, StrategyKind};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{LabError, LabResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    ChainEnsemble,
    SpectralSweep,
    TemperatureSweep,
    ProposalStatistics,
}

impl ExperimentKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ExperimentKind::ChainEnsemble => "chain-ensemble",
            ExperimentKind::SpectralSweep => "spectral-sweep",
            ExperimentKind::TemperatureSweep => "temperature-sweep",
            ExperimentKind::ProposalStatistics => "proposal-statistics",
        }
    }
}

/// Where instances come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceSource {
    /// Instance files; when nonempty the generator settings are ignored.
    #[serde(default)]
    pub files: Vec<PathBuf>,
    #[serde(default = "default_model_class")]
    pub model_class: String,
    #[serde(default)]
    pub n: Vec<usize>,
    /// Instances per system size.
    #[serde(default = "one")]
    pub count: usize,
    /// Per-size overrides of `count`, as `[[n, count], ...]`.
    #[serde(default)]
    pub count_overrides: Vec<(usize, usize)>,
}

fn default_model_class() -> String {
    "fully_connected".into()
}

fn one() -> usize {
    1
}

impl InstanceSource {
    pub fn count_for(&self, n: usize) -> usize {
        self.count_overrides
            .iter()
            .find(|(m, _)| *m == n)
            .map_or(self.count, |&(_, c)| c)
    }

    pub fn model_class(&self) -> LabResult<ModelClass> {
        self.model_class
            .parse()
            .map_err(|e: cgqmc_core::Error| LabError::Config(e.to_string()))
    }
}

/// A group size: a fixed integer or `"sqrt"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupSize {
    Fixed(usize),
    Sqrt,
}

impl Serialize for GroupSize {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            GroupSize::Fixed(q) => s.serialize_u64(*q as u64),
            GroupSize::Sqrt => s.serialize_str("sqrt"),
        }
    }
}

impl<'de> Deserialize<'de> for GroupSize {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(u64),
            Name(String),
        }
        match Raw::deserialize(d)? {
            Raw::Int(q) => Ok(GroupSize::Fixed(q as usize)),
            Raw::Name(s) if s == "sqrt" => Ok(GroupSize::Sqrt),
            Raw::Name(s) => Err(serde::de::Error::custom(format!(
                "group size must be an integer or \"sqrt\", got \"{s}\""
            ))),
        }
    }
}

impl GroupSize {
    pub fn label(&self) -> String {
        match self {
            GroupSize::Fixed(q) => q.to_string(),
            GroupSize::Sqrt => "sqrt".into(),
        }
    }

    /// Group sizes to evaluate for a spectral study at `n`: the two integers
    /// bracketing `sqrt(n)`, or the root itself when it is integral.
    pub fn spectral_sizes(&self, n: usize) -> Vec<usize> {
        match self {
            GroupSize::Fixed(q) => vec![*q],
            GroupSize::Sqrt => {
                let lo = (n as f64).sqrt().floor() as usize;
                if lo * lo == n {
                    vec![lo]
                } else {
                    vec![lo, lo + 1]
                }
            }
        }
    }

    /// Group size for a chain at `n`; `sqrt` rounds to the nearest integer.
    pub fn chain_size(&self, n: usize) -> usize {
        match self {
            GroupSize::Fixed(q) => *q,
            GroupSize::Sqrt => ((n as f64).sqrt().round() as usize).clamp(1, n),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrategySpec {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group_size: Option<GroupSize>,
}

impl StrategySpec {
    pub fn new(kind: StrategyKind, group_size: Option<GroupSize>) -> Self {
        Self {
            kind: kind.as_str().into(),
            group_size,
        }
    }

    pub fn kind(&self) -> LabResult<StrategyKind> {
        self.kind
            .parse()
            .map_err(|e: cgqmc_core::Error| LabError::Config(e.to_string()))
    }

    pub fn label(&self) -> String {
        match self.group_size {
            Some(g) => format!("{}(q={})", self.kind, g.label()),
            None => self.kind.clone(),
        }
    }
}

/// Temperatures: an explicit list or a log-spaced grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Temperatures {
    #[serde(default)]
    pub values: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub log_grid: Option<LogGrid>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogGrid {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl Temperatures {
    pub fn single(t: f64) -> Self {
        Self {
            values: vec![t],
            log_grid: None,
        }
    }

    /// Sorted, deduplicated list of temperatures.
    pub fn resolve(&self) -> Vec<f64> {
        let mut out = self.values.clone();
        if let Some(g) = self.log_grid {
            if g.points == 1 {
                out.push(g.min);
            } else {
                let (lmin, lmax) = (g.min.ln(), g.max.ln());
                for i in 0..g.points {
                    let t = (lmin + (lmax - lmin) * i as f64 / (g.points - 1) as f64).exp();
                    // Snap away round-off so grid points such as 1.0 come out exact.
                    out.push(format!("{t:.11e}").parse().expect("formatted float parses"));
                }
            }
        }
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmulatorModeName {
    Exact,
    Trotter,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmulatorConfig {
    #[serde(default = "default_mode")]
    pub mode: EmulatorModeName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trotter_slices: Option<usize>,
    #[serde(default = "default_dense_cap")]
    pub dense_cap: usize,
    #[serde(default = "default_gamma")]
    pub gamma_range: (f64, f64),
    #[serde(default = "default_t")]
    pub t_range: (u32, u32),
}

fn default_mode() -> EmulatorModeName {
    EmulatorModeName::Exact
}

fn default_dense_cap() -> usize {
    DEFAULT_DENSE_CAP
}

fn default_gamma() -> (f64, f64) {
    HyperparameterRanges::default().gamma
}

fn default_t() -> (u32, u32) {
    HyperparameterRanges::default().t
}

impl Default for EmulatorConfig {
    fn default() -> Self {
        Self {
            mode: default_mode(),
            trotter_slices: None,
            dense_cap: default_dense_cap(),
            gamma_range: default_gamma(),
            t_range: default_t(),
        }
    }
}

impl EmulatorConfig {
    pub fn evolution_mode(&self) -> EvolutionMode {
        match self.mode {
            EmulatorModeName::Exact => EvolutionMode::Exact,
            EmulatorModeName::Trotter => EvolutionMode::Trotter {
                slices: self.trotter_slices,
            },
        }
    }

    pub fn ranges(&self) -> HyperparameterRanges {
        HyperparameterRanges {
            gamma: self.gamma_range,
            t: self.t_range,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MultipleEstimator {
    /// `n_s` single proposals from random starts.
    Bruteforce,
    /// Averaged composed kernels of sampled draws.
    Rowwise,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectralConfig {
    #[serde(default = "default_samples")]
    pub samples_per_row: usize,
    #[serde(default = "default_sampling")]
    pub sampling: String,
    #[serde(default = "default_estimator")]
    pub multiple_estimator: MultipleEstimator,
    /// Brute-force transitions; `(2^n)^2` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bruteforce_samples: Option<usize>,
    /// Bootstrap replicates for per-instance gap errors; 0 disables them.
    #[serde(default)]
    pub bootstrap: usize,
    #[serde(default = "default_spectral_cap")]
    pub cap: usize,
}

fn default_samples() -> usize {
    30
}

fn default_sampling() -> String {
    "paired".into()
}

fn default_estimator() -> MultipleEstimator {
    MultipleEstimator::Bruteforce
}

fn default_spectral_cap() -> usize {
    DEFAULT_SPECTRAL_CAP
}

impl Default for SpectralConfig {
    fn default() -> Self {
        Self {
            samples_per_row: default_samples(),
            sampling: default_sampling(),
            multiple_estimator: default_estimator(),
            bruteforce_samples: None,
            bootstrap: 0,
            cap: default_spectral_cap(),
        }
    }
}

impl SpectralConfig {
    pub fn sampling_mode(&self) -> LabResult<SamplingMode> {
        match self.sampling.as_str() {
            "paired" => Ok(SamplingMode::Paired),
            "independent" => Ok(SamplingMode::Independent),
            other => Err(LabError::Config(format!(
                "sampling must be \"paired\" or \"independent\", got \"{other}\""
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainConfig {
    /// Steps for quantum strategies.
    #[serde(default = "default_quantum_steps")]
    pub steps: u64,
    /// Steps for classical strategies; falls back to `steps`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classical_steps: Option<u64>,
    #[serde(default = "default_chains")]
    pub chains: usize,
    /// Stride of the ensemble-average and cumulative outputs.
    #[serde(default = "default_stride")]
    pub output_stride: u64,
    /// Write one per-step trace file per chain.
    #[serde(default)]
    pub write_traces: bool,
    #[serde(default = "default_record_cap")]
    pub record_cap: usize,
    /// Pinned initial state as a bitstring; random when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_state: Option<String>,
    #[serde(default = "default_enum_cap")]
    pub enumeration_cap: usize,
    #[serde(default = "default_levels")]
    pub levels: usize,
}

fn default_quantum_steps() -> u64 {
    10_000
}

fn default_chains() -> usize {
    10
}

fn default_stride() -> u64 {
    10
}

fn default_record_cap() -> usize {
    200_000
}

fn default_enum_cap() -> usize {
    DEFAULT_ENUMERATION_CAP
}

fn default_levels() -> usize {
    10
}

impl Default for ChainConfig {
    fn default() -> Self {
        Self {
            steps: default_quantum_steps(),
            classical_steps: Some(100_000),
            chains: default_chains(),
            output_stride: default_stride(),
            write_traces: false,
            record_cap: default_record_cap(),
            initial_state: None,
            enumeration_cap: default_enum_cap(),
            levels: default_levels(),
        }
    }
}

/// A complete, serialisable experiment description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    #[serde(default)]
    pub master_seed: u64,
    pub instances: InstanceSource,
    pub strategies: Vec<StrategySpec>,
    pub temperatures: Temperatures,
    #[serde(default)]
    pub emulator: EmulatorConfig,
    #[serde(default)]
    pub spectral: SpectralConfig,
    #[serde(default)]
    pub chain: ChainConfig,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> LabResult<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| LabError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> LabResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serialises")
    }

    /// Hex SHA-256 of the canonical TOML form.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_toml().as_bytes()))
    }

    pub fn strategy(&self, spec: &StrategySpec, q: Option<usize>) -> LabResult<ProposalStrategy> {
        let mut s = ProposalStrategy::new(spec.kind()?, q).map_err(|e| LabError::Config(e.to_string()))?;
        s.ranges = self.emulator.ranges();
        s.mode = self.emulator.evolution_mode();
        s.dense_cap = self.emulator.dense_cap;
        Ok(s)
    }

    pub fn validate(&self) -> LabResult<()> {
        let cfg_err = |m: String| Err(LabError::Config(m));
        if self.strategies.is_empty() {
            return cfg_err("at least one strategy is required".into());
        }
        if self.instances.files.is_empty() {
            if self.instances.n.is_empty() {
                return cfg_err("instances need either files or a list of n".into());
            }
            let class = self.instances.model_class()?;
            if class == ModelClass::Custom {
                return cfg_err("the custom model class cannot be generated".into());
            }
            if self.instances.n.iter().any(|&n| n < 2) {
                return cfg_err("generated instances need n >= 2".into());
            }
        }
        let temps = self.temperatures.resolve();
        if temps.is_empty() {
            return cfg_err("at least one temperature is required".into());
        }
        if temps.iter().any(|&t| !(t > 0.0 && t.is_finite())) {
            return cfg_err("temperatures must be positive and finite".into());
        }
        if let Some(g) = self.temperatures.log_grid {
            if !(g.min > 0.0 && g.max >= g.min && g.points >= 1) {
                return cfg_err("log grid needs 0 < min <= max and at least one point".into());
            }
        }
        for spec in &self.strategies {
            let kind = spec.kind()?;
            match (kind.is_coarse_grained(), spec.group_size) {
                (true, None) => return cfg_err(format!("strategy {kind} needs group_size")),
                (false, Some(_)) => return cfg_err(format!("strategy {kind} takes no group_size")),
                (_, Some(GroupSize::Fixed(0))) => return cfg_err("group_size must be positive".into()),
                _ => {}
            }
        }
        self.emulator.ranges().validate().map_err(|e| LabError::Config(e.to_string()))?;
        if self.emulator.trotter_slices == Some(0) {
            return cfg_err("trotter_slices must be at least 1".into());
        }
        self.spectral.sampling_mode()?;
        if self.spectral.samples_per_row == 0 {
            return cfg_err("samples_per_row must be at least 1".into());
        }
        match self.kind {
            ExperimentKind::ChainEnsemble | ExperimentKind::ProposalStatistics => {
                if self.chain.steps == 0 || self.chain.classical_steps == Some(0) {
                    return cfg_err("chains need at least one step".into());
                }
                if self.chain.chains == 0 {
                    return cfg_err("at least one chain per strategy is required".into());
                }
            }
            ExperimentKind::SpectralSweep | ExperimentKind::TemperatureSweep => {
                if let Some(&n) = self.instances.n.iter().find(|&&n| n > self.spectral.cap) {
                    return Err(LabError::Resource(format!(
                        "n = {n} exceeds the spectral cap of {}",
                        self.spectral.cap
                    )));
                }
            }
        }
        Ok(())
    }
}
