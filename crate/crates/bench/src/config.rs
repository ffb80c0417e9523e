//! Experiment configuration, loaded from TOML.

use std::path::{Path, PathBuf};

use mrta::allocator::Method;
use mrta::baselines::GaConfig;
use mrta::clustering::{InitStrategy, KMeansConfig};
use mrta::metrics::DEFAULT_DEPOT_EXCLUSION_RADIUS;
use mrta::scenario_io::ScenarioParams;
use serde::{Deserialize, Serialize};

use crate::CliError;

/// K-means settings shared by every run; `k` and the seed come from the
/// scenario and the experiment seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KMeansSettings {
    pub max_iterations: usize,
    pub tolerance: f64,
    pub init_strategy: InitStrategy,
}

impl Default for KMeansSettings {
    fn default() -> Self {
        let d = KMeansConfig::default();
        KMeansSettings { max_iterations: d.max_iterations, tolerance: d.tolerance, init_strategy: d.init_strategy }
    }
}

impl KMeansSettings {
    pub fn config(&self, k: usize, seed: u64) -> KMeansConfig {
        KMeansConfig {
            k,
            seed,
            max_iterations: self.max_iterations,
            tolerance: self.tolerance,
            init_strategy: self.init_strategy,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Scenario file; when absent, one scenario per seed is generated from
    /// `generate`.
    pub scenario: Option<PathBuf>,
    pub generate: ScenarioParams,
    pub methods: Vec<Method>,
    pub repetitions: usize,
    pub seeds: Vec<u64>,
    pub output_dir: PathBuf,
    pub emit_plots: bool,
    pub depot_exclusion_radius: f64,
    pub kmeans: KMeansSettings,
    pub ga: GaConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            scenario: None,
            generate: ScenarioParams::default(),
            methods: Method::ALL.to_vec(),
            repetitions: 5,
            seeds: (1..=5).collect(),
            output_dir: PathBuf::from("results"),
            emit_plots: false,
            depot_exclusion_radius: DEFAULT_DEPOT_EXCLUSION_RADIUS,
            kmeans: KMeansSettings::default(),
            ga: GaConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Data(m) => CliError::Data(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Data(format!("invalid config: {e}")))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.methods.is_empty() {
            return Err(CliError::Usage("methods list is empty".into()));
        }
        if self.repetitions == 0 {
            return Err(CliError::Usage("repetitions must be at least 1".into()));
        }
        if self.seeds.is_empty() {
            return Err(CliError::Usage("seeds list is empty".into()));
        }
        if !(self.depot_exclusion_radius.is_finite() && self.depot_exclusion_radius >= 0.0) {
            return Err(CliError::Usage("depot_exclusion_radius must be non-negative".into()));
        }
        self.ga.validate().map_err(|e| CliError::Usage(format!("ga: {e}")))?;
        self.kmeans.config(1, 0).validate().map_err(|e| CliError::Usage(format!("kmeans: {e}")))?;
        Ok(())
    }
}
