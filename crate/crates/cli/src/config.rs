//! Experiment configuration: one JSON file plus flag overrides.

use std::path::{Path, PathBuf};

use gausslearn_core::estimation::NoiseKind;
use gausslearn_core::gaussian::StateBounds;
use gausslearn_core::symplectic::Tolerances;
use serde::{Deserialize, Serialize};

/// Pipelines exposed by the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Sample,
    Estimate,
    LearnHamiltonian,
    LearnGraph,
    LearnTrace,
    VerifyBounds,
    Benchmark,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Sample => "sample",
            Task::Estimate => "estimate",
            Task::LearnHamiltonian => "learn-hamiltonian",
            Task::LearnGraph => "learn-graph",
            Task::LearnTrace => "learn-trace",
            Task::VerifyBounds => "verify-bounds",
            Task::Benchmark => "benchmark",
        }
    }
}

/// Interaction graph of a generated state; random families draw from the run seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GraphSpec {
    Edgeless { m: usize },
    Path { m: usize },
    Cycle { m: usize },
    Tree { m: usize, max_deg: usize },
    BoundedDegree { m: usize, max_deg: usize, p: f64 },
    Edges { m: usize, edges: Vec<(usize, usize)> },
}

impl GraphSpec {
    pub fn m(&self) -> usize {
        match *self {
            GraphSpec::Edgeless { m }
            | GraphSpec::Path { m }
            | GraphSpec::Cycle { m }
            | GraphSpec::Tree { m, .. }
            | GraphSpec::BoundedDegree { m, .. }
            | GraphSpec::Edges { m, .. } => m,
        }
    }
}

/// Where the state comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum StateSpec {
    /// Seeded random state on a graph, drawn within `bounds`.
    Random { graph: GraphSpec },
    /// {m, t, V, optional H} given inline.
    Inline(crate::io::StateFile),
    /// {m, t, V, optional H} read from a JSON file.
    File { path: PathBuf },
}

/// Noise-injection mode: V̂ = V + ζ-bounded symmetric noise instead of sampling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    /// Defaults to the ζ of the learning parameters.
    #[serde(default)]
    pub zeta: Option<f64>,
    #[serde(default = "default_noise_kind")]
    pub kind: NoiseKind,
}

fn default_noise_kind() -> NoiseKind {
    NoiseKind::Uniform
}

/// User-chosen learning constants replacing the theorem values.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Overrides {
    pub l: Option<usize>,
    pub zeta: Option<f64>,
    pub eta: Option<f64>,
    pub xi: Option<usize>,
}

impl Overrides {
    pub fn any(&self) -> bool {
        self.l.is_some() || self.zeta.is_some() || self.eta.is_some() || self.xi.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub task: Task,
    #[serde(default = "default_state")]
    pub state: StateSpec,
    #[serde(default = "default_bounds")]
    pub bounds: StateBounds,
    #[serde(default = "default_eps")]
    pub eps: f64,
    #[serde(default = "default_delta")]
    pub delta: f64,
    /// Interaction floor for graph learning; falls back to `bounds.kappa`.
    #[serde(default)]
    pub kappa: Option<f64>,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    /// Samples per run for sampling-based tasks.
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub noise: Option<NoiseSpec>,
    #[serde(default)]
    pub overrides: Overrides,
    /// Final projection of Ĥ onto {H ⪰ τI, graph support, within eps}.
    #[serde(default)]
    pub project_tau: Option<f64>,
    /// Instances per seed for verify-bounds.
    #[serde(default = "default_instances")]
    pub instances: usize,
    /// Sample sizes for benchmark.
    #[serde(default = "default_n_grid")]
    pub n_grid: Vec<usize>,
    /// Independent batches per sample size in benchmark; each seed reports their median.
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    /// Largest admissible number of candidate neighborhoods for learn-graph.
    #[serde(default = "default_budget")]
    pub search_budget: f64,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub threads: Option<usize>,
    #[serde(default)]
    pub tolerances: Tolerances,
}

fn default_state() -> StateSpec {
    StateSpec::Random { graph: GraphSpec::Path { m: 4 } }
}

fn default_bounds() -> StateBounds {
    StateBounds { s: 1.5, beta_max: 1.0, beta_min: 0.3, t_max: 1.0, delta_deg: 2, kappa: 0.0 }
}

fn default_eps() -> f64 {
    0.1
}

fn default_delta() -> f64 {
    0.1
}

fn default_seeds() -> Vec<u64> {
    vec![0]
}

fn default_samples() -> usize {
    10_000
}

fn default_instances() -> usize {
    200
}

fn default_n_grid() -> Vec<usize> {
    vec![1_000, 4_000, 16_000, 64_000]
}

fn default_replicates() -> usize {
    16
}

fn default_budget() -> f64 {
    1e6
}

impl ExperimentConfig {
    pub fn new(task: Task) -> Self {
        Self {
            task,
            state: default_state(),
            bounds: default_bounds(),
            eps: default_eps(),
            delta: default_delta(),
            kappa: None,
            seeds: default_seeds(),
            samples: default_samples(),
            noise: None,
            overrides: Overrides::default(),
            project_tau: None,
            instances: default_instances(),
            n_grid: default_n_grid(),
            replicates: default_replicates(),
            search_budget: default_budget(),
            output_dir: None,
            threads: None,
            tolerances: Tolerances::default(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        serde_json::from_str(text).map_err(|e| ConfigError::new(format!("invalid config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::new(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Interaction floor used by graph learning and state generation.
    pub fn kappa(&self) -> f64 {
        self.kappa.unwrap_or(self.bounds.kappa)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let fail = |msg: &str| Err(ConfigError::new(msg.into()));
        if self.seeds.is_empty() {
            return fail("seeds must be nonempty");
        }
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return fail("eps must be positive");
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return fail("delta must lie in (0, 1)");
        }
        if self.bounds.validate().is_err() {
            return fail("bounds require s >= 1, beta_max >= beta_min > 0, t_max >= 0, kappa >= 0");
        }
        if self.threads == Some(0) {
            return fail("threads must be positive");
        }
        if self.samples == 0 && matches!(self.task, Task::Sample | Task::Estimate | Task::LearnTrace) {
            return fail("samples must be positive");
        }
        if self.task == Task::LearnGraph && self.kappa().partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
            return fail("learn-graph needs kappa > 0");
        }
        if self.task == Task::Benchmark && (self.n_grid.is_empty() || self.n_grid.contains(&0) || self.replicates == 0) {
            return fail("n_grid must be nonempty and positive, replicates positive");
        }
        if self.task == Task::VerifyBounds && self.instances == 0 {
            return fail("instances must be positive");
        }
        match &self.state {
            StateSpec::File { path } if !path.exists() => return fail(&format!("state file {} does not exist", path.display())),
            StateSpec::Random { graph } if graph.m() == 0 => return fail("graph needs at least one mode"),
            StateSpec::Inline(s) if s.parts().is_err() => return fail("inline state has inconsistent dimensions"),
            _ => {}
        }
        Ok(())
    }
}

/// A configuration problem; the CLI exits with status 2.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub message: String,
}

impl ConfigError {
    pub fn new(message: String) -> Self {
        Self { message }
    }
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "harness::config: {}", self.message)
    }
}

impl std::error::Error for ConfigError {}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_uses_defaults() {
        let c = ExperimentConfig::from_json(r#"{"task": "learn-graph", "kappa": 0.2}"#).unwrap();
        assert_eq!(c.task, Task::LearnGraph);
        assert_eq!(c.seeds, vec![0]);
        assert_eq!(c.tolerances, Tolerances::default());
        c.validate().unwrap();
    }

    #[test]
    fn graph_and_state_specs_parse() {
        let c = ExperimentConfig::from_json(
            r#"{"task": "estimate", "state": {"kind": "random", "graph": {"kind": "bounded-degree", "m": 6, "max_deg": 2, "p": 0.5}},
                "noise": {"zeta": 0.01, "kind": "extremal"}}"#,
        )
        .unwrap();
        assert_eq!(c.state, StateSpec::Random { graph: GraphSpec::BoundedDegree { m: 6, max_deg: 2, p: 0.5 } });
        assert_eq!(c.noise.unwrap().kind, NoiseKind::Extremal);
        let inline = ExperimentConfig::from_json(r#"{"task": "sample", "state": {"kind": "inline", "m": 1, "t": [0, 0], "V": [0.5, 0, 0, 0.5]}}"#).unwrap();
        inline.validate().unwrap();
    }

    #[test]
    fn invalid_configs_are_rejected() {
        assert!(ExperimentConfig::from_json(r#"{"task": "nope"}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"task": "sample", "bogus": 1}"#).is_err());
        let mut c = ExperimentConfig::new(Task::Sample);
        c.seeds.clear();
        assert!(c.validate().is_err());
        let mut c = ExperimentConfig::new(Task::LearnGraph);
        c.kappa = None;
        assert!(c.validate().is_err());
        let mut c = ExperimentConfig::new(Task::Sample);
        c.state = StateSpec::File { path: "/nonexistent/state.json".into() };
        assert!(c.validate().is_err());
    }
}
