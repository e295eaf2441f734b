use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::curriculum::{Metric, MetricParams, TaskSet};
use crate::error::{Error, Result};
use crate::learner::LearnerConfig;
use crate::mdp::{load_task_file, optimal_return, EnvKind, TaskSpec};
use crate::optimizers::{Algorithm, OptimizerConfig, SearchBudget};

pub const DEFAULT_TRIALS: usize = 10;

/// Pit penalty. The regret floor adds one step cost per remaining step.
const GRIDWORLD_PIT: f64 = 2500.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricConfig {
    pub name: Metric,
    /// Defaults from the final task's optimum: 95% of it for GridWorld,
    /// the optimum itself for BlockDude.
    pub threshold: Option<f64>,
    /// Defaults to the final task's worst plausible episode return.
    pub regret_floor: Option<f64>,
    /// Defaults to the whole final-task budget.
    pub regret_episodes: Option<usize>,
    pub jumpstart_episodes: usize,
    pub eval_interval: usize,
    pub eval_episodes: usize,
}

impl Default for MetricConfig {
    fn default() -> Self {
        MetricConfig {
            name: Metric::Jumpstart,
            threshold: None,
            regret_floor: None,
            regret_episodes: None,
            jumpstart_episodes: 10,
            eval_interval: 10,
            eval_episodes: 1,
        }
    }
}

impl MetricConfig {
    /// Fills in the defaults that depend on the final task.
    pub fn resolve(&self, final_task: &TaskSpec) -> Result<MetricParams> {
        let threshold = match self.threshold {
            Some(g) => g,
            None => default_threshold(final_task)?,
        };
        let regret_floor = self.regret_floor.unwrap_or_else(|| default_regret_floor(final_task));
        let params = MetricParams {
            metric: self.name,
            threshold,
            regret_floor,
            regret_episodes: self.regret_episodes,
            jumpstart_episodes: self.jumpstart_episodes,
            eval_interval: self.eval_interval,
            eval_episodes: self.eval_episodes,
        };
        params.validate()?;
        let budget = final_task.episode_budget;
        for (field, n) in [
            ("metric.jumpstart_episodes", Some(self.jumpstart_episodes)),
            ("metric.regret_episodes", self.regret_episodes),
        ] {
            if n.is_some_and(|n| n > budget) {
                return Err(Error::config(format!(
                    "{field} exceeds the final task's {budget} episodes"
                )));
            }
        }
        Ok(params)
    }
}

pub fn default_threshold(task: &TaskSpec) -> Result<f64> {
    let best = optimal_return(task).ok_or_else(|| {
        Error::config(format!(
            "metric.threshold: final task `{}` cannot reach its goal, so no default exists",
            task.id
        ))
    })?;
    Ok(match task.kind {
        EnvKind::GridWorld => best - 0.05 * best.abs(),
        EnvKind::BlockDude => best,
    })
}

pub fn default_regret_floor(task: &TaskSpec) -> f64 {
    match task.kind {
        EnvKind::GridWorld => -(GRIDWORLD_PIT + task.max_steps.saturating_sub(1) as f64),
        EnvKind::BlockDude => -(task.max_steps as f64),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// `rl`, or `surrogate:<path>` for a lookup-table objective.
    #[serde(default = "default_objective")]
    pub objective: String,
    pub task_set: Option<PathBuf>,
    /// Id of the final task; must match the task set's `final=` entry.
    pub final_task: Option<String>,
    pub max_len: usize,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub comparison_mode: bool,
    #[serde(default = "default_algorithms")]
    pub algorithms: Vec<Algorithm>,
    #[serde(default)]
    pub metric: MetricConfig,
    #[serde(default)]
    pub learner: LearnerConfig,
    #[serde(default)]
    pub optimizer: OptimizerConfig,
    #[serde(default)]
    pub budget: SearchBudget,
    pub output: Option<PathBuf>,
}

fn default_objective() -> String {
    "rl".into()
}

fn default_trials() -> usize {
    DEFAULT_TRIALS
}

fn default_algorithms() -> Vec<Algorithm> {
    vec![
        Algorithm::Greedy,
        Algorithm::Beam,
        Algorithm::Tabu,
        Algorithm::Genetic,
        Algorithm::Aco,
    ]
}

#[derive(Debug, Clone, PartialEq)]
pub enum ObjectiveSpec {
    Rl,
    Surrogate(PathBuf),
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::config(e.to_string().trim_end().to_string()))
    }

    pub fn objective_spec(&self) -> Result<ObjectiveSpec> {
        match self.objective.as_str() {
            "rl" => Ok(ObjectiveSpec::Rl),
            s => match s.strip_prefix("surrogate:") {
                Some(path) if !path.is_empty() => Ok(ObjectiveSpec::Surrogate(PathBuf::from(path))),
                _ => Err(Error::config(format!(
                    "objective: expected `rl` or `surrogate:<path>`, got `{s}`"
                ))),
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::config("trials must be at least 1"));
        }
        if self.algorithms.is_empty() {
            return Err(Error::config("algorithms must name at least one optimizer"));
        }
        for (i, a) in self.algorithms.iter().enumerate() {
            if self.algorithms[..i].contains(a) {
                return Err(Error::config(format!("algorithms: `{a}` is listed twice")));
            }
        }
        if let ObjectiveSpec::Rl = self.objective_spec()? {
            if self.task_set.is_none() {
                return Err(Error::config("task_set: required when objective = \"rl\""));
            }
            if self.final_task.is_none() {
                return Err(Error::config("final_task: required when objective = \"rl\""));
            }
        }
        self.learner.validate()?;
        self.optimizer.validate()?;
        self.budget.validate()
    }

    /// Hex sha256 of the canonical JSON form of the effective configuration.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("config serializes");
        Sha256::digest(&canonical).iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Reads a task-set file: one map path per line, plus one `final=<path>`.
/// Blank lines and `#` comments are ignored; paths are relative to the file.
pub fn load_task_set(path: &Path) -> Result<TaskSet> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let base = path.parent().unwrap_or(Path::new("."));
    let mut candidates = Vec::new();
    let mut final_task = None;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let located = |msg: String| Error::file(path, format!("line {}: {msg}", i + 1));
        if let Some(rest) = line.strip_prefix("final=") {
            if final_task.is_some() {
                return Err(located("second `final=` entry".into()));
            }
            final_task = Some(load_task_file(&base.join(rest.trim()))?);
        } else {
            candidates.push(load_task_file(&base.join(line))?);
        }
    }
    let final_task = final_task.ok_or_else(|| Error::file(path, "no `final=<path>` entry"))?;
    if candidates.iter().any(|t| t.id == final_task.id) {
        return Err(Error::file(
            path,
            format!("final task `{}` is also listed as a candidate", final_task.id),
        ));
    }
    TaskSet::new(candidates, final_task).map_err(|e| Error::file(path, e.to_string()))
}
