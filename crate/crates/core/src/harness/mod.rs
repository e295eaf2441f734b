//! Experiment configuration, orchestration and persistence.

mod config;
mod report;

use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{Duration, Instant};

use serde::Serialize;

use crate::curriculum::{
    curriculum_space_size, run_curriculum, Curriculum, Evaluation, EvaluationStep, Memoized, Metric,
    MetricParams, Objective, RlObjective, SurrogateObjective, TaskSet,
};
use crate::error::{Error, Result};
use crate::learner::LearnerConfig;
use crate::mdp::{optimal_return, TaskSpec};
use crate::optimizers::{run_comparison, run_search, OptimizerReport};

pub use config::{
    default_regret_floor, default_threshold, load_task_set, ExperimentConfig, MetricConfig, ObjectiveSpec,
    DEFAULT_TRIALS,
};
pub use report::{log_csv, write_atomic, AlgorithmSummary, ExperimentReport, ResultRow, CSV_COLUMNS};

pub const REPORT_FILE: &str = "report.json";
pub const TIMING_FILE: &str = "timing.json";

/// The objective an experiment optimizes.
pub enum ProblemObjective {
    Rl(RlObjective),
    Surrogate(SurrogateObjective),
}

impl Objective for ProblemObjective {
    fn task_names(&self) -> &[String] {
        match self {
            ProblemObjective::Rl(o) => o.task_names(),
            ProblemObjective::Surrogate(o) => o.task_names(),
        }
    }

    fn evaluate(&self, c: &Curriculum) -> Result<Evaluation> {
        match self {
            ProblemObjective::Rl(o) => o.evaluate(c),
            ProblemObjective::Surrogate(o) => o.evaluate(c),
        }
    }
}

/// A loaded experiment: the memoized objective plus what the report needs.
pub struct Problem {
    pub objective: Memoized<ProblemObjective>,
    pub params: Option<MetricParams>,
    pub final_task: Option<String>,
}

impl Problem {
    pub fn names(&self) -> &[String] {
        self.objective.task_names()
    }

    pub fn evaluate_encoded(&self, encoding: &str) -> Result<Evaluation> {
        let c = Curriculum::parse(encoding, self.names())?;
        self.objective.evaluate(&c)
    }
}

pub struct Experiment {
    pub config: ExperimentConfig,
    /// Directory relative paths in the config resolve against.
    pub base_dir: PathBuf,
}

pub struct ExperimentOutput {
    pub report: ExperimentReport,
    pub runs: Vec<OptimizerReport>,
    pub names: Vec<String>,
    pub wall_time: Duration,
}

#[derive(Serialize)]
struct Timing {
    wall_time_seconds: f64,
}

impl Experiment {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let config = ExperimentConfig::parse(&text).map_err(|e| Error::file(path, e.to_string()))?;
        let base_dir = path.parent().unwrap_or(Path::new(".")).to_path_buf();
        Ok(Experiment { config, base_dir })
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn output_dir(&self) -> PathBuf {
        self.resolve(self.config.output.as_deref().unwrap_or(Path::new("out")))
    }

    pub fn load_task_set(&self) -> Result<TaskSet> {
        let path = self
            .config
            .task_set
            .as_deref()
            .ok_or_else(|| Error::config("task_set: required when objective = \"rl\""))?;
        let tasks = load_task_set(&self.resolve(path))?;
        let wanted = self.config.final_task.as_deref().ok_or_else(|| Error::config("final_task: missing"))?;
        if tasks.final_task.id != wanted {
            return Err(Error::config(format!(
                "final_task: `{wanted}` does not match the task set's final task `{}`",
                tasks.final_task.id
            )));
        }
        Ok(tasks)
    }

    pub fn build_problem(&self) -> Result<Problem> {
        let cfg = &self.config;
        cfg.validate()?;
        let (objective, params, final_task) = match cfg.objective_spec()? {
            ObjectiveSpec::Rl => {
                let tasks = self.load_task_set()?;
                let params = cfg.metric.resolve(&tasks.final_task)?;
                let final_id = tasks.final_task.id.clone();
                let rl = RlObjective::new(Arc::new(tasks), cfg.learner, params, cfg.trials, cfg.seed)?;
                (ProblemObjective::Rl(rl), Some(params), Some(final_id))
            }
            ObjectiveSpec::Surrogate(path) => {
                let table = SurrogateObjective::load(&self.resolve(&path))?.with_trials(cfg.trials);
                table.check_complete(cfg.max_len.min(table.task_count()))?;
                (ProblemObjective::Surrogate(table), None, None)
            }
        };
        let n = objective.task_count();
        if cfg.max_len > n {
            return Err(Error::config(format!(
                "max_len: {} exceeds the {n} candidate tasks",
                cfg.max_len
            )));
        }
        Ok(Problem {
            objective: Memoized::new(objective),
            params,
            final_task,
        })
    }

    pub fn run(&self) -> Result<ExperimentOutput> {
        let started = Instant::now();
        let cfg = &self.config;
        let problem = self.build_problem()?;
        let names = problem.names().to_vec();
        let space_size = curriculum_space_size(names.len(), cfg.max_len)?;
        let baseline = problem.objective.evaluate(&Curriculum::empty())?;

        let runs = if cfg.comparison_mode {
            run_comparison(&cfg.algorithms, &problem.objective, cfg.max_len, &cfg.optimizer, cfg.budget, cfg.seed)?
        } else {
            cfg.algorithms
                .iter()
                .map(|&a| run_search(a, &problem.objective, cfg.max_len, &cfg.optimizer, cfg.budget, cfg.seed))
                .collect::<Result<Vec<_>>>()?
        };

        let algorithms = runs
            .iter()
            .map(|r| {
                let best = &r.log.iter().find(|e| e.curriculum == r.best).expect("best is logged").evaluation;
                AlgorithmSummary {
                    algorithm: r.algorithm,
                    best: ResultRow::new(&r.best, best, &names),
                    evaluations_used: r.evaluations_used,
                    iterations: r.iterations,
                    log_file: format!("{}.csv", r.algorithm.id()),
                }
            })
            .collect();
        let report = ExperimentReport {
            config_hash: cfg.hash(),
            seed: cfg.seed,
            objective: cfg.objective.clone(),
            metric: cfg.metric.name,
            threshold: problem.params.map(|p| p.threshold),
            regret_floor: problem.params.map(|p| p.regret_floor),
            tasks: names.clone(),
            final_task: problem.final_task.clone(),
            max_len: cfg.max_len,
            space_size: u64::try_from(space_size).unwrap_or(u64::MAX),
            trials: cfg.trials,
            comparison_mode: cfg.comparison_mode,
            baseline: ResultRow::new(&Curriculum::empty(), &baseline, &names),
            algorithms,
        };
        Ok(ExperimentOutput {
            report,
            runs,
            names,
            wall_time: started.elapsed(),
        })
    }
}

impl ExperimentOutput {
    pub fn log_csv(&self, run: &OptimizerReport) -> Result<String> {
        log_csv(run, &self.names, self.report.metric)
    }

    /// Writes the report, one evaluation log per algorithm, and the timing
    /// sidecar, each atomically.
    pub fn write(&self, dir: &Path) -> Result<()> {
        for (run, summary) in self.runs.iter().zip(&self.report.algorithms) {
            write_atomic(&dir.join(&summary.log_file), self.log_csv(run)?.as_bytes())?;
        }
        write_atomic(&dir.join(REPORT_FILE), self.report.to_json().as_bytes())?;
        let timing = Timing {
            wall_time_seconds: self.wall_time.as_secs_f64(),
        };
        let timing = serde_json::to_string_pretty(&timing).expect("timing serializes") + "\n";
        write_atomic(&dir.join(TIMING_FILE), timing.as_bytes())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LearnSummary {
    pub task: String,
    pub optimum: Option<f64>,
    pub episodes: usize,
    pub actions: u64,
    pub final_greedy_return: f64,
    pub evaluations: Vec<EvaluationStep>,
}

/// Learns one task from scratch with greedy evaluations every `eval_interval`
/// episodes.
pub fn learn_task(task: &TaskSpec, learner: &LearnerConfig, eval_interval: usize, seed: u64) -> Result<LearnSummary> {
    learner.validate()?;
    let params = MetricParams {
        metric: Metric::MaxReturn,
        threshold: 0.0,
        regret_floor: -1.0,
        regret_episodes: None,
        jumpstart_episodes: 1,
        eval_interval,
        eval_episodes: 1,
    };
    let tasks = TaskSet::new(Vec::new(), task.clone())?;
    let rec = run_curriculum(&Curriculum::empty(), &tasks, learner, &params, seed)?;
    Ok(LearnSummary {
        task: task.id.clone(),
        optimum: optimal_return(task),
        episodes: rec.final_returns.len(),
        actions: rec.final_actions.iter().sum(),
        final_greedy_return: rec.evaluations.last().map_or(f64::NAN, |e| e.mean_return),
        evaluations: rec.evaluations,
    })
}
