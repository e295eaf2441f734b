use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Curriculum, MetricParams};
use crate::error::{Error, Result};
use crate::learner::{epsilon_at, evaluate_policy, run_learning_episode, LearnerConfig, ValueFunction};
use crate::mdp::TaskSpec;
use crate::transfer::transfer;

/// Candidate tasks plus the final task. Curricula index into `candidates`.
#[derive(Debug, Clone)]
pub struct TaskSet {
    pub candidates: Vec<TaskSpec>,
    pub final_task: TaskSpec,
}

impl TaskSet {
    pub fn new(candidates: Vec<TaskSpec>, final_task: TaskSpec) -> Result<Self> {
        for (i, t) in candidates.iter().enumerate() {
            if candidates[..i].iter().any(|o| o.id == t.id) {
                return Err(Error::config(format!("duplicate task id `{}`", t.id)));
            }
        }
        Ok(TaskSet {
            candidates,
            final_task,
        })
    }

    pub fn names(&self) -> Vec<String> {
        self.candidates.iter().map(|t| t.id.clone()).collect()
    }

    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvaluationStep {
    /// Number of final-task learning episodes completed before this phase.
    pub after_episode: usize,
    pub mean_return: f64,
}

/// Everything the metrics need from one curriculum execution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearningRecord {
    /// Learning actions spent in each curriculum task, in order.
    pub intermediate_actions: Vec<u64>,
    /// Undiscounted return of every final-task learning episode.
    pub final_returns: Vec<f64>,
    /// Actions of every final-task learning episode.
    pub final_actions: Vec<u64>,
    pub evaluations: Vec<EvaluationStep>,
}

impl LearningRecord {
    /// Final-task learning actions up to the first evaluation phase whose
    /// mean return reaches `threshold`. Evaluation actions are not counted.
    pub fn actions_to_threshold(&self, threshold: f64) -> Option<u64> {
        self.evaluations
            .iter()
            .find(|e| e.mean_return >= threshold)
            .map(|e| self.final_actions[..e.after_episode].iter().sum())
    }
}

fn learn_task(
    task: &TaskSpec,
    vf: &mut ValueFunction,
    cfg: &LearnerConfig,
    rng: &mut ChaCha8Rng,
) -> Result<u64> {
    let mut actions = 0;
    for e in 0..task.episode_budget {
        let eps = epsilon_at(cfg, e, task.episode_budget);
        actions += run_learning_episode(task, vf, cfg, eps, rng)?.actions_taken as u64;
    }
    Ok(actions)
}

fn initial_value_function(
    previous: Option<&ValueFunction>,
    task: &TaskSpec,
    cfg: &LearnerConfig,
) -> Result<ValueFunction> {
    match previous {
        Some(source) => Ok(transfer(
            source,
            task.variable_names(),
            task.num_actions(),
            &task.id,
            cfg.tiling(),
        )?
        .target),
        None => ValueFunction::new(
            task.variable_names().clone(),
            task.num_actions(),
            task.id.clone(),
            cfg.tiling(),
        ),
    }
}

/// Learns every task of `curriculum` in order, transferring the value
/// function along the way, then learns the final task while recording the
/// per-episode returns and a greedy evaluation phase every
/// `params.eval_interval` episodes (plus one after a trailing partial block).
pub fn run_curriculum(
    curriculum: &Curriculum,
    tasks: &TaskSet,
    cfg: &LearnerConfig,
    params: &MetricParams,
    seed: u64,
) -> Result<LearningRecord> {
    if params.eval_interval == 0 || params.eval_episodes == 0 {
        return Err(Error::config("eval_interval and eval_episodes must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut vf: Option<ValueFunction> = None;
    let mut intermediate_actions = Vec::with_capacity(curriculum.len());

    for &idx in curriculum.tasks() {
        let task = tasks
            .candidates
            .get(idx)
            .ok_or_else(|| Error::config(format!("curriculum refers to unknown task #{idx}")))?;
        let mut next = initial_value_function(vf.as_ref(), task, cfg)?;
        intermediate_actions.push(learn_task(task, &mut next, cfg, &mut rng)?);
        vf = Some(next);
    }

    let task = &tasks.final_task;
    let mut vf = initial_value_function(vf.as_ref(), task, cfg)?;
    let budget = task.episode_budget;
    let mut final_returns = Vec::with_capacity(budget);
    let mut final_actions = Vec::with_capacity(budget);
    let mut evaluations = Vec::with_capacity(budget.div_ceil(params.eval_interval));
    for e in 0..budget {
        let eps = epsilon_at(cfg, e, budget);
        let out = run_learning_episode(task, &mut vf, cfg, eps, &mut rng)?;
        final_returns.push(out.total_return);
        final_actions.push(out.actions_taken as u64);
        let done = e + 1;
        if done % params.eval_interval == 0 || done == budget {
            evaluations.push(EvaluationStep {
                after_episode: done,
                mean_return: evaluate_policy(task, &vf, params.eval_episodes)?,
            });
        }
    }

    Ok(LearningRecord {
        intermediate_actions,
        final_returns,
        final_actions,
        evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curriculum::Metric;
    use crate::mdp::{load_task, EnvKind};

    fn gw(id: &str, map: &str, episodes: usize) -> TaskSpec {
        let text = format!("kind=gridworld episodes={episodes} max_steps=50\n{map}");
        let mut t = load_task(&text, EnvKind::GridWorld).unwrap();
        t.id = id.to_string();
        t
    }

    fn params() -> MetricParams {
        MetricParams {
            metric: Metric::Jumpstart,
            threshold: 150.0,
            regret_floor: -2549.0,
            regret_episodes: None,
            jumpstart_episodes: 5,
            eval_interval: 10,
            eval_episodes: 1,
        }
    }

    fn set() -> TaskSet {
        TaskSet::new(
            vec![
                gw("easy", "S.T\n...", 20),
                gw("mid", "S..\n.F.\n..T", 25),
            ],
            gw("final", "S...\n.F..\n..P.\n...T", 35),
        )
        .unwrap()
    }

    #[test]
    fn empty_curriculum_only_learns_final() {
        let rec = run_curriculum(&Curriculum::empty(), &set(), &LearnerConfig::default(), &params(), 1).unwrap();
        assert!(rec.intermediate_actions.is_empty());
        assert_eq!(rec.final_returns.len(), 35);
        // ceil(35 / 10) evaluation phases, the last after the partial block.
        let after: Vec<usize> = rec.evaluations.iter().map(|e| e.after_episode).collect();
        assert_eq!(after, vec![10, 20, 30, 35]);
        assert!(rec.final_returns.iter().all(|&g| (-2500.0 * 50.0..=200.0).contains(&g)));
    }

    #[test]
    fn same_seed_same_record() {
        let c = Curriculum::new(vec![1, 0]).unwrap();
        let cfg = LearnerConfig::default();
        let a = run_curriculum(&c, &set(), &cfg, &params(), 42).unwrap();
        let b = run_curriculum(&c, &set(), &cfg, &params(), 42).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.intermediate_actions.len(), 2);
        let c2 = run_curriculum(&c, &set(), &cfg, &params(), 43).unwrap();
        assert_ne!(a, c2);
    }

    #[test]
    fn unknown_task_is_a_config_error() {
        let c = Curriculum::new(vec![5]).unwrap();
        let err = run_curriculum(&c, &set(), &LearnerConfig::default(), &params(), 1).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn threshold_actions_count_learning_episodes_only() {
        let rec = LearningRecord {
            intermediate_actions: vec![],
            final_returns: vec![0.0; 4],
            final_actions: vec![10, 20, 30, 40],
            evaluations: vec![
                EvaluationStep { after_episode: 2, mean_return: 1.0 },
                EvaluationStep { after_episode: 4, mean_return: 3.0 },
            ],
        };
        assert_eq!(rec.actions_to_threshold(2.0), Some(100));
        assert_eq!(rec.actions_to_threshold(1.0), Some(30));
        assert_eq!(rec.actions_to_threshold(5.0), None);
    }
}
