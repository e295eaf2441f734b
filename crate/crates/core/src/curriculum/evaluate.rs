use std::collections::HashMap;
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{enumerate_curricula, run_curriculum, Curriculum, MetricParams, TaskSet};
use crate::error::{Error, Result};
use crate::learner::LearnerConfig;
use crate::stats;

/// Confidence level of every reported interval.
pub const CONFIDENCE_LEVEL: f64 = 0.95;

/// Objective value of one curriculum estimated over repeated trials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub mean: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub values: Vec<f64>,
}

impl Evaluation {
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        let (ci_lo, ci_hi) = stats::confidence_interval(&values, CONFIDENCE_LEVEL)?;
        Ok(Evaluation {
            mean: stats::mean(&values),
            ci_lo,
            ci_hi,
            values,
        })
    }

    pub fn trials(&self) -> usize {
        self.values.len()
    }
}

/// A black-box objective over curricula of some candidate-task set.
pub trait Objective: Sync {
    fn task_names(&self) -> &[String];

    fn evaluate(&self, curriculum: &Curriculum) -> Result<Evaluation>;

    fn task_count(&self) -> usize {
        self.task_names().len()
    }
}

impl<T: Objective + ?Sized> Objective for &T {
    fn task_names(&self) -> &[String] {
        (**self).task_names()
    }

    fn evaluate(&self, curriculum: &Curriculum) -> Result<Evaluation> {
        (**self).evaluate(curriculum)
    }
}

/// Seed of one trial, derived from the master seed and the curriculum's
/// canonical encoding so that every curriculum gets independent, stable
/// randomness regardless of evaluation order.
pub fn trial_seed(master_seed: u64, encoding: &str, trial: usize) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(master_seed.to_le_bytes());
    hasher.update(encoding.as_bytes());
    hasher.update([0u8]);
    hasher.update((trial as u64).to_le_bytes());
    let digest = hasher.finalize();
    let mut bytes = [0u8; 8];
    bytes.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(bytes)
}

/// Runs the full reinforcement-learning pipeline for each trial and scores
/// the configured metric.
pub struct RlObjective {
    tasks: Arc<TaskSet>,
    names: Vec<String>,
    learner: LearnerConfig,
    params: MetricParams,
    trials: usize,
    master_seed: u64,
    episodes_run: AtomicU64,
}

impl RlObjective {
    pub fn new(
        tasks: Arc<TaskSet>,
        learner: LearnerConfig,
        params: MetricParams,
        trials: usize,
        master_seed: u64,
    ) -> Result<Self> {
        if trials == 0 {
            return Err(Error::config("trials must be at least 1"));
        }
        learner.validate()?;
        params.validate()?;
        Ok(RlObjective {
            names: tasks.names(),
            tasks,
            learner,
            params,
            trials,
            master_seed,
            episodes_run: AtomicU64::new(0),
        })
    }

    pub fn params(&self) -> &MetricParams {
        &self.params
    }

    pub fn tasks(&self) -> &TaskSet {
        &self.tasks
    }

    /// Learning episodes executed so far, across all tasks and trials.
    pub fn episodes_run(&self) -> u64 {
        self.episodes_run.load(Ordering::Relaxed)
    }

    fn episodes_per_trial(&self, c: &Curriculum) -> u64 {
        let inter: usize = c
            .tasks()
            .iter()
            .filter_map(|&i| self.tasks.candidates.get(i))
            .map(|t| t.episode_budget)
            .sum();
        (inter + self.tasks.final_task.episode_budget) as u64
    }
}

impl Objective for RlObjective {
    fn task_names(&self) -> &[String] {
        &self.names
    }

    fn evaluate(&self, curriculum: &Curriculum) -> Result<Evaluation> {
        let encoding = curriculum.encode(&self.names);
        let values = (0..self.trials)
            .into_par_iter()
            .map(|trial| {
                let seed = trial_seed(self.master_seed, &encoding, trial);
                let rec = run_curriculum(curriculum, &self.tasks, &self.learner, &self.params, seed)?;
                self.params.metric.score(&rec, &self.params)
            })
            .collect::<Result<Vec<f64>>>()?;
        self.episodes_run.fetch_add(
            self.episodes_per_trial(curriculum) * self.trials as u64,
            Ordering::Relaxed,
        );
        Evaluation::from_values(values)
    }
}

/// Deterministic lookup-table objective.
#[derive(Debug, Clone)]
pub struct SurrogateObjective {
    names: Vec<String>,
    table: HashMap<Curriculum, f64>,
    trials: usize,
}

impl SurrogateObjective {
    pub fn new(names: Vec<String>, table: HashMap<Curriculum, f64>) -> Self {
        SurrogateObjective {
            names,
            table,
            trials: 1,
        }
    }

    /// Tabulates `f` over every curriculum of length at most `max_len`.
    pub fn from_fn(names: Vec<String>, max_len: usize, mut f: impl FnMut(&Curriculum) -> f64) -> Self {
        let table = enumerate_curricula(names.len(), max_len)
            .into_iter()
            .map(|c| {
                let v = f(&c);
                (c, v)
            })
            .collect();
        SurrogateObjective::new(names, table)
    }

    /// Reports each value as `trials` identical samples.
    pub fn with_trials(mut self, trials: usize) -> Self {
        self.trials = trials.max(1);
        self
    }

    pub fn table(&self) -> &HashMap<Curriculum, f64> {
        &self.table
    }

    /// Checks that the table covers every curriculum up to `max_len`.
    pub fn check_complete(&self, max_len: usize) -> Result<()> {
        let missing = enumerate_curricula(self.names.len(), max_len)
            .into_iter()
            .find(|c| !self.table.contains_key(c));
        match missing {
            Some(c) => Err(Error::config(format!(
                "surrogate table has no value for curriculum `{}`",
                c.encode(&self.names)
            ))),
            None => Ok(()),
        }
    }

    /// Reads a table file:
    ///
    /// ```text
    /// # tasks=a,b,c
    /// curriculum,value
    /// ,-10
    /// a,-4.5
    /// a>b,2
    /// ```
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text).map_err(|e| Error::file(path, e.to_string()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let (first, rest) = text.split_once('\n').unwrap_or((text, ""));
        let names: Vec<String> = first
            .trim()
            .strip_prefix("# tasks=")
            .ok_or_else(|| Error::config("surrogate table must start with `# tasks=<id>,<id>,...`"))?
            .split(',')
            .map(|s| s.trim().to_string())
            .filter(|s| !s.is_empty())
            .collect();
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(rest.as_bytes());
        let mut table = HashMap::new();
        for (i, row) in reader.records().enumerate() {
            let row = row.map_err(|e| Error::config(format!("row {}: {e}", i + 1)))?;
            let (enc, value) = match (row.get(0), row.get(1)) {
                (Some(e), Some(v)) => (e, v),
                _ => return Err(Error::config(format!("row {}: expected curriculum,value", i + 1))),
            };
            let c = Curriculum::parse(enc, &names)?;
            let v: f64 = value
                .parse()
                .map_err(|_| Error::config(format!("row {}: `{value}` is not a number", i + 1)))?;
            if table.insert(c, v).is_some() {
                return Err(Error::config(format!("row {}: duplicate curriculum `{enc}`", i + 1)));
            }
        }
        Ok(SurrogateObjective::new(names, table))
    }
}

impl Objective for SurrogateObjective {
    fn task_names(&self) -> &[String] {
        &self.names
    }

    fn evaluate(&self, curriculum: &Curriculum) -> Result<Evaluation> {
        let v = self.table.get(curriculum).copied().ok_or_else(|| {
            Error::config(format!(
                "surrogate table has no value for curriculum `{}`",
                curriculum.encode(&self.names)
            ))
        })?;
        Evaluation::from_values(vec![v; self.trials])
    }
}

/// Caches evaluations by curriculum so repeated queries are free.
///
/// Concurrent misses on the same key may both compute; per-curriculum seeding
/// makes them store identical values.
pub struct Memoized<O> {
    inner: O,
    cache: Mutex<HashMap<Curriculum, Evaluation>>,
    hits: AtomicU64,
    misses: AtomicU64,
}

impl<O: Objective> Memoized<O> {
    pub fn new(inner: O) -> Self {
        Memoized {
            inner,
            cache: Mutex::new(HashMap::new()),
            hits: AtomicU64::new(0),
            misses: AtomicU64::new(0),
        }
    }

    pub fn inner(&self) -> &O {
        &self.inner
    }

    pub fn hits(&self) -> u64 {
        self.hits.load(Ordering::Relaxed)
    }

    pub fn misses(&self) -> u64 {
        self.misses.load(Ordering::Relaxed)
    }

    fn cached(&self, c: &Curriculum) -> Option<Evaluation> {
        self.cache.lock().expect("memo cache poisoned").get(c).cloned()
    }
}

impl<O: Objective> Objective for Memoized<O> {
    fn task_names(&self) -> &[String] {
        self.inner.task_names()
    }

    fn evaluate(&self, curriculum: &Curriculum) -> Result<Evaluation> {
        if let Some(e) = self.cached(curriculum) {
            self.hits.fetch_add(1, Ordering::Relaxed);
            return Ok(e);
        }
        self.misses.fetch_add(1, Ordering::Relaxed);
        let e = self.inner.evaluate(curriculum)?;
        self.cache
            .lock()
            .expect("memo cache poisoned")
            .entry(curriculum.clone())
            .or_insert(e.clone());
        Ok(e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curriculum::Metric;
    use crate::mdp::{load_task, EnvKind, TaskSpec};

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("m{i}")).collect()
    }

    fn gw(id: &str, map: &str, episodes: usize) -> TaskSpec {
        let mut t = load_task(&format!("kind=gridworld episodes={episodes}\n{map}"), EnvKind::GridWorld).unwrap();
        t.id = id.into();
        t
    }

    fn rl(trials: usize) -> RlObjective {
        let tasks = TaskSet::new(
            vec![gw("a", "S.T", 10), gw("b", "S..\n..T", 10)],
            gw("f", "S...\n.F..\n...T", 20),
        )
        .unwrap();
        let params = MetricParams {
            metric: Metric::Jumpstart,
            threshold: 150.0,
            regret_floor: -2549.0,
            regret_episodes: None,
            jumpstart_episodes: 5,
            eval_interval: 10,
            eval_episodes: 1,
        };
        RlObjective::new(Arc::new(tasks), LearnerConfig::default(), params, trials, 9).unwrap()
    }

    #[test]
    fn memoized_second_call_runs_nothing() {
        let memo = Memoized::new(rl(3));
        let c = Curriculum::new(vec![1]).unwrap();
        let first = memo.evaluate(&c).unwrap();
        let episodes = memo.inner().episodes_run();
        assert_eq!(episodes, 3 * (10 + 20));
        let second = memo.evaluate(&c).unwrap();
        assert_eq!(first, second);
        assert_eq!(memo.inner().episodes_run(), episodes);
        assert_eq!((memo.hits(), memo.misses()), (1, 1));
    }

    #[test]
    fn rl_objective_is_referentially_transparent() {
        let c = Curriculum::new(vec![0, 1]).unwrap();
        let a = rl(2).evaluate(&c).unwrap();
        let b = rl(2).evaluate(&c).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.trials(), 2);
        assert!(a.ci_lo <= a.mean && a.mean <= a.ci_hi);
    }

    #[test]
    fn single_trial_has_zero_width_interval() {
        let e = rl(1).evaluate(&Curriculum::empty()).unwrap();
        assert_eq!(e.ci_lo, e.ci_hi);
        assert_eq!(e.ci_lo, e.mean);
    }

    #[test]
    fn surrogate_mean_is_the_table_value() {
        let s = SurrogateObjective::from_fn(names(3), 2, |c| c.len() as f64 * 1.5 - 1.0);
        for trials in [1, 4, 10] {
            let s = s.clone().with_trials(trials);
            let e = s.evaluate(&Curriculum::new(vec![2, 0]).unwrap()).unwrap();
            assert_eq!(e.mean, 2.0);
            assert_eq!(e.trials(), trials);
        }
        assert!(s.check_complete(2).is_ok());
        assert!(s.check_complete(3).is_err());
    }

    #[test]
    fn surrogate_parse() {
        let s = SurrogateObjective::parse("# tasks=a,b\ncurriculum,value\n,-3\na,1\nb>a,2.5\n").unwrap();
        assert_eq!(s.task_names(), ["a", "b"]);
        assert_eq!(s.evaluate(&Curriculum::empty()).unwrap().mean, -3.0);
        assert_eq!(s.evaluate(&Curriculum::new(vec![1, 0]).unwrap()).unwrap().mean, 2.5);
        assert!(s.evaluate(&Curriculum::new(vec![1]).unwrap()).is_err());
        assert!(SurrogateObjective::parse("curriculum,value\n,1\n").is_err());
        assert!(SurrogateObjective::parse("# tasks=a\ncurriculum,value\nz,1\n").is_err());
    }

    #[test]
    fn trial_seeds_differ_by_curriculum_and_trial() {
        let s = trial_seed(1, "a>b", 0);
        assert_eq!(s, trial_seed(1, "a>b", 0));
        assert_ne!(s, trial_seed(1, "a>b", 1));
        assert_ne!(s, trial_seed(1, "b>a", 0));
        assert_ne!(s, trial_seed(2, "a>b", 0));
    }
}
