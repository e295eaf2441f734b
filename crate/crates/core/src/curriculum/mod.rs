//! Curricula, the curriculum space, and curriculum evaluation.
//!
//! A curriculum is a repetition-free sequence of candidate-task indices. The
//! empty curriculum means learning the final task directly.

mod evaluate;
mod metrics;
mod run;

use std::cmp::Ordering;
use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use evaluate::{trial_seed, Evaluation, Memoized, Objective, RlObjective, SurrogateObjective};
pub use metrics::{
    metric_jumpstart, metric_max_return, metric_regret, metric_ttt, regret_raw, Metric,
    MetricParams, TimeToThreshold,
};
pub use run::{run_curriculum, EvaluationStep, LearningRecord, TaskSet};

/// Separator of task ids in the canonical curriculum encoding.
pub const ENCODING_SEPARATOR: char = '>';

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Curriculum(Vec<usize>);

impl Curriculum {
    /// Checks that no task repeats.
    pub fn new(tasks: Vec<usize>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(tasks.len());
        if let Some(dup) = tasks.iter().find(|t| !seen.insert(**t)) {
            return Err(Error::contract(format!("task {dup} repeats in curriculum")));
        }
        Ok(Curriculum(tasks))
    }

    pub fn empty() -> Self {
        Curriculum(Vec::new())
    }

    pub fn tasks(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, task: usize) -> bool {
        self.0.contains(&task)
    }

    /// This curriculum with `task` appended.
    pub fn extended(&self, task: usize) -> Curriculum {
        debug_assert!(!self.contains(task));
        let mut v = self.0.clone();
        v.push(task);
        Curriculum(v)
    }

    /// This curriculum without its last task.
    pub fn truncated(&self) -> Curriculum {
        let mut v = self.0.clone();
        v.pop();
        Curriculum(v)
    }

    /// Repetition-free, at most `max_len` long, every index below `n`.
    pub fn is_valid(&self, n: usize, max_len: usize) -> bool {
        let mut seen = HashSet::new();
        self.len() <= max_len && self.0.iter().all(|&t| t < n && seen.insert(t))
    }

    /// Task ids joined by `>`; the empty curriculum encodes as `""`.
    pub fn encode(&self, names: &[String]) -> String {
        let parts: Vec<&str> = self.0.iter().map(|&t| names[t].as_str()).collect();
        parts.join(&ENCODING_SEPARATOR.to_string())
    }

    pub fn parse(encoding: &str, names: &[String]) -> Result<Self> {
        let encoding = encoding.trim();
        if encoding.is_empty() {
            return Ok(Curriculum::empty());
        }
        let tasks = encoding
            .split(ENCODING_SEPARATOR)
            .map(|id| {
                let id = id.trim();
                names
                    .iter()
                    .position(|n| n == id)
                    .ok_or_else(|| Error::config(format!("unknown task id `{id}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        Curriculum::new(tasks)
    }

    /// Shorter first, then lexicographic by task index.
    pub fn canonical_cmp(&self, other: &Curriculum) -> Ordering {
        self.len().cmp(&other.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl fmt::Display for Curriculum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("<")?;
        for (i, t) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "m{t}")?;
        }
        f.write_str(">")
    }
}

/// Number of curricula of length at most `max_len` over `n` tasks, counting
/// the empty one: the sum over l of n! / (n - l)!.
pub fn curriculum_space_size(n: usize, max_len: usize) -> Result<u128> {
    if max_len > n {
        return Err(Error::contract(format!(
            "maximum length {max_len} exceeds the number of tasks {n}"
        )));
    }
    let mut total: u128 = 1;
    let mut level: u128 = 1;
    for l in 0..max_len {
        level = level
            .checked_mul((n - l) as u128)
            .ok_or_else(|| Error::contract("curriculum space size overflows"))?;
        total = total
            .checked_add(level)
            .ok_or_else(|| Error::contract("curriculum space size overflows"))?;
    }
    Ok(total)
}

/// Number of curricula of length exactly `len`.
pub fn curricula_of_length(n: usize, len: usize) -> u128 {
    (0..len).map(|i| (n - i) as u128).product()
}

/// All curricula of length at most `max_len`, by length then lexicographically.
pub fn enumerate_curricula(n: usize, max_len: usize) -> Vec<Curriculum> {
    let max_len = max_len.min(n);
    let mut all = vec![Curriculum::empty()];
    let mut frontier = vec![Curriculum::empty()];
    for _ in 0..max_len {
        frontier = frontier
            .iter()
            .flat_map(|c| (0..n).filter(|&m| !c.contains(m)).map(move |m| c.extended(m)))
            .collect();
        all.extend(frontier.iter().cloned());
    }
    all
}

/// Extends every seed by each task it does not contain, without duplicates.
///
/// Output order follows seed order, then task index.
pub fn generate_candidates(seeds: &[Curriculum], n: usize) -> Vec<Curriculum> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for seed in seeds {
        for m in (0..n).filter(|&m| !seed.contains(m)) {
            let c = seed.extended(m);
            if seen.insert(c.clone()) {
                out.push(c);
            }
        }
    }
    out
}
