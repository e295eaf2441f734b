use std::cmp::Ordering;
use std::collections::{HashMap, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Algorithm, OptimizerReport, SearchBudget};
use crate::curriculum::{Curriculum, Evaluation, Objective};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogEntry {
    pub curriculum: Curriculum,
    pub evaluation: Evaluation,
}

/// Higher value first, then the canonically smaller curriculum.
pub(crate) fn rank(a: (&Curriculum, f64), b: (&Curriculum, f64)) -> Ordering {
    b.1.total_cmp(&a.1).then_with(|| a.0.canonical_cmp(b.0))
}

/// Bookkeeping shared by every optimizer: the distinct-evaluation log, the
/// evaluation and iteration budgets, and validity checks on every query.
pub(crate) struct Search<'a, O: ?Sized> {
    objective: &'a O,
    n: usize,
    max_len: usize,
    budget: SearchBudget,
    values: HashMap<Curriculum, f64>,
    log: Vec<LogEntry>,
    iterations: usize,
    truncated: bool,
}

impl<'a, O: Objective + ?Sized> Search<'a, O> {
    pub fn new(objective: &'a O, max_len: usize, budget: SearchBudget) -> Result<Self> {
        let n = objective.task_count();
        if max_len > n {
            return Err(Error::config(format!(
                "maximum curriculum length {max_len} exceeds the number of candidate tasks {n}"
            )));
        }
        budget.validate()?;
        Ok(Search {
            objective,
            n,
            max_len,
            budget,
            values: HashMap::new(),
            log: Vec::new(),
            iterations: 0,
            truncated: false,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn max_len(&self) -> usize {
        self.max_len
    }

    pub fn value(&self, c: &Curriculum) -> Option<f64> {
        self.values.get(c).copied()
    }

    pub fn evaluate(&mut self, c: &Curriculum) -> Result<Option<f64>> {
        Ok(self.evaluate_batch(std::slice::from_ref(c))?.map(|v| v[0]))
    }

    /// Values of `batch` in order. New curricula are evaluated concurrently
    /// and logged in first-occurrence order. Returns `None` when the budget
    /// cannot cover the whole batch; the affordable prefix is still logged.
    pub fn evaluate_batch(&mut self, batch: &[Curriculum]) -> Result<Option<Vec<f64>>> {
        let mut fresh: Vec<&Curriculum> = Vec::new();
        let mut pending = HashSet::new();
        for c in batch {
            if !c.is_valid(self.n, self.max_len) {
                return Err(Error::contract(format!(
                    "optimizer produced invalid curriculum {c} (n = {}, L = {})",
                    self.n, self.max_len
                )));
            }
            if !self.values.contains_key(c) && pending.insert(c) {
                fresh.push(c);
            }
        }
        let remaining = self.budget.max_evaluations.saturating_sub(self.log.len());
        if fresh.len() > remaining {
            fresh.truncate(remaining);
            self.truncated = true;
        }
        let objective = self.objective;
        let evaluations = fresh
            .par_iter()
            .map(|c| objective.evaluate(c))
            .collect::<Result<Vec<Evaluation>>>()?;
        for (c, evaluation) in fresh.into_iter().zip(evaluations) {
            self.values.insert(c.clone(), evaluation.mean);
            self.log.push(LogEntry {
                curriculum: c.clone(),
                evaluation,
            });
        }
        if self.truncated {
            return Ok(None);
        }
        Ok(Some(batch.iter().map(|c| self.values[c]).collect()))
    }

    /// The evaluation target of comparison mode has been met, or the hard
    /// budget ran out.
    pub fn target_reached(&self) -> bool {
        self.truncated
            || self.log.len() >= self.budget.max_evaluations
            || self
                .budget
                .stop_at_evaluations
                .is_some_and(|t| self.log.len() >= t)
    }

    /// Marks the end of an iteration; false when the search must stop.
    pub fn boundary(&mut self) -> bool {
        self.iterations += 1;
        !self.target_reached() && self.iterations < self.budget.max_iterations
    }

    pub fn finish(self, algorithm: Algorithm) -> Result<OptimizerReport> {
        let best = self
            .log
            .iter()
            .min_by(|a, b| {
                rank(
                    (&a.curriculum, a.evaluation.mean),
                    (&b.curriculum, b.evaluation.mean),
                )
            })
            .ok_or_else(|| Error::contract("search ended without evaluating any curriculum"))?;
        Ok(OptimizerReport {
            algorithm,
            best: best.curriculum.clone(),
            best_value: best.evaluation.mean,
            evaluations_used: self.log.len(),
            iterations: self.iterations,
            log: self.log,
        })
    }
}
