use std::collections::HashMap;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::search::Search;
use crate::curriculum::{Curriculum, Objective};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AcoConfig {
    pub alpha: f64,
    pub beta: f64,
    /// Offset added to the pheromone before exponentiation.
    pub k: f64,
    pub f_max: f64,
    /// Evaporation rate.
    pub rho: f64,
    pub ants: usize,
    pub iterations: usize,
}

impl Default for AcoConfig {
    fn default() -> Self {
        AcoConfig {
            alpha: 1.0,
            beta: 1.2,
            k: 5.0,
            f_max: 50.0,
            rho: 0.2,
            ants: 20,
            iterations: 50,
        }
    }
}

impl AcoConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return Err(Error::config("aco.rho must lie in (0, 1)"));
        }
        if !(self.k > 0.0 && self.f_max >= 0.0 && self.alpha >= 0.0 && self.beta > 0.0) {
            return Err(Error::config("aco.k and aco.beta must be positive, aco.alpha and aco.f_max non-negative"));
        }
        if self.ants == 0 || self.iterations == 0 {
            return Err(Error::config("aco.ants and aco.iterations must be at least 1"));
        }
        Ok(())
    }

    fn weight(&self, tau: f64, visibility: f64) -> f64 {
        (tau + self.k).powf(self.alpha) + visibility.max(0.0).powf(self.beta)
    }
}

/// Probability of each eligible task given its pheromone and visibility:
/// `((tau + K)^alpha + I^beta)` normalized over the eligible set.
pub fn aco_probabilities(tau: &[f64], visibility: &[f64], cfg: &AcoConfig) -> Vec<f64> {
    let w: Vec<f64> = tau.iter().zip(visibility).map(|(&t, &i)| cfg.weight(t, i)).collect();
    let total: f64 = w.iter().sum();
    w.into_iter().map(|x| x / total).collect()
}

/// Draws an index of the eligible set from [`aco_probabilities`].
pub fn aco_choose<R: Rng + ?Sized>(tau: &[f64], visibility: &[f64], cfg: &AcoConfig, rng: &mut R) -> usize {
    let w: Vec<f64> = tau.iter().zip(visibility).map(|(&t, &i)| cfg.weight(t, i)).collect();
    WeightedIndex::new(&w).expect("weights are positive").sample(rng)
}

/// Pheromone per (prefix, next task) edge.
#[derive(Default)]
struct Pheromone(HashMap<(Curriculum, usize), f64>);

impl Pheromone {
    fn get(&self, prefix: &Curriculum, task: usize) -> f64 {
        // Lookups clone the prefix; curricula are short.
        self.0.get(&(prefix.clone(), task)).copied().unwrap_or(0.0)
    }

    fn evaporate(&mut self, rho: f64) {
        for tau in self.0.values_mut() {
            *tau *= 1.0 - rho;
        }
    }

    fn deposit(&mut self, prefix: Curriculum, task: usize, amount: f64, f_max: f64) {
        let tau = self.0.entry((prefix, task)).or_insert(0.0);
        *tau = (*tau + amount).clamp(0.0, f_max);
    }
}

struct Trail {
    /// Prefixes of the trail, from one task up to its full length.
    steps: Vec<(Curriculum, f64)>,
}

impl Trail {
    /// Index and value of the first best prefix.
    fn best(&self) -> Option<(usize, f64)> {
        self.steps
            .iter()
            .enumerate()
            .fold(None, |acc: Option<(usize, f64)>, (i, (_, v))| match acc {
                Some((_, b)) if b >= *v => acc,
                _ => Some((i, *v)),
            })
    }
}

/// Walks one ant from the empty curriculum to the maximum length. Returns
/// `None` if the budget ran out on the way.
fn walk<O: Objective + ?Sized>(
    search: &mut Search<'_, O>,
    pheromone: &Pheromone,
    cfg: &AcoConfig,
    rng: &mut ChaCha8Rng,
) -> Result<Option<Trail>> {
    let n = search.n();
    let mut current = Curriculum::empty();
    let mut current_value = search.value(&current).expect("baseline evaluated first");
    let mut steps = Vec::with_capacity(search.max_len());
    while current.len() < search.max_len() {
        let eligible: Vec<usize> = (0..n).filter(|&m| !current.contains(m)).collect();
        let probes: Vec<Curriculum> = eligible.iter().map(|&m| current.extended(m)).collect();
        let Some(values) = search.evaluate_batch(&probes)? else {
            return Ok(None);
        };
        let tau: Vec<f64> = eligible.iter().map(|&m| pheromone.get(&current, m)).collect();
        let visibility: Vec<f64> = values.iter().map(|v| (v - current_value).max(0.0)).collect();
        let pick = aco_choose(&tau, &visibility, cfg, rng);
        current = probes[pick].clone();
        current_value = values[pick];
        steps.push((current.clone(), current_value));
    }
    Ok(Some(Trail { steps }))
}

pub(crate) fn run<O: Objective + ?Sized>(search: &mut Search<'_, O>, cfg: &AcoConfig, seed: u64) -> Result<()> {
    if search.max_len() == 0 {
        return Ok(());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pheromone = Pheromone::default();
    'outer: for _ in 0..cfg.iterations {
        let mut iteration_best: Option<(Trail, usize, f64)> = None;
        for _ in 0..cfg.ants {
            let Some(trail) = walk(search, &pheromone, cfg, &mut rng)? else {
                break 'outer;
            };
            if let Some((idx, v)) = trail.best() {
                if iteration_best.as_ref().is_none_or(|(_, _, b)| v > *b) {
                    iteration_best = Some((trail, idx, v));
                }
            }
        }
        pheromone.evaporate(cfg.rho);
        if let Some((trail, best_idx, _)) = iteration_best {
            let mut prefix = Curriculum::empty();
            for (c, _) in &trail.steps[..=best_idx] {
                let task = *c.tasks().last().expect("trail steps are non-empty");
                pheromone.deposit(prefix, task, 1.0, cfg.f_max);
                prefix = c.clone();
            }
        }
        if !search.boundary() {
            break;
        }
    }
    Ok(())
}
