use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::sample::sample_curriculum;
use super::search::Search;
use crate::curriculum::{Curriculum, Objective};
use crate::error::{Error, Result};

/// Keeps the worst individual selectable when fitness values coincide.
const SHIFT_EPSILON: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeneticConfig {
    pub population: usize,
    pub mutation_probability: f64,
    pub iterations: usize,
}

impl Default for GeneticConfig {
    fn default() -> Self {
        GeneticConfig {
            population: 50,
            mutation_probability: 0.5,
            iterations: 50,
        }
    }
}

impl GeneticConfig {
    pub fn validate(&self) -> Result<()> {
        if self.population < 2 {
            return Err(Error::config("genetic.population must be at least 2"));
        }
        if !(0.0..=1.0).contains(&self.mutation_probability) {
            return Err(Error::config("genetic.mutation_probability must lie in [0, 1]"));
        }
        if self.iterations == 0 {
            return Err(Error::config("genetic.iterations must be at least 1"));
        }
        Ok(())
    }
}

/// Selection probabilities proportional to `F - F_min + 0.01 (F_max - F_min + eps)`.
pub fn roulette_probabilities(fitness: &[f64]) -> Vec<f64> {
    let lo = fitness.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = fitness.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let floor = 0.01 * (hi - lo + SHIFT_EPSILON);
    let shifted: Vec<f64> = fitness.iter().map(|f| f - lo + floor).collect();
    let total: f64 = shifted.iter().sum();
    shifted.into_iter().map(|s| s / total).collect()
}

pub fn roulette_select<R: Rng + ?Sized>(fitness: &[f64], rng: &mut R) -> usize {
    WeightedIndex::new(roulette_probabilities(fitness))
        .expect("shifted fitness is positive")
        .sample(rng)
}

/// Drops later repeats of a task, then truncates to `max_len`.
pub fn repair(tasks: Vec<usize>, max_len: usize) -> Curriculum {
    let mut out = Vec::with_capacity(tasks.len());
    for t in tasks {
        if !out.contains(&t) {
            out.push(t);
        }
    }
    out.truncate(max_len);
    Curriculum::new(out).expect("repeats removed")
}

/// Single-point crossover with cut `i` in `a` and cut `j` in `b`.
pub fn crossover(a: &Curriculum, b: &Curriculum, i: usize, j: usize, max_len: usize) -> (Curriculum, Curriculum) {
    let (a, b) = (a.tasks(), b.tasks());
    let first = a[..i].iter().chain(&b[j..]).copied().collect();
    let second = b[..j].iter().chain(&a[i..]).copied().collect();
    (repair(first, max_len), repair(second, max_len))
}

fn unused_task<R: Rng + ?Sized>(tasks: &[usize], n: usize, rng: &mut R) -> Option<usize> {
    let free: Vec<usize> = (0..n).filter(|m| !tasks.contains(m)).collect();
    if free.is_empty() {
        None
    } else {
        Some(free[rng.random_range(0..free.len())])
    }
}

/// Replaces each position with probability `1/l` by a task not in the curriculum.
fn mutate_tasks<R: Rng + ?Sized>(c: &Curriculum, n: usize, rng: &mut R) -> Curriculum {
    let mut tasks = c.tasks().to_vec();
    let l = tasks.len();
    for pos in 0..l {
        if rng.random_bool(1.0 / l as f64) {
            if let Some(m) = unused_task(&tasks, n, rng) {
                tasks[pos] = m;
            }
        }
    }
    Curriculum::new(tasks).expect("replacements are unused tasks")
}

/// Adds a task at, or drops the task at, a random position. Dropping is not
/// an option below length 2, adding is not an option at the length cap.
fn mutate_length<R: Rng + ?Sized>(c: &Curriculum, n: usize, max_len: usize, rng: &mut R) -> Curriculum {
    let mut tasks = c.tasks().to_vec();
    let can_drop = tasks.len() >= 2;
    let can_add = tasks.len() < max_len && tasks.len() < n;
    let add = match (can_add, can_drop) {
        (true, true) => rng.random_bool(0.5),
        (add, _) => add,
    };
    if add {
        let m = unused_task(&tasks, n, rng).expect("a task is unused below length n");
        let pos = rng.random_range(0..=tasks.len());
        tasks.insert(pos, m);
    } else if can_drop {
        let pos = rng.random_range(0..tasks.len());
        tasks.remove(pos);
    }
    Curriculum::new(tasks).expect("mutation keeps tasks distinct")
}

fn mutate<R: Rng + ?Sized>(c: &Curriculum, n: usize, max_len: usize, rng: &mut R) -> Curriculum {
    if rng.random_bool(0.5) {
        mutate_tasks(c, n, rng)
    } else {
        mutate_length(c, n, max_len, rng)
    }
}

pub(crate) fn run<O: Objective + ?Sized>(search: &mut Search<'_, O>, cfg: &GeneticConfig, seed: u64) -> Result<()> {
    let (n, max_len) = (search.n(), search.max_len());
    if max_len == 0 {
        return Ok(());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut population: Vec<Curriculum> =
        (0..cfg.population).map(|_| sample_curriculum(n, max_len, &mut rng)).collect();
    let Some(mut fitness) = search.evaluate_batch(&population)? else {
        return Ok(());
    };
    if search.target_reached() {
        return Ok(());
    }

    for _ in 0..cfg.iterations {
        let first = roulette_select(&fitness, &mut rng);
        let mut weights = roulette_probabilities(&fitness);
        weights[first] = 0.0;
        let second = WeightedIndex::new(&weights)
            .expect("population has at least two members")
            .sample(&mut rng);
        let (pa, pb) = (population[first].clone(), population[second].clone());

        let mut children = Vec::with_capacity(cfg.population);
        while children.len() < cfg.population {
            let i = rng.random_range(0..=pa.len());
            let j = rng.random_range(0..=pb.len());
            let (x, y) = crossover(&pa, &pb, i, j, max_len);
            children.push(x);
            if children.len() < cfg.population {
                children.push(y);
            }
        }
        for child in &mut children {
            if rng.random_bool(cfg.mutation_probability) {
                *child = mutate(child, n, max_len, &mut rng);
            }
        }
        children.push(pa);
        children.push(pb);

        let Some(values) = search.evaluate_batch(&children)? else {
            break;
        };
        population = children;
        fitness = values;
        if !search.boundary() {
            break;
        }
    }
    Ok(())
}
