use std::collections::{HashSet, VecDeque};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::sample::sample_curriculum;
use super::search::{rank, Search};
use crate::curriculum::{Curriculum, Objective};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TabuConfig {
    pub capacity: usize,
    pub iterations: usize,
}

impl Default for TabuConfig {
    fn default() -> Self {
        TabuConfig {
            capacity: 30,
            iterations: 100,
        }
    }
}

impl TabuConfig {
    pub fn validate(&self) -> Result<()> {
        if self.capacity == 0 || self.iterations == 0 {
            return Err(Error::config("tabu.capacity and tabu.iterations must be at least 1"));
        }
        Ok(())
    }
}

/// `R` holds `c` without its last task and `c` extended by each unused task
/// (while shorter than `max_len`); the neighborhood is `R` plus every
/// two-position swap of every member of `R`. First-occurrence order.
pub fn tabu_neighborhood(c: &Curriculum, n: usize, max_len: usize) -> Vec<Curriculum> {
    let mut r = Vec::new();
    if !c.is_empty() {
        r.push(c.truncated());
    }
    if c.len() < max_len {
        r.extend((0..n).filter(|&m| !c.contains(m)).map(|m| c.extended(m)));
    }
    let mut seen: HashSet<Curriculum> = r.iter().cloned().collect();
    let mut out = r.clone();
    for base in &r {
        let tasks = base.tasks();
        for i in 0..tasks.len() {
            for j in i + 1..tasks.len() {
                let mut swapped = tasks.to_vec();
                swapped.swap(i, j);
                let s = Curriculum::new(swapped).expect("swap keeps tasks distinct");
                if seen.insert(s.clone()) {
                    out.push(s);
                }
            }
        }
    }
    out.retain(|x| x != c);
    out
}

struct TabuList {
    items: VecDeque<Curriculum>,
    capacity: usize,
}

impl TabuList {
    fn contains(&self, c: &Curriculum) -> bool {
        self.items.contains(c)
    }

    fn push(&mut self, c: Curriculum) {
        if self.contains(&c) {
            return;
        }
        if self.items.len() == self.capacity {
            self.items.pop_front();
        }
        self.items.push_back(c);
    }
}

pub(crate) fn run<O: Objective + ?Sized>(search: &mut Search<'_, O>, cfg: &TabuConfig, seed: u64) -> Result<()> {
    let (n, max_len) = (search.n(), search.max_len());
    if max_len == 0 {
        return Ok(());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut current = sample_curriculum(n, max_len, &mut rng);
    if search.evaluate(&current)?.is_none() || search.target_reached() {
        return Ok(());
    }
    let mut tabu = TabuList {
        items: VecDeque::with_capacity(cfg.capacity),
        capacity: cfg.capacity,
    };
    tabu.push(current.clone());

    for _ in 0..cfg.iterations {
        let neighbors: Vec<Curriculum> = tabu_neighborhood(&current, n, max_len)
            .into_iter()
            .filter(|c| !tabu.contains(c))
            .collect();
        if neighbors.is_empty() {
            current = sample_curriculum(n, max_len, &mut rng);
            if search.evaluate(&current)?.is_none() {
                break;
            }
        } else {
            let Some(values) = search.evaluate_batch(&neighbors)? else {
                break;
            };
            current = neighbors
                .iter()
                .zip(values)
                .min_by(|a, b| rank((a.0, a.1), (b.0, b.1)))
                .map(|(c, _)| c.clone())
                .expect("neighborhood is not empty");
        }
        tabu.push(current.clone());
        if !search.boundary() {
            break;
        }
    }
    Ok(())
}
