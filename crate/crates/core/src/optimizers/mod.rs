//! Curriculum sequencing algorithms.
//!
//! Every optimizer queries the objective through a [`Search`] that counts
//! distinct curricula, enforces the budget, and always evaluates the empty
//! curriculum first as the no-curriculum baseline.

mod aco;
mod exhaustive;
mod genetic;
mod levels;
mod sample;
mod search;
mod tabu;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::curriculum::{Curriculum, Objective};
use crate::error::{Error, Result};

pub use aco::{aco_choose, aco_probabilities, AcoConfig};
pub use exhaustive::ExhaustiveConfig;
pub use genetic::{crossover, repair, roulette_probabilities, roulette_select, GeneticConfig};
pub use levels::BeamConfig;
pub use sample::sample_curriculum;
pub use search::LogEntry;
pub use tabu::{tabu_neighborhood, TabuConfig};

use search::Search;

/// Iteration cap for stochastic methods in comparison mode, where they run
/// until they have evaluated as many curricula as beam search.
pub const COMPARISON_MAX_ITERATIONS: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Exhaustive,
    Greedy,
    Beam,
    Tabu,
    #[serde(alias = "ga")]
    Genetic,
    Aco,
}

impl Algorithm {
    pub const ALL: [Algorithm; 6] = [
        Algorithm::Exhaustive,
        Algorithm::Greedy,
        Algorithm::Beam,
        Algorithm::Tabu,
        Algorithm::Genetic,
        Algorithm::Aco,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Algorithm::Exhaustive => "exhaustive",
            Algorithm::Greedy => "greedy",
            Algorithm::Beam => "beam",
            Algorithm::Tabu => "tabu",
            Algorithm::Genetic => "genetic",
            Algorithm::Aco => "aco",
        }
    }

    pub fn is_stochastic(self) -> bool {
        matches!(self, Algorithm::Tabu | Algorithm::Genetic | Algorithm::Aco)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "exhaustive" => Ok(Algorithm::Exhaustive),
            "greedy" => Ok(Algorithm::Greedy),
            "beam" => Ok(Algorithm::Beam),
            "tabu" => Ok(Algorithm::Tabu),
            "genetic" | "ga" => Ok(Algorithm::Genetic),
            "aco" => Ok(Algorithm::Aco),
            _ => Err(Error::UnknownAlgorithm(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchBudget {
    /// Hard cap on distinct curricula evaluated.
    pub max_evaluations: usize,
    pub max_iterations: usize,
    /// Stop at the first iteration boundary with at least this many
    /// distinct evaluations.
    pub stop_at_evaluations: Option<usize>,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget {
            max_evaluations: usize::MAX,
            max_iterations: usize::MAX,
            stop_at_evaluations: None,
        }
    }
}

impl SearchBudget {
    pub fn evaluations(max_evaluations: usize) -> Self {
        SearchBudget {
            max_evaluations,
            ..SearchBudget::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_evaluations == 0 || self.max_iterations == 0 {
            return Err(Error::config("search budget limits must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerConfig {
    pub exhaustive: ExhaustiveConfig,
    pub beam: BeamConfig,
    pub tabu: TabuConfig,
    pub genetic: GeneticConfig,
    pub aco: AcoConfig,
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        self.beam.validate()?;
        self.tabu.validate()?;
        self.genetic.validate()?;
        self.aco.validate()
    }

    /// Lets every stochastic method run until the evaluation target stops it.
    fn unbounded_iterations(&self) -> OptimizerConfig {
        let mut cfg = self.clone();
        cfg.tabu.iterations = COMPARISON_MAX_ITERATIONS;
        cfg.genetic.iterations = COMPARISON_MAX_ITERATIONS;
        cfg.aco.iterations = COMPARISON_MAX_ITERATIONS;
        cfg
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerReport {
    pub algorithm: Algorithm,
    pub best: Curriculum,
    pub best_value: f64,
    pub evaluations_used: usize,
    pub iterations: usize,
    /// Every distinct curriculum evaluated, in evaluation order.
    pub log: Vec<LogEntry>,
}

pub fn run_search<O: Objective + ?Sized>(
    algorithm: Algorithm,
    objective: &O,
    max_len: usize,
    cfg: &OptimizerConfig,
    budget: SearchBudget,
    seed: u64,
) -> Result<OptimizerReport> {
    cfg.validate()?;
    let mut search = Search::new(objective, max_len, budget)?;
    if algorithm == Algorithm::Exhaustive {
        exhaustive::check_space(search.n(), max_len, &cfg.exhaustive)?;
    }
    if search.evaluate(&Curriculum::empty())?.is_some() {
        match algorithm {
            Algorithm::Exhaustive => exhaustive::run(&mut search, &cfg.exhaustive)?,
            Algorithm::Greedy => levels::greedy(&mut search)?,
            Algorithm::Beam => levels::beam(&mut search, &cfg.beam)?,
            Algorithm::Tabu => tabu::run(&mut search, &cfg.tabu, seed)?,
            Algorithm::Genetic => genetic::run(&mut search, &cfg.genetic, seed)?,
            Algorithm::Aco => aco::run(&mut search, &cfg.aco, seed)?,
        }
    }
    search.finish(algorithm)
}

pub fn run_search_by_id<O: Objective + ?Sized>(
    id: &str,
    objective: &O,
    max_len: usize,
    cfg: &OptimizerConfig,
    budget: SearchBudget,
    seed: u64,
) -> Result<OptimizerReport> {
    run_search(id.parse()?, objective, max_len, cfg, budget, seed)
}

/// Runs `algorithms` in comparison mode: beam search first, then each
/// stochastic method until the first iteration boundary at which it has
/// evaluated at least as many curricula as beam search. Deterministic
/// methods run unchanged. Reports follow the order of `algorithms`.
pub fn run_comparison<O: Objective + ?Sized>(
    algorithms: &[Algorithm],
    objective: &O,
    max_len: usize,
    cfg: &OptimizerConfig,
    budget: SearchBudget,
    seed: u64,
) -> Result<Vec<OptimizerReport>> {
    let beam = run_search(Algorithm::Beam, objective, max_len, cfg, budget, seed)?;
    let capped_budget = SearchBudget {
        stop_at_evaluations: Some(beam.evaluations_used),
        ..budget
    };
    let capped_cfg = cfg.unbounded_iterations();
    algorithms
        .iter()
        .map(|&alg| match alg {
            Algorithm::Beam => Ok(beam.clone()),
            a if a.is_stochastic() => run_search(a, objective, max_len, &capped_cfg, capped_budget, seed),
            a => run_search(a, objective, max_len, cfg, budget, seed),
        })
        .collect()
}
