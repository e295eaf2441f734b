//! Sarsa(λ) with replacing traces over tile-coded linear value functions.

mod tiles;

use std::collections::HashMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mdp::Environment;

pub use tiles::{ActiveTiles, FeatureBlock, TilingSpec, ValueFunction, Weights};

/// Traces below this magnitude are dropped.
const TRACE_CUTOFF: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LearnerConfig {
    pub lambda: f64,
    pub alpha: f64,
    pub gamma: f64,
    /// Exploration rate before the decay phase.
    pub eps0: f64,
    /// Final fraction of a task's episodes over which ε decays linearly to 0.
    pub eps_decay_fraction: f64,
    pub tilings: usize,
    pub tiles_per_dim: usize,
}

impl Default for LearnerConfig {
    fn default() -> Self {
        LearnerConfig {
            lambda: 0.9,
            alpha: 0.1,
            gamma: 0.999,
            eps0: 0.1,
            eps_decay_fraction: 0.25,
            tilings: 8,
            tiles_per_dim: 8,
        }
    }
}

impl LearnerConfig {
    pub fn validate(&self) -> Result<()> {
        let rates = [
            ("lambda", self.lambda),
            ("alpha", self.alpha),
            ("gamma", self.gamma),
            ("eps0", self.eps0),
            ("eps_decay_fraction", self.eps_decay_fraction),
        ];
        for (name, v) in rates {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::config(format!("learner.{name} = {v} is outside [0, 1]")));
            }
        }
        if self.tilings == 0 || self.tiles_per_dim == 0 {
            return Err(Error::config("learner.tilings and learner.tiles_per_dim must be >= 1"));
        }
        Ok(())
    }

    pub fn tiling(&self) -> TilingSpec {
        TilingSpec {
            tilings: self.tilings,
            tiles_per_dim: self.tiles_per_dim,
        }
    }
}

/// Exploration rate for `episode` (0-based) out of `total`: constant `eps0`,
/// then linear to zero over the final `eps_decay_fraction` of episodes.
pub fn epsilon_at(cfg: &LearnerConfig, episode: usize, total: usize) -> f64 {
    if total == 0 {
        return 0.0;
    }
    let total = total as f64;
    let e = (episode as f64).min(total);
    let knee = (1.0 - cfg.eps_decay_fraction) * total;
    if e < knee {
        cfg.eps0
    } else if total > knee {
        (cfg.eps0 * (1.0 - (e - knee) / (total - knee))).max(0.0)
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpisodeOutcome {
    /// Undiscounted sum of rewards.
    pub total_return: f64,
    pub actions_taken: usize,
}

fn choose<R: Rng + ?Sized>(vf: &ValueFunction, tiles: &ActiveTiles, eps: f64, rng: &mut R) -> usize {
    if eps > 0.0 && rng.random::<f64>() < eps {
        rng.random_range(0..vf.num_actions())
    } else {
        vf.greedy(tiles)
    }
}

/// Runs one ε-greedy Sarsa(λ) episode, updating `vf` in place.
///
/// Traces are replacing and start empty. Each weight moves by
/// `alpha / active_count` times δ times its trace, so the effective step on
/// q stays at `alpha` however many layers a transferred function carries.
/// An episode cut by the step budget bootstraps from the next state.
pub fn run_learning_episode<E, R>(
    env: &E,
    vf: &mut ValueFunction,
    cfg: &LearnerConfig,
    eps: f64,
    rng: &mut R,
) -> Result<EpisodeOutcome>
where
    E: Environment,
    R: Rng + ?Sized,
{
    check_actions(env, vf)?;
    let step_size = cfg.alpha / vf.active_count() as f64;
    let decay = cfg.gamma * cfg.lambda;
    let mut traces: HashMap<u64, f64> = HashMap::new();

    let mut state = env.initial_state();
    let mut tiles = vf.tiles(&env.observe(&state))?;
    let mut action = choose(vf, &tiles, eps, rng);
    let mut total_return = 0.0;
    let mut actions_taken = 0;

    loop {
        let tr = env.step(&state, action)?;
        actions_taken += 1;
        total_return += tr.reward;

        for i in tiles.for_action(action) {
            traces.insert(i, 1.0);
        }
        let mut delta = tr.reward - vf.q_for(&tiles, action);

        let next = if tr.terminal && !tr.truncated {
            None
        } else {
            let next_tiles = vf.tiles(&env.observe(&tr.state))?;
            let next_action = choose(vf, &next_tiles, eps, rng);
            delta += cfg.gamma * vf.q_for(&next_tiles, next_action);
            Some((next_tiles, next_action))
        };

        let theta = vf.theta_mut();
        for (&i, &e) in &traces {
            theta.add(i, step_size * delta * e);
        }
        traces.retain(|_, e| {
            *e *= decay;
            e.abs() > TRACE_CUTOFF
        });

        match next {
            Some((next_tiles, next_action)) if !tr.terminal => {
                state = tr.state;
                tiles = next_tiles;
                action = next_action;
            }
            _ => break,
        }
    }

    Ok(EpisodeOutcome {
        total_return,
        actions_taken,
    })
}

/// Greedy rollout without learning.
pub fn greedy_episode<E: Environment>(env: &E, vf: &ValueFunction) -> Result<EpisodeOutcome> {
    check_actions(env, vf)?;
    let mut state = env.initial_state();
    let mut total_return = 0.0;
    let mut actions_taken = 0;
    loop {
        let tiles = vf.tiles(&env.observe(&state))?;
        let tr = env.step(&state, vf.greedy(&tiles))?;
        actions_taken += 1;
        total_return += tr.reward;
        if tr.terminal {
            break;
        }
        state = tr.state;
    }
    Ok(EpisodeOutcome {
        total_return,
        actions_taken,
    })
}

/// Mean return of `episodes` greedy rollouts. The value function is not
/// touched.
pub fn evaluate_policy<E: Environment>(env: &E, vf: &ValueFunction, episodes: usize) -> Result<f64> {
    if episodes == 0 {
        return Err(Error::contract("policy evaluation needs at least one episode"));
    }
    let mut sum = 0.0;
    for _ in 0..episodes {
        sum += greedy_episode(env, vf)?.total_return;
    }
    Ok(sum / episodes as f64)
}

fn check_actions<E: Environment>(env: &E, vf: &ValueFunction) -> Result<()> {
    if env.num_actions() != vf.num_actions() {
        return Err(Error::contract(format!(
            "environment has {} actions but value function has {}",
            env.num_actions(),
            vf.num_actions()
        )));
    }
    Ok(())
}
