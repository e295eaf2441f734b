//! Objective functions over a curriculum's learning record. All of them are
//! maximized.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::run::LearningRecord;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Metric {
    /// Normalized negative regret against the threshold, in `[-1, 0]`.
    #[serde(rename = "reg")]
    Regret,
    /// Mean return over the first episodes of the final task.
    #[serde(rename = "js")]
    Jumpstart,
    /// Negated actions until a greedy evaluation reaches the threshold.
    #[serde(rename = "ttt")]
    TimeToThreshold,
    /// Best greedy evaluation return during the final task.
    #[serde(rename = "mr")]
    MaxReturn,
}

impl Metric {
    pub const ALL: [Metric; 4] = [
        Metric::Regret,
        Metric::Jumpstart,
        Metric::TimeToThreshold,
        Metric::MaxReturn,
    ];

    pub fn short_name(self) -> &'static str {
        match self {
            Metric::Regret => "reg",
            Metric::Jumpstart => "js",
            Metric::TimeToThreshold => "ttt",
            Metric::MaxReturn => "mr",
        }
    }

    pub fn score(self, rec: &LearningRecord, params: &MetricParams) -> Result<f64> {
        match self {
            Metric::Regret => metric_regret(rec, params),
            Metric::Jumpstart => metric_jumpstart(rec, params),
            Metric::TimeToThreshold => Ok(metric_ttt(rec, params).value),
            Metric::MaxReturn => metric_max_return(rec),
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "reg" | "regret" => Ok(Metric::Regret),
            "js" | "jumpstart" => Ok(Metric::Jumpstart),
            "ttt" | "time-to-threshold" => Ok(Metric::TimeToThreshold),
            "mr" | "max-return" => Ok(Metric::MaxReturn),
            other => Err(Error::config(format!(
                "unknown metric `{other}` (expected reg, js, ttt or mr)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricParams {
    pub metric: Metric,
    /// Target return `g` for regret and time-to-threshold.
    pub threshold: f64,
    /// Lower bound on episode return; regret is normalized by `N (g - g_lb)`.
    pub regret_floor: f64,
    /// Episodes `N` summed by regret; `None` uses every final-task episode.
    pub regret_episodes: Option<usize>,
    /// Episodes `D` averaged by jumpstart.
    pub jumpstart_episodes: usize,
    /// Learning episodes between evaluation phases.
    pub eval_interval: usize,
    /// Greedy episodes per evaluation phase.
    pub eval_episodes: usize,
}

impl MetricParams {
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Result<()> {
        // Negated so NaN fails too.
        if !(self.regret_floor < self.threshold) {
            return Err(Error::config(format!(
                "metric.regret_floor ({}) must be below metric.threshold ({})",
                self.regret_floor, self.threshold
            )));
        }
        let counts = [
            ("regret_episodes", self.regret_episodes.unwrap_or(1)),
            ("jumpstart_episodes", self.jumpstart_episodes),
            ("eval_interval", self.eval_interval),
            ("eval_episodes", self.eval_episodes),
        ];
        for (name, v) in counts {
            if v == 0 {
                return Err(Error::config(format!("metric.{name} must be at least 1")));
            }
        }
        Ok(())
    }

    fn regret_window(&self, rec: &LearningRecord) -> Result<usize> {
        let n = self.regret_episodes.unwrap_or(rec.final_returns.len());
        if n == 0 || n > rec.final_returns.len() {
            return Err(Error::contract(format!(
                "regret over {n} episodes needs that many final-task episodes, record has {}",
                rec.final_returns.len()
            )));
        }
        Ok(n)
    }
}

/// Unnormalized regret: `-(N g - sum of the first N returns)`.
pub fn regret_raw(rec: &LearningRecord, params: &MetricParams) -> Result<f64> {
    let n = params.regret_window(rec)?;
    let sum: f64 = rec.final_returns[..n].iter().sum();
    Ok(-(n as f64 * params.threshold - sum))
}

/// Regret scaled by `N (g - g_lb)` and clamped to `[-1, 0]`.
pub fn metric_regret(rec: &LearningRecord, params: &MetricParams) -> Result<f64> {
    let n = params.regret_window(rec)?;
    let raw = regret_raw(rec, params)?;
    let scale = n as f64 * (params.threshold - params.regret_floor);
    Ok((raw / scale).clamp(-1.0, 0.0))
}

pub fn metric_jumpstart(rec: &LearningRecord, params: &MetricParams) -> Result<f64> {
    let d = params.jumpstart_episodes;
    if d == 0 || d > rec.final_returns.len() {
        return Err(Error::contract(format!(
            "jumpstart over {d} episodes needs that many final-task episodes, record has {}",
            rec.final_returns.len()
        )));
    }
    Ok(rec.final_returns[..d].iter().sum::<f64>() / d as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeToThreshold {
    pub value: f64,
    /// No evaluation phase reached the threshold; the whole final-task
    /// budget was charged instead.
    pub threshold_missed: bool,
}

pub fn metric_ttt(rec: &LearningRecord, params: &MetricParams) -> TimeToThreshold {
    let intermediate: u64 = rec.intermediate_actions.iter().sum();
    let (final_actions, threshold_missed) = match rec.actions_to_threshold(params.threshold) {
        Some(a) => (a, false),
        None => (rec.final_actions.iter().sum(), true),
    };
    TimeToThreshold {
        value: -((final_actions + intermediate) as f64),
        threshold_missed,
    }
}

pub fn metric_max_return(rec: &LearningRecord) -> Result<f64> {
    rec.evaluations
        .iter()
        .map(|e| e.mean_return)
        .reduce(f64::max)
        .ok_or_else(|| Error::contract("max-return needs at least one evaluation step"))
}
