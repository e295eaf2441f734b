//! Greedy and beam search, which both grow curricula one level at a time.

use serde::{Deserialize, Serialize};

use super::search::{rank, Search};
use crate::curriculum::{generate_candidates, Curriculum, Objective};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BeamConfig {
    /// Curricula kept per level; defaults to the number of candidate tasks.
    pub width: Option<usize>,
}

impl BeamConfig {
    pub fn validate(&self) -> Result<()> {
        if self.width == Some(0) {
            return Err(Error::config("beam.width must be at least 1"));
        }
        Ok(())
    }
}

/// The `keep` best of `level` by value, canonical order on ties.
fn best_of(level: Vec<Curriculum>, values: &[f64], keep: usize) -> Vec<Curriculum> {
    let mut scored: Vec<(Curriculum, f64)> = level.into_iter().zip(values.iter().copied()).collect();
    scored.sort_by(|a, b| rank((&a.0, a.1), (&b.0, b.1)));
    scored.into_iter().take(keep).map(|(c, _)| c).collect()
}

pub(crate) fn greedy<O: Objective + ?Sized>(search: &mut Search<'_, O>) -> Result<()> {
    let mut seeds = vec![Curriculum::empty()];
    let mut incumbent: Option<(Curriculum, f64)> = None;
    while seeds[0].len() < search.max_len() {
        let candidates = generate_candidates(&seeds, search.n());
        let Some(values) = search.evaluate_batch(&candidates)? else {
            break;
        };
        let best = best_of(candidates, &values, 1).remove(0);
        let best_value = search.value(&best).expect("just evaluated");
        if let Some((_, v)) = &incumbent {
            if best_value <= *v {
                break;
            }
        }
        seeds = vec![best.clone()];
        incumbent = Some((best, best_value));
        if !search.boundary() {
            break;
        }
    }
    Ok(())
}

pub(crate) fn beam<O: Objective + ?Sized>(search: &mut Search<'_, O>, cfg: &BeamConfig) -> Result<()> {
    let width = cfg.width.unwrap_or(search.n()).max(1);
    let mut level = vec![Curriculum::empty()];
    for _ in 0..search.max_len() {
        let candidates = generate_candidates(&level, search.n());
        let Some(values) = search.evaluate_batch(&candidates)? else {
            break;
        };
        level = best_of(candidates, &values, width);
        if !search.boundary() {
            break;
        }
    }
    Ok(())
}
