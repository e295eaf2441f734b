use serde::{Deserialize, Serialize};

use super::search::Search;
use crate::curriculum::{curriculum_space_size, enumerate_curricula, Curriculum, Objective};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExhaustiveConfig {
    /// Largest curriculum space exhaustive search agrees to enumerate.
    pub max_space: u64,
}

impl Default for ExhaustiveConfig {
    fn default() -> Self {
        ExhaustiveConfig { max_space: 50_000 }
    }
}

pub(crate) fn check_space(n: usize, max_len: usize, cfg: &ExhaustiveConfig) -> Result<()> {
    let size = curriculum_space_size(n, max_len)?;
    if size > cfg.max_space as u128 {
        return Err(Error::SpaceTooLarge {
            size,
            cap: cfg.max_space as u128,
        });
    }
    Ok(())
}

pub(crate) fn run<O: Objective + ?Sized>(search: &mut Search<'_, O>, cfg: &ExhaustiveConfig) -> Result<()> {
    check_space(search.n(), search.max_len(), cfg)?;
    let all = enumerate_curricula(search.n(), search.max_len());
    // One batch per length keeps memory flat and gives iteration boundaries.
    for len in 1..=search.max_len() {
        let level: Vec<Curriculum> = all.iter().filter(|c| c.len() == len).cloned().collect();
        if search.evaluate_batch(&level)?.is_none() || !search.boundary() {
            break;
        }
    }
    Ok(())
}
