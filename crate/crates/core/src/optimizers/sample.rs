use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;

use crate::curriculum::{curricula_of_length, Curriculum};

/// Uniform draw from the non-empty curricula of length at most `max_len`:
/// the length is drawn in proportion to how many curricula have it, then
/// the tasks as a uniformly random injection.
pub fn sample_curriculum<R: Rng + ?Sized>(n: usize, max_len: usize, rng: &mut R) -> Curriculum {
    let max_len = max_len.min(n);
    if max_len == 0 {
        return Curriculum::empty();
    }
    let weights: Vec<f64> = (1..=max_len).map(|l| curricula_of_length(n, l) as f64).collect();
    let len = 1 + WeightedIndex::new(&weights)
        .expect("curriculum counts are positive")
        .sample(rng);
    let tasks = rand::seq::index::sample(rng, n, len).into_vec();
    Curriculum::new(tasks).expect("sampled indices are distinct")
}
