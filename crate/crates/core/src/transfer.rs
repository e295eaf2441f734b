//! Value-function transfer between consecutive tasks of a curriculum.
//!
//! When every variable of the source task also exists in the target, the
//! source layers and weights are carried over unchanged and one fresh,
//! zero-weighted layer over the target variables is stacked on top. All
//! layers stay trainable. Otherwise the target starts from scratch.

use std::sync::Arc;

use crate::error::Result;
use crate::learner::{TilingSpec, ValueFunction};

#[derive(Debug, Clone)]
pub struct TransferResult {
    pub target: ValueFunction,
    /// Whether source layers were imported.
    pub carried: bool,
}

/// True when every name in `source` also appears in `target`.
pub fn is_subset(source: &[String], target: &[String]) -> bool {
    source.iter().all(|v| target.contains(v))
}

/// Builds the target task's initial value function from the source's.
///
/// `tag` labels the new layer, `spec` gives its tiling.
pub fn transfer(
    source: &ValueFunction,
    target_vars: &Arc<[String]>,
    target_actions: usize,
    tag: &str,
    spec: TilingSpec,
) -> Result<TransferResult> {
    if is_subset(source.variable_names(), target_vars) {
        if let Some(mut target) = source.rebind(target_vars, target_actions) {
            target.push_block(tag.to_string(), spec)?;
            return Ok(TransferResult {
                target,
                carried: true,
            });
        }
    }
    Ok(TransferResult {
        target: ValueFunction::new(Arc::clone(target_vars), target_actions, tag, spec)?,
        carried: false,
    })
}

#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::mdp::Observation;

    fn vars(names: &[&str]) -> Arc<[String]> {
        names.iter().map(|s| s.to_string()).collect()
    }

    fn spec() -> TilingSpec {
        TilingSpec {
            tilings: 4,
            tiles_per_dim: 3,
        }
    }

    fn random_weights(vf: &mut ValueFunction, rng: &mut ChaCha8Rng) {
        for i in 0..vf.feature_count() {
            vf.theta_mut().set(i, rng.random_range(-5.0..5.0));
        }
    }

    #[test]
    fn same_variables_preserve_q() {
        let v = vars(&["a", "b"]);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut source = ValueFunction::new(Arc::clone(&v), 2, "src", spec()).unwrap();
        random_weights(&mut source, &mut rng);
        let res = transfer(&source, &v, 2, "dst", spec()).unwrap();
        assert!(res.carried);
        assert_eq!(res.target.blocks().len(), 2);
        assert_eq!(res.target.feature_count(), 2 * source.feature_count());
        for _ in 0..200 {
            let o = Observation {
                names: Arc::clone(&v),
                values: vec![rng.random(), rng.random()],
            };
            let a = rng.random_range(0..2);
            assert_eq!(res.target.q_value(&o, a).unwrap(), source.q_value(&o, a).unwrap());
        }
    }

    #[test]
    fn superset_target_rebinds_by_name() {
        let src_vars = vars(&["b"]);
        let dst_vars = vars(&["a", "b"]);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut source = ValueFunction::new(Arc::clone(&src_vars), 1, "src", spec()).unwrap();
        random_weights(&mut source, &mut rng);
        let res = transfer(&source, &dst_vars, 1, "dst", spec()).unwrap();
        assert!(res.carried);
        for _ in 0..100 {
            let b: f64 = rng.random();
            let src_obs = Observation {
                names: Arc::clone(&src_vars),
                values: vec![b],
            };
            let dst_obs = Observation {
                names: Arc::clone(&dst_vars),
                values: vec![rng.random(), b],
            };
            assert_eq!(
                res.target.q_value(&dst_obs, 0).unwrap(),
                source.q_value(&src_obs, 0).unwrap()
            );
        }
    }

    #[test]
    fn incompatible_variables_start_fresh() {
        let mut source = ValueFunction::new(vars(&["a", "c"]), 2, "src", spec()).unwrap();
        source.theta_mut().set(0, 3.0);
        let dst = vars(&["a", "b"]);
        let res = transfer(&source, &dst, 2, "dst", spec()).unwrap();
        assert!(!res.carried);
        assert_eq!(res.target.blocks().len(), 1);
        assert!(res.target.theta().stored().is_empty());
    }

    #[test]
    fn action_mismatch_starts_fresh() {
        let v = vars(&["a"]);
        let source = ValueFunction::new(Arc::clone(&v), 4, "src", spec()).unwrap();
        assert!(!transfer(&source, &v, 5, "dst", spec()).unwrap().carried);
    }

    #[test]
    fn chain_of_transfers_stacks_layers() {
        let v1 = vars(&["a"]);
        let v2 = vars(&["a", "b"]);
        let v3 = vars(&["a", "b", "c"]);
        let f1 = ValueFunction::new(Arc::clone(&v1), 2, "m1", spec()).unwrap();
        let f2 = transfer(&f1, &v2, 2, "m2", spec()).unwrap().target;
        let f3 = transfer(&f2, &v3, 2, "m3", spec()).unwrap().target;
        // bins = 4; blocks over 1, 2 and 3 variables: 2 actions * 4 tilings * 4^d.
        let sizes: Vec<u64> = f3.blocks().iter().map(|b| b.size()).collect();
        assert_eq!(sizes, vec![2 * 4 * 4, 2 * 4 * 16, 2 * 4 * 64]);
        assert_eq!(f3.feature_count(), sizes.iter().sum::<u64>());
        assert_eq!(f3.active_count(), 12);
        let tags: Vec<&str> = f3.blocks().iter().map(|b| b.tag.as_str()).collect();
        assert_eq!(tags, ["m1", "m2", "m3"]);
    }

    #[test]
    fn target_updates_do_not_touch_source() {
        let v = vars(&["a"]);
        let mut source = ValueFunction::new(Arc::clone(&v), 1, "src", spec()).unwrap();
        source.theta_mut().set(1, 2.0);
        let snapshot = source.clone();
        let mut res = transfer(&source, &v, 1, "dst", spec()).unwrap();
        res.target.theta_mut().set(1, -7.0);
        res.target.theta_mut().set(20, 1.0);
        assert_eq!(source, snapshot);
    }
}
