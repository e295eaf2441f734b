//! Tile-coded linear action-value functions.
//!
//! A value function is a stack of feature blocks ("layers"). Each block tiles
//! the joint space of its variables with `tilings` offset grids of
//! `tiles_per_dim` tiles per dimension, separately for every action. The
//! feature index space of a block is laid out densely as
//! `[action][tiling][tile]`, and blocks are concatenated, so the total feature
//! count is the sum of block sizes. Weights are stored sparsely: an entry that
//! was never written is zero.

use std::collections::HashMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::mdp::Observation;

/// Tiling geometry shared by the blocks a learner creates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TilingSpec {
    pub tilings: usize,
    pub tiles_per_dim: usize,
}

/// One layer of tile features over a fixed variable subset.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureBlock {
    /// Which task created this block.
    pub tag: String,
    variables: Vec<String>,
    /// Position of each of `variables` in the owning function's variable list.
    bound: Vec<usize>,
    spec: TilingSpec,
    num_actions: usize,
    offset: u64,
    /// `tiles_per_dim + 1` grid cells per dimension once offsets are applied.
    bins: u64,
    tiling_size: u64,
}

impl FeatureBlock {
    fn new(
        tag: String,
        variables: Vec<String>,
        bound: Vec<usize>,
        spec: TilingSpec,
        num_actions: usize,
        offset: u64,
    ) -> Result<Self> {
        let bins = spec.tiles_per_dim as u64 + 1;
        let tiling_size = (0..variables.len())
            .try_fold(1u64, |acc, _| acc.checked_mul(bins))
            .ok_or_else(|| Error::contract("tile coding index space overflows u64"))?;
        let block = FeatureBlock {
            tag,
            variables,
            bound,
            spec,
            num_actions,
            offset,
            bins,
            tiling_size,
        };
        block
            .size()
            .checked_add(offset)
            .ok_or_else(|| Error::contract("tile coding index space overflows u64"))?;
        Ok(block)
    }

    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    pub fn spec(&self) -> TilingSpec {
        self.spec
    }

    pub fn offset(&self) -> u64 {
        self.offset
    }

    /// Number of features in this block.
    pub fn size(&self) -> u64 {
        self.num_actions as u64 * self.spec.tilings as u64 * self.tiling_size
    }

    /// Distance between the same tile of consecutive actions.
    fn action_stride(&self) -> u64 {
        self.spec.tilings as u64 * self.tiling_size
    }

    /// Index of the active tile of tiling `k` for action 0.
    fn tile_index(&self, values: &[f64], k: usize) -> u64 {
        let tiles = self.spec.tiles_per_dim as f64;
        let tilings = self.spec.tilings as f64;
        let mut index = 0u64;
        let mut scale = 1u64;
        for (d, &var) in self.bound.iter().enumerate() {
            // Asymmetric displacement: dimension d shifts by (2d + 1) / tilings
            // of a tile per tiling.
            let shift = ((k * (2 * d + 1)) as f64 / tilings).fract();
            let v = values[var].clamp(0.0, 1.0);
            let coord = ((v * tiles + shift).floor() as u64).min(self.bins - 1);
            index += coord * scale;
            scale *= self.bins;
        }
        self.offset + k as u64 * self.tiling_size + index
    }
}

/// Sparse weight vector with a fixed logical length.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Weights {
    len: u64,
    values: HashMap<u64, f64>,
}

impl Weights {
    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: u64) -> f64 {
        self.values.get(&i).copied().unwrap_or(0.0)
    }

    pub fn set(&mut self, i: u64, w: f64) {
        assert!(i < self.len, "weight index {i} out of range {}", self.len);
        self.values.insert(i, w);
    }

    pub fn add(&mut self, i: u64, dw: f64) {
        *self.values.entry(i).or_insert(0.0) += dw;
    }

    /// Non-zero-capable entries that have been written, in index order.
    pub fn stored(&self) -> Vec<(u64, f64)> {
        let mut v: Vec<_> = self.values.iter().map(|(&i, &w)| (i, w)).collect();
        v.sort_unstable_by_key(|e| e.0);
        v
    }

    fn grow(&mut self, extra: u64) {
        self.len += extra;
    }
}

/// Active features of one state for every action at once.
///
/// Feature `j` for action `a` is `base[j] + a * stride[j]`.
#[derive(Debug, Clone)]
pub struct ActiveTiles {
    base: Vec<u64>,
    stride: Vec<u64>,
}

impl ActiveTiles {
    pub fn for_action(&self, action: usize) -> impl Iterator<Item = u64> + '_ {
        self.base
            .iter()
            .zip(&self.stride)
            .map(move |(&b, &s)| b + action as u64 * s)
    }

    pub fn len(&self) -> usize {
        self.base.len()
    }

    pub fn is_empty(&self) -> bool {
        self.base.is_empty()
    }
}

/// Linear action-value function `q(s, a) = theta . phi(s, a)` over tile features.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueFunction {
    variable_names: Arc<[String]>,
    num_actions: usize,
    blocks: Vec<FeatureBlock>,
    theta: Weights,
}

impl ValueFunction {
    /// Fresh function with a single block over all variables and zero weights.
    pub fn new(
        variable_names: Arc<[String]>,
        num_actions: usize,
        tag: impl Into<String>,
        spec: TilingSpec,
    ) -> Result<Self> {
        if spec.tilings == 0 || spec.tiles_per_dim == 0 {
            return Err(Error::contract("tilings and tiles_per_dim must be at least 1"));
        }
        if num_actions == 0 {
            return Err(Error::contract("value function needs at least one action"));
        }
        let mut vf = ValueFunction {
            variable_names,
            num_actions,
            blocks: Vec::new(),
            theta: Weights::default(),
        };
        vf.push_block(tag.into(), spec)?;
        Ok(vf)
    }

    /// Appends a zero-weighted block over all current variables.
    pub(crate) fn push_block(&mut self, tag: String, spec: TilingSpec) -> Result<()> {
        let variables = self.variable_names.to_vec();
        let bound = (0..variables.len()).collect();
        let block = FeatureBlock::new(tag, variables, bound, spec, self.num_actions, self.theta.len())?;
        self.theta.grow(block.size());
        self.blocks.push(block);
        Ok(())
    }

    /// Copy of this function re-bound to a superset of its variables.
    ///
    /// Returns `None` unless every variable (by name) is present in
    /// `target_vars` and the action count matches.
    pub(crate) fn rebind(&self, target_vars: &Arc<[String]>, num_actions: usize) -> Option<Self> {
        if num_actions != self.num_actions {
            return None;
        }
        let position = |name: &String| target_vars.iter().position(|v| v == name);
        let blocks = self
            .blocks
            .iter()
            .map(|b| {
                let bound = b.variables.iter().map(position).collect::<Option<Vec<_>>>()?;
                Some(FeatureBlock { bound, ..b.clone() })
            })
            .collect::<Option<Vec<_>>>()?;
        Some(ValueFunction {
            variable_names: Arc::clone(target_vars),
            num_actions,
            blocks,
            theta: self.theta.clone(),
        })
    }

    pub fn variable_names(&self) -> &Arc<[String]> {
        &self.variable_names
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn blocks(&self) -> &[FeatureBlock] {
        &self.blocks
    }

    pub fn theta(&self) -> &Weights {
        &self.theta
    }

    pub fn theta_mut(&mut self) -> &mut Weights {
        &mut self.theta
    }

    /// Total feature count, i.e. the logical length of theta.
    pub fn feature_count(&self) -> u64 {
        self.theta.len()
    }

    /// Features active for any single (state, action): tilings summed over layers.
    pub fn active_count(&self) -> usize {
        self.blocks.iter().map(|b| b.spec.tilings).sum()
    }

    fn check(&self, obs: &Observation) -> Result<()> {
        if Arc::ptr_eq(&obs.names, &self.variable_names) || obs.names == self.variable_names {
            return Ok(());
        }
        match self.variable_names.iter().find(|v| !obs.names.contains(v)) {
            Some(missing) => Err(Error::contract(format!(
                "observation is missing variable `{missing}`"
            ))),
            None => Err(Error::contract(
                "observation variables are not in value-function order",
            )),
        }
    }

    /// Active tiles of an observation, for all actions.
    pub fn tiles(&self, obs: &Observation) -> Result<ActiveTiles> {
        self.check(obs)?;
        Ok(self.tiles_unchecked(&obs.values))
    }

    pub(crate) fn tiles_unchecked(&self, values: &[f64]) -> ActiveTiles {
        let n = self.active_count();
        let mut base = Vec::with_capacity(n);
        let mut stride = Vec::with_capacity(n);
        for block in &self.blocks {
            for k in 0..block.spec.tilings {
                base.push(block.tile_index(values, k));
                stride.push(block.action_stride());
            }
        }
        ActiveTiles { base, stride }
    }

    /// Indices of the features active for `(obs, action)`.
    pub fn tile_features(&self, obs: &Observation, action: usize) -> Result<Vec<u64>> {
        if action >= self.num_actions {
            return Err(Error::contract(format!(
                "action {action} out of range for {} actions",
                self.num_actions
            )));
        }
        Ok(self.tiles(obs)?.for_action(action).collect())
    }

    pub fn q_value(&self, obs: &Observation, action: usize) -> Result<f64> {
        let features = self.tile_features(obs, action)?;
        Ok(self.sum(features.into_iter()))
    }

    pub(crate) fn sum(&self, features: impl Iterator<Item = u64>) -> f64 {
        features.map(|i| self.theta.get(i)).sum()
    }

    pub(crate) fn q_for(&self, tiles: &ActiveTiles, action: usize) -> f64 {
        self.sum(tiles.for_action(action))
    }

    /// Greedy action; ties go to the lowest index.
    pub(crate) fn greedy(&self, tiles: &ActiveTiles) -> usize {
        let mut best = 0;
        let mut best_q = self.q_for(tiles, 0);
        for a in 1..self.num_actions {
            let q = self.q_for(tiles, a);
            if q > best_q {
                best = a;
                best_q = q;
            }
        }
        best
    }
}
