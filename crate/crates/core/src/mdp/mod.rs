//! Episodic, deterministic grid environments.
//!
//! A [`TaskSpec`] is an immutable description of one task (map, start pose,
//! episode budget). Episode state lives in a separate [`State`] value so the
//! same task can be stepped from any number of threads at once.

mod blockdude;
mod gridworld;
mod map;
mod solve;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use blockdude::{DudeAction, MAX_BOX_SLOTS};
pub use gridworld::GridAction;
pub use map::{load_task, load_task_file, MapHeader};
pub use solve::optimal_return;

/// Which environment dynamics a task uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnvKind {
    GridWorld,
    BlockDude,
}

impl EnvKind {
    pub fn num_actions(self) -> usize {
        match self {
            EnvKind::GridWorld => 4,
            EnvKind::BlockDude => 5,
        }
    }

    pub fn default_max_steps(self) -> usize {
        match self {
            EnvKind::GridWorld => gridworld::MAX_STEPS,
            EnvKind::BlockDude => 100,
        }
    }
}

impl fmt::Display for EnvKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EnvKind::GridWorld => "gridworld",
            EnvKind::BlockDude => "blockdude",
        })
    }
}

impl std::str::FromStr for EnvKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gridworld" => Ok(EnvKind::GridWorld),
            "blockdude" => Ok(EnvKind::BlockDude),
            other => Err(Error::config(format!("unknown environment kind `{other}`"))),
        }
    }
}

/// Grid coordinate. `x` is the column, `y` the row, with row 0 at the top.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pos {
    pub x: i32,
    pub y: i32,
}

impl Pos {
    pub const fn new(x: i32, y: i32) -> Self {
        Pos { x, y }
    }

    pub fn offset(self, dx: i32, dy: i32) -> Self {
        Pos::new(self.x + dx, self.y + dy)
    }

    pub fn chebyshev(self, other: Pos) -> i32 {
        (self.x - other.x).abs().max((self.y - other.y).abs())
    }

    pub fn manhattan(self, other: Pos) -> i32 {
        (self.x - other.x).abs() + (self.y - other.y).abs()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Cell {
    Free,
    Pit,
    Fire,
    Treasure,
    Solid,
    Exit,
}

/// Rectangular, non-empty cell array.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grid {
    width: i32,
    height: i32,
    cells: Vec<Cell>,
}

impl Grid {
    pub fn new(width: usize, height: usize, cells: Vec<Cell>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::contract("grid must be non-empty"));
        }
        if cells.len() != width * height {
            return Err(Error::contract(format!(
                "grid of {width}x{height} needs {} cells, got {}",
                width * height,
                cells.len()
            )));
        }
        Ok(Grid {
            width: width as i32,
            height: height as i32,
            cells,
        })
    }

    pub fn width(&self) -> usize {
        self.width as usize
    }

    pub fn height(&self) -> usize {
        self.height as usize
    }

    /// Larger of the two dimensions; the normalizing constant for deltas.
    pub fn dimension(&self) -> usize {
        self.width.max(self.height) as usize
    }

    pub fn contains(&self, p: Pos) -> bool {
        p.x >= 0 && p.y >= 0 && p.x < self.width && p.y < self.height
    }

    /// Cell at `p`, or `None` outside the grid.
    pub fn get(&self, p: Pos) -> Option<Cell> {
        self.contains(p)
            .then(|| self.cells[(p.y * self.width + p.x) as usize])
    }

    pub fn positions(&self) -> impl Iterator<Item = Pos> + '_ {
        (0..self.height).flat_map(move |y| (0..self.width).map(move |x| Pos::new(x, y)))
    }

    pub fn cells_of(&self, kind: Cell) -> impl Iterator<Item = Pos> + '_ {
        self.positions().filter(move |&p| self.get(p) == Some(kind))
    }
}

/// Horizontal facing of the BlockDude agent. GridWorld ignores it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Facing {
    Left,
    Right,
}

impl Facing {
    pub fn dx(self) -> i32 {
        match self {
            Facing::Left => -1,
            Facing::Right => 1,
        }
    }
}

/// One episodic task: dynamics kind, map, start pose and learning budget.
#[derive(Debug, Clone)]
pub struct TaskSpec {
    pub id: String,
    pub kind: EnvKind,
    pub grid: Grid,
    pub start: Pos,
    pub start_facing: Facing,
    /// Treasure (GridWorld) or exit (BlockDude).
    pub goal: Pos,
    /// Initial box positions, sorted in reading order. Empty for GridWorld.
    pub boxes: Vec<Pos>,
    pub episode_budget: usize,
    pub max_steps: usize,
    variables: Arc<[String]>,
}

impl TaskSpec {
    /// Builds a task and checks its invariants.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        id: impl Into<String>,
        kind: EnvKind,
        grid: Grid,
        start: Pos,
        start_facing: Facing,
        goal: Pos,
        mut boxes: Vec<Pos>,
        episode_budget: usize,
        max_steps: usize,
    ) -> Result<Self> {
        if episode_budget == 0 {
            return Err(Error::contract("episode budget must be at least 1"));
        }
        if max_steps == 0 {
            return Err(Error::contract("max_steps must be at least 1"));
        }
        if !grid.contains(start) || !grid.contains(goal) {
            return Err(Error::contract("start and goal must lie inside the grid"));
        }
        sort_reading_order(&mut boxes);
        if kind == EnvKind::BlockDude && boxes.len() > MAX_BOX_SLOTS {
            return Err(Error::contract(format!(
                "at most {MAX_BOX_SLOTS} boxes are supported, got {}",
                boxes.len()
            )));
        }
        let variables = match kind {
            EnvKind::GridWorld => gridworld::variable_names(),
            EnvKind::BlockDude => blockdude::variable_names(),
        };
        Ok(TaskSpec {
            id: id.into(),
            kind,
            grid,
            start,
            start_facing,
            goal,
            boxes,
            episode_budget,
            max_steps,
            variables,
        })
    }

    pub fn num_actions(&self) -> usize {
        self.kind.num_actions()
    }

    /// Names of the observation variables, fixed per task.
    pub fn variable_names(&self) -> &Arc<[String]> {
        &self.variables
    }

    pub fn initial_state(&self) -> State {
        State {
            agent: self.start,
            facing: self.start_facing,
            holding: false,
            boxes: self.boxes.clone(),
            steps: 0,
            terminal: false,
        }
    }

    /// Applies `action` to a non-terminal state.
    pub fn step(&self, state: &State, action: usize) -> Result<Transition<State>> {
        if state.terminal {
            return Err(Error::contract("step called on a terminal state"));
        }
        if action >= self.num_actions() {
            return Err(Error::contract(format!(
                "action {action} is not legal in {} (has {} actions)",
                self.kind,
                self.num_actions()
            )));
        }
        let mut t = match self.kind {
            EnvKind::GridWorld => gridworld::step(self, state, action),
            EnvKind::BlockDude => blockdude::step(self, state, action),
        };
        t.state.steps = state.steps + 1;
        if !t.terminal && t.state.steps >= self.max_steps {
            t.terminal = true;
            t.truncated = true;
        }
        t.state.terminal = t.terminal;
        Ok(t)
    }

    pub fn observe(&self, state: &State) -> Observation {
        let values = match self.kind {
            EnvKind::GridWorld => gridworld::observe(self, state),
            EnvKind::BlockDude => blockdude::observe(self, state),
        };
        debug_assert_eq!(values.len(), self.variables.len());
        Observation {
            names: Arc::clone(&self.variables),
            values,
        }
    }
}

/// Factored episode state.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct State {
    pub agent: Pos,
    pub facing: Facing,
    pub holding: bool,
    /// Box positions in reading order (a held box sits just above the agent).
    pub boxes: Vec<Pos>,
    pub steps: usize,
    pub terminal: bool,
}

/// Result of one environment step.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition<S> {
    pub state: S,
    pub reward: f64,
    pub terminal: bool,
    /// The episode ended only because the step budget ran out.
    pub truncated: bool,
}

/// Named vector of variables, each in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub names: Arc<[String]>,
    pub values: Vec<f64>,
}

impl Observation {
    pub fn get(&self, name: &str) -> Option<f64> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| self.values[i])
    }
}

/// Maps a signed per-axis delta into `[0, 1]` given the map dimension.
pub(crate) fn normalize_delta(delta: i32, dimension: usize) -> f64 {
    let d = dimension as f64;
    (f64::from(delta) + d) / (2.0 * d)
}

/// What the learner needs from an environment.
///
/// [`TaskSpec`] is the production implementation; tests supply small
/// hand-built chains.
pub trait Environment {
    type State: Clone;

    fn num_actions(&self) -> usize;
    fn max_steps(&self) -> usize;
    fn initial_state(&self) -> Self::State;
    fn step(&self, state: &Self::State, action: usize) -> Result<Transition<Self::State>>;
    fn observe(&self, state: &Self::State) -> Observation;
}

impl Environment for TaskSpec {
    type State = State;

    fn num_actions(&self) -> usize {
        TaskSpec::num_actions(self)
    }

    fn max_steps(&self) -> usize {
        self.max_steps
    }

    fn initial_state(&self) -> State {
        TaskSpec::initial_state(self)
    }

    fn step(&self, state: &State, action: usize) -> Result<Transition<State>> {
        TaskSpec::step(self, state, action)
    }

    fn observe(&self, state: &State) -> Observation {
        TaskSpec::observe(self, state)
    }
}

pub(crate) fn sort_reading_order(positions: &mut [Pos]) {
    positions.sort_by_key(|p| (p.y, p.x));
}
