use std::sync::Arc;

use super::{normalize_delta, Cell, Pos, State, TaskSpec, Transition};

pub(crate) const MAX_STEPS: usize = 50;

pub const REWARD_PIT: f64 = -2500.0;
pub const REWARD_FIRE: f64 = -500.0;
pub const REWARD_NEAR_FIRE: f64 = -250.0;
pub const REWARD_TREASURE: f64 = 200.0;
pub const REWARD_STEP: f64 = -1.0;

/// Hazards further than this (Chebyshev) from the agent are not observed.
const HAZARD_RADIUS: i32 = 2;

/// Observation value of a hazard slot with nothing in range.
const ABSENT: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridAction {
    North = 0,
    South = 1,
    East = 2,
    West = 3,
}

impl GridAction {
    pub const ALL: [GridAction; 4] = [
        GridAction::North,
        GridAction::South,
        GridAction::East,
        GridAction::West,
    ];

    fn delta(self) -> (i32, i32) {
        match self {
            GridAction::North => (0, -1),
            GridAction::South => (0, 1),
            GridAction::East => (1, 0),
            GridAction::West => (-1, 0),
        }
    }
}

pub(crate) fn variable_names() -> Arc<[String]> {
    [
        "treasure_dx",
        "treasure_dy",
        "pit_dx",
        "pit_dy",
        "fire_dx",
        "fire_dy",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect()
}

fn next_to_fire(task: &TaskSpec, p: Pos) -> bool {
    [(0, -1), (0, 1), (1, 0), (-1, 0)]
        .iter()
        .any(|&(dx, dy)| task.grid.get(p.offset(dx, dy)) == Some(Cell::Fire))
}

/// Reward and termination for entering `p`.
pub(crate) fn entry_outcome(task: &TaskSpec, p: Pos) -> (f64, bool) {
    match task.grid.get(p) {
        Some(Cell::Pit) => (REWARD_PIT, true),
        Some(Cell::Treasure) => (REWARD_TREASURE, true),
        Some(Cell::Fire) => (REWARD_FIRE, false),
        _ if next_to_fire(task, p) => (REWARD_NEAR_FIRE, false),
        _ => (REWARD_STEP, false),
    }
}

pub(crate) fn move_target(task: &TaskSpec, from: Pos, action: usize) -> Pos {
    let (dx, dy) = GridAction::ALL[action].delta();
    let to = from.offset(dx, dy);
    if task.grid.contains(to) {
        to
    } else {
        from
    }
}

pub(crate) fn step(task: &TaskSpec, state: &State, action: usize) -> Transition<State> {
    let agent = move_target(task, state.agent, action);
    let (reward, terminal) = entry_outcome(task, agent);
    Transition {
        state: State {
            agent,
            ..state.clone()
        },
        reward,
        terminal,
        truncated: false,
    }
}

fn nearest(task: &TaskSpec, agent: Pos, kind: Cell) -> Option<Pos> {
    task.grid
        .cells_of(kind)
        .filter(|&p| agent.chebyshev(p) <= HAZARD_RADIUS)
        .min_by_key(|&p| (agent.chebyshev(p), agent.manhattan(p), p.y, p.x))
}

pub(crate) fn observe(task: &TaskSpec, state: &State) -> Vec<f64> {
    let dim = task.grid.dimension();
    let a = state.agent;
    let mut values = vec![
        normalize_delta(task.goal.x - a.x, dim),
        normalize_delta(task.goal.y - a.y, dim),
    ];
    for kind in [Cell::Pit, Cell::Fire] {
        match nearest(task, a, kind) {
            Some(h) => {
                values.push(normalize_delta(h.x - a.x, dim));
                values.push(normalize_delta(h.y - a.y, dim));
            }
            None => values.extend([ABSENT, ABSENT]),
        }
    }
    values
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::{load_task, EnvKind};

    fn task(map: &str) -> TaskSpec {
        load_task(map, EnvKind::GridWorld).unwrap()
    }

    #[test]
    fn entering_pit_ends_episode() {
        let t = task("SP.\n...\n..T");
        let tr = t.step(&t.initial_state(), GridAction::East as usize).unwrap();
        assert_eq!(tr.reward, -2500.0);
        assert!(tr.terminal);
        assert!(!tr.truncated);
    }

    #[test]
    fn free_move_costs_one() {
        let t = task("S..\n...\n..T");
        let tr = t.step(&t.initial_state(), GridAction::South as usize).unwrap();
        assert_eq!(tr.reward, -1.0);
        assert!(!tr.terminal);
        assert_eq!(tr.state.agent, Pos::new(0, 1));
    }

    #[test]
    fn edge_blocks_and_adjacency_still_applies() {
        // 2x2: agent top-left, fire bottom-left. Moving north hits the edge;
        // the agent stays on a cell next to the fire.
        let t = task("ST\nF.");
        let tr = t.step(&t.initial_state(), GridAction::North as usize).unwrap();
        assert_eq!(tr.state.agent, Pos::new(0, 0));
        assert_eq!(tr.reward, -250.0);
        // Moving west is also blocked.
        let tr = t.step(&t.initial_state(), GridAction::West as usize).unwrap();
        assert_eq!(tr.reward, -250.0);
        // Bottom-right is next to the fire too.
        let t2 = task("S.\nFT");
        let tr = t2.step(&t2.initial_state(), GridAction::East as usize).unwrap();
        assert_eq!(tr.state.agent, Pos::new(1, 0));
        assert_eq!(tr.reward, -1.0);
    }

    #[test]
    fn fire_is_enterable_and_not_terminal() {
        let t = task("SF.\n...\n..T");
        let tr = t.step(&t.initial_state(), GridAction::East as usize).unwrap();
        assert_eq!(tr.reward, -500.0);
        assert!(!tr.terminal);
    }

    #[test]
    fn pit_next_to_fire_is_still_a_pit() {
        let t = task("SPF\n...\n..T");
        let tr = t.step(&t.initial_state(), GridAction::East as usize).unwrap();
        assert_eq!(tr.reward, -2500.0);
        assert!(tr.terminal);
    }

    #[test]
    fn treasure_pays_and_terminates() {
        let t = task("ST");
        let tr = t.step(&t.initial_state(), GridAction::East as usize).unwrap();
        assert_eq!(tr.reward, 200.0);
        assert!(tr.terminal);
    }

    #[test]
    fn episode_times_out_after_fifty_actions() {
        let t = task("S...\n....\n...T");
        assert_eq!(t.max_steps, 50);
        let mut s = t.initial_state();
        let mut n = 0;
        loop {
            let tr = t.step(&s, GridAction::North as usize).unwrap();
            n += 1;
            s = tr.state;
            if tr.terminal {
                assert!(tr.truncated);
                assert_eq!(tr.reward, -1.0);
                break;
            }
        }
        assert_eq!(n, 50);
        assert!(t.step(&s, 0).is_err());
    }

    #[test]
    fn illegal_action_is_rejected() {
        let t = task("ST");
        assert!(t.step(&t.initial_state(), 4).is_err());
    }

    #[test]
    fn observation_on_treasure_is_centered() {
        let t = task("S.T");
        let mut s = t.initial_state();
        s.agent = t.goal;
        let obs = t.observe(&s);
        assert_eq!(obs.get("treasure_dx"), Some(0.5));
        assert_eq!(obs.get("treasure_dy"), Some(0.5));
    }

    #[test]
    fn distant_hazard_reads_as_sentinel() {
        // 5x5, fire in the far corner: Chebyshev distance 4 from the start.
        let t = task("S....\n.....\n.....\n.....\n...TF");
        let obs = t.observe(&t.initial_state());
        assert_eq!(&obs.values[2..], &[1.0, 1.0, 1.0, 1.0]);
        // Treasure at (+3, +4) on a 5-wide map: (3+5)/10, (4+5)/10.
        assert!((obs.values[0] - 0.8).abs() < 1e-15);
        assert!((obs.values[1] - 0.9).abs() < 1e-15);
    }

    #[test]
    fn nearby_fire_is_observed_as_delta() {
        let t = task("S....\n..F..\n.....\n.....\n....T");
        let obs = t.observe(&t.initial_state());
        // Fire at (+2, +1): (2+5)/10, (1+5)/10.
        assert_eq!(obs.get("fire_dx"), Some(0.7));
        assert_eq!(obs.get("fire_dy"), Some(0.6));
        assert_eq!(obs.get("pit_dx"), Some(1.0));
    }
}
