//! Exact planners used for thresholds and learner checks.

use std::collections::{HashMap, HashSet, VecDeque};

use super::{gridworld, EnvKind, State, TaskSpec};

/// Best achievable undiscounted episode return from the start state within
/// the task's step budget, or `None` when the goal is unreachable.
///
/// GridWorld uses finite-horizon value iteration over agent positions;
/// BlockDude uses breadth-first search over full states (every action costs
/// the same).
pub fn optimal_return(task: &TaskSpec) -> Option<f64> {
    match task.kind {
        EnvKind::GridWorld => Some(gridworld_value_iteration(task)),
        EnvKind::BlockDude => blockdude_shortest(task).map(|n| -(n as f64)),
    }
}

fn gridworld_value_iteration(task: &TaskSpec) -> f64 {
    let positions: Vec<_> = task.grid.positions().collect();
    let index: HashMap<_, _> = positions.iter().enumerate().map(|(i, &p)| (p, i)).collect();
    // value[i] = best return with h actions left.
    let mut value = vec![0.0; positions.len()];
    for _ in 0..task.max_steps {
        let next: Vec<f64> = positions
            .iter()
            .map(|&p| {
                (0..task.num_actions())
                    .map(|a| {
                        let to = gridworld::move_target(task, p, a);
                        let (r, terminal) = gridworld::entry_outcome(task, to);
                        if terminal {
                            r
                        } else {
                            r + value[index[&to]]
                        }
                    })
                    .fold(f64::NEG_INFINITY, f64::max)
            })
            .collect();
        value = next;
    }
    value[index[&task.start]]
}

fn blockdude_shortest(task: &TaskSpec) -> Option<usize> {
    let key = |s: &State| (s.agent, s.facing, s.holding, s.boxes.clone());
    let start = task.initial_state();
    let mut seen = HashSet::from([key(&start)]);
    let mut queue = VecDeque::from([(start, 0usize)]);
    while let Some((state, depth)) = queue.pop_front() {
        if depth >= task.max_steps {
            continue;
        }
        for a in 0..task.num_actions() {
            let mut from = state.clone();
            // Depth is tracked here; keep the step counter from truncating.
            from.steps = 0;
            let tr = task.step(&from, a).expect("valid action on live state");
            if tr.terminal && !tr.truncated {
                return Some(depth + 1);
            }
            let mut next = tr.state;
            next.terminal = false;
            if seen.insert(key(&next)) {
                queue.push_back((next, depth + 1));
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::load_task;

    #[test]
    fn straight_corridor_gridworld() {
        let t = load_task("S..T", EnvKind::GridWorld).unwrap();
        // Two free moves then the treasure.
        assert_eq!(optimal_return(&t), Some(-1.0 - 1.0 + 200.0));
    }

    #[test]
    fn detour_around_fire_is_worth_it() {
        // Going straight passes next to the fire (-250); detouring is longer
        // but cheaper.
        let t = load_task("S...T\n..F..\n.....\n.....", EnvKind::GridWorld).unwrap();
        let v = optimal_return(&t).unwrap();
        assert!(v > 0.0, "{v}");
    }

    #[test]
    fn blockdude_needs_box() {
        let t = load_task("......\n....#x\n>b..##\n######", EnvKind::BlockDude).unwrap();
        assert_eq!(optimal_return(&t), Some(-7.0));
    }

    #[test]
    fn unreachable_exit() {
        let t = load_task("...#..\n...#.x\n>..###\n######", EnvKind::BlockDude).unwrap();
        assert_eq!(optimal_return(&t), None);
    }
}
