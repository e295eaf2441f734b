//! BlockDude: climb walls by carrying and stacking boxes to reach the exit.
//!
//! Rules:
//! - `Left`/`Right` turn the agent and, when the target cell is free (and the
//!   cell above it is free when carrying), move one column; the agent then
//!   falls to the lowest free cell.
//! - `Up` climbs onto an obstacle of height exactly one in the facing
//!   direction, provided there is headroom.
//! - `PickUp` lifts an adjacent box in the facing direction that has nothing
//!   on top of it, when the cell above the agent is free.
//! - `PutDown` moves the carried box to the cell in front of it and lets it
//!   fall.
//!
//! Every action costs -1, including ones with no effect.

use std::sync::Arc;

use super::{normalize_delta, sort_reading_order, Cell, Facing, Pos, State, TaskSpec, Transition};

pub const REWARD_STEP: f64 = -1.0;

/// Box variables are exposed in this many fixed slots, so that every
/// BlockDude task shares one variable set.
pub const MAX_BOX_SLOTS: usize = 2;

const ABSENT: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DudeAction {
    Left = 0,
    Right = 1,
    Up = 2,
    PickUp = 3,
    PutDown = 4,
}

impl DudeAction {
    pub const ALL: [DudeAction; 5] = [
        DudeAction::Left,
        DudeAction::Right,
        DudeAction::Up,
        DudeAction::PickUp,
        DudeAction::PutDown,
    ];
}

pub(crate) fn variable_names() -> Arc<[String]> {
    let mut names = vec!["exit_dx".to_string(), "exit_dy".to_string()];
    for i in 0..MAX_BOX_SLOTS {
        names.push(format!("box{i}_dx"));
        names.push(format!("box{i}_dy"));
    }
    for edge in ["left", "right", "top", "bottom"] {
        names.push(format!("edge_{edge}"));
    }
    names.push("facing".into());
    names.push("holding".into());
    names.into()
}

struct World<'a> {
    task: &'a TaskSpec,
    boxes: &'a [Pos],
}

impl World<'_> {
    fn has_box(&self, p: Pos) -> bool {
        self.boxes.contains(&p)
    }

    /// Inside the grid, not solid and not occupied by a box.
    fn open(&self, p: Pos) -> bool {
        matches!(self.task.grid.get(p), Some(c) if c != Cell::Solid) && !self.has_box(p)
    }

    fn fall(&self, mut p: Pos) -> Pos {
        while self.open(p.offset(0, 1)) {
            p = p.offset(0, 1);
        }
        p
    }
}

pub(crate) fn step(task: &TaskSpec, state: &State, action: usize) -> Transition<State> {
    let mut next = state.clone();
    let world = World {
        task,
        boxes: &state.boxes,
    };
    let agent = state.agent;
    let held = agent.offset(0, -1);

    match DudeAction::ALL[action] {
        a @ (DudeAction::Left | DudeAction::Right) => {
            let facing = if a == DudeAction::Left {
                Facing::Left
            } else {
                Facing::Right
            };
            next.facing = facing;
            let target = agent.offset(facing.dx(), 0);
            let box_clear = !state.holding || world.open(target.offset(0, -1));
            if world.open(target) && box_clear {
                // The carried box does not block the agent's own fall path.
                let landed = world.fall(target);
                if state.holding {
                    move_box(&mut next.boxes, held, landed.offset(0, -1));
                }
                next.agent = landed;
            }
        }
        DudeAction::Up => {
            let dx = state.facing.dx();
            let front = agent.offset(dx, 0);
            let target = agent.offset(dx, -1);
            let obstacle = task.grid.contains(front) && !world.open(front);
            let headroom = if state.holding {
                world.open(agent.offset(dx, -2))
            } else {
                world.open(held)
            };
            if obstacle && world.open(target) && headroom {
                if state.holding {
                    move_box(&mut next.boxes, held, target.offset(0, -1));
                }
                next.agent = target;
            }
        }
        DudeAction::PickUp => {
            let front = agent.offset(state.facing.dx(), 0);
            if !state.holding
                && world.has_box(front)
                && !world.has_box(front.offset(0, -1))
                && world.open(held)
            {
                move_box(&mut next.boxes, front, held);
                next.holding = true;
            }
        }
        DudeAction::PutDown => {
            let target = held.offset(state.facing.dx(), 0);
            if state.holding && world.open(target) {
                let rest: Vec<Pos> = state.boxes.iter().copied().filter(|&b| b != held).collect();
                let landed = World { task, boxes: &rest }.fall(target);
                move_box(&mut next.boxes, held, landed);
                next.holding = false;
            }
        }
    }
    sort_reading_order(&mut next.boxes);

    let terminal = next.agent == task.goal;
    Transition {
        state: next,
        reward: REWARD_STEP,
        terminal,
        truncated: false,
    }
}

fn move_box(boxes: &mut [Pos], from: Pos, to: Pos) {
    if let Some(b) = boxes.iter_mut().find(|b| **b == from) {
        *b = to;
    }
}

pub(crate) fn observe(task: &TaskSpec, state: &State) -> Vec<f64> {
    let dim = task.grid.dimension();
    let d = dim as f64;
    let a = state.agent;
    let mut values = Vec::with_capacity(6 + 2 * MAX_BOX_SLOTS);
    values.push(normalize_delta(task.goal.x - a.x, dim));
    values.push(normalize_delta(task.goal.y - a.y, dim));
    for slot in 0..MAX_BOX_SLOTS {
        match state.boxes.get(slot) {
            Some(b) => {
                values.push(normalize_delta(b.x - a.x, dim));
                values.push(normalize_delta(b.y - a.y, dim));
            }
            None => values.extend([ABSENT, ABSENT]),
        }
    }
    let w = task.grid.width() as i32;
    let h = task.grid.height() as i32;
    values.push(f64::from(a.x) / d);
    values.push(f64::from(w - 1 - a.x) / d);
    values.push(f64::from(a.y) / d);
    values.push(f64::from(h - 1 - a.y) / d);
    values.push(if state.facing == Facing::Right { 1.0 } else { 0.0 });
    values.push(if state.holding { 1.0 } else { 0.0 });
    values
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::{load_task, EnvKind};

    fn task(map: &str) -> TaskSpec {
        load_task(map, EnvKind::BlockDude).unwrap()
    }

    fn run(t: &TaskSpec, actions: &[DudeAction]) -> (State, f64, bool) {
        let mut s = t.initial_state();
        let mut total = 0.0;
        let mut done = false;
        for &a in actions {
            let tr = t.step(&s, a as usize).unwrap();
            total += tr.reward;
            s = tr.state;
            done = tr.terminal;
            if done {
                break;
            }
        }
        (s, total, done)
    }

    #[test]
    fn walking_costs_one_per_action_and_exit_terminates() {
        let t = task("....\n>..x\n####");
        let (s, ret, done) = run(&t, &[DudeAction::Right; 3]);
        assert!(done);
        assert_eq!(ret, -3.0);
        assert_eq!(s.agent, t.goal);
    }

    #[test]
    fn turning_does_not_move_but_still_costs() {
        let t = task("....\n>..x\n####");
        let tr = t.step(&t.initial_state(), DudeAction::Left as usize).unwrap();
        assert_eq!(tr.reward, -1.0);
        assert_eq!(tr.state.facing, Facing::Left);
        // Blocked by the edge.
        assert_eq!(tr.state.agent, t.start);
    }

    #[test]
    fn walking_off_a_ledge_falls() {
        let t = task(">...\n#...\n##.x\n####");
        let tr = t.step(&t.initial_state(), DudeAction::Right as usize).unwrap();
        assert_eq!(tr.state.agent, Pos::new(1, 1));
        let tr = t.step(&tr.state, DudeAction::Right as usize).unwrap();
        assert_eq!(tr.state.agent, Pos::new(2, 2));
    }

    #[test]
    fn climbs_single_step_but_not_two() {
        let t = task("....\n...x\n>.##\n####");
        let (s, _, done) = run(&t, &[DudeAction::Right, DudeAction::Up]);
        assert!(!done);
        assert_eq!(s.agent, Pos::new(2, 1));
        let (_, _, done) = run(&t, &[DudeAction::Right, DudeAction::Up, DudeAction::Right]);
        assert!(done);

        let tall = task("....\n..#x\n>.##\n####");
        let (s, _, _) = run(&tall, &[DudeAction::Right, DudeAction::Up]);
        assert_eq!(s.agent, Pos::new(1, 2));
    }

    #[test]
    fn box_stacking_solves_a_wall() {
        // Wall of height 2 on the right; one box to build a step.
        let t = task("......\n....#x\n>b..##\n######");
        let plan = [
            DudeAction::PickUp,
            DudeAction::Right,
            DudeAction::Right,
            DudeAction::PutDown,
            DudeAction::Up,
            DudeAction::Up,
            DudeAction::Right,
        ];
        let (s, ret, done) = run(&t, &plan);
        assert!(done, "state: {s:?}");
        assert_eq!(ret, -7.0);
    }

    #[test]
    fn pickup_then_holding_flag_observed() {
        let t = task("....\n>b.x\n####");
        let tr = t.step(&t.initial_state(), DudeAction::PickUp as usize).unwrap();
        assert!(tr.state.holding);
        assert_eq!(tr.state.boxes, vec![Pos::new(0, 0)]);
        let obs = t.observe(&tr.state);
        assert_eq!(obs.get("holding"), Some(1.0));
        assert_eq!(obs.get("facing"), Some(1.0));
        let obs0 = t.observe(&t.initial_state());
        assert_eq!(obs0.get("holding"), Some(0.0));
    }

    #[test]
    fn cannot_pick_up_without_headroom() {
        let t = task("#...\n>b.x\n####");
        let tr = t.step(&t.initial_state(), DudeAction::PickUp as usize).unwrap();
        assert!(!tr.state.holding);
    }

    #[test]
    fn cannot_pick_up_a_covered_box() {
        let t = task(".b..\n>b.x\n####");
        let tr = t.step(&t.initial_state(), DudeAction::PickUp as usize).unwrap();
        assert!(!tr.state.holding);
    }

    #[test]
    fn put_down_box_falls() {
        let t = task("....\n....\n>b.x\n####");
        let (s, _, _) = run(
            &t,
            &[DudeAction::PickUp, DudeAction::Left, DudeAction::Right, DudeAction::PutDown],
        );
        assert!(!s.holding);
        assert_eq!(s.boxes, vec![Pos::new(2, 2)]);
    }

    #[test]
    fn unused_box_slots_are_sentinels() {
        let t = task("....\n>b.x\n####");
        let obs = t.observe(&t.initial_state());
        assert_eq!(obs.get("box1_dx"), Some(1.0));
        assert_eq!(obs.get("box1_dy"), Some(1.0));
        assert!(obs.values.iter().all(|v| (0.0..=1.0).contains(v)));
    }
}
