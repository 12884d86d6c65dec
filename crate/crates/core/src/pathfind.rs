//! Local-repair navigation: follow a shortest path planned on the static
//! map and replan around agents only when the next cell is occupied.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::gridmap::{shortest_path, CellCoord, CellSet, GridMap};
use crate::model::AgentId;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NavParams {
    /// Consecutive waits with a plan after which the plan is rebuilt around
    /// the current occupancy.
    pub stall_replan_threshold: u32,
}

impl Default for NavParams {
    fn default() -> Self {
        NavParams {
            stall_replan_threshold: 3,
        }
    }
}

/// Per-agent navigation state.
#[derive(Clone, Debug)]
pub struct NavState {
    pub agent: AgentId,
    pub goal: CellCoord,
    /// Cells still to enter, nearest first.
    plan: VecDeque<CellCoord>,
    /// Consecutive calls in which the agent did not change position.
    pub stalls: u32,
    last_position: Option<CellCoord>,
}

impl NavState {
    pub fn new(agent: AgentId, goal: CellCoord) -> Self {
        NavState {
            agent,
            goal,
            plan: VecDeque::new(),
            stalls: 0,
            last_position: None,
        }
    }

    pub fn plan(&self) -> impl Iterator<Item = CellCoord> + '_ {
        self.plan.iter().copied()
    }

    /// Desired cell for this step: the next plan cell, a detour step, or
    /// `position` itself to wait. `occupied` holds every agent's cell.
    pub fn next_move(
        &mut self,
        map: &GridMap,
        position: CellCoord,
        occupied: &CellSet,
        params: &NavParams,
    ) -> CellCoord {
        match self.last_position {
            Some(last) if last == position => self.stalls += 1,
            _ => self.stalls = 0,
        }
        self.last_position = Some(position);

        if position == self.goal {
            self.plan.clear();
            self.stalls = 0;
            return position;
        }

        while self.plan.front() == Some(&position) {
            self.plan.pop_front();
        }
        if self
            .plan
            .front()
            .is_some_and(|&next| !next.is_adjacent4(position))
        {
            self.plan.clear();
        }

        if self.plan.is_empty() {
            let free = CellSet::new(map);
            match shortest_path(map, position, self.goal, &free) {
                Some(path) => self.plan.extend(path.cells().iter().skip(1)),
                None => return position,
            }
        } else {
            let threshold = params.stall_replan_threshold.max(1);
            if self.stalls > 0 && self.stalls.is_multiple_of(threshold) {
                self.replan_around(map, position, occupied);
            }
        }

        let next = self.plan[0];
        if !occupied.contains(next) {
            return next;
        }
        if self.replan_around(map, position, occupied) {
            self.plan[0]
        } else {
            position
        }
    }

    /// Replaces the plan with one avoiding every occupied cell. Keeps the
    /// old plan and returns false when no such path exists.
    fn replan_around(&mut self, map: &GridMap, position: CellCoord, occupied: &CellSet) -> bool {
        match shortest_path(map, position, self.goal, occupied) {
            Some(path) if path.len() > 1 => {
                self.plan.clear();
                self.plan.extend(path.cells().iter().skip(1));
                true
            }
            _ => false,
        }
    }
}
