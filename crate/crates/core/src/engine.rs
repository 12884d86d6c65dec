//! The simulation loop: allocate once, then alternate attacker and
//! defender phases up to the time limit.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::allocate::{
    allocate_bottleneck, allocate_greedy, allocate_random, allocate_strict_greedy, Allocation,
    BottleneckParams, Strategy,
};
use crate::gridmap::{bfs_distances, CellCoord, CellSet, GridMap};
use crate::model::{
    apply_team_move, validate_instance, AgentId, Configuration, Diagnostic, Instance, Team, TeamMove,
};
use crate::pathfind::{NavParams, NavState};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimParams {
    #[serde(default)]
    pub bottleneck: BottleneckParams,
    #[serde(default)]
    pub nav: NavParams,
    /// Keep every phase configuration in the result.
    #[serde(default)]
    pub keep_trace: bool,
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid instance: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    InvalidInstance(Vec<Diagnostic>),
}

/// Objective values at the end of a run, from the defenders' side.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Metrics {
    /// Targets not captured. Runs are bounded, so this equals `obj2`.
    pub obj1_uncaptured: u32,
    pub obj2_uncaptured_within_limit: u32,
    /// Sum of map distances from uncaptured attackers to their targets.
    pub obj3_sum_attacker_target_distance: u64,
    /// Steps captured attackers spent on their targets, arrival step included.
    pub obj4_time_at_captured_targets: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Capture {
    pub attacker: usize,
    pub step: u32,
}

/// Configurations after each phase of one step.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepTrace {
    pub after_attackers: Configuration<CellCoord>,
    pub after_defenders: Configuration<CellCoord>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimResult {
    pub allocation: Allocation,
    /// Captures in arrival order.
    pub captured: Vec<Capture>,
    /// First step each defender stood on its allocated target.
    pub defender_arrivals: Vec<Option<u32>>,
    /// Cumulative captures after each step, index 0 being the start.
    pub captures_by_step: Vec<u32>,
    pub final_configuration: Configuration<CellCoord>,
    pub metrics: Metrics,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<Trace>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trace {
    pub initial: Configuration<CellCoord>,
    pub steps: Vec<StepTrace>,
}

impl SimResult {
    pub fn captured_count(&self) -> usize {
        self.captured.len()
    }

    pub fn arrival_of(&self, attacker: usize) -> Option<u32> {
        self.captured
            .iter()
            .find(|c| c.attacker == attacker)
            .map(|c| c.step)
    }
}

/// Computes the defenders' allocation for `strategy`.
pub fn allocate(instance: &Instance, strategy: Strategy, params: &SimParams, seed: u64) -> Allocation {
    match strategy {
        Strategy::Random => allocate_random(instance, seed),
        Strategy::Greedy => allocate_greedy(instance),
        Strategy::StrictGreedy => allocate_strict_greedy(instance),
        Strategy::Bottleneck => allocate_bottleneck(instance, &params.bottleneck, seed).allocation,
    }
}

pub fn run_simulation(
    instance: &Instance,
    strategy: Strategy,
    params: &SimParams,
    seed: u64,
) -> Result<SimResult, SimError> {
    validate_instance(instance).map_err(SimError::InvalidInstance)?;
    let allocation = allocate(instance, strategy, params, seed);
    Ok(simulate_allocation(instance, allocation, params))
}

fn occupancy(map: &GridMap, cfg: &Configuration<CellCoord>) -> CellSet {
    CellSet::from_cells(map, cfg.attackers.iter().chain(&cfg.defenders).copied())
}

/// Runs the movement phases for a fixed allocation. The instance must be
/// valid.
pub fn simulate_allocation(instance: &Instance, allocation: Allocation, params: &SimParams) -> SimResult {
    let map = &instance.board;
    let mut cfg = instance.initial_configuration();
    let initial = cfg.clone();
    let mut attacker_nav: Vec<NavState> = instance
        .attacker_targets
        .iter()
        .enumerate()
        .map(|(i, &t)| NavState::new(AgentId::attacker(i), t))
        .collect();
    let mut defender_nav: Vec<Option<NavState>> = allocation
        .targets
        .iter()
        .enumerate()
        .map(|(i, t)| t.map(|t| NavState::new(AgentId::defender(i), t)))
        .collect();

    let mut arrival: Vec<Option<u32>> = vec![None; instance.attacker_count()];
    let mut captured = Vec::new();
    let mut defender_arrivals: Vec<Option<u32>> = vec![None; instance.defender_count()];
    let mut captures_by_step = vec![0u32];
    let mut steps = Vec::new();

    for t in 1..=instance.time_limit {
        let occupied = occupancy(map, &cfg);
        let desired: Vec<CellCoord> = cfg
            .attackers
            .iter()
            .enumerate()
            .map(|(i, &pos)| {
                if arrival[i].is_some() {
                    pos
                } else {
                    attacker_nav[i].next_move(map, pos, &occupied, &params.nav)
                }
            })
            .collect();
        cfg = apply_team_move(
            map,
            &cfg,
            &TeamMove {
                team: Team::Attacker,
                desired,
            },
        )
        .expect("navigation proposes legal steps");
        for (i, (&pos, &target)) in cfg.attackers.iter().zip(&instance.attacker_targets).enumerate() {
            if arrival[i].is_none() && pos == target {
                arrival[i] = Some(t);
                captured.push(Capture { attacker: i, step: t });
            }
        }
        let after_attackers = params.keep_trace.then(|| cfg.clone());

        let occupied = occupancy(map, &cfg);
        let desired: Vec<CellCoord> = cfg
            .defenders
            .iter()
            .zip(defender_nav.iter_mut())
            .map(|(&pos, nav)| match nav {
                Some(nav) => nav.next_move(map, pos, &occupied, &params.nav),
                None => pos,
            })
            .collect();
        cfg = apply_team_move(
            map,
            &cfg,
            &TeamMove {
                team: Team::Defender,
                desired,
            },
        )
        .expect("navigation proposes legal steps");
        for (i, &pos) in cfg.defenders.iter().enumerate() {
            if defender_arrivals[i].is_none() && allocation.targets[i] == Some(pos) {
                defender_arrivals[i] = Some(t);
            }
        }

        captures_by_step.push(captured.len() as u32);
        if let Some(after_attackers) = after_attackers {
            steps.push(StepTrace {
                after_attackers,
                after_defenders: cfg.clone(),
            });
        }
    }

    let metrics = compute_metrics(instance, &arrival, &cfg);
    SimResult {
        allocation,
        captured,
        defender_arrivals,
        captures_by_step,
        final_configuration: cfg,
        metrics,
        trace: params.keep_trace.then_some(Trace { initial, steps }),
    }
}

/// Objective values from per-attacker arrival steps and the final
/// configuration.
pub fn compute_metrics(
    instance: &Instance,
    arrivals: &[Option<u32>],
    final_cfg: &Configuration<CellCoord>,
) -> Metrics {
    let captured = arrivals.iter().flatten().count() as u32;
    let uncaptured = instance.attacker_count() as u32 - captured;
    let none = CellSet::new(&instance.board);
    let obj3 = arrivals
        .iter()
        .enumerate()
        .filter(|(_, a)| a.is_none())
        .filter_map(|(i, _)| {
            bfs_distances(&instance.board, final_cfg.attackers[i], &none)
                .get(instance.attacker_targets[i])
                .map(u64::from)
        })
        .sum();
    let obj4 = arrivals
        .iter()
        .flatten()
        .map(|&step| u64::from(instance.time_limit - step + 1))
        .sum();
    Metrics {
        obj1_uncaptured: uncaptured,
        obj2_uncaptured_within_limit: uncaptured,
        obj3_sum_attacker_target_distance: obj3,
        obj4_time_at_captured_targets: obj4,
    }
}
