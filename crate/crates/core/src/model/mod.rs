//! Instances, configurations and the conflict-free movement rules.

mod io;
mod moves;

pub use io::{load_instance, load_instance_file, AnyInstance, InstanceIoError, InstanceWriter};
pub use moves::{apply_team_move, audit_transition, MoveError, RuleViolation, TeamMove};
pub(crate) use moves::resolve_moves;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::board::Board;
use crate::gridmap::GridMap;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Team {
    Attacker,
    Defender,
}

impl Team {
    pub fn other(self) -> Team {
        match self {
            Team::Attacker => Team::Defender,
            Team::Defender => Team::Attacker,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AgentId {
    pub team: Team,
    pub index: usize,
}

impl AgentId {
    pub fn attacker(index: usize) -> Self {
        AgentId {
            team: Team::Attacker,
            index,
        }
    }

    pub fn defender(index: usize) -> Self {
        AgentId {
            team: Team::Defender,
            index,
        }
    }
}

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = match self.team {
            Team::Attacker => 'a',
            Team::Defender => 'd',
        };
        write!(f, "{prefix}{}", self.index)
    }
}

/// An area protection instance: the board, both teams' start vertices,
/// each attacker's target, and the step limit for simulation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance<B: Board = GridMap> {
    pub board: B,
    pub attacker_starts: Vec<B::Vertex>,
    /// `attacker_targets[i]` is the target of attacker `i`.
    pub attacker_targets: Vec<B::Vertex>,
    pub defender_starts: Vec<B::Vertex>,
    pub time_limit: u32,
}

impl<B: Board> Instance<B> {
    pub fn attacker_count(&self) -> usize {
        self.attacker_starts.len()
    }

    pub fn defender_count(&self) -> usize {
        self.defender_starts.len()
    }

    pub fn initial_configuration(&self) -> Configuration<B::Vertex> {
        Configuration {
            attackers: self.attacker_starts.clone(),
            defenders: self.defender_starts.clone(),
        }
    }
}

/// Positions of every agent at one time step.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Configuration<V> {
    pub attackers: Vec<V>,
    pub defenders: Vec<V>,
}

impl<V: Copy> Configuration<V> {
    pub fn team(&self, team: Team) -> &[V] {
        match team {
            Team::Attacker => &self.attackers,
            Team::Defender => &self.defenders,
        }
    }

    pub fn team_mut(&mut self, team: Team) -> &mut Vec<V> {
        match team {
            Team::Attacker => &mut self.attackers,
            Team::Defender => &mut self.defenders,
        }
    }

    pub fn position(&self, agent: AgentId) -> V {
        self.team(agent.team)[agent.index]
    }

    /// Every agent with its position, attackers first.
    pub fn agents(&self) -> impl Iterator<Item = (AgentId, V)> + '_ {
        let a = self
            .attackers
            .iter()
            .enumerate()
            .map(|(i, &v)| (AgentId::attacker(i), v));
        let d = self
            .defenders
            .iter()
            .enumerate()
            .map(|(i, &v)| (AgentId::defender(i), v));
        a.chain(d)
    }
}

/// A violated instance invariant. Vertices are rendered with `Debug`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Diagnostic {
    TargetCountMismatch { attackers: usize, targets: usize },
    StartNotPassable { agent: AgentId, vertex: String },
    TargetNotPassable { attacker: usize, vertex: String },
    /// Two agents share a start vertex.
    StartsNotInjective { vertex: String, agents: Vec<AgentId> },
    /// Two attackers share a target.
    TargetsNotInjective { vertex: String, attackers: Vec<usize> },
    ZeroTimeLimit,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diagnostic::TargetCountMismatch { attackers, targets } => {
                write!(f, "{attackers} attackers but {targets} targets")
            }
            Diagnostic::StartNotPassable { agent, vertex } => {
                write!(f, "{agent} starts on impassable vertex {vertex}")
            }
            Diagnostic::TargetNotPassable { attacker, vertex } => {
                write!(f, "target of a{attacker} is impassable vertex {vertex}")
            }
            Diagnostic::StartsNotInjective { vertex, agents } => {
                let names: Vec<_> = agents.iter().map(ToString::to_string).collect();
                write!(f, "start configuration not injective: {} share {vertex}", names.join(","))
            }
            Diagnostic::TargetsNotInjective { vertex, attackers } => {
                let names: Vec<_> = attackers.iter().map(|a| format!("a{a}")).collect();
                write!(f, "attacker targets not injective: {} share {vertex}", names.join(","))
            }
            Diagnostic::ZeroTimeLimit => write!(f, "time limit must be at least 1"),
        }
    }
}

/// Checks every instance invariant and lists all violations.
pub fn validate_instance<B: Board>(instance: &Instance<B>) -> Result<(), Vec<Diagnostic>> {
    let mut diags = Vec::new();
    if instance.attacker_starts.len() != instance.attacker_targets.len() {
        diags.push(Diagnostic::TargetCountMismatch {
            attackers: instance.attacker_starts.len(),
            targets: instance.attacker_targets.len(),
        });
    }
    if instance.time_limit == 0 {
        diags.push(Diagnostic::ZeroTimeLimit);
    }

    let cfg = instance.initial_configuration();
    let mut starts: BTreeMap<B::Vertex, Vec<AgentId>> = BTreeMap::new();
    for (agent, v) in cfg.agents() {
        if !instance.board.contains(v) {
            diags.push(Diagnostic::StartNotPassable {
                agent,
                vertex: format!("{v:?}"),
            });
        }
        starts.entry(v).or_default().push(agent);
    }
    for (v, agents) in starts {
        if agents.len() > 1 {
            diags.push(Diagnostic::StartsNotInjective {
                vertex: format!("{v:?}"),
                agents,
            });
        }
    }

    let mut targets: BTreeMap<B::Vertex, Vec<usize>> = BTreeMap::new();
    for (i, &t) in instance.attacker_targets.iter().enumerate() {
        if !instance.board.contains(t) {
            diags.push(Diagnostic::TargetNotPassable {
                attacker: i,
                vertex: format!("{t:?}"),
            });
        }
        targets.entry(t).or_default().push(i);
    }
    for (v, attackers) in targets {
        if attackers.len() > 1 {
            diags.push(Diagnostic::TargetsNotInjective {
                vertex: format!("{v:?}"),
                attackers,
            });
        }
    }

    if diags.is_empty() {
        Ok(())
    } else {
        Err(diags)
    }
}

/// Attackers standing on their own target.
pub fn capture_state<B: Board>(instance: &Instance<B>, cfg: &Configuration<B::Vertex>) -> Vec<usize> {
    cfg.attackers
        .iter()
        .zip(&instance.attacker_targets)
        .enumerate()
        .filter(|(_, (pos, target))| pos == target)
        .map(|(i, _)| i)
        .collect()
}
