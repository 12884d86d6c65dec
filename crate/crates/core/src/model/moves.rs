use std::collections::HashMap;
use std::fmt::Debug;
use std::hash::Hash;

use thiserror::Error;

use super::{AgentId, Configuration, Team};
use crate::board::Board;

/// Desired next vertex for every member of one team, indexed like the team.
/// Waiting is expressed by desiring the current vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TeamMove<V> {
    pub team: Team,
    pub desired: Vec<V>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MoveError {
    #[error("{team:?} move lists {found} agents, team has {expected}")]
    WrongAgentCount {
        team: Team,
        expected: usize,
        found: usize,
    },
    #[error("{agent} cannot step from {from} to {to}")]
    IllegalStep {
        agent: AgentId,
        from: String,
        to: String,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Status {
    Stay,
    Pending,
    Granted,
    Denied,
}

/// Resolves one team's simultaneous move. The other team is frozen and
/// acts as obstacles. A move executes iff its target is free or vacated by
/// a same-team mover that itself executes; swaps never execute, rotations
/// of three or more do. Competing claims on one vertex go to the lowest
/// index. Returns the new positions.
pub(crate) fn resolve_moves<V: Copy + Eq + Hash>(
    current: &[V],
    desired: &[V],
    other_team_occupies: impl Fn(V) -> bool,
) -> Vec<V> {
    let n = current.len();
    let occupant: HashMap<V, usize> = current.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut status = vec![Status::Stay; n];
    let mut claimed: HashMap<V, usize> = HashMap::new();
    for i in 0..n {
        if desired[i] == current[i] {
            continue;
        }
        if other_team_occupies(desired[i]) || claimed.contains_key(&desired[i]) {
            status[i] = Status::Denied;
            continue;
        }
        claimed.insert(desired[i], i);
        status[i] = Status::Pending;
    }

    let mut changed = true;
    while changed {
        changed = false;
        for i in 0..n {
            if status[i] != Status::Pending {
                continue;
            }
            let next = match occupant.get(&desired[i]) {
                None => Status::Granted,
                Some(&j) => match status[j] {
                    Status::Granted => Status::Granted,
                    Status::Stay | Status::Denied => Status::Denied,
                    Status::Pending => continue,
                },
            };
            status[i] = next;
            changed = true;
        }
    }

    // What is still pending forms disjoint cycles: each pending agent's
    // target is held by another pending agent and claims are unique.
    for start in 0..n {
        if status[start] != Status::Pending {
            continue;
        }
        let mut cycle = vec![start];
        let mut cur = occupant[&desired[start]];
        while cur != start {
            cycle.push(cur);
            cur = occupant[&desired[cur]];
        }
        let verdict = if cycle.len() == 2 {
            Status::Denied
        } else {
            Status::Granted
        };
        for i in cycle {
            status[i] = verdict;
        }
    }

    (0..n)
        .map(|i| match status[i] {
            Status::Granted => desired[i],
            _ => current[i],
        })
        .collect()
}

/// Applies one team's move to `cfg` under the movement rules.
pub fn apply_team_move<B: Board>(
    board: &B,
    cfg: &Configuration<B::Vertex>,
    mv: &TeamMove<B::Vertex>,
) -> Result<Configuration<B::Vertex>, MoveError> {
    let current = cfg.team(mv.team);
    if mv.desired.len() != current.len() {
        return Err(MoveError::WrongAgentCount {
            team: mv.team,
            expected: current.len(),
            found: mv.desired.len(),
        });
    }
    for (i, (&from, &to)) in current.iter().zip(&mv.desired).enumerate() {
        if from != to && !(board.contains(to) && board.adjacent(from, to)) {
            return Err(MoveError::IllegalStep {
                agent: AgentId {
                    team: mv.team,
                    index: i,
                },
                from: format!("{from:?}"),
                to: format!("{to:?}"),
            });
        }
    }
    let others: std::collections::HashSet<B::Vertex> =
        cfg.team(mv.team.other()).iter().copied().collect();
    let moved = resolve_moves(current, &mv.desired, |v| others.contains(&v));
    let mut next = cfg.clone();
    *next.team_mut(mv.team) = moved;
    Ok(next)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RuleViolation {
    /// An agent of the team not on turn changed position.
    FrozenTeamMoved { agent: AgentId },
    NotPassable { agent: AgentId, vertex: String },
    /// Displacement larger than one edge.
    Jump { agent: AgentId },
    /// Two agents on one vertex after the step.
    SharedVertex { agents: (AgentId, AgentId) },
    /// Two agents exchanged positions across an edge.
    Swap { agents: (AgentId, AgentId) },
    /// An agent entered a vertex that was occupied and not vacated.
    EnteredOccupied { agent: AgentId, occupant: AgentId },
}

/// Checks one phase transition against the movement rules without using
/// the resolver.
pub fn audit_transition<B: Board>(
    board: &B,
    before: &Configuration<B::Vertex>,
    after: &Configuration<B::Vertex>,
    mover: Team,
) -> Vec<RuleViolation> {
    let mut out = Vec::new();
    let before_all: Vec<(AgentId, B::Vertex)> = before.agents().collect();
    let after_all: Vec<(AgentId, B::Vertex)> = after.agents().collect();
    let after_of: HashMap<AgentId, B::Vertex> = after_all.iter().copied().collect();
    let before_at: HashMap<B::Vertex, AgentId> = before_all.iter().map(|&(a, v)| (v, a)).collect();

    for (&(agent, from), &(_, to)) in before_all.iter().zip(&after_all) {
        if !board.contains(to) {
            out.push(RuleViolation::NotPassable {
                agent,
                vertex: format!("{to:?}"),
            });
        }
        if from == to {
            continue;
        }
        if agent.team != mover {
            out.push(RuleViolation::FrozenTeamMoved { agent });
            continue;
        }
        if !board.adjacent(from, to) {
            out.push(RuleViolation::Jump { agent });
        }
        if let Some(&occupant) = before_at.get(&to) {
            let occupant_to = after_of[&occupant];
            if occupant_to == to {
                out.push(RuleViolation::EnteredOccupied { agent, occupant });
            } else if occupant_to == from && agent < occupant {
                out.push(RuleViolation::Swap {
                    agents: (agent, occupant),
                });
            }
        }
    }

    let mut seen: HashMap<B::Vertex, AgentId> = HashMap::new();
    for &(agent, v) in &after_all {
        if let Some(&prev) = seen.get(&v) {
            out.push(RuleViolation::SharedVertex {
                agents: (prev, agent),
            });
        } else {
            seen.insert(v, agent);
        }
    }
    out
}
