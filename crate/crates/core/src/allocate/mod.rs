//! Single-stage defender target allocation. Every strategy maps each
//! defender to at most one vertex, once, before anyone moves.

mod bottleneck;
mod vicinity;

pub use bottleneck::{
    allocate_bottleneck, confirm_bottleneck, estimate_attacker_paths, guess_targets,
    paths_for_guess, select_peak, visit_frequency, BottleneckParams, BottleneckReport,
    BottleneckStep, NoVisits, StopReason, VisitCounts,
};
pub use vicinity::search_vicinity;

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::gridmap::{bfs_distances, CellCoord, CellSet, GridMap};
use crate::model::Instance;

/// Defender → target vertex. `None` means the defender holds its start.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Allocation {
    pub targets: Vec<Option<CellCoord>>,
}

impl Allocation {
    pub fn unassigned(defenders: usize) -> Self {
        Allocation {
            targets: vec![None; defenders],
        }
    }

    pub fn assigned_count(&self) -> usize {
        self.targets.iter().flatten().count()
    }

    /// True when no two defenders share a target and all targets are passable.
    pub fn is_valid_on(&self, map: &GridMap) -> bool {
        let mut seen = CellSet::new(map);
        self.targets
            .iter()
            .flatten()
            .all(|&t| map.is_passable(t) && seen.insert(t))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    Random,
    Greedy,
    StrictGreedy,
    Bottleneck,
}

impl Strategy {
    pub const ALL: [Strategy; 4] = [
        Strategy::Random,
        Strategy::Greedy,
        Strategy::StrictGreedy,
        Strategy::Bottleneck,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Random => "random",
            Strategy::Greedy => "greedy",
            Strategy::StrictGreedy => "strict-greedy",
            Strategy::Bottleneck => "bottleneck",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
#[error("unknown strategy {0:?} (expected random, greedy, strict-greedy or bottleneck)")]
pub struct UnknownStrategy(pub String);

impl FromStr for Strategy {
    type Err = UnknownStrategy;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Strategy::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| UnknownStrategy(s.to_owned()))
    }
}

/// Each defender gets a distinct attacker target drawn uniformly, until
/// defenders or targets run out.
pub fn allocate_random(instance: &Instance, seed: u64) -> Allocation {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..instance.attacker_targets.len()).collect();
    order.shuffle(&mut rng);
    let mut alloc = Allocation::unassigned(instance.defender_count());
    for (slot, &t) in alloc.targets.iter_mut().zip(&order) {
        *slot = Some(instance.attacker_targets[t]);
    }
    alloc
}

/// Static map distances `table[defender][target]`, agents ignored.
pub fn distance_table(instance: &Instance) -> Vec<Vec<Option<u32>>> {
    let map = &instance.board;
    let none = CellSet::new(map);
    instance
        .defender_starts
        .iter()
        .map(|&d| {
            let field = bfs_distances(map, d, &none);
            instance
                .attacker_targets
                .iter()
                .map(|&t| field.get(t))
                .collect()
        })
        .collect()
}

/// Defenders in index order each take the nearest unassigned target;
/// ties go to the lower target index.
pub fn allocate_greedy(instance: &Instance) -> Allocation {
    let table = distance_table(instance);
    let mut taken = vec![false; instance.attacker_targets.len()];
    let mut alloc = Allocation::unassigned(instance.defender_count());
    for (d, row) in table.iter().enumerate() {
        let best = row
            .iter()
            .enumerate()
            .filter(|(t, dist)| !taken[*t] && dist.is_some())
            .min_by_key(|(t, dist)| (dist.unwrap_or(u32::MAX), *t));
        if let Some((t, _)) = best {
            taken[t] = true;
            alloc.targets[d] = Some(instance.attacker_targets[t]);
        }
    }
    alloc
}

/// Commits globally shortest (defender, target) pairs from a distance
/// table, deleting the row and column of each. Ties go to the lower
/// defender index, then the lower target index. Returns
/// `(defender, target, distance)` in commit order.
pub fn strict_greedy_pairs(table: &[Vec<Option<u32>>]) -> Vec<(usize, usize, u32)> {
    let mut pairs: Vec<(u32, usize, usize)> = table
        .iter()
        .enumerate()
        .flat_map(|(d, row)| {
            row.iter()
                .enumerate()
                .filter_map(move |(t, dist)| dist.map(|dist| (dist, d, t)))
        })
        .collect();
    pairs.sort_unstable();
    let targets = table.first().map_or(0, Vec::len);
    let mut row_used = vec![false; table.len()];
    let mut col_used = vec![false; targets];
    let mut out = Vec::new();
    for (dist, d, t) in pairs {
        if !row_used[d] && !col_used[t] {
            row_used[d] = true;
            col_used[t] = true;
            out.push((d, t, dist));
        }
    }
    out
}

pub fn allocate_strict_greedy(instance: &Instance) -> Allocation {
    let mut alloc = Allocation::unassigned(instance.defender_count());
    for (d, t, _) in strict_greedy_pairs(&distance_table(instance)) {
        alloc.targets[d] = Some(instance.attacker_targets[t]);
    }
    alloc
}
