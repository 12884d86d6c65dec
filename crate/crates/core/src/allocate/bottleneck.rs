//! Bottleneck simulation allocation.
//!
//! Guess which target each attacker is heading for, estimate the
//! attackers' shortest paths, find the most visited cell and look for a
//! bottleneck around it. Confirmed bottlenecks are handed to the nearest
//! free defenders and become forbidden for the next round of estimated
//! paths. Defenders left over go to random targets.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{strict_greedy_pairs, vicinity::search_vicinity, Allocation};
use crate::gridmap::{bfs_distances, shortest_path, CellCoord, CellSet, GridMap, Path};
use crate::model::Instance;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BottleneckParams {
    /// Largest square radius searched around a peak cell.
    pub vicinity_limit: u32,
    /// Upper bound on bottleneck rounds.
    pub max_iterations: u32,
}

impl Default for BottleneckParams {
    fn default() -> Self {
        BottleneckParams {
            vicinity_limit: 5,
            max_iterations: 32,
        }
    }
}

/// A uniformly random bijection attackers → targets, as target indices.
pub fn guess_targets<R: Rng>(instance: &Instance, rng: &mut R) -> Vec<usize> {
    let mut guess: Vec<usize> = (0..instance.attacker_targets.len()).collect();
    guess.shuffle(rng);
    guess
}

/// Shortest path of every attacker to its guessed target avoiding
/// obstacles and `forbidden`; other agents are ignored.
pub fn paths_for_guess(instance: &Instance, forbidden: &CellSet, guess: &[usize]) -> Vec<Option<Path>> {
    instance
        .attacker_starts
        .iter()
        .zip(guess)
        .map(|(&start, &t)| {
            if forbidden.contains(start) {
                return None;
            }
            shortest_path(&instance.board, start, instance.attacker_targets[t], forbidden)
        })
        .collect()
}

/// Draws a target guess from `seed` and estimates paths under it.
pub fn estimate_attacker_paths(instance: &Instance, forbidden: &CellSet, seed: u64) -> Vec<Option<Path>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let guess = guess_targets(instance, &mut rng);
    paths_for_guess(instance, forbidden, &guess)
}

/// Number of estimated paths through each cell.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VisitCounts {
    width: u32,
    counts: Vec<u32>,
}

impl VisitCounts {
    pub fn get(&self, c: CellCoord) -> u32 {
        self.counts[c.y as usize * self.width as usize + c.x as usize]
    }

    pub fn max(&self) -> u32 {
        self.counts.iter().copied().max().unwrap_or(0)
    }

    /// Cells with the maximal count, row-major. Empty when all counts are 0.
    pub fn argmax(&self) -> Vec<CellCoord> {
        let max = self.max();
        if max == 0 {
            return Vec::new();
        }
        let w = self.width as usize;
        self.counts
            .iter()
            .enumerate()
            .filter(|(_, &n)| n == max)
            .map(|(i, _)| CellCoord::new((i % w) as u32, (i / w) as u32))
            .collect()
    }
}

pub fn visit_frequency(map: &GridMap, paths: &[Option<Path>]) -> VisitCounts {
    let mut counts = vec![0u32; map.cell_count()];
    for path in paths.iter().flatten() {
        for &c in path.cells() {
            counts[map.index(c)] += 1;
        }
    }
    VisitCounts {
        width: map.width(),
        counts,
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
#[error("no cell is visited by any estimated path")]
pub struct NoVisits;

/// Passable cell nearest to the mean of `points`; ties by `(y, x)`.
fn centroid_cell(map: &GridMap, points: &[CellCoord]) -> Option<CellCoord> {
    if points.is_empty() {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.x as f64).sum::<f64>() / n;
    let my = points.iter().map(|p| p.y as f64).sum::<f64>() / n;
    map.passable_cells().min_by(|a, b| {
        let da = (a.x as f64 - mx).powi(2) + (a.y as f64 - my).powi(2);
        let db = (b.x as f64 - mx).powi(2) + (b.y as f64 - my).powi(2);
        da.total_cmp(&db).then(a.row_major().cmp(&b.row_major()))
    })
}

/// The most visited cell, nearest to the defenders' centroid by map
/// distance, then first in `(y, x)` order.
pub fn select_peak(map: &GridMap, visits: &VisitCounts, defenders: &[CellCoord]) -> Result<CellCoord, NoVisits> {
    let candidates = visits.argmax();
    if candidates.is_empty() {
        return Err(NoVisits);
    }
    let field = centroid_cell(map, defenders).map(|c| bfs_distances(map, c, &CellSet::new(map)));
    let rank = |c: &CellCoord| {
        let d = field.as_ref().map_or(0, |f| f.get(*c).unwrap_or(u32::MAX));
        (d, c.row_major())
    };
    Ok(candidates.into_iter().min_by_key(rank).expect("nonempty"))
}

/// Re-estimates the paths with `candidate` forbidden under the same guess;
/// the bottleneck is rejected when no attacker's path changes.
pub fn confirm_bottleneck(
    instance: &Instance,
    forbidden: &CellSet,
    candidate: &[CellCoord],
    previous: &[Option<Path>],
    guess: &[usize],
) -> Option<Vec<Option<Path>>> {
    let mut blocked = forbidden.clone();
    for &c in candidate {
        blocked.insert(c);
    }
    let updated = paths_for_guess(instance, &blocked, guess);
    (updated != previous).then_some(updated)
}

/// One accepted bottleneck round.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BottleneckStep {
    pub peak: CellCoord,
    pub cells: Vec<CellCoord>,
    /// `(defender, cell)` assignments made this round.
    pub assigned: Vec<(usize, CellCoord)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BottleneckReport {
    pub allocation: Allocation,
    pub steps: Vec<BottleneckStep>,
    /// Why the loop stopped.
    pub stop: StopReason,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    DefendersExhausted,
    NoVisits,
    NoBottleneck,
    TooFewDefenders,
    FalseBottleneck,
    IterationLimit,
}

pub fn allocate_bottleneck(instance: &Instance, params: &BottleneckParams, seed: u64) -> BottleneckReport {
    let map = &instance.board;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let guess = guess_targets(instance, &mut rng);
    let mut allocation = Allocation::unassigned(instance.defender_count());
    let mut available: Vec<usize> = (0..instance.defender_count()).collect();
    let mut forbidden = CellSet::new(map);
    let mut paths = paths_for_guess(instance, &forbidden, &guess);
    let mut steps = Vec::new();

    let mut stop = StopReason::IterationLimit;
    for _ in 0..params.max_iterations.max(1) {
        if available.is_empty() {
            stop = StopReason::DefendersExhausted;
            break;
        }
        let visits = visit_frequency(map, &paths);
        let starts: Vec<CellCoord> = available.iter().map(|&d| instance.defender_starts[d]).collect();
        let Ok(peak) = select_peak(map, &visits, &starts) else {
            stop = StopReason::NoVisits;
            break;
        };
        let cells = search_vicinity(map, &forbidden, peak, params.vicinity_limit);
        if cells.is_empty() {
            stop = StopReason::NoBottleneck;
            break;
        }
        if cells.len() > available.len() {
            stop = StopReason::TooFewDefenders;
            break;
        }
        let Some(updated) = confirm_bottleneck(instance, &forbidden, &cells, &paths, &guess) else {
            stop = StopReason::FalseBottleneck;
            break;
        };

        let assigned = nearest_defenders(map, instance, &available, &cells);
        for &(d, cell) in &assigned {
            allocation.targets[d] = Some(cell);
        }
        available.retain(|d| allocation.targets[*d].is_none());
        for &c in &cells {
            forbidden.insert(c);
        }
        paths = updated;
        steps.push(BottleneckStep { peak, cells, assigned });
    }
    if available.is_empty() && stop == StopReason::IterationLimit {
        stop = StopReason::DefendersExhausted;
    }

    let mut targets: Vec<CellCoord> = instance
        .attacker_targets
        .iter()
        .copied()
        .filter(|&t| !forbidden.contains(t))
        .collect();
    targets.shuffle(&mut rng);
    for (&d, t) in available.iter().zip(targets) {
        allocation.targets[d] = Some(t);
    }

    BottleneckReport {
        allocation,
        steps,
        stop,
    }
}

/// Matches bottleneck cells to available defenders, shortest map distance
/// first.
fn nearest_defenders(
    map: &GridMap,
    instance: &Instance,
    available: &[usize],
    cells: &[CellCoord],
) -> Vec<(usize, CellCoord)> {
    let none = CellSet::new(map);
    let table: Vec<Vec<Option<u32>>> = available
        .iter()
        .map(|&d| {
            let field = bfs_distances(map, instance.defender_starts[d], &none);
            cells.iter().map(|&c| field.get(c)).collect()
        })
        .collect();
    strict_greedy_pairs(&table)
        .into_iter()
        .map(|(row, col, _)| (available[row], cells[col]))
        .collect()
}
