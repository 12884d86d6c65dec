//! Expanding-square bottleneck search around a heavily used cell.
//!
//! Obstacles are collected ring by ring (map border, blocked cells and
//! already forbidden cells all count). As soon as they split into two or
//! more 8-connected components, the shortest passable 4-connected run of
//! cells joining two different components inside the square is the
//! presumed bottleneck.

use std::collections::{BTreeSet, HashMap, VecDeque};

use crate::gridmap::{obstacle_components, CellCoord, CellSet, GridMap};

type Pt = (i32, i32);

const RING8: [Pt; 8] = [
    (-1, -1),
    (0, -1),
    (1, -1),
    (-1, 0),
    (1, 0),
    (-1, 1),
    (0, 1),
    (1, 1),
];
const NSWE: [Pt; 4] = [(0, -1), (0, 1), (-1, 0), (1, 0)];

fn chebyshev(a: Pt, b: Pt) -> i32 {
    (a.0 - b.0).abs().max((a.1 - b.1).abs())
}

fn is_obstacle(map: &GridMap, forbidden: &CellSet, (x, y): Pt) -> bool {
    if !map.in_bounds_signed(x, y) {
        return true;
    }
    let c = CellCoord::new(x as u32, y as u32);
    map.is_blocked(c) || forbidden.contains(c)
}

/// Returns the bottleneck cells found around `w` within `limit` rings, in
/// path order, or an empty vector.
pub fn search_vicinity(
    map: &GridMap,
    forbidden: &CellSet,
    w: CellCoord,
    limit: u32,
) -> Vec<CellCoord> {
    let center = (w.x as i32, w.y as i32);
    let mut obstacles: BTreeSet<Pt> = BTreeSet::new();
    for r in 1..=limit as i32 {
        for dy in -r..=r {
            for dx in -r..=r {
                if dx.abs() != r && dy.abs() != r {
                    continue;
                }
                let p = (center.0 + dx, center.1 + dy);
                if is_obstacle(map, forbidden, p) {
                    obstacles.insert(p);
                }
            }
        }
        let components = obstacle_components(obstacles.iter().copied());
        if components.len() < 2 {
            continue;
        }
        if let Some(path) = narrowest_gap(map, forbidden, center, r, &components) {
            return path
                .into_iter()
                .map(|(x, y)| CellCoord::new(x as u32, y as u32))
                .collect();
        }
    }
    Vec::new()
}

/// Ranking of a candidate gap path; smaller is better.
#[derive(PartialEq, Eq, PartialOrd, Ord)]
struct GapKey {
    len: usize,
    /// Endpoints touching their component only at a corner.
    corner_contacts: u8,
    /// Chebyshev distance from the search centre to the nearest path cell.
    offset: i32,
    cells: Vec<(i32, i32)>,
}

fn narrowest_gap(
    map: &GridMap,
    forbidden: &CellSet,
    center: Pt,
    radius: i32,
    components: &[Vec<Pt>],
) -> Option<Vec<Pt>> {
    let component_of: HashMap<Pt, usize> = components
        .iter()
        .enumerate()
        .flat_map(|(i, comp)| comp.iter().map(move |&p| (p, i)))
        .collect();

    // Passable cells of the square, row-major, with their component contacts:
    // component -> touches along an edge (true) or only at a corner (false).
    let mut cells: Vec<Pt> = Vec::new();
    for y in center.1 - radius..=center.1 + radius {
        for x in center.0 - radius..=center.0 + radius {
            if !is_obstacle(map, forbidden, (x, y)) {
                cells.push((x, y));
            }
        }
    }
    let contacts = |p: Pt| -> Vec<(usize, bool)> {
        let mut out: Vec<(usize, bool)> = Vec::new();
        for (dx, dy) in RING8 {
            if let Some(&comp) = component_of.get(&(p.0 + dx, p.1 + dy)) {
                let edge = dx == 0 || dy == 0;
                match out.iter_mut().find(|(c, _)| *c == comp) {
                    Some(entry) => entry.1 |= edge,
                    None => out.push((comp, edge)),
                }
            }
        }
        out
    };
    let contact_map: HashMap<Pt, Vec<(usize, bool)>> =
        cells.iter().map(|&p| (p, contacts(p))).collect();
    let in_square = |p: Pt| chebyshev(p, center) <= radius && contact_map.contains_key(&p);

    let mut best: Option<GapKey> = None;
    for &source in &cells {
        for &(from_comp, from_edge) in &contact_map[&source] {
            // BFS inside the square from `source`.
            let mut parent: HashMap<Pt, Pt> = HashMap::new();
            let mut dist: HashMap<Pt, usize> = HashMap::from([(source, 0)]);
            let mut order = vec![source];
            let mut queue = VecDeque::from([source]);
            while let Some(cur) = queue.pop_front() {
                let d = dist[&cur];
                if best.as_ref().is_some_and(|b| d + 2 > b.len) {
                    continue;
                }
                for (dx, dy) in NSWE {
                    let nb = (cur.0 + dx, cur.1 + dy);
                    if in_square(nb) && !dist.contains_key(&nb) {
                        dist.insert(nb, d + 1);
                        parent.insert(nb, cur);
                        order.push(nb);
                        queue.push_back(nb);
                    }
                }
            }
            for &end in &order {
                let len = dist[&end] + 1;
                if best.as_ref().is_some_and(|b| len > b.len) {
                    continue;
                }
                for &(to_comp, to_edge) in &contact_map[&end] {
                    if to_comp == from_comp {
                        continue;
                    }
                    let mut path = vec![end];
                    let mut cur = end;
                    while let Some(&p) = parent.get(&cur) {
                        path.push(p);
                        cur = p;
                    }
                    path.reverse();
                    let key = GapKey {
                        len,
                        corner_contacts: u8::from(!from_edge) + u8::from(!to_edge),
                        offset: path.iter().map(|&p| chebyshev(p, center)).min().unwrap_or(0),
                        cells: path.iter().map(|&(x, y)| (y, x)).collect(),
                    };
                    if best.as_ref().is_none_or(|b| key < *b) {
                        best = Some(key);
                    }
                }
            }
        }
    }
    best.map(|k| k.cells.into_iter().map(|(y, x)| (x, y)).collect())
}
