//! Procedural orthogonal-rooms and ruins maps.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::gridmap::{CellCoord, GridMap};

use super::GenError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoomsParams {
    pub width: u32,
    pub height: u32,
    pub rooms_x: u32,
    pub rooms_y: u32,
    pub door_width: u32,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RuinsParams {
    pub rooms: RoomsParams,
    pub damage_rate: f64,
    pub jitter: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Axis {
    /// Wall runs along y at fixed x.
    Vertical,
    /// Wall runs along x at fixed y.
    Horizontal,
}

/// The part of one wall line between two junctions (or a junction and the
/// map edge), excluding the junction cells.
#[derive(Clone, Debug)]
struct Segment {
    axis: Axis,
    line: u32,
    start: u32,
    end: u32,
    door: u32,
}

impl Segment {
    fn cell(&self, along: u32, offset: i64) -> (i64, i64) {
        match self.axis {
            Axis::Vertical => (i64::from(self.line) + offset, i64::from(along)),
            Axis::Horizontal => (i64::from(along), i64::from(self.line) + offset),
        }
    }
}

struct Layout {
    xs: Vec<u32>,
    ys: Vec<u32>,
    segments: Vec<Segment>,
}

fn wall_lines(size: u32, rooms: u32) -> Result<Vec<u32>, GenError> {
    if rooms == 0 {
        return Err(GenError::NoRoomInterior);
    }
    let lines: Vec<u32> = (1..rooms).map(|i| (u64::from(i) * u64::from(size) / u64::from(rooms)) as u32).collect();
    let mut previous: i64 = -1;
    for &l in lines.iter().chain(std::iter::once(&size)) {
        if i64::from(l) - previous < 2 {
            return Err(GenError::NoRoomInterior);
        }
        previous = i64::from(l);
    }
    Ok(lines)
}

/// Runs between consecutive cross lines, with the map edges as bounds.
fn spans(size: u32, cross: &[u32]) -> Vec<(u32, u32)> {
    let mut out = Vec::new();
    let mut start = 0;
    for &c in cross {
        out.push((start, c - 1));
        start = c + 1;
    }
    out.push((start, size - 1));
    out
}

fn layout(p: &RoomsParams) -> Result<Layout, GenError> {
    let xs = wall_lines(p.width, p.rooms_x)?;
    let ys = wall_lines(p.height, p.rooms_y)?;
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let mut segments = Vec::new();
    let mut push = |axis: Axis, line: u32, (start, end): (u32, u32)| -> Result<(), GenError> {
        let len = end - start + 1;
        if p.door_width == 0 || p.door_width >= len {
            return Err(GenError::DoorTooWide {
                door_width: p.door_width,
                wall_length: len,
            });
        }
        // Keep doors off the junctions when there is room to.
        let (lo, hi) = if len >= p.door_width + 2 {
            (start + 1, end - p.door_width)
        } else {
            (start, end + 1 - p.door_width)
        };
        let door = rng.gen_range(lo..=hi);
        segments.push(Segment {
            axis,
            line,
            start,
            end,
            door,
        });
        Ok(())
    };
    for &x in &xs {
        for span in spans(p.height, &ys) {
            push(Axis::Vertical, x, span)?;
        }
    }
    for &y in &ys {
        for span in spans(p.width, &xs) {
            push(Axis::Horizontal, y, span)?;
        }
    }
    Ok(Layout { xs, ys, segments })
}

/// Straight axis-aligned walls splitting the map into `rooms_x × rooms_y`
/// rooms, one door per wall between neighbouring rooms.
pub fn generate_rooms_map(p: &RoomsParams) -> Result<GridMap, GenError> {
    let layout = layout(p)?;
    let mut map = GridMap::empty(p.width, p.height)?;
    for &x in &layout.xs {
        for &y in &layout.ys {
            map.set_blocked(CellCoord::new(x, y), true);
        }
    }
    for seg in &layout.segments {
        for along in seg.start..=seg.end {
            if !(seg.door..seg.door + p.door_width).contains(&along) {
                let (x, y) = seg.cell(along, 0);
                map.set_blocked(CellCoord::new(x as u32, y as u32), true);
            }
        }
    }
    Ok(map)
}

/// Rooms walls broken into pieces that are shifted sideways by up to
/// `jitter` cells, then damaged cell by cell. A repair pass reopens walls
/// until every passable cell is reachable.
pub fn generate_ruins_map(p: &RuinsParams) -> Result<GridMap, GenError> {
    if !(0.0..=1.0).contains(&p.damage_rate) {
        return Err(GenError::DamageRate(p.damage_rate));
    }
    let rooms = &p.rooms;
    let layout = layout(rooms)?;
    let mut rng = ChaCha8Rng::seed_from_u64(rooms.seed);
    // Piece breaks draw from their own stream, apart from door placement.
    rng.set_stream(2);
    let mut map = GridMap::empty(rooms.width, rooms.height)?;
    let wall = |map: &mut GridMap, (x, y): (i64, i64)| {
        if map.in_bounds_signed(x as i32, y as i32) {
            map.set_blocked(CellCoord::new(x as u32, y as u32), true);
        }
    };
    for &x in &layout.xs {
        for &y in &layout.ys {
            wall(&mut map, (i64::from(x), i64::from(y)));
        }
    }
    let jitter = i64::from(p.jitter);
    for seg in &layout.segments {
        let mut along = seg.start;
        while along <= seg.end {
            let piece = if p.jitter == 0 {
                seg.end - along + 1
            } else {
                rng.gen_range(2..=5).min(seg.end - along + 1)
            };
            let offset = if p.jitter == 0 { 0 } else { rng.gen_range(-jitter..=jitter) };
            for a in along..along + piece {
                if !(seg.door..seg.door + rooms.door_width).contains(&a) {
                    wall(&mut map, seg.cell(a, offset));
                }
            }
            along += piece;
        }
    }

    let mut damage = ChaCha8Rng::seed_from_u64(rooms.seed);
    damage.set_stream(1);
    let walls: Vec<CellCoord> = map.blocked_cells().collect();
    for c in walls {
        if damage.gen_bool(p.damage_rate) {
            map.set_blocked(c, false);
        }
    }
    repair_connectivity(&mut map);
    Ok(map)
}

/// Labels 4-connected passable components; returns labels and count.
fn label_components(map: &GridMap) -> (Vec<Option<usize>>, usize) {
    let mut label = vec![None; map.cell_count()];
    let mut count = 0;
    for c in map.passable_cells() {
        if label[map.index(c)].is_some() {
            continue;
        }
        label[map.index(c)] = Some(count);
        let mut queue = VecDeque::from([c]);
        while let Some(cur) = queue.pop_front() {
            for nb in map.neighbors4(cur).unwrap_or_default() {
                if label[map.index(nb)].is_none() {
                    label[map.index(nb)] = Some(count);
                    queue.push_back(nb);
                }
            }
        }
        count += 1;
    }
    (label, count)
}

/// Opens the fewest wall cells joining the first component to the nearest
/// other one, until the map is connected.
pub fn repair_connectivity(map: &mut GridMap) {
    loop {
        let (label, count) = label_components(map);
        if count <= 1 {
            return;
        }
        // 0-1 BFS: stepping onto a wall costs 1.
        let n = map.cell_count();
        let mut cost = vec![u32::MAX; n];
        let mut parent = vec![usize::MAX; n];
        let mut deque = VecDeque::new();
        for i in 0..n {
            if label[i] == Some(0) {
                cost[i] = 0;
                deque.push_back(i);
            }
        }
        let mut reached = None;
        while let Some(i) = deque.pop_front() {
            if label[i].is_some_and(|l| l != 0) {
                reached = Some(i);
                break;
            }
            let c = map.coord(i);
            for (dx, dy) in [(0, -1), (0, 1), (-1, 0), (1, 0)] {
                let (x, y) = (c.x as i32 + dx, c.y as i32 + dy);
                if !map.in_bounds_signed(x, y) {
                    continue;
                }
                let j = map.index(CellCoord::new(x as u32, y as u32));
                let step = u32::from(map.is_blocked(map.coord(j)));
                if cost[i] + step < cost[j] {
                    cost[j] = cost[i] + step;
                    parent[j] = i;
                    if step == 0 {
                        deque.push_front(j);
                    } else {
                        deque.push_back(j);
                    }
                }
            }
        }
        let Some(mut i) = reached else { return };
        while parent[i] != usize::MAX {
            map.set_blocked(map.coord(i), false);
            i = parent[i];
        }
    }
}
