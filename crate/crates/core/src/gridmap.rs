//! 4-connected grid maps, the movingAI `.map` format, and the BFS
//! primitives every other module builds on.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A grid cell. `x` is the column (left to right), `y` the row (top to bottom).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "[u32; 2]", into = "[u32; 2]")]
pub struct CellCoord {
    pub x: u32,
    pub y: u32,
}

impl CellCoord {
    pub const fn new(x: u32, y: u32) -> Self {
        CellCoord { x, y }
    }

    /// Manhattan distance, ignoring obstacles.
    pub fn manhattan(self, other: CellCoord) -> u32 {
        self.x.abs_diff(other.x) + self.y.abs_diff(other.y)
    }

    pub fn is_adjacent4(self, other: CellCoord) -> bool {
        self.manhattan(other) == 1
    }

    /// Row-major ordering key, `(y, x)`.
    pub fn row_major(self) -> (u32, u32) {
        (self.y, self.x)
    }
}

impl From<[u32; 2]> for CellCoord {
    fn from([x, y]: [u32; 2]) -> Self {
        CellCoord { x, y }
    }
}

impl From<CellCoord> for [u32; 2] {
    fn from(c: CellCoord) -> Self {
        [c.x, c.y]
    }
}

impl fmt::Display for CellCoord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.x, self.y)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MapError {
    #[error("line {line}: {message}")]
    Header { line: usize, message: String },
    #[error("line {line}: expected {expected} cells, found {found}")]
    RowLength {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("line {line}, column {column}: unknown cell character {ch:?}")]
    UnknownCell { line: usize, column: usize, ch: char },
    #[error("expected {expected} map rows, found {found}")]
    RowCount { expected: usize, found: usize },
    #[error("map dimensions must be at least 1x1")]
    Empty,
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("cell {0} is blocked or outside the map")]
pub struct NotPassable(pub CellCoord);

/// A rectangular 4-connected grid with obstacle cells.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GridMap {
    width: u32,
    height: u32,
    blocked: Vec<bool>,
}

impl GridMap {
    /// A map without obstacles.
    pub fn empty(width: u32, height: u32) -> Result<Self, MapError> {
        if width == 0 || height == 0 {
            return Err(MapError::Empty);
        }
        Ok(GridMap {
            width,
            height,
            blocked: vec![false; (width * height) as usize],
        })
    }

    pub fn with_blocked(
        width: u32,
        height: u32,
        blocked: impl IntoIterator<Item = CellCoord>,
    ) -> Result<Self, MapError> {
        let mut map = Self::empty(width, height)?;
        for c in blocked {
            map.set_blocked(c, true);
        }
        Ok(map)
    }

    /// Builds a map from body rows only (no movingAI header).
    pub fn from_rows<S: AsRef<str>>(rows: &[S]) -> Result<Self, MapError> {
        let height = rows.len();
        let width = rows.first().map_or(0, |r| r.as_ref().chars().count());
        if width == 0 || height == 0 {
            return Err(MapError::Empty);
        }
        let mut blocked = Vec::with_capacity(width * height);
        for (row_idx, row) in rows.iter().enumerate() {
            parse_row(row.as_ref(), row_idx + 1, width, &mut blocked)?;
        }
        Ok(GridMap {
            width: width as u32,
            height: height as u32,
            blocked,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn cell_count(&self) -> usize {
        self.blocked.len()
    }

    pub fn in_bounds(&self, c: CellCoord) -> bool {
        c.x < self.width && c.y < self.height
    }

    pub fn in_bounds_signed(&self, x: i32, y: i32) -> bool {
        x >= 0 && y >= 0 && (x as u32) < self.width && (y as u32) < self.height
    }

    pub fn is_passable(&self, c: CellCoord) -> bool {
        self.in_bounds(c) && !self.blocked[self.index(c)]
    }

    pub fn is_blocked(&self, c: CellCoord) -> bool {
        self.in_bounds(c) && self.blocked[self.index(c)]
    }

    pub fn set_blocked(&mut self, c: CellCoord, blocked: bool) {
        assert!(self.in_bounds(c), "cell {c} outside {}x{} map", self.width, self.height);
        let i = self.index(c);
        self.blocked[i] = blocked;
    }

    /// Row-major index of an in-bounds cell.
    pub fn index(&self, c: CellCoord) -> usize {
        c.y as usize * self.width as usize + c.x as usize
    }

    pub fn coord(&self, index: usize) -> CellCoord {
        let w = self.width as usize;
        CellCoord::new((index % w) as u32, (index / w) as u32)
    }

    /// Passable cells in row-major order.
    pub fn passable_cells(&self) -> impl Iterator<Item = CellCoord> + '_ {
        (0..self.blocked.len())
            .filter(|&i| !self.blocked[i])
            .map(|i| self.coord(i))
    }

    pub fn blocked_cells(&self) -> impl Iterator<Item = CellCoord> + '_ {
        (0..self.blocked.len())
            .filter(|&i| self.blocked[i])
            .map(|i| self.coord(i))
    }

    pub fn passable_count(&self) -> usize {
        self.blocked.iter().filter(|b| !**b).count()
    }

    /// Passable 4-neighbours in N, S, W, E order.
    pub fn neighbors4(&self, c: CellCoord) -> Result<Vec<CellCoord>, NotPassable> {
        if !self.is_passable(c) {
            return Err(NotPassable(c));
        }
        let mut out = Vec::with_capacity(4);
        self.for_each_neighbor(c, |n| out.push(n));
        Ok(out)
    }

    /// Visits the passable 4-neighbours of `c` in N, S, W, E order.
    #[inline]
    pub(crate) fn for_each_neighbor(&self, c: CellCoord, mut f: impl FnMut(CellCoord)) {
        if c.y > 0 {
            let n = CellCoord::new(c.x, c.y - 1);
            if !self.blocked[self.index(n)] {
                f(n);
            }
        }
        if c.y + 1 < self.height {
            let n = CellCoord::new(c.x, c.y + 1);
            if !self.blocked[self.index(n)] {
                f(n);
            }
        }
        if c.x > 0 {
            let n = CellCoord::new(c.x - 1, c.y);
            if !self.blocked[self.index(n)] {
                f(n);
            }
        }
        if c.x + 1 < self.width {
            let n = CellCoord::new(c.x + 1, c.y);
            if !self.blocked[self.index(n)] {
                f(n);
            }
        }
    }

    /// Body rows, `.` for passable and `@` for blocked.
    pub fn to_rows(&self) -> Vec<String> {
        (0..self.height)
            .map(|y| {
                (0..self.width)
                    .map(|x| {
                        if self.blocked[self.index(CellCoord::new(x, y))] {
                            '@'
                        } else {
                            '.'
                        }
                    })
                    .collect()
            })
            .collect()
    }

    /// Serializes in movingAI `.map` format.
    pub fn to_movingai(&self) -> String {
        let mut out = format!(
            "type octile\nheight {}\nwidth {}\nmap\n",
            self.height, self.width
        );
        for row in self.to_rows() {
            out.push_str(&row);
            out.push('\n');
        }
        out
    }

    /// True when every passable cell is reachable from every other.
    pub fn is_connected(&self) -> bool {
        match self.passable_cells().next() {
            None => true,
            Some(start) => {
                let field = bfs_distances(self, start, &CellSet::new(self));
                field.reachable_count() == self.passable_count()
            }
        }
    }
}

fn cell_is_blocked(ch: char) -> Option<bool> {
    match ch {
        '.' | 'G' => Some(false),
        '@' | 'O' | 'T' | 'W' => Some(true),
        _ => None,
    }
}

fn parse_row(row: &str, line: usize, width: usize, out: &mut Vec<bool>) -> Result<(), MapError> {
    let row = row.trim_end_matches(['\r', '\n']);
    let found = row.chars().count();
    if found != width {
        return Err(MapError::RowLength {
            line,
            expected: width,
            found,
        });
    }
    for (col, ch) in row.chars().enumerate() {
        match cell_is_blocked(ch) {
            Some(b) => out.push(b),
            None => {
                return Err(MapError::UnknownCell {
                    line,
                    column: col + 1,
                    ch,
                })
            }
        }
    }
    Ok(())
}

fn header_value(line: Option<&str>, line_no: usize, key: &str) -> Result<u32, MapError> {
    let line = line.ok_or_else(|| MapError::Header {
        line: line_no,
        message: format!("missing `{key}` line"),
    })?;
    let mut parts = line.split_whitespace();
    match (parts.next(), parts.next(), parts.next()) {
        (Some(k), Some(v), None) if k == key => v.parse().map_err(|_| MapError::Header {
            line: line_no,
            message: format!("invalid {key} value {v:?}"),
        }),
        _ => Err(MapError::Header {
            line: line_no,
            message: format!("expected `{key} <n>`, found {line:?}"),
        }),
    }
}

/// Parses a movingAI `.map` document.
pub fn parse_map(text: &str) -> Result<GridMap, MapError> {
    let mut lines = text.lines();
    match lines.next().map(str::trim_end) {
        Some("type octile") => {}
        other => {
            return Err(MapError::Header {
                line: 1,
                message: format!("expected `type octile`, found {other:?}"),
            })
        }
    }
    let height = header_value(lines.next(), 2, "height")?;
    let width = header_value(lines.next(), 3, "width")?;
    match lines.next().map(str::trim_end) {
        Some("map") => {}
        other => {
            return Err(MapError::Header {
                line: 4,
                message: format!("expected `map`, found {other:?}"),
            })
        }
    }
    if width == 0 || height == 0 {
        return Err(MapError::Empty);
    }
    let mut blocked = Vec::with_capacity((width * height) as usize);
    let mut rows = 0usize;
    for (i, row) in lines.enumerate() {
        let line = i + 5;
        if rows == height as usize {
            if row.trim().is_empty() {
                continue;
            }
            return Err(MapError::RowCount {
                expected: height as usize,
                found: rows + 1,
            });
        }
        parse_row(row, line, width as usize, &mut blocked)?;
        rows += 1;
    }
    if rows != height as usize {
        return Err(MapError::RowCount {
            expected: height as usize,
            found: rows,
        });
    }
    Ok(GridMap {
        width,
        height,
        blocked,
    })
}

/// A set of cells of one map, stored as a bitmap.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CellSet {
    width: u32,
    bits: Vec<bool>,
    len: usize,
}

impl CellSet {
    pub fn new(map: &GridMap) -> Self {
        CellSet {
            width: map.width,
            bits: vec![false; map.cell_count()],
            len: 0,
        }
    }

    pub fn from_cells(map: &GridMap, cells: impl IntoIterator<Item = CellCoord>) -> Self {
        let mut set = Self::new(map);
        for c in cells {
            set.insert(c);
        }
        set
    }

    #[inline]
    fn idx(&self, c: CellCoord) -> usize {
        c.y as usize * self.width as usize + c.x as usize
    }

    /// Returns true if the cell was newly inserted.
    pub fn insert(&mut self, c: CellCoord) -> bool {
        let i = self.idx(c);
        let fresh = !self.bits[i];
        if fresh {
            self.bits[i] = true;
            self.len += 1;
        }
        fresh
    }

    pub fn remove(&mut self, c: CellCoord) -> bool {
        let i = self.idx(c);
        let had = self.bits[i];
        if had {
            self.bits[i] = false;
            self.len -= 1;
        }
        had
    }

    #[inline]
    pub fn contains(&self, c: CellCoord) -> bool {
        self.bits.get(self.idx(c)).copied().unwrap_or(false)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = CellCoord> + '_ {
        let w = self.width as usize;
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, b)| **b)
            .map(move |(i, _)| CellCoord::new((i % w) as u32, (i / w) as u32))
    }
}

/// An ordered, nonempty sequence of 4-adjacent passable cells.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Path(Vec<CellCoord>);

impl Path {
    pub fn new(cells: Vec<CellCoord>) -> Option<Self> {
        let ok = !cells.is_empty() && cells.windows(2).all(|w| w[0].is_adjacent4(w[1]));
        ok.then_some(Path(cells))
    }

    pub fn cells(&self) -> &[CellCoord] {
        &self.0
    }

    /// Number of cells, including both endpoints.
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn moves(&self) -> usize {
        self.0.len() - 1
    }

    pub fn first(&self) -> CellCoord {
        self.0[0]
    }

    pub fn last(&self) -> CellCoord {
        self.0[self.0.len() - 1]
    }

    pub fn contains(&self, c: CellCoord) -> bool {
        self.0.contains(&c)
    }

    pub fn into_cells(self) -> Vec<CellCoord> {
        self.0
    }
}

/// Hop counts from one source cell; `None` is unreachable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DistanceField {
    width: u32,
    dist: Vec<u32>,
}

const UNREACHED: u32 = u32::MAX;

impl DistanceField {
    pub fn get(&self, c: CellCoord) -> Option<u32> {
        if c.x >= self.width {
            return None;
        }
        let i = c.y as usize * self.width as usize + c.x as usize;
        match self.dist.get(i) {
            Some(&d) if d != UNREACHED => Some(d),
            _ => None,
        }
    }

    pub fn reachable_count(&self) -> usize {
        self.dist.iter().filter(|d| **d != UNREACHED).count()
    }
}

/// Breadth-first search over `map` minus `forbidden`. The source is always
/// expanded even when it is itself forbidden. Stops early once `stop_at` is
/// settled. Returns distances and BFS parents (indices).
fn bfs(
    map: &GridMap,
    src: CellCoord,
    forbidden: &CellSet,
    stop_at: Option<CellCoord>,
) -> (Vec<u32>, Vec<u32>) {
    let n = map.cell_count();
    let mut dist = vec![UNREACHED; n];
    let mut parent = vec![UNREACHED; n];
    let mut queue = VecDeque::new();
    let si = map.index(src);
    dist[si] = 0;
    queue.push_back(src);
    while let Some(cur) = queue.pop_front() {
        if Some(cur) == stop_at {
            break;
        }
        let ci = map.index(cur);
        let next_d = dist[ci] + 1;
        map.for_each_neighbor(cur, |nb| {
            let ni = map.index(nb);
            if dist[ni] == UNREACHED && !forbidden.contains(nb) {
                dist[ni] = next_d;
                parent[ni] = ci as u32;
                queue.push_back(nb);
            }
        });
    }
    (dist, parent)
}

/// Minimum-length path from `src` to `dst` avoiding obstacles and
/// `forbidden`. Ties resolve through the N, S, W, E expansion order. `src`
/// itself is never treated as forbidden.
pub fn shortest_path(
    map: &GridMap,
    src: CellCoord,
    dst: CellCoord,
    forbidden: &CellSet,
) -> Option<Path> {
    if !map.is_passable(src) || !map.is_passable(dst) {
        return None;
    }
    if src == dst {
        return Some(Path(vec![src]));
    }
    if forbidden.contains(dst) {
        return None;
    }
    let (dist, parent) = bfs(map, src, forbidden, Some(dst));
    let di = map.index(dst);
    if dist[di] == UNREACHED {
        return None;
    }
    let mut cells = Vec::with_capacity(dist[di] as usize + 1);
    let mut cur = di;
    cells.push(dst);
    while parent[cur] != UNREACHED {
        cur = parent[cur] as usize;
        cells.push(map.coord(cur));
    }
    cells.reverse();
    Some(Path(cells))
}

/// Exact hop distances from `src` avoiding obstacles and `forbidden`.
pub fn bfs_distances(map: &GridMap, src: CellCoord, forbidden: &CellSet) -> DistanceField {
    if !map.is_passable(src) {
        return DistanceField {
            width: map.width,
            dist: vec![UNREACHED; map.cell_count()],
        };
    }
    let (dist, _) = bfs(map, src, forbidden, None);
    DistanceField {
        width: map.width,
        dist,
    }
}

/// Splits a set of (possibly out-of-map) cells into 8-connected components.
/// Components come out sorted internally by `(y, x)` and ordered by their
/// first cell.
pub fn obstacle_components(
    cells: impl IntoIterator<Item = (i32, i32)>,
) -> Vec<Vec<(i32, i32)>> {
    let mut remaining: BTreeSet<(i32, i32)> = cells.into_iter().map(|(x, y)| (y, x)).collect();
    let mut components = Vec::new();
    while let Some(&seed) = remaining.iter().next() {
        remaining.remove(&seed);
        let mut component = vec![seed];
        let mut stack = vec![seed];
        while let Some((y, x)) = stack.pop() {
            for dy in -1..=1 {
                for dx in -1..=1 {
                    let nb = (y + dy, x + dx);
                    if remaining.remove(&nb) {
                        component.push(nb);
                        stack.push(nb);
                    }
                }
            }
        }
        component.sort_unstable();
        components.push(component.into_iter().map(|(y, x)| (x, y)).collect());
    }
    components
}
