//! Seeded benchmark instances: a map plus randomly placed attackers,
//! defenders and targets inside configurable rectangles.

mod maps;

pub use maps::{generate_rooms_map, generate_ruins_map, repair_connectivity, RoomsParams, RuinsParams};

use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gridmap::{parse_map, CellCoord, GridMap, MapError};
use crate::model::Instance;

#[derive(Debug, Error)]
pub enum GenError {
    #[error(transparent)]
    Map(#[from] MapError),
    #[error("cannot read map {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("room grid leaves a room without interior cells")]
    NoRoomInterior,
    #[error("door width {door_width} does not fit a wall of length {wall_length}")]
    DoorTooWide { door_width: u32, wall_length: u32 },
    #[error("damage rate {0} outside [0, 1]")]
    DamageRate(f64),
    #[error("{name} rectangle {rect:?} exceeds the {width}x{height} map")]
    RectOutOfBounds {
        name: &'static str,
        rect: Rect,
        width: u32,
        height: u32,
    },
    #[error("overlapped placement needs identical attacker and defender rectangles")]
    OverlappedRectsDiffer,
    #[error("separated placement needs disjoint attacker and defender rectangles")]
    SeparatedRectsOverlap,
    #[error("{name} rectangle has {available} free passable cells, {needed} needed")]
    InsufficientCells {
        name: &'static str,
        needed: usize,
        available: usize,
    },
}

/// Cell rectangle: columns `x..x+w`, rows `y..y+h`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rect {
    pub x: u32,
    pub y: u32,
    pub w: u32,
    pub h: u32,
}

impl Rect {
    pub fn new(x: u32, y: u32, w: u32, h: u32) -> Self {
        Rect { x, y, w, h }
    }

    pub fn whole(map: &GridMap) -> Self {
        Rect::new(0, 0, map.width(), map.height())
    }

    pub fn contains(&self, c: CellCoord) -> bool {
        (self.x..self.x + self.w).contains(&c.x) && (self.y..self.y + self.h).contains(&c.y)
    }

    pub fn intersects(&self, other: &Rect) -> bool {
        self.x < other.x + other.w
            && other.x < self.x + self.w
            && self.y < other.y + other.h
            && other.y < self.y + self.h
    }

    fn fits(&self, map: &GridMap) -> bool {
        self.w > 0 && self.h > 0 && self.x + self.w <= map.width() && self.y + self.h <= map.height()
    }

    /// Passable cells inside, row-major.
    pub fn passable_cells(&self, map: &GridMap) -> Vec<CellCoord> {
        (self.y..self.y + self.h)
            .flat_map(|y| (self.x..self.x + self.w).map(move |x| CellCoord::new(x, y)))
            .filter(|&c| map.is_passable(c))
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Placement {
    Overlapped,
    Separated,
}

impl Placement {
    pub fn name(self) -> &'static str {
        match self {
            Placement::Overlapped => "overlapped",
            Placement::Separated => "separated",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MapSource {
    /// movingAI `.map` file, relative paths resolved against the spec's
    /// directory.
    File(PathBuf),
    Rooms(RoomsParams),
    Ruins(RuinsParams),
    Empty { width: u32, height: u32 },
    Rows(Vec<String>),
}

impl MapSource {
    pub fn build(&self, base_dir: &Path) -> Result<GridMap, GenError> {
        match self {
            MapSource::File(path) => {
                let path = base_dir.join(path);
                let text = std::fs::read_to_string(&path).map_err(|source| GenError::Io {
                    path: path.clone(),
                    source,
                })?;
                Ok(parse_map(&text)?)
            }
            MapSource::Rooms(p) => generate_rooms_map(p),
            MapSource::Ruins(p) => generate_ruins_map(p),
            MapSource::Empty { width, height } => Ok(GridMap::empty(*width, *height)?),
            MapSource::Rows(rows) => Ok(GridMap::from_rows(rows)?),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub map: MapSource,
    pub attacker_count: usize,
    pub defender_count: usize,
    pub placement: Placement,
    pub attacker_rect: Rect,
    pub defender_rect: Rect,
    pub target_rect: Rect,
    pub time_limit: u32,
    #[serde(default)]
    pub seed: u64,
}

/// Builds the spec's map and places agents on it.
pub fn generate_instance(spec: &ScenarioSpec, base_dir: &Path) -> Result<Instance, GenError> {
    let map = spec.map.build(base_dir)?;
    place_agents(map, spec)
}

fn draw(
    rng: &mut ChaCha8Rng,
    mut pool: Vec<CellCoord>,
    needed: usize,
    name: &'static str,
) -> Result<Vec<CellCoord>, GenError> {
    if pool.len() < needed {
        return Err(GenError::InsufficientCells {
            name,
            needed,
            available: pool.len(),
        });
    }
    let (chosen, _) = pool.partial_shuffle(rng, needed);
    Ok(chosen.to_vec())
}

/// Places agents and targets on `map` per the spec's rectangles, ignoring
/// its map source. Targets never coincide with attacker starts.
pub fn place_agents(map: GridMap, spec: &ScenarioSpec) -> Result<Instance, GenError> {
    for (name, rect) in [
        ("attacker", spec.attacker_rect),
        ("defender", spec.defender_rect),
        ("target", spec.target_rect),
    ] {
        if !rect.fits(&map) {
            return Err(GenError::RectOutOfBounds {
                name,
                rect,
                width: map.width(),
                height: map.height(),
            });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (m, n) = (spec.attacker_count, spec.defender_count);
    let (attacker_starts, defender_starts) = match spec.placement {
        Placement::Overlapped => {
            if spec.attacker_rect != spec.defender_rect {
                return Err(GenError::OverlappedRectsDiffer);
            }
            let mut both = draw(&mut rng, spec.attacker_rect.passable_cells(&map), m + n, "team")?;
            let defenders = both.split_off(m);
            (both, defenders)
        }
        Placement::Separated => {
            if spec.attacker_rect.intersects(&spec.defender_rect) {
                return Err(GenError::SeparatedRectsOverlap);
            }
            let attackers = draw(&mut rng, spec.attacker_rect.passable_cells(&map), m, "attacker")?;
            let defenders = draw(&mut rng, spec.defender_rect.passable_cells(&map), n, "defender")?;
            (attackers, defenders)
        }
    };
    let pool: Vec<CellCoord> = spec
        .target_rect
        .passable_cells(&map)
        .into_iter()
        .filter(|c| !attacker_starts.contains(c))
        .collect();
    let attacker_targets = draw(&mut rng, pool, m, "target")?;
    Ok(Instance {
        board: map,
        attacker_starts,
        attacker_targets,
        defender_starts,
        time_limit: spec.time_limit,
    })
}
