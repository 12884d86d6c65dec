//! Benchmark matrix: every (map, ratio, placement) cell is generated for a
//! number of seeds and every strategy is run on the same instances.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::allocate::Strategy;
use crate::engine::{run_simulation, SimError, SimParams};
use crate::gridmap::GridMap;
use crate::instgen::{place_agents, GenError, MapSource, Placement, Rect, ScenarioSpec};
use crate::model::Instance;

pub const RUN_HEADER: &str =
    "map,ratio,placement,strategy,seed,captured,obj2_uncaptured,obj3_sum_dist,obj4_time_at_targets,wall_ms";
pub const AGGREGATE_HEADER: &str = "map,ratio,placement,strategy,runs,mean_captured,min,max,stddev";

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("map {name}: {source}")]
    Map { name: String, source: GenError },
    #[error("map {map}, ratio {ratio}, {placement}, seed {seed}: {source}")]
    Generate {
        map: String,
        ratio: Ratio,
        placement: &'static str,
        seed: u32,
        source: GenError,
    },
    #[error("simulation failed: {0}")]
    Sim(#[from] SimError),
    #[error("invalid matrix: {0}")]
    Invalid(String),
}

/// `|D|:|A|`, written like `1:10`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Ratio {
    pub defenders: u32,
    pub attackers: u32,
}

impl Ratio {
    pub fn defender_count(&self, attacker_count: usize) -> usize {
        let num = attacker_count as u64 * u64::from(self.defenders);
        let den = u64::from(self.attackers);
        ((num + den / 2) / den) as usize
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.defenders, self.attackers)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("ratio {0:?} is not of the form D:A with positive integers")]
pub struct BadRatio(pub String);

impl FromStr for Ratio {
    type Err = BadRatio;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || BadRatio(s.to_owned());
        let (d, a) = s.split_once(':').ok_or_else(bad)?;
        let defenders: u32 = d.trim().parse().map_err(|_| bad())?;
        let attackers: u32 = a.trim().parse().map_err(|_| bad())?;
        if defenders == 0 || attackers == 0 {
            return Err(bad());
        }
        Ok(Ratio { defenders, attackers })
    }
}

impl Serialize for Ratio {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Ratio {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Rectangle in map-relative coordinates, corners in `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FracRect {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl FracRect {
    pub const fn new(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        FracRect { x0, y0, x1, y1 }
    }

    pub fn resolve(&self, map: &GridMap) -> Rect {
        let (w, h) = (f64::from(map.width()), f64::from(map.height()));
        let clamp = |v: f64, size: f64| (v.clamp(0.0, 1.0) * size).round() as u32;
        let x0 = clamp(self.x0, w);
        let y0 = clamp(self.y0, h);
        let x1 = clamp(self.x1, w).max(x0 + 1);
        let y1 = clamp(self.y1, h).max(y0 + 1);
        Rect::new(x0, y0, x1 - x0, y1 - y0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Geometry {
    pub attackers: FracRect,
    pub defenders: FracRect,
    pub targets: FracRect,
}

/// Default start and target areas. Targets fill the rightmost quarter.
/// Overlapped teams share the top left quadrant; separated attackers take
/// the leftmost quarter with defenders in the strip beside them.
pub fn default_geometry(placement: Placement) -> Geometry {
    let targets = FracRect::new(0.75, 0.0, 1.0, 1.0);
    match placement {
        Placement::Overlapped => {
            let team = FracRect::new(0.0, 0.0, 0.5, 0.5);
            Geometry {
                attackers: team,
                defenders: team,
                targets,
            }
        }
        Placement::Separated => Geometry {
            attackers: FracRect::new(0.0, 0.0, 0.25, 1.0),
            defenders: FracRect::new(0.25, 0.0, 0.5, 1.0),
            targets,
        },
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchMap {
    pub name: String,
    pub map: MapSource,
    #[serde(default)]
    pub overlapped: Option<Geometry>,
    #[serde(default)]
    pub separated: Option<Geometry>,
}

impl BenchMap {
    pub fn geometry(&self, placement: Placement) -> Geometry {
        let custom = match placement {
            Placement::Overlapped => self.overlapped,
            Placement::Separated => self.separated,
        };
        custom.unwrap_or_else(|| default_geometry(placement))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchMatrix {
    pub maps: Vec<BenchMap>,
    pub ratios: Vec<Ratio>,
    pub placements: Vec<Placement>,
    pub strategies: Vec<Strategy>,
    pub seeds_per_cell: u32,
    pub attacker_count: usize,
    pub time_limit: u32,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default)]
    pub params: SimParams,
}

impl BenchMatrix {
    pub fn validate(&self) -> Result<(), BenchError> {
        let invalid = |s: &str| Err(BenchError::Invalid(s.to_owned()));
        if self.seeds_per_cell == 0 {
            return invalid("seeds_per_cell must be at least 1");
        }
        if self.maps.is_empty() || self.ratios.is_empty() || self.placements.is_empty() || self.strategies.is_empty()
        {
            return invalid("maps, ratios, placements and strategies must be nonempty");
        }
        let mut names: Vec<&str> = self.maps.iter().map(|m| m.name.as_str()).collect();
        names.sort_unstable();
        if names.windows(2).any(|w| w[0] == w[1]) {
            return invalid("map names must be unique");
        }
        Ok(())
    }

    pub fn run_count(&self) -> usize {
        self.maps.len()
            * self.ratios.len()
            * self.placements.len()
            * self.strategies.len()
            * self.seeds_per_cell as usize
    }
}

/// First eight bytes of SHA-256 over the `|`-joined parts.
pub fn derive_seed(master: u64, parts: &[&str]) -> u64 {
    let mut h = Sha256::new();
    h.update(master.to_le_bytes());
    for p in parts {
        h.update(b"|");
        h.update(p.as_bytes());
    }
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest has 32 bytes"))
}

/// Instance seed of one cell; strategies share it.
pub fn instance_seed(master: u64, map: &str, ratio: Ratio, placement: Placement, index: u32) -> u64 {
    derive_seed(master, &[map, &ratio.to_string(), placement.name(), &index.to_string()])
}

/// Allocation seed; differs per strategy.
pub fn allocation_seed(master: u64, map: &str, ratio: Ratio, placement: Placement, strategy: Strategy, index: u32) -> u64 {
    derive_seed(
        master,
        &[map, &ratio.to_string(), placement.name(), strategy.name(), &index.to_string()],
    )
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunRow {
    pub map: String,
    pub ratio: Ratio,
    pub placement: Placement,
    pub strategy: Strategy,
    pub seed: u32,
    pub captured: u32,
    pub obj2_uncaptured: u32,
    pub obj3_sum_dist: u64,
    pub obj4_time_at_targets: u64,
    pub wall_ms: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub map: String,
    pub ratio: Ratio,
    pub placement: Placement,
    pub strategy: Strategy,
    pub runs: usize,
    pub mean_captured: f64,
    pub min: u32,
    pub max: u32,
    pub stddev: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct BenchOutput {
    pub runs: Vec<RunRow>,
    pub aggregates: Vec<AggregateRow>,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct BenchOptions {
    /// Record wall-clock milliseconds per run. Off keeps the per-run CSV a
    /// pure function of the matrix.
    pub wall_time: bool,
}

/// Builds the instance of one matrix cell and seed index.
pub fn cell_instance(
    matrix: &BenchMatrix,
    bench_map: &BenchMap,
    map: &GridMap,
    ratio: Ratio,
    placement: Placement,
    index: u32,
) -> Result<Instance, BenchError> {
    let g = bench_map.geometry(placement);
    let spec = ScenarioSpec {
        map: MapSource::Rows(Vec::new()),
        attacker_count: matrix.attacker_count,
        defender_count: ratio.defender_count(matrix.attacker_count),
        placement,
        attacker_rect: g.attackers.resolve(map),
        defender_rect: g.defenders.resolve(map),
        target_rect: g.targets.resolve(map),
        time_limit: matrix.time_limit,
        seed: instance_seed(matrix.master_seed, &bench_map.name, ratio, placement, index),
    };
    place_agents(map.clone(), &spec).map_err(|source| BenchError::Generate {
        map: bench_map.name.clone(),
        ratio,
        placement: placement.name(),
        seed: index,
        source,
    })
}

pub fn build_maps(matrix: &BenchMatrix, base_dir: &Path) -> Result<Vec<GridMap>, BenchError> {
    matrix
        .maps
        .iter()
        .map(|m| {
            m.map.build(base_dir).map_err(|source| BenchError::Map {
                name: m.name.clone(),
                source,
            })
        })
        .collect()
}

pub fn run_bench(matrix: &BenchMatrix, base_dir: &Path, options: BenchOptions) -> Result<BenchOutput, BenchError> {
    matrix.validate()?;
    let maps = build_maps(matrix, base_dir)?;

    let mut jobs = Vec::new();
    for (mi, bench_map) in matrix.maps.iter().enumerate() {
        for &ratio in &matrix.ratios {
            for &placement in &matrix.placements {
                for index in 1..=matrix.seeds_per_cell {
                    jobs.push((mi, bench_map, ratio, placement, index));
                }
            }
        }
    }

    let results: Vec<Vec<RunRow>> = jobs
        .par_iter()
        .map(|&(mi, bench_map, ratio, placement, index)| {
            let instance = cell_instance(matrix, bench_map, &maps[mi], ratio, placement, index)?;
            matrix
                .strategies
                .iter()
                .map(|&strategy| {
                    let seed = allocation_seed(matrix.master_seed, &bench_map.name, ratio, placement, strategy, index);
                    let started = Instant::now();
                    let result = run_simulation(&instance, strategy, &matrix.params, seed)?;
                    let wall_ms = if options.wall_time {
                        started.elapsed().as_millis() as u64
                    } else {
                        0
                    };
                    let m = result.metrics;
                    Ok(RunRow {
                        map: bench_map.name.clone(),
                        ratio,
                        placement,
                        strategy,
                        seed: index,
                        captured: result.captured_count() as u32,
                        obj2_uncaptured: m.obj2_uncaptured_within_limit,
                        obj3_sum_dist: m.obj3_sum_attacker_target_distance,
                        obj4_time_at_targets: m.obj4_time_at_captured_targets,
                        wall_ms,
                    })
                })
                .collect::<Result<Vec<_>, BenchError>>()
        })
        .collect::<Result<Vec<_>, _>>()?;

    // Regroup from (cell, seed, strategy) to (cell, strategy, seed) order.
    let mut grouped: BTreeMap<(usize, usize), Vec<RunRow>> = BTreeMap::new();
    for (job, rows) in jobs.iter().zip(results) {
        let (mi, _, ratio, placement, _) = *job;
        let ri = matrix.ratios.iter().position(|&r| r == ratio).unwrap_or(0);
        let pi = matrix.placements.iter().position(|&p| p == placement).unwrap_or(0);
        let cell = (mi * matrix.ratios.len() + ri) * matrix.placements.len() + pi;
        for (si, row) in rows.into_iter().enumerate() {
            grouped.entry((cell, si)).or_default().push(row);
        }
    }
    let mut out = BenchOutput::default();
    for rows in grouped.into_values() {
        out.aggregates.push(aggregate(&rows));
        out.runs.extend(rows);
    }
    Ok(out)
}

/// Summary of one cell's runs for a single strategy.
pub fn aggregate(rows: &[RunRow]) -> AggregateRow {
    let first = &rows[0];
    let values: Vec<f64> = rows.iter().map(|r| f64::from(r.captured)).collect();
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let stddev = if rows.len() > 1 {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    AggregateRow {
        map: first.map.clone(),
        ratio: first.ratio,
        placement: first.placement,
        strategy: first.strategy,
        runs: rows.len(),
        mean_captured: mean,
        min: rows.iter().map(|r| r.captured).min().unwrap_or(0),
        max: rows.iter().map(|r| r.captured).max().unwrap_or(0),
        stddev,
    }
}

fn csv_text(header: &str, records: impl Iterator<Item = Vec<String>>) -> String {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(header.split(',')).expect("in-memory write");
    for r in records {
        w.write_record(&r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("CSV is UTF-8")
}

pub fn runs_csv(rows: &[RunRow]) -> String {
    csv_text(
        RUN_HEADER,
        rows.iter().map(|r| {
            vec![
                r.map.clone(),
                r.ratio.to_string(),
                r.placement.name().to_owned(),
                r.strategy.name().to_owned(),
                r.seed.to_string(),
                r.captured.to_string(),
                r.obj2_uncaptured.to_string(),
                r.obj3_sum_dist.to_string(),
                r.obj4_time_at_targets.to_string(),
                r.wall_ms.to_string(),
            ]
        }),
    )
}

pub fn aggregates_csv(rows: &[AggregateRow]) -> String {
    csv_text(
        AGGREGATE_HEADER,
        rows.iter().map(|r| {
            vec![
                r.map.clone(),
                r.ratio.to_string(),
                r.placement.name().to_owned(),
                r.strategy.name().to_owned(),
                r.runs.to_string(),
                format!("{:.3}", r.mean_captured),
                r.min.to_string(),
                r.max.to_string(),
                format!("{:.3}", r.stddev),
            ]
        }),
    )
}

/// Cumulative captures per step for each strategy on one instance; row
/// `t` holds the count after step `t`.
pub fn timeseries_csv(
    instance: &Instance,
    strategies: &[Strategy],
    params: &SimParams,
    seed: u64,
) -> Result<String, SimError> {
    let columns = strategies
        .iter()
        .map(|&s| run_simulation(instance, s, params, seed).map(|r| r.captures_by_step))
        .collect::<Result<Vec<_>, _>>()?;
    let header = std::iter::once("step")
        .chain(strategies.iter().map(|s| s.name()))
        .collect::<Vec<_>>()
        .join(",");
    let rows = (0..=instance.time_limit as usize).map(|t| {
        std::iter::once(t.to_string())
            .chain(columns.iter().map(|c| c[t].to_string()))
            .collect()
    });
    Ok(csv_text(&header, rows))
}
