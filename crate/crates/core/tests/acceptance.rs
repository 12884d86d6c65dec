//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line;
//! the process exits nonzero if any criterion fails. Criteria run one after another so
//! the timing budgets are measured without competing work.

use std::collections::VecDeque;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use area_protect::allocate::{distance_table, strict_greedy_pairs, Strategy};
use area_protect::bench::{aggregates_csv, run_bench, AggregateRow, BenchMatrix, BenchOptions};
use area_protect::engine::{run_simulation, SimParams, SimResult};
use area_protect::exactsolve::{solve_decision, Verdict, DEFAULT_STATE_BUDGET};
use area_protect::gridmap::{CellCoord, GridMap};
use area_protect::instgen::{
    generate_instance, place_agents, MapSource, Placement, Rect, RoomsParams, RuinsParams, ScenarioSpec,
};
use area_protect::model::{audit_transition, load_instance_file, validate_instance, AnyInstance, Instance, Team};
use area_protect::qbfreduce::{parse_qdimacs, reduce_to_app, Quantifier};

fn workspace() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn load_matrix(name: &str) -> (BenchMatrix, PathBuf) {
    let path = workspace().join("configs").join(name);
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    let matrix = serde_json::from_str(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    (matrix, path.parent().unwrap().to_owned())
}

struct Report {
    failures: Vec<String>,
}

impl Report {
    fn record(&mut self, id: u32, name: &str, pass: bool, detail: String) {
        let verdict = if pass { "PASS" } else { "FAIL" };
        println!("[{verdict}] criterion {id:>2} {name}: {detail}");
        if !pass {
            self.failures.push(format!("{id} {name}"));
        }
    }
}

fn mean_of(rows: &[AggregateRow], map: &str, ratio: &str, placement: Placement, strategy: Strategy) -> f64 {
    rows.iter()
        .find(|r| r.map == map && r.ratio.to_string() == ratio && r.placement == placement && r.strategy == strategy)
        .unwrap_or_else(|| panic!("no aggregate for {map} {ratio} {placement:?} {strategy}"))
        .mean_captured
}

// Criteria 1 and 2 share one corpus of traced runs.

fn corpus_maps() -> Vec<(String, GridMap)> {
    let mut maps = Vec::new();
    for (i, (rooms, door)) in [(2u32, 1u32), (3, 1), (3, 2), (4, 1)].into_iter().enumerate() {
        let params = RoomsParams {
            width: 32,
            height: 24,
            rooms_x: rooms,
            rooms_y: rooms.min(3),
            door_width: door,
            seed: i as u64 + 1,
        };
        let src = MapSource::Rooms(params);
        maps.push((format!("rooms-{i}"), src.build(Path::new(".")).unwrap()));
        let ruins = MapSource::Ruins(RuinsParams {
            rooms: params,
            damage_rate: 0.05 + 0.1 * i as f64,
            jitter: (i % 3) as u32,
        });
        maps.push((format!("ruins-{i}"), ruins.build(Path::new(".")).unwrap()));
    }
    maps
}

fn corpus_instance(map: &GridMap, rng: &mut ChaCha8Rng) -> Instance {
    let (w, h) = (map.width(), map.height());
    let attackers = rng.gen_range(4..=20);
    let defenders = rng.gen_range(1..=attackers);
    let placement = if rng.gen_bool(0.5) {
        Placement::Overlapped
    } else {
        Placement::Separated
    };
    let left = Rect::new(0, 0, w / 3, h);
    let (attacker_rect, defender_rect) = match placement {
        Placement::Overlapped => (left, left),
        Placement::Separated => (Rect::new(0, 0, w / 4, h), Rect::new(w / 4, 0, w / 4, h)),
    };
    let spec = ScenarioSpec {
        map: MapSource::Rows(Vec::new()),
        attacker_count: attackers,
        defender_count: defenders,
        placement,
        attacker_rect,
        defender_rect,
        target_rect: Rect::new(w * 2 / 3, 0, w - w * 2 / 3, h),
        time_limit: rng.gen_range(20..=60),
        seed: rng.gen(),
    };
    place_agents(map.clone(), &spec).unwrap()
}

struct Corpus {
    violations: usize,
    unsound: usize,
    runs: usize,
    transitions: usize,
}

fn defended_unsoundly(instance: &Instance, result: &SimResult) -> usize {
    result
        .captured
        .iter()
        .filter(|c| {
            let target = instance.attacker_targets[c.attacker];
            result
                .allocation
                .targets
                .iter()
                .zip(&result.defender_arrivals)
                .any(|(t, arrival)| *t == Some(target) && arrival.is_some_and(|a| a < c.step))
        })
        .count()
}

fn run_corpus() -> Corpus {
    let maps = corpus_maps();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let params = SimParams {
        keep_trace: true,
        ..SimParams::default()
    };
    let mut corpus = Corpus {
        violations: 0,
        unsound: 0,
        runs: 0,
        transitions: 0,
    };
    for i in 0..1000 {
        let map = &maps[i % maps.len()].1;
        let instance = corpus_instance(map, &mut rng);
        let strategy = Strategy::ALL[i % Strategy::ALL.len()];
        let result = run_simulation(&instance, strategy, &params, rng.gen()).unwrap();
        let trace = result.trace.as_ref().unwrap();
        let mut before = &trace.initial;
        for step in &trace.steps {
            corpus.violations += audit_transition(map, before, &step.after_attackers, Team::Attacker).len();
            corpus.violations += audit_transition(map, &step.after_attackers, &step.after_defenders, Team::Defender).len();
            corpus.transitions += 2;
            before = &step.after_defenders;
        }
        corpus.unsound += defended_unsoundly(&instance, &result);
        corpus.runs += 1;
    }
    corpus
}

// Criterion 3: brute-force strict greedy over an independently computed
// distance table.

fn oracle_distances(map: &GridMap, from: CellCoord) -> Vec<Option<u32>> {
    let (w, h) = (map.width() as i64, map.height() as i64);
    let mut dist = vec![None; (w * h) as usize];
    let mut queue = VecDeque::new();
    dist[(from.y as i64 * w + from.x as i64) as usize] = Some(0u32);
    queue.push_back((from.x as i64, from.y as i64));
    while let Some((x, y)) = queue.pop_front() {
        let d = dist[(y * w + x) as usize].unwrap();
        for (dx, dy) in [(0, -1), (0, 1), (-1, 0), (1, 0)] {
            let (nx, ny) = (x + dx, y + dy);
            if nx < 0 || ny < 0 || nx >= w || ny >= h {
                continue;
            }
            let idx = (ny * w + nx) as usize;
            if dist[idx].is_none() && map.is_passable(CellCoord::new(nx as u32, ny as u32)) {
                dist[idx] = Some(d + 1);
                queue.push_back((nx, ny));
            }
        }
    }
    dist
}

fn oracle_strict_greedy(instance: &Instance) -> Vec<(usize, usize, u32)> {
    let w = instance.board.width();
    let table: Vec<Vec<Option<u32>>> = instance
        .defender_starts
        .iter()
        .map(|&d| {
            let field = oracle_distances(&instance.board, d);
            instance
                .attacker_targets
                .iter()
                .map(|t| field[(t.y * w + t.x) as usize])
                .collect()
        })
        .collect();
    let mut free_d = vec![true; table.len()];
    let mut free_t = vec![true; instance.attacker_targets.len()];
    let mut out = Vec::new();
    loop {
        let mut best: Option<(u32, usize, usize)> = None;
        for (d, row) in table.iter().enumerate() {
            for (t, dist) in row.iter().enumerate() {
                if let (true, true, Some(dist)) = (free_d[d], free_t[t], *dist) {
                    if best.is_none_or(|b| (dist, d, t) < b) {
                        best = Some((dist, d, t));
                    }
                }
            }
        }
        let Some((dist, d, t)) = best else { break };
        free_d[d] = false;
        free_t[t] = false;
        out.push((d, t, dist));
    }
    out
}

fn random_small_instance(rng: &mut ChaCha8Rng) -> Instance {
    let (w, h) = (rng.gen_range(4..=10u32), rng.gen_range(4..=10u32));
    let mut map = GridMap::empty(w, h).unwrap();
    for y in 0..h {
        for x in 0..w {
            if rng.gen_bool(0.25) {
                map.set_blocked(CellCoord::new(x, y), true);
            }
        }
    }
    let mut cells: Vec<CellCoord> = map.passable_cells().collect();
    let targets = rng.gen_range(1..=5usize);
    let defenders = rng.gen_range(1..=5usize);
    if cells.len() < 2 * targets + defenders {
        return random_small_instance(rng);
    }
    rand::seq::SliceRandom::shuffle(cells.as_mut_slice(), rng);
    Instance {
        board: map,
        attacker_starts: cells[..targets].to_vec(),
        attacker_targets: cells[targets..2 * targets].to_vec(),
        defender_starts: cells[2 * targets..2 * targets + defenders].to_vec(),
        time_limit: 10,
    }
}

// Criterion 7: committed hand-solved fixtures.

fn micro_fixtures() -> Vec<(String, AnyInstance, Verdict)> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/micro");
    let mut entries: Vec<PathBuf> = std::fs::read_dir(&dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .collect();
    entries.sort();
    entries
        .into_iter()
        .map(|path| {
            let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
            let expected: Verdict = serde_json::from_value(doc["metadata"]["expected"].clone()).unwrap();
            let name = path.file_stem().unwrap().to_string_lossy().into_owned();
            (name, load_instance_file(&path).unwrap(), expected)
        })
        .collect()
}

fn micro_size(instance: &AnyInstance) -> (usize, usize) {
    match instance {
        AnyInstance::Grid(i) => (i.board.passable_count(), i.attacker_count() + i.defender_count()),
        AnyInstance::Graph { instance: i, .. } => (i.board.vertex_count(), i.attacker_count() + i.defender_count()),
    }
}

const SAMPLE_FORMULA: &str = "p cnf 6 4\ne 1 0\na 2 0\ne 3 0\na 4 0\ne 5 0\na 6 0\n4 6 1 0\n-2 -4 3 0\n2 -1 5 0\n-6 -3 -5 0\n";

fn main() {
    let mut report = Report { failures: Vec::new() };

    let started = Instant::now();
    let corpus = run_corpus();
    let corpus_time = started.elapsed();
    report.record(
        1,
        "movement-rule audit",
        corpus.runs == 1000 && corpus.violations == 0 && corpus_time < Duration::from_secs(120),
        format!(
            "{} runs, {} phase transitions, {} violations, {:.1?} (limit 120 s)",
            corpus.runs, corpus.transitions, corpus.violations, corpus_time
        ),
    );
    report.record(
        2,
        "defended-target soundness",
        corpus.unsound == 0,
        format!("{} captures behind an earlier defender arrival", corpus.unsound),
    );

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut mismatches = 0;
    for _ in 0..200 {
        let instance = random_small_instance(&mut rng);
        if strict_greedy_pairs(&distance_table(&instance)) != oracle_strict_greedy(&instance) {
            mismatches += 1;
        }
    }
    report.record(
        3,
        "strict-greedy oracle equivalence",
        mismatches == 0,
        format!("{mismatches} of 200 pair sequences differ"),
    );

    let two_room: BenchMatrix = serde_json::from_value(serde_json::json!({
        "maps": [{
            "name": "two-room",
            "map": {"rooms": {"width": 48, "height": 12, "rooms_x": 2, "rooms_y": 1, "door_width": 1, "seed": 1}},
            "separated": {
                "attackers": {"x0": 0.0, "y0": 0.0, "x1": 0.2, "y1": 1.0},
                "defenders": {"x0": 0.52, "y0": 0.0, "x1": 0.65, "y1": 1.0},
                "targets": {"x0": 0.75, "y0": 0.0, "x1": 1.0, "y1": 1.0}
            }
        }],
        "ratios": ["1:10"],
        "placements": ["separated"],
        "strategies": ["random", "greedy", "bottleneck"],
        "seeds_per_cell": 10,
        "attacker_count": 50,
        "time_limit": 100
    }))
    .unwrap();
    let started = Instant::now();
    let out = run_bench(&two_room, Path::new("."), BenchOptions::default()).unwrap();
    let elapsed = started.elapsed();
    let get = |s| mean_of(&out.aggregates, "two-room", "1:10", Placement::Separated, s);
    let (rnd, grd, bot) = (get(Strategy::Random), get(Strategy::Greedy), get(Strategy::Bottleneck));
    report.record(
        4,
        "bottleneck on the two-room map",
        bot == 0.0 && rnd >= 10.0 && grd >= 10.0 && elapsed < Duration::from_secs(60),
        format!("mean captured bottleneck {bot:.1}, random {rnd:.1}, greedy {grd:.1}; {elapsed:.1?} (limit 60 s)"),
    );

    let (rooms, rooms_dir) = load_matrix("rooms.json");
    let started = Instant::now();
    let rooms_out = run_bench(&rooms, &rooms_dir, BenchOptions::default()).unwrap();
    let elapsed = started.elapsed();
    let mut worse = Vec::new();
    for ratio in &rooms.ratios {
        for &placement in &rooms.placements {
            let ratio = ratio.to_string();
            let get = |s| mean_of(&rooms_out.aggregates, "rooms", &ratio, placement, s);
            let bot = get(Strategy::Bottleneck);
            if !(bot < get(Strategy::Random) && bot < get(Strategy::Greedy)) {
                worse.push(format!("{ratio}/{}", placement.name()));
            }
        }
    }
    report.record(
        5,
        "orthogonal-rooms ordering",
        worse.is_empty() && elapsed < Duration::from_secs(600),
        format!(
            "bottleneck below random and greedy in {}/6 cells{}; {elapsed:.1?} (limit 600 s)",
            6 - worse.len(),
            if worse.is_empty() { String::new() } else { format!(", not in {}", worse.join(" ")) }
        ),
    );

    let (full, full_dir) = load_matrix("full-matrix.json");
    let started = Instant::now();
    let full_out = run_bench(&full, &full_dir, BenchOptions::default()).unwrap();
    let full_time = started.elapsed();
    let mut decreasing = Vec::new();
    for map in ["rooms", "ruins"] {
        for &placement in &full.placements {
            for strategy in [Strategy::Random, Strategy::Greedy] {
                let means: Vec<f64> = full
                    .ratios
                    .iter()
                    .map(|r| mean_of(&full_out.aggregates, map, &r.to_string(), placement, strategy))
                    .collect();
                if means.windows(2).any(|w| w[1] < w[0]) {
                    decreasing.push(format!("{map}/{}/{strategy} {means:?}", placement.name()));
                }
            }
        }
    }
    report.record(
        6,
        "degradation with defender scarcity",
        decreasing.is_empty(),
        if decreasing.is_empty() {
            "random and greedy non-decreasing over 1:1, 1:2, 1:10 on rooms and ruins".to_owned()
        } else {
            format!("decreasing in {}", decreasing.join("; "))
        },
    );

    let started = Instant::now();
    let fixtures = micro_fixtures();
    let mut wrong = Vec::new();
    let mut oversized = Vec::new();
    for (name, instance, expected) in &fixtures {
        let (cells, agents) = micro_size(instance);
        if cells > 12 || agents > 3 {
            oversized.push(name.clone());
        }
        let verdict = match instance {
            AnyInstance::Grid(i) => solve_decision(i, DEFAULT_STATE_BUDGET),
            AnyInstance::Graph { instance: i, .. } => solve_decision(i, DEFAULT_STATE_BUDGET),
        };
        if verdict.as_ref() != Ok(expected) {
            wrong.push(format!("{name}: {verdict:?}"));
        }
    }
    let elapsed = started.elapsed();
    report.record(
        7,
        "exact solver against hand-solved fixtures",
        fixtures.len() >= 6 && wrong.is_empty() && oversized.is_empty() && elapsed < Duration::from_secs(10),
        format!(
            "{}/{} verdicts match, {} oversized; {elapsed:.1?} (limit 10 s){}",
            fixtures.len() - wrong.len(),
            fixtures.len(),
            oversized.len(),
            if wrong.is_empty() { String::new() } else { format!("; wrong: {}", wrong.join(", ")) }
        ),
    );

    let f = parse_qdimacs(SAMPLE_FORMULA).unwrap();
    let r = reduce_to_app(&f);
    let diamonds_ok = r
        .layout
        .variables
        .iter()
        .all(|g| g.upper.len() == 6 && g.lower.len() == 6);
    let clauses_ok = r.layout.clauses.iter().all(|c| c.path.len() == 4);
    let (ne, na, m) = (f.count(Quantifier::Exists), f.count(Quantifier::Forall), f.clauses.len());
    let roster_ok = r.instance.attacker_count() == 3 * ne + na + m
        && r.instance.defender_count() == 2 * ne + na + m
        && r.instance.attacker_count() == 16
        && r.instance.defender_count() == 13;
    let valid = validate_instance(&r.instance).is_ok();
    report.record(
        8,
        "QBF reduction structure",
        diamonds_ok && clauses_ok && roster_ok && valid,
        format!(
            "diamond paths of 6: {diamonds_ok}, clause paths of 4: {clauses_ok}, {} attackers and {} defenders, valid: {valid}",
            r.instance.attacker_count(),
            r.instance.defender_count()
        ),
    );

    let again = run_bench(&rooms, &rooms_dir, BenchOptions::default()).unwrap();
    let (a, b) = (aggregates_csv(&rooms_out.aggregates), aggregates_csv(&again.aggregates));
    report.record(
        9,
        "determinism",
        a == b,
        format!("rooms aggregate CSV rerun {} ({} bytes)", if a == b { "identical" } else { "differs" }, a.len()),
    );

    let spec = ScenarioSpec {
        map: MapSource::Rooms(RoomsParams {
            width: 64,
            height: 64,
            rooms_x: 4,
            rooms_y: 4,
            door_width: 1,
            seed: 1,
        }),
        attacker_count: 100,
        defender_count: 100,
        placement: Placement::Overlapped,
        attacker_rect: Rect::new(0, 0, 32, 64),
        defender_rect: Rect::new(0, 0, 32, 64),
        target_rect: Rect::new(48, 0, 16, 64),
        time_limit: 150,
        seed: 5,
    };
    let big = generate_instance(&spec, Path::new(".")).unwrap();
    let slowest = Strategy::ALL
        .iter()
        .map(|&s| {
            let t = Instant::now();
            run_simulation(&big, s, &SimParams::default(), 1).unwrap();
            t.elapsed()
        })
        .max()
        .unwrap();
    report.record(
        10,
        "scale and performance",
        slowest < Duration::from_secs(1) && full_out.runs.len() == 720 && full_time < Duration::from_secs(900),
        format!(
            "slowest 100v100 run {slowest:.1?} (limit 1 s); {}-run matrix {full_time:.1?} (limit 900 s)",
            full_out.runs.len()
        ),
    );

    if report.failures.is_empty() {
        println!("acceptance: all criteria passed");
    } else {
        println!("acceptance: failed criteria: {}", report.failures.join(", "));
        std::process::exit(1);
    }
}
