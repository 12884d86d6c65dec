use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn aprot(args: &[&str], env_seed: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_aprot"));
    cmd.args(args).env_remove("APP_SEED");
    if let Some(s) = env_seed {
        cmd.env("APP_SEED", s);
    }
    cmd.output().expect("binary runs")
}

fn ok(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

const CORRIDOR: &str = r#"{"map": ["..."], "time_limit": 5,
    "attackers": [{"start": [0, 0], "target": [2, 0]}], "defenders": []}"#;

const SCENARIO: &str = r#"{
    "map": {"rooms": {"width": 24, "height": 16, "rooms_x": 2, "rooms_y": 2, "door_width": 1, "seed": 3}},
    "attacker_count": 8, "defender_count": 4, "placement": "separated",
    "attacker_rect": {"x": 0, "y": 0, "w": 6, "h": 16},
    "defender_rect": {"x": 6, "y": 0, "w": 6, "h": 16},
    "target_rect": {"x": 16, "y": 0, "w": 8, "h": 16},
    "time_limit": 40, "seed": 1
}"#;

#[test]
fn solve_corridor_is_attackers_win() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write(dir.path(), "c.json", CORRIDOR);
    let v: serde_json::Value = serde_json::from_str(&ok(&aprot(&["solve", &inst], None))).unwrap();
    assert_eq!(v["verdict"], "AttackersWin");
    assert!(v["states"].as_u64().unwrap() > 0);
}

#[test]
fn gen_then_run_and_timeseries() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write(dir.path(), "s.json", SCENARIO);
    let inst = dir.path().join("i.json");
    let map = dir.path().join("m.map");
    ok(&aprot(
        &["gen", &scenario, "-o", inst.to_str().unwrap(), "--map-out", map.to_str().unwrap()],
        None,
    ));
    assert!(fs::read_to_string(&map).unwrap().starts_with("type octile"));
    let inst = inst.to_str().unwrap();

    let run: serde_json::Value =
        serde_json::from_str(&ok(&aprot(&["run", inst, "-s", "greedy", "--trace"], None))).unwrap();
    assert_eq!(run["captures_by_step"].as_array().unwrap().len(), 41);
    assert_eq!(run["trace"]["steps"].as_array().unwrap().len(), 40);

    let csv = ok(&aprot(&["timeseries", inst, "--strategies", "random,bottleneck"], None));
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "step,random,bottleneck");
    assert_eq!(lines.len(), 42);
}

#[test]
fn app_seed_overrides_scenario_seed() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write(dir.path(), "s.json", SCENARIO);
    let a = ok(&aprot(&["gen", &scenario], Some("99")));
    let b = ok(&aprot(&["gen", &scenario, "--seed", "99"], None));
    let c = ok(&aprot(&["gen", &scenario], None));
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn bench_writes_both_csvs_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(
        dir.path(),
        "b.json",
        r#"{"maps": [{"name": "open", "map": {"empty": {"width": 20, "height": 10}}}],
            "ratios": ["1:2"], "placements": ["overlapped"], "strategies": ["random", "greedy"],
            "seeds_per_cell": 2, "attacker_count": 6, "time_limit": 30}"#,
    );
    let out = dir.path().join("out");
    let stdout = ok(&aprot(&["bench", &config, "--out-dir", out.to_str().unwrap()], None));
    let runs = fs::read_to_string(out.join("runs.csv")).unwrap();
    let aggregates = fs::read_to_string(out.join("aggregates.csv")).unwrap();
    assert!(runs.starts_with("map,ratio,placement,strategy,seed,captured,obj2_uncaptured,obj3_sum_dist,obj4_time_at_targets,wall_ms\n"));
    assert_eq!(runs.lines().count(), 5);
    assert!(aggregates.starts_with("map,ratio,placement,strategy,runs,mean_captured,min,max,stddev\n"));
    assert_eq!(stdout, aggregates);
    ok(&aprot(&["bench", &config, "--out-dir", out.to_str().unwrap()], None));
    assert_eq!(fs::read_to_string(out.join("runs.csv")).unwrap(), runs);
}

#[test]
fn qbf2app_emits_graph_the_simulator_refuses() {
    let dir = tempfile::tempdir().unwrap();
    let formula = write(dir.path(), "f.qdimacs", "p cnf 2 1\ne 1 0\na 2 0\n1 -2 0\n");
    let inst = dir.path().join("g.json");
    ok(&aprot(&["qbf2app", &formula, "-o", inst.to_str().unwrap()], None));
    let doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(&inst).unwrap()).unwrap();
    assert!(doc["graph"]["vertex_count"].as_u64().unwrap() > 0);
    assert_eq!(doc["metadata"]["layout"]["figure_derived"], true);

    let refused = aprot(&["run", inst.to_str().unwrap()], None);
    assert!(!refused.status.success());
    assert!(String::from_utf8_lossy(&refused.stderr).contains("grid maps only"));
}

#[test]
fn errors_exit_nonzero_with_context() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.qdimacs", "p cnf 1 1\ne 1 0\n2 0\n");
    let out = aprot(&["qbf2app", &bad], None);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("bad.qdimacs") && err.contains("line 3"), "{err}");

    let missing = aprot(&["run", "/nonexistent/instance.json"], None);
    assert!(!missing.status.success());

    let inst = write(dir.path(), "c.json", CORRIDOR);
    let tight = aprot(&["solve", &inst, "--budget", "1"], None);
    assert!(String::from_utf8_lossy(&tight.stderr).contains("exceed the budget"));
}
