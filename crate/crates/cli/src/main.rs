//! `aprot`: generate, simulate, benchmark, reduce and solve area protection
//! instances.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use area_protect::allocate::Strategy;
use area_protect::bench::{aggregates_csv, run_bench, runs_csv, timeseries_csv, BenchMatrix, BenchOptions};
use area_protect::engine::{run_simulation, SimParams};
use area_protect::exactsolve::{solve, DEFAULT_STATE_BUDGET};
use area_protect::instgen::{generate_instance, ScenarioSpec};
use area_protect::model::{load_instance_file, AnyInstance, Instance, InstanceWriter};
use area_protect::qbfreduce::{parse_qdimacs, reduce_to_app};

/// Environment variable overriding seeds given in files.
const SEED_ENV: &str = "APP_SEED";

#[derive(Parser)]
#[command(name = "aprot", version, about = "Area protection: attackers versus defenders on grid maps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an instance from a scenario JSON file.
    Gen {
        scenario: PathBuf,
        /// Overrides the scenario seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(short, long)]
        out: Option<PathBuf>,
        /// Also write the generated map in movingAI format.
        #[arg(long)]
        map_out: Option<PathBuf>,
    },
    /// Simulate one instance with one allocation strategy.
    Run {
        instance: PathBuf,
        #[arg(short, long, default_value = "random")]
        strategy: Strategy,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        params: ParamArgs,
        /// Keep every intermediate configuration in the result.
        #[arg(long)]
        trace: bool,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Run a benchmark matrix and write per-run and aggregate CSVs.
    Bench {
        config: PathBuf,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
        /// Record wall-clock milliseconds per run (makes output nondeterministic).
        #[arg(long)]
        wall_time: bool,
    },
    /// Cumulative captures per step for several strategies on one instance.
    Timeseries {
        instance: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "random,greedy,bottleneck")]
        strategies: Vec<Strategy>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        params: ParamArgs,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Compile a QDIMACS formula into a graph instance.
    Qbf2app {
        formula: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Decide a micro instance exactly.
    Solve {
        instance: PathBuf,
        #[arg(long, default_value_t = DEFAULT_STATE_BUDGET)]
        budget: u64,
        /// Include a defender strategy when the defenders win.
        #[arg(long)]
        witness: bool,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct ParamArgs {
    /// Simulation parameters JSON; flags below override it.
    #[arg(long)]
    params: Option<PathBuf>,
    #[arg(long)]
    vicinity_limit: Option<u32>,
    #[arg(long)]
    max_iterations: Option<u32>,
}

impl ParamArgs {
    fn resolve(&self) -> Result<SimParams> {
        let mut params: SimParams = match &self.params {
            Some(path) => serde_json::from_str(&read(path)?).with_context(|| format!("parsing {}", path.display()))?,
            None => SimParams::default(),
        };
        if let Some(v) = self.vicinity_limit {
            params.bottleneck.vicinity_limit = v;
        }
        if let Some(v) = self.max_iterations {
            params.bottleneck.max_iterations = v;
        }
        if params.bottleneck.vicinity_limit == 0 || params.bottleneck.max_iterations == 0 {
            bail!("vicinity limit and iteration bound must be at least 1");
        }
        Ok(params)
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            if !text.ends_with('\n') {
                stdout.write_all(b"\n")?;
            }
            Ok(())
        }
    }
}

fn env_seed() -> Result<Option<u64>> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .with_context(|| format!("{SEED_ENV}={v:?} is not an unsigned integer")),
        Err(_) => Ok(None),
    }
}

fn base_dir(path: &Path) -> &Path {
    path.parent().unwrap_or(Path::new("."))
}

fn grid_instance(path: &Path) -> Result<Instance> {
    match load_instance_file(path).with_context(|| format!("loading {}", path.display()))? {
        AnyInstance::Grid(instance) => Ok(instance),
        AnyInstance::Graph { .. } => bail!(
            "{}: the simulator runs on grid maps only; use `solve` for graph instances",
            path.display()
        ),
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Gen {
            scenario,
            seed,
            out,
            map_out,
        } => {
            let mut spec: ScenarioSpec =
                serde_json::from_str(&read(&scenario)?).with_context(|| format!("parsing {}", scenario.display()))?;
            if let Some(s) = seed.or(env_seed()?) {
                spec.seed = s;
            }
            let instance = generate_instance(&spec, base_dir(&scenario))
                .with_context(|| format!("generating from {}", scenario.display()))?;
            if let Some(path) = map_out {
                fs::write(&path, instance.board.to_movingai()).with_context(|| format!("writing {}", path.display()))?;
            }
            emit(out.as_deref(), &InstanceWriter::grid(&instance))
        }
        Command::Run {
            instance,
            strategy,
            seed,
            params,
            trace,
            out,
        } => {
            let inst = grid_instance(&instance)?;
            let mut params = params.resolve()?;
            params.keep_trace |= trace;
            let seed = env_seed()?.unwrap_or(seed);
            let result = run_simulation(&inst, strategy, &params, seed).context("run")?;
            emit(out.as_deref(), &serde_json::to_string_pretty(&result)?)
        }
        Command::Bench {
            config,
            out_dir,
            wall_time,
        } => {
            let mut matrix: BenchMatrix =
                serde_json::from_str(&read(&config)?).with_context(|| format!("parsing {}", config.display()))?;
            if let Some(s) = env_seed()? {
                matrix.master_seed = s;
            }
            let output = run_bench(&matrix, base_dir(&config), BenchOptions { wall_time })
                .with_context(|| format!("bench {}", config.display()))?;
            fs::create_dir_all(&out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
            let aggregates = aggregates_csv(&output.aggregates);
            for (name, text) in [("runs.csv", runs_csv(&output.runs)), ("aggregates.csv", aggregates.clone())] {
                let path = out_dir.join(name);
                fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
            }
            emit(None, &aggregates)
        }
        Command::Timeseries {
            instance,
            strategies,
            seed,
            params,
            out,
        } => {
            if strategies.is_empty() {
                bail!("at least one strategy is required");
            }
            let inst = grid_instance(&instance)?;
            let seed = env_seed()?.unwrap_or(seed);
            let csv = timeseries_csv(&inst, &strategies, &params.resolve()?, seed).context("timeseries")?;
            emit(out.as_deref(), &csv)
        }
        Command::Qbf2app { formula, out } => {
            let f = parse_qdimacs(&read(&formula)?).with_context(|| format!("parsing {}", formula.display()))?;
            let reduction = reduce_to_app(&f);
            let metadata = json!({
                "formula": f.to_string(),
                "layout": reduction.layout,
            });
            emit(out.as_deref(), &InstanceWriter::graph(&reduction.instance, Some(metadata)))
        }
        Command::Solve {
            instance,
            budget,
            witness,
            out,
        } => {
            let loaded = load_instance_file(&instance).with_context(|| format!("loading {}", instance.display()))?;
            let text = match loaded {
                AnyInstance::Grid(inst) => serde_json::to_string_pretty(&solve(&inst, budget, witness).context("solve")?)?,
                AnyInstance::Graph { instance: inst, .. } => {
                    serde_json::to_string_pretty(&solve(&inst, budget, witness).context("solve")?)?
                }
            };
            emit(out.as_deref(), &text)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
