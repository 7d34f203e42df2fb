//! Command line front end: single runs, batch experiments, graph dumps,
//! scene generation, and SVG rendering.
//!
//! Exit codes: 0 on success, 2 when an episode ends in failure, 3 when it
//! fails specifically by timeout, 4 on any input or usage error.

use anyhow::{anyhow, Context, Result};
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use declutter::corridor::DEFAULT_GRID_RESOLUTION;
use declutter::harness::{
    generate_instance, run_batch, run_episode, BatchConfig, Case, InstanceConfig, Method,
    RunMetrics, METRICS_HEADER,
};
use declutter::motion::OracleKind;
use declutter::planner::{PlannerConfig, TIMEOUT_REASON};
use declutter::render::{episode_frames, scene_svg, RenderOptions};
use declutter::scenario::Scenario;
use declutter::tgraph::gen_graph;
use declutter::world::WorldState;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

const EXIT_FAIL: u8 = 2;
const EXIT_TIMEOUT: u8 = 3;
const EXIT_INPUT: u8 = 4;

#[derive(Parser)]
#[command(
    name = "declutter",
    about = "Plan target retrieval from shelf clutter by relocating obstructions",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one episode and write its event log.
    Plan(PlanArgs),
    /// Run a seeded batch of instances across methods and write CSV tables.
    Batch(BatchArgs),
    /// Print the traversability graph of a scene's initial belief.
    Graph(GraphArgs),
    /// Draw a scene, or an episode's frames, as SVG.
    Render(RenderArgs),
    /// Generate a random scene and write it as a scenario file.
    Gen(GenArgs),
}

/// Where a scene comes from: a file, or the seeded generator.
#[derive(Args)]
struct SceneSource {
    /// Scenario file to load (centimeter units).
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Initial-knowledge case for generated scenes: I, II, or III.
    #[arg(long, default_value = "I")]
    case: Case,
    /// Number of objects for generated scenes.
    #[arg(long, default_value_t = 12)]
    n: usize,
    /// Seed for generated scenes and seeded oracles.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl SceneSource {
    fn load(&self) -> Result<Scenario> {
        match &self.scenario {
            Some(path) => {
                Scenario::load(path).with_context(|| format!("loading {}", path.display()))
            }
            None => {
                let cfg = InstanceConfig {
                    n_objects: self.n,
                    case: self.case,
                    seed: self.seed,
                    ..InstanceConfig::default()
                };
                generate_instance(&cfg).context("generating an instance")
            }
        }
    }

    /// The `# key value` header lines recording the resolved run inputs.
    fn config_header(&self) -> String {
        let mut out = String::new();
        match &self.scenario {
            Some(path) => {
                let _ = writeln!(out, "# scenario {}", path.display());
            }
            None => {
                let _ = writeln!(out, "# generated case={} n={}", self.case, self.n);
            }
        }
        let _ = writeln!(out, "# seed {}", self.seed);
        out
    }
}

#[derive(Args)]
struct PlanArgs {
    #[command(flatten)]
    scene: SceneSource,
    /// Planner: proposed, distance, or vfh.
    #[arg(long, default_value = "proposed")]
    method: Method,
    /// Motion oracle: always, disc2d, fault:<file>, or flaky:<p>.
    #[arg(long, default_value = "disc2d")]
    oracle: String,
    /// Wall-clock budget in seconds; 0 disables the limit.
    #[arg(long, default_value_t = 60.0)]
    timeout_s: f64,
    /// Occupancy grid cell size in meters.
    #[arg(long, default_value_t = DEFAULT_GRID_RESOLUTION)]
    grid_res: f64,
    /// Write the event log here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BatchArgs {
    /// Initial-knowledge case: I, II, or III.
    #[arg(long, default_value = "I")]
    case: Case,
    /// Number of objects per instance.
    #[arg(long, default_value_t = 12)]
    n: usize,
    /// Base seed; instances use seed, seed+1, ...
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Instances to draw.
    #[arg(long, default_value_t = 20)]
    reps: u32,
    /// Planner to run; repeat for several. Default: all three.
    #[arg(long)]
    method: Vec<Method>,
    /// Motion oracle: always, disc2d, fault:<file>, or flaky:<p>.
    #[arg(long, default_value = "disc2d")]
    oracle: String,
    /// Wall-clock budget per episode in seconds; 0 disables the limit.
    #[arg(long, default_value_t = 60.0)]
    timeout_s: f64,
    /// Occupancy grid cell size in meters.
    #[arg(long, default_value_t = DEFAULT_GRID_RESOLUTION)]
    grid_res: f64,
    /// Output directory for metrics.csv, aggregate.csv, and logs/.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct GraphArgs {
    #[command(flatten)]
    scene: SceneSource,
    /// Occupancy grid cell size in meters.
    #[arg(long, default_value_t = DEFAULT_GRID_RESOLUTION)]
    grid_res: f64,
    /// Write the dump here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RenderArgs {
    #[command(flatten)]
    scene: SceneSource,
    /// Event log to replay; produces numbered frames instead of one view.
    #[arg(long)]
    log: Option<PathBuf>,
    /// Output SVG file (scene view) or directory (frames).
    #[arg(long)]
    out: PathBuf,
    /// Skip the traversability edges.
    #[arg(long)]
    no_graph: bool,
    /// Skip the occlusion shadows.
    #[arg(long)]
    no_shadows: bool,
    /// Skip the relocation path highlight.
    #[arg(long)]
    no_plan: bool,
    /// Occupancy grid cell size in meters.
    #[arg(long, default_value_t = DEFAULT_GRID_RESOLUTION)]
    grid_res: f64,
}

#[derive(Args)]
struct GenArgs {
    /// Initial-knowledge case: I, II, or III.
    #[arg(long, default_value = "I")]
    case: Case,
    /// Number of objects.
    #[arg(long, default_value_t = 12)]
    n: usize,
    /// Generator seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the scenario here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version are successful outputs, not usage errors.
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_INPUT,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Plan(args) => plan(args),
        Command::Batch(args) => batch(args),
        Command::Graph(args) => graph(args),
        Command::Render(args) => render(args),
        Command::Gen(args) => gen(args),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}

fn budget(timeout_s: f64) -> Option<Duration> {
    (timeout_s > 0.0).then(|| Duration::from_secs_f64(timeout_s))
}

fn write_out(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)
            .with_context(|| format!("creating {}", dir.display()))?;
    }
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn exit_for(m: &RunMetrics) -> ExitCode {
    if m.success {
        ExitCode::SUCCESS
    } else if m.reason.as_deref() == Some(TIMEOUT_REASON) {
        ExitCode::from(EXIT_TIMEOUT)
    } else {
        ExitCode::from(EXIT_FAIL)
    }
}

fn plan(args: PlanArgs) -> Result<ExitCode> {
    let oracle_kind = OracleKind::parse(&args.oracle)?;
    let scenario = args.scene.load()?;
    let mut oracle = oracle_kind.build(args.scene.seed);
    let metrics = run_episode(
        &scenario,
        args.scene.case,
        args.method,
        oracle.as_mut(),
        budget(args.timeout_s),
        PlannerConfig {
            grid_resolution: args.grid_res,
        },
        args.scene.seed,
    )?;

    let mut text = args.scene.config_header();
    let _ = writeln!(text, "# method {}", metrics.method);
    let _ = writeln!(text, "# oracle {}", args.oracle);
    let _ = writeln!(text, "# timeout_s {}", args.timeout_s);
    let _ = writeln!(text, "# grid_res {}", args.grid_res);
    text.push_str(&metrics.log.to_text());

    match &args.out {
        Some(path) => {
            write_out(path, &text)?;
            println!("{METRICS_HEADER}");
            println!("{}", metrics.csv_row());
        }
        None => {
            print!("{text}");
            eprintln!("{METRICS_HEADER}");
            eprintln!("{}", metrics.csv_row());
        }
    }
    Ok(exit_for(&metrics))
}

fn batch(args: BatchArgs) -> Result<ExitCode> {
    let methods = if args.method.is_empty() {
        vec![Method::Proposed, Method::Distance, Method::Vfh]
    } else {
        args.method.clone()
    };
    let cfg = BatchConfig {
        instance: InstanceConfig {
            n_objects: args.n,
            case: args.case,
            seed: args.seed,
            ..InstanceConfig::default()
        },
        repetitions: args.reps,
        methods,
        oracle: OracleKind::parse(&args.oracle)?,
        budget: budget(args.timeout_s),
        planner: PlannerConfig {
            grid_resolution: args.grid_res,
        },
    };
    let result = run_batch(&cfg)?;

    std::fs::create_dir_all(&args.out)
        .with_context(|| format!("creating {}", args.out.display()))?;
    write_out(&args.out.join("metrics.csv"), &result.metrics_csv())?;
    let aggregate = result.aggregate_csv();
    write_out(&args.out.join("aggregate.csv"), &aggregate)?;
    let logs = args.out.join("logs");
    std::fs::create_dir_all(&logs).with_context(|| format!("creating {}", logs.display()))?;
    for e in &result.episodes {
        let mut text = String::new();
        let _ = writeln!(
            text,
            "# generated case={} n={}\n# seed {}\n# method {}\n# oracle {}\n# timeout_s {}\n# grid_res {}",
            e.case, e.n_objects, e.seed, e.method, args.oracle, args.timeout_s, args.grid_res
        );
        text.push_str(&e.log.to_text());
        write_out(&logs.join(format!("{}_{}.log", e.method, e.seed)), &text)?;
    }
    print!("{aggregate}");
    Ok(ExitCode::SUCCESS)
}

fn graph(args: GraphArgs) -> Result<ExitCode> {
    let scenario = args.scene.load()?;
    let workspace = scenario.workspace.clone();
    let world: WorldState = scenario.into_world()?;
    let believed = world.detected_specs();
    let g = gen_graph(&believed, &[], &workspace, args.grid_res)?;
    let text = format!(
        "# nodes {} edges {} grasp_radius {:.6}\n{}",
        g.node_count(),
        g.edge_count(),
        g.grasp_radius,
        g.dump()
    );
    match &args.out {
        Some(path) => write_out(path, &text)?,
        None => print!("{text}"),
    }
    Ok(ExitCode::SUCCESS)
}

fn render(args: RenderArgs) -> Result<ExitCode> {
    let scenario = args.scene.load()?;
    let opts = RenderOptions {
        graph: !args.no_graph,
        shadows: !args.no_shadows,
        plan: !args.no_plan,
        grid_resolution: args.grid_res,
    };
    match &args.log {
        None => {
            let svg = scene_svg(&scenario, &opts)?;
            write_out(&args.out, &svg)?;
        }
        Some(log_path) => {
            let text = std::fs::read_to_string(log_path)
                .with_context(|| format!("reading {}", log_path.display()))?;
            let log = declutter::eventlog::EventLog::parse(&text)
                .map_err(|e| anyhow!("parsing {}: {e}", log_path.display()))?;
            let frames = episode_frames(&scenario, &log, &opts)?;
            std::fs::create_dir_all(&args.out)
                .with_context(|| format!("creating {}", args.out.display()))?;
            for (k, frame) in frames.iter().enumerate() {
                write_out(&args.out.join(format!("frame_{k:03}.svg")), &frame.svg)?;
            }
            eprintln!("wrote {} frames to {}", frames.len(), args.out.display());
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn gen(args: GenArgs) -> Result<ExitCode> {
    let cfg = InstanceConfig {
        n_objects: args.n,
        case: args.case,
        seed: args.seed,
        ..InstanceConfig::default()
    };
    let scenario = generate_instance(&cfg)?;
    let text = scenario.to_text();
    match &args.out {
        Some(path) => write_out(path, &text)?,
        None => print!("{text}"),
    }
    Ok(ExitCode::SUCCESS)
}
