use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use hullgain::experiment::{self, ExperimentConfig};
use hullgain::planner::RunStatus;

const EXIT_CONFIG: u8 = 1;
const EXIT_INCOMPLETE: u8 = 2;

#[derive(Parser, Debug)]
#[command(name = "hullgain", version, about = "Hull-based volumetric gain exploration experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Explore one world and write the run artifacts.
    Run {
        #[command(flatten)]
        params: Params,
        /// Output directory for summary, log, timings, gains and frames.
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Time both gain variants on the same trajectories.
    Bench {
        #[command(flatten)]
        params: Params,
        #[arg(long, default_value_t = 10)]
        repeats: usize,
        /// Also write the table as JSON here.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Re-draw SVG frames from a saved run directory.
    Render {
        run_dir: PathBuf,
        /// Where to put the frames; defaults to `<run_dir>/frames`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a world file (or builtin name) and print its size.
    ValidateWorld { world: String },
}

/// Config file plus per-key overrides. Later sources win: defaults, then
/// the file, then `--set`, then the named flags.
#[derive(Args, Debug)]
struct Params {
    /// Flat `key = value` config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Any config key, as `key=value`; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(long)]
    world: Option<String>,
    /// `graph` or `unknown`.
    #[arg(long)]
    gain: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    step_size: Option<String>,
    #[arg(long)]
    connect_radius: Option<String>,
    #[arg(long)]
    n_sample: Option<String>,
    #[arg(long)]
    min_node_spacing: Option<String>,
    #[arg(long)]
    hull_max_edge: Option<String>,
    #[arg(long)]
    robot_size: Option<String>,
    #[arg(long)]
    downsample_res: Option<String>,
    #[arg(long)]
    gain_radius: Option<String>,
    #[arg(long)]
    lambda: Option<String>,
    #[arg(long)]
    lambda1: Option<String>,
    #[arg(long)]
    lambda2: Option<String>,
    #[arg(long)]
    threshold: Option<String>,
    /// `dsvp` or `nbvp`.
    #[arg(long)]
    model: Option<String>,
    /// `both` or `any`.
    #[arg(long)]
    edge_rule: Option<String>,
    #[arg(long)]
    n_stall: Option<String>,
    #[arg(long)]
    margin: Option<String>,
    #[arg(long)]
    window_half_extent: Option<String>,
    /// Simulation step budget.
    #[arg(long)]
    budget: Option<String>,
    #[arg(long)]
    sensor_beams: Option<String>,
    #[arg(long)]
    sensor_range: Option<String>,
    /// Write an SVG frame every this many iterations.
    #[arg(long)]
    frames: Option<String>,
    #[arg(long)]
    max_iterations: Option<String>,
    #[arg(long)]
    compute_both: Option<String>,
}

impl Params {
    fn flags(&self) -> [(&'static str, &Option<String>); 26] {
        [
            ("world", &self.world),
            ("gain", &self.gain),
            ("seed", &self.seed),
            ("step_size", &self.step_size),
            ("connect_radius", &self.connect_radius),
            ("n_sample", &self.n_sample),
            ("min_node_spacing", &self.min_node_spacing),
            ("hull_max_edge", &self.hull_max_edge),
            ("robot_size", &self.robot_size),
            ("downsample_res", &self.downsample_res),
            ("gain_radius", &self.gain_radius),
            ("lambda", &self.lambda),
            ("lambda1", &self.lambda1),
            ("lambda2", &self.lambda2),
            ("threshold", &self.threshold),
            ("model", &self.model),
            ("edge_rule", &self.edge_rule),
            ("n_stall", &self.n_stall),
            ("margin", &self.margin),
            ("window_half_extent", &self.window_half_extent),
            ("budget", &self.budget),
            ("sensor_beams", &self.sensor_beams),
            ("sensor_range", &self.sensor_range),
            ("frames", &self.frames),
            ("max_iterations", &self.max_iterations),
            ("compute_both", &self.compute_both),
        ]
    }

    fn resolve(&self) -> anyhow::Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        for pair in &self.set {
            let Some((k, v)) = pair.split_once('=') else { bail!("--set expects KEY=VALUE, got {pair:?}") };
            cfg.set(k, v)?;
        }
        for (key, value) in self.flags() {
            if let Some(v) = value {
                cfg.set(key, v)?;
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn run(params: &Params, out: &Path) -> Result<ExitCode, ExitCode> {
    let cfg = params.resolve().map_err(config_error)?;
    let log = experiment::run(&cfg, Some(out)).map_err(|e| failure(e.into()))?;
    print!("{}", experiment::summary_json(&log.summary));
    log::info!("wall time {:.2} s, artifacts in {}", log.wall_time, out.display());
    Ok(match log.summary.status {
        RunStatus::Complete => ExitCode::SUCCESS,
        RunStatus::Incomplete => {
            eprintln!("run stopped before exploration finished");
            ExitCode::from(EXIT_INCOMPLETE)
        }
    })
}

fn bench(params: &Params, repeats: usize, json: Option<&Path>) -> Result<ExitCode, ExitCode> {
    let cfg = params.resolve().map_err(config_error)?;
    if repeats == 0 {
        return Err(config_error(anyhow::anyhow!("--repeats must be at least 1")));
    }
    let table = experiment::bench(&cfg, repeats).map_err(|e| failure(e.into()))?;
    print!("{}", table.to_text());
    if let Some(path) = json {
        let text = serde_json::to_string_pretty(&table).expect("table serializes");
        std::fs::write(path, text)
            .with_context(|| format!("writing {}", path.display()))
            .map_err(failure)?;
    }
    Ok(ExitCode::SUCCESS)
}

fn render(run_dir: &Path, out: Option<&Path>) -> Result<ExitCode, ExitCode> {
    let out = out.map_or_else(|| run_dir.join(experiment::FRAMES_DIR), Path::to_path_buf);
    let frames = experiment::render_saved(run_dir, &out).map_err(|e| failure(e.into()))?;
    println!("{} frames in {}", frames.len(), out.display());
    Ok(ExitCode::SUCCESS)
}

fn validate_world(name_or_path: &str) -> Result<ExitCode, ExitCode> {
    let world = experiment::load_world(name_or_path).map_err(|e| config_error(e.into()))?;
    let g = world.geometry();
    println!(
        "{}: {} x {} cells at {} m, spawn ({:.2}, {:.2}), {} reachable free cells",
        world.name,
        g.width,
        g.height,
        g.resolution,
        world.spawn.x,
        world.spawn.y,
        world.reachable_count()
    );
    Ok(ExitCode::SUCCESS)
}

fn config_error(e: anyhow::Error) -> ExitCode {
    eprintln!("error: {e:#}");
    ExitCode::from(EXIT_CONFIG)
}

fn failure(e: anyhow::Error) -> ExitCode {
    eprintln!("error: {e:#}");
    ExitCode::FAILURE
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Run { params, out } => run(params, out),
        Command::Bench { params, repeats, json } => bench(params, *repeats, json.as_deref()),
        Command::Render { run_dir, out } => render(run_dir, out.as_deref()),
        Command::ValidateWorld { world } => validate_world(world),
    };
    result.unwrap_or_else(|code| code)
}
