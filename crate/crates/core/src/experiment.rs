//! Experiment plumbing shared by the command line and the acceptance suite:
//! flat key-value configuration, run artifacts, timing benches and SVG
//! frames.

use std::fmt::Write as _;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gain::{EdgeRule, ExplorationModel, GainReport, GainRow, GainTimings, GainVariant};
use crate::geom::{NodeLabel, Point2};
use crate::grid::{CellState, OccupancyGrid};
use crate::planner::{run_to_completion, ExplorationLog, PlannerConfig, PlannerError, Snapshot, StepRecord, Summary};
use crate::sim::{builtin_world, World, WorldError, BUILTIN_NAMES};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("unknown configuration key {0:?}")]
    UnknownKey(String),
    #[error("bad value {value:?} for {key}: {reason}")]
    BadValue { key: String, value: String, reason: String },
    #[error("sections are not supported, found [{0}]")]
    Section(String),
    #[error("config syntax: {0}")]
    Syntax(#[from] ini::ParseError),
    #[error(transparent)]
    Planner(#[from] PlannerError),
    #[error("world {name:?}: {source}")]
    World { name: String, source: WorldError },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error("repeats must be at least 1")]
    NoRepeats,
}

pub type Result<T, E = ExperimentError> = std::result::Result<T, E>;

/// Keys accepted in config files and as overrides.
pub const CONFIG_KEYS: [&str; 26] = [
    "world",
    "gain",
    "seed",
    "step_size",
    "connect_radius",
    "n_sample",
    "min_node_spacing",
    "hull_max_edge",
    "robot_size",
    "downsample_res",
    "gain_radius",
    "lambda",
    "lambda1",
    "lambda2",
    "threshold",
    "model",
    "edge_rule",
    "n_stall",
    "margin",
    "window_half_extent",
    "budget",
    "sensor_beams",
    "sensor_range",
    "frames",
    "max_iterations",
    "compute_both",
];

/// A world name or world file plus every planner parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// Builtin world name, or a path to a world file.
    pub world: String,
    pub planner: PlannerConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self { world: "empty_room".into(), planner: PlannerConfig::default() }
    }
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value.trim().parse().map_err(|e: T::Err| ExperimentError::BadValue {
        key: key.into(),
        value: value.into(),
        reason: e.to_string(),
    })
}

fn choice<T: Copy>(key: &str, value: &str, options: &[(&str, T)]) -> Result<T> {
    let v = value.trim().to_ascii_lowercase();
    options.iter().find(|(name, _)| *name == v).map(|&(_, t)| t).ok_or_else(|| {
        let names: Vec<&str> = options.iter().map(|(n, _)| *n).collect();
        ExperimentError::BadValue { key: key.into(), value: value.into(), reason: format!("expected one of {names:?}") }
    })
}

fn optional_count(key: &str, value: &str) -> Result<Option<u64>> {
    match value.trim() {
        "" | "none" | "off" => Ok(None),
        v => parse(key, v).map(Some),
    }
}

impl ExperimentConfig {
    /// Set one parameter from its text form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let p = &mut self.planner;
        match key.trim() {
            "world" => self.world = value.trim().to_string(),
            "gain" => p.variant = choice(key, value, &[("graph", GainVariant::Graph), ("unknown", GainVariant::Unknown)])?,
            "seed" => p.seed = parse(key, value)?,
            "step_size" => p.expand.step_size = parse(key, value)?,
            "connect_radius" => p.expand.connect_radius = parse(key, value)?,
            "n_sample" => p.expand.n_sample = parse(key, value)?,
            "min_node_spacing" => p.expand.min_node_spacing = parse(key, value)?,
            "hull_max_edge" => p.hull_max_edge = parse(key, value)?,
            "robot_size" => p.robot_size = parse(key, value)?,
            "downsample_res" => p.downsample_res = parse(key, value)?,
            "gain_radius" => p.gain.gain_radius = parse(key, value)?,
            "lambda" => p.gain.lambda = parse(key, value)?,
            "lambda1" => p.gain.lambda1 = parse(key, value)?,
            "lambda2" => p.gain.lambda2 = parse(key, value)?,
            "threshold" => p.gain.threshold = parse(key, value)?,
            "model" => {
                p.gain.model = choice(key, value, &[("dsvp", ExplorationModel::Dsvp), ("nbvp", ExplorationModel::Nbvp)])?
            }
            "edge_rule" => p.gain.edge_rule = choice(key, value, &[("both", EdgeRule::Both), ("any", EdgeRule::Any)])?,
            "n_stall" => p.n_stall = parse(key, value)?,
            "margin" => p.prune_margin = parse(key, value)?,
            "window_half_extent" => p.window_half_extent = parse(key, value)?,
            "budget" => p.step_budget = parse(key, value)?,
            "sensor_beams" => p.sensor_beams = parse(key, value)?,
            "sensor_range" => p.sensor_range = parse(key, value)?,
            "frames" => p.snapshot_every = optional_count(key, value)?,
            "max_iterations" => p.max_iterations = optional_count(key, value)?,
            "compute_both" => p.compute_both = parse(key, value)?,
            other => return Err(ExperimentError::UnknownKey(other.to_string())),
        }
        Ok(())
    }

    /// Apply `key=value` pairs from a flat INI text on top of `self`.
    pub fn merge_ini(&mut self, text: &str) -> Result<()> {
        let doc = ini::Ini::load_from_str(text)?;
        for (section, props) in doc.iter() {
            if let Some(name) = section {
                return Err(ExperimentError::Section(name.to_string()));
            }
            for (k, v) in props.iter() {
                self.set(k, v)?;
            }
        }
        Ok(())
    }

    pub fn from_ini(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        cfg.merge_ini(text)?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|source| ExperimentError::Io { path: path.into(), source })?;
        Self::from_ini(&text)
    }

    /// Render as a config file that `from_ini` reads back unchanged.
    pub fn to_ini(&self) -> String {
        let p = &self.planner;
        let opt = |v: Option<u64>| v.map_or("none".to_string(), |v| v.to_string());
        let model = match p.gain.model {
            ExplorationModel::Dsvp => "dsvp",
            ExplorationModel::Nbvp => "nbvp",
        };
        let rule = match p.gain.edge_rule {
            EdgeRule::Both => "both",
            EdgeRule::Any => "any",
        };
        let pairs: Vec<(&str, String)> = vec![
            ("world", self.world.clone()),
            ("gain", p.variant.as_str().into()),
            ("seed", p.seed.to_string()),
            ("step_size", p.expand.step_size.to_string()),
            ("connect_radius", p.expand.connect_radius.to_string()),
            ("n_sample", p.expand.n_sample.to_string()),
            ("min_node_spacing", p.expand.min_node_spacing.to_string()),
            ("hull_max_edge", p.hull_max_edge.to_string()),
            ("robot_size", p.robot_size.to_string()),
            ("downsample_res", p.downsample_res.to_string()),
            ("gain_radius", p.gain.gain_radius.to_string()),
            ("lambda", p.gain.lambda.to_string()),
            ("lambda1", p.gain.lambda1.to_string()),
            ("lambda2", p.gain.lambda2.to_string()),
            ("threshold", p.gain.threshold.to_string()),
            ("model", model.into()),
            ("edge_rule", rule.into()),
            ("n_stall", p.n_stall.to_string()),
            ("margin", p.prune_margin.to_string()),
            ("window_half_extent", p.window_half_extent.to_string()),
            ("budget", p.step_budget.to_string()),
            ("sensor_beams", p.sensor_beams.to_string()),
            ("sensor_range", p.sensor_range.to_string()),
            ("frames", opt(p.snapshot_every)),
            ("max_iterations", opt(p.max_iterations)),
            ("compute_both", p.compute_both.to_string()),
        ];
        pairs.into_iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    /// Check every parameter and that the world loads.
    pub fn validate(&self) -> Result<World> {
        self.planner.validate()?;
        load_world(&self.world)
    }
}

/// A builtin world by name, otherwise a world file.
pub fn load_world(name_or_path: &str) -> Result<World> {
    let err = |source| ExperimentError::World { name: name_or_path.to_string(), source };
    if BUILTIN_NAMES.contains(&name_or_path) {
        return builtin_world(name_or_path).map_err(err);
    }
    World::load(Path::new(name_or_path)).map_err(err)
}

pub const CONFIG_FILE: &str = "config.ini";
pub const SUMMARY_FILE: &str = "summary.json";
pub const LOG_FILE: &str = "log.jsonl";
pub const TIMINGS_FILE: &str = "timings.json";
pub const GAINS_FILE: &str = "gains.csv";
pub const SNAPSHOTS_FILE: &str = "snapshots.jsonl";
pub const FRAMES_DIR: &str = "frames";

/// Gain timings of a run together with its wall-clock time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingReport {
    pub wall_time: f64,
    pub mean: GainTimings,
    pub per_iteration: Vec<GainTimings>,
}

impl TimingReport {
    pub fn from_log(log: &ExplorationLog) -> Self {
        Self { wall_time: log.wall_time, mean: mean_timings(&log.timings), per_iteration: log.timings.clone() }
    }
}

pub fn mean_timings(t: &[GainTimings]) -> GainTimings {
    if t.is_empty() {
        return GainTimings::default();
    }
    let n = t.len() as f64;
    GainTimings {
        hull_build: t.iter().map(|x| x.hull_build).sum::<f64>() / n,
        gain_update: t.iter().map(|x| x.gain_update).sum::<f64>() / n,
        baseline: t.iter().map(|x| x.baseline).sum::<f64>() / n,
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ExperimentError + '_ {
    move |source| ExperimentError::Io { path: path.into(), source }
}

fn create(path: &Path) -> Result<BufWriter<fs::File>> {
    fs::File::create(path).map(BufWriter::new).map_err(io_err(path))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|source| ExperimentError::Json { path: path.into(), source })?;
    text.push('\n');
    fs::write(path, text).map_err(io_err(path))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|source| ExperimentError::Json { path: path.into(), source })
}

fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> Result<()> {
    let mut out = create(path)?;
    for item in items {
        serde_json::to_writer(&mut out, item).map_err(|source| ExperimentError::Json { path: path.into(), source })?;
        out.write_all(b"\n").map_err(io_err(path))?;
    }
    out.flush().map_err(io_err(path))
}

fn read_jsonl<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let file = fs::File::open(path).map_err(io_err(path))?;
    let mut items = Vec::new();
    for line in BufReader::new(file).lines() {
        let line = line.map_err(io_err(path))?;
        if line.trim().is_empty() {
            continue;
        }
        items.push(serde_json::from_str(&line).map_err(|source| ExperimentError::Json { path: path.into(), source })?);
    }
    Ok(items)
}

pub fn summary_json(summary: &Summary) -> String {
    let mut s = serde_json::to_string_pretty(summary).expect("summary serializes");
    s.push('\n');
    s
}

/// Write every artifact of a finished run into `dir`. Returns the frame
/// files written, if any.
pub fn write_artifacts(dir: &Path, world: &World, log: &ExplorationLog) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let summary_path = dir.join(SUMMARY_FILE);
    fs::write(&summary_path, summary_json(&log.summary)).map_err(io_err(&summary_path))?;
    write_jsonl(&dir.join(LOG_FILE), &log.records)?;
    write_json(&dir.join(TIMINGS_FILE), &TimingReport::from_log(log))?;
    let gains = dir.join(GAINS_FILE);
    let report = log.last_report.clone().unwrap_or_default();
    report.write_csv(create(&gains)?).map_err(|e| match e {
        crate::gain::GainError::Csv(source) => ExperimentError::Csv { path: gains.clone(), source },
        other => ExperimentError::Io { path: gains.clone(), source: std::io::Error::other(other.to_string()) },
    })?;
    if log.snapshots.is_empty() {
        return Ok(Vec::new());
    }
    write_jsonl(&dir.join(SNAPSHOTS_FILE), &log.snapshots)?;
    render_frames(world, &log.snapshots, &dir.join(FRAMES_DIR))
}

pub fn load_summary(dir: &Path) -> Result<Summary> {
    read_json(&dir.join(SUMMARY_FILE))
}

pub fn load_records(dir: &Path) -> Result<Vec<StepRecord>> {
    read_jsonl(&dir.join(LOG_FILE))
}

pub fn load_timings(dir: &Path) -> Result<TimingReport> {
    read_json(&dir.join(TIMINGS_FILE))
}

pub fn load_gains(dir: &Path) -> Result<Vec<GainRow>> {
    let path = dir.join(GAINS_FILE);
    let file = fs::File::open(&path).map_err(io_err(&path))?;
    GainReport::read_csv(file).map_err(|e| ExperimentError::Io { path, source: std::io::Error::other(e.to_string()) })
}

/// Re-draw the frames of a saved run into `out`, using the run's own
/// config to find its world.
pub fn render_saved(dir: &Path, out: &Path) -> Result<Vec<PathBuf>> {
    let cfg = ExperimentConfig::load(&dir.join(CONFIG_FILE))?;
    let world = load_world(&cfg.world)?;
    render_frames(&world, &load_snapshots(dir)?, out)
}

pub fn load_snapshots(dir: &Path) -> Result<Vec<Snapshot>> {
    read_jsonl(&dir.join(SNAPSHOTS_FILE))
}

/// Run one experiment, optionally writing its artifacts and the config
/// that produced them.
pub fn run(cfg: &ExperimentConfig, out: Option<&Path>) -> Result<ExplorationLog> {
    let world = cfg.validate()?;
    let log = run_to_completion(&world, cfg.planner)?;
    if let Some(dir) = out {
        write_artifacts(dir, &world, &log)?;
        let path = dir.join(CONFIG_FILE);
        fs::write(&path, cfg.to_ini()).map_err(io_err(&path))?;
    }
    Ok(log)
}

/// Write one SVG per snapshot into `dir`; returns the paths in order.
pub fn render_frames(world: &World, snapshots: &[Snapshot], dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut paths = Vec::with_capacity(snapshots.len());
    for (k, snap) in snapshots.iter().enumerate() {
        let path = dir.join(format!("frame_{k:05}.svg"));
        fs::write(&path, render_svg(world, snap)).map_err(io_err(&path))?;
        paths.push(path);
    }
    Ok(paths)
}

fn label_color(label: NodeLabel) -> &'static str {
    match label {
        NodeLabel::Occupied => "#d62728",
        NodeLabel::Successful => "#2ca02c",
        NodeLabel::Unknown => "#ff7f0e",
        NodeLabel::BeyondWindow => "#9467bd",
    }
}

/// One frame: the map, the sliding window, the local graph with gain discs,
/// the labeled hull, failure nodes and the path so far.
pub fn render_svg(world: &World, snap: &Snapshot) -> String {
    let g = world.geometry();
    let (w, h) = (g.width as f64 * g.resolution, g.height as f64 * g.resolution);
    // pixels per meter, about 900 px on the long side
    let px = (900.0 / w.max(h)).clamp(8.0, 80.0);
    let tx = |p: Point2| ((p.x - g.origin.x) * px, (h - (p.y - g.origin.y)) * px);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{:.0}" height="{:.0}" viewBox="0 0 {:.0} {:.0}">"#,
        w * px,
        h * px,
        w * px,
        h * px
    );
    let _ = writeln!(s, r##"<rect width="100%" height="100%" fill="#7f7f7f"/>"##);

    if let Ok(map) = OccupancyGrid::from_ascii(&snap.map) {
        let cell = g.resolution * px;
        let mg = *map.geometry();
        s.push_str("<g shape-rendering=\"crispEdges\">\n");
        for y in 0..mg.height {
            let mut x = 0;
            while x < mg.width {
                let state = map.state((x, y));
                let start = x;
                while x < mg.width && map.state((x, y)) == state {
                    x += 1;
                }
                let fill = match state {
                    CellState::Free => "#ffffff",
                    CellState::Occupied => "#202020",
                    CellState::Unknown => continue,
                };
                let _ = writeln!(
                    s,
                    r#"<rect x="{:.1}" y="{:.1}" width="{:.1}" height="{:.1}" fill="{fill}"/>"#,
                    start as f64 * cell,
                    (mg.height - 1 - y) as f64 * cell,
                    (x - start) as f64 * cell,
                    cell
                );
            }
        }
        s.push_str("</g>\n");
    }

    let (wx, wy) = tx(Point2::new(snap.window.lo().x, snap.window.hi().y));
    let side = 2.0 * snap.window.half_extent * px;
    let _ = writeln!(
        s,
        r##"<rect x="{wx:.1}" y="{wy:.1}" width="{side:.1}" height="{side:.1}" fill="none" stroke="#1f77b4" stroke-dasharray="6 4"/>"##
    );

    let rrg = &snap.rrg;
    for e in rrg.edges() {
        let (a, b) = (tx(rrg.node(e.a).position), tx(rrg.node(e.b).position));
        let _ = writeln!(
            s,
            r##"<line x1="{:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="#8c564b" stroke-width="{:.2}"/>"##,
            a.0,
            a.1,
            b.0,
            b.1,
            0.04 * px
        );
    }
    let max_gain = rrg.nodes().iter().map(|n| n.volumetric_gain).max().unwrap_or(0).max(1) as f64;
    for n in rrg.nodes() {
        let (x, y) = tx(n.position);
        if n.volumetric_gain > 0 {
            let r = px * (0.1 + 0.6 * (n.volumetric_gain as f64 / max_gain).sqrt());
            let _ = writeln!(s, r##"<circle cx="{x:.1}" cy="{y:.1}" r="{r:.1}" fill="#17becf" fill-opacity="0.25"/>"##);
        }
        let _ = writeln!(s, r##"<circle cx="{x:.1}" cy="{y:.1}" r="{:.2}" fill="#8c564b"/>"##, 0.06 * px);
    }

    if snap.hull.len() >= 3 {
        let pts: Vec<String> = snap.hull.iter().map(|n| tx(n.position)).map(|(x, y)| format!("{x:.1},{y:.1}")).collect();
        let _ = writeln!(
            s,
            r##"<polygon points="{}" fill="none" stroke="#bcbd22" stroke-width="{:.2}"/>"##,
            pts.join(" "),
            0.06 * px
        );
        for n in &snap.hull {
            let (x, y) = tx(n.position);
            let _ = writeln!(s, r#"<circle cx="{x:.1}" cy="{y:.1}" r="{:.2}" fill="{}"/>"#, 0.1 * px, label_color(n.label));
        }
    }
    let m = 0.12 * px;
    for n in &snap.failures {
        let (x, y) = tx(n.position);
        let _ = writeln!(
            s,
            r#"<rect x="{:.1}" y="{:.1}" width="{m:.2}" height="{m:.2}" fill="{}"/>"#,
            x - m / 2.0,
            y - m / 2.0,
            label_color(n.label)
        );
    }

    if snap.trace.len() >= 2 {
        let pts: Vec<String> = snap.trace.iter().map(|&p| tx(p)).map(|(x, y)| format!("{x:.1},{y:.1}")).collect();
        let _ = writeln!(
            s,
            r##"<polyline points="{}" fill="none" stroke="#e377c2" stroke-width="{:.2}"/>"##,
            pts.join(" "),
            0.05 * px
        );
    }
    let (rx, ry) = tx(snap.pose);
    let _ = writeln!(s, r##"<circle cx="{rx:.1}" cy="{ry:.1}" r="{:.2}" fill="#1f77b4" stroke="#ffffff"/>"##, 0.25 * px);
    let _ = writeln!(s, "<!-- iteration {} -->", snap.iteration);
    s.push_str("</svg>\n");
    s
}

/// Per-variant row of the timing table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub variant: GainVariant,
    pub iterations: usize,
    /// Mean seconds per local iteration.
    pub mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedTiming {
    pub seed: u64,
    pub iterations: usize,
    pub graph_mean: f64,
    pub unknown_mean: f64,
    pub ratio: f64,
    pub coverage: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchTable {
    pub world: String,
    pub rows: Vec<BenchRow>,
    /// Mean hull-based time over mean baseline time.
    pub ratio: f64,
    pub per_seed: Vec<SeedTiming>,
}

impl BenchTable {
    pub fn to_text(&self) -> String {
        let mut s = format!("world {}\n{:<10} {:>10} {:>14}\n", self.world, "variant", "iterations", "mean_ms");
        for r in &self.rows {
            let _ = writeln!(s, "{:<10} {:>10} {:>14.3}", r.variant.as_str(), r.iterations, r.mean * 1e3);
        }
        let _ = writeln!(s, "ratio {:.3}", self.ratio);
        for p in &self.per_seed {
            let _ = writeln!(
                s,
                "seed {:>4}  iterations {:>5}  graph {:>8.3} ms  unknown {:>8.3} ms  ratio {:.3}",
                p.seed,
                p.iterations,
                p.graph_mean * 1e3,
                p.unknown_mean * 1e3,
                p.ratio
            );
        }
        s
    }
}

/// Time both gains on the same inputs: each repeat is a hull-gain-driven
/// run that also computes the baseline every local iteration. Repeat `k`
/// uses seed `cfg.seed + k`.
pub fn bench(cfg: &ExperimentConfig, repeats: usize) -> Result<BenchTable> {
    if repeats == 0 {
        return Err(ExperimentError::NoRepeats);
    }
    let world = cfg.validate()?;
    let mut all = Vec::new();
    let mut per_seed = Vec::new();
    for k in 0..repeats {
        let seed = cfg.planner.seed + k as u64;
        let planner = PlannerConfig {
            variant: GainVariant::Graph,
            compute_both: true,
            seed,
            snapshot_every: None,
            ..cfg.planner
        };
        let log = run_to_completion(&world, planner)?;
        let m = mean_timings(&log.timings);
        per_seed.push(SeedTiming {
            seed,
            iterations: log.timings.len(),
            graph_mean: m.graph_total(),
            unknown_mean: m.baseline,
            ratio: ratio(m.graph_total(), m.baseline),
            coverage: log.summary.coverage,
        });
        all.extend(log.timings);
    }
    let m = mean_timings(&all);
    Ok(BenchTable {
        world: world.name.clone(),
        rows: vec![
            BenchRow { variant: GainVariant::Graph, iterations: all.len(), mean: m.graph_total() },
            BenchRow { variant: GainVariant::Unknown, iterations: all.len(), mean: m.baseline },
        ],
        ratio: ratio(m.graph_total(), m.baseline),
        per_seed,
    })
}

fn ratio(a: f64, b: f64) -> f64 {
    if b > 0.0 {
        a / b
    } else {
        f64::NAN
    }
}
