//! The two-stage exploration loop: local expansion inside a sliding window,
//! and relocation through the global graph once the window runs dry.

use std::collections::{HashMap, HashSet};
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gain::{
    graph_gain, select_best, unknown_gains, update_exploration_gains, GainParams, GainReport,
    GainRow, GainTimings, GainVariant, Selection,
};
use crate::geom::{concave_hull, filter_hull, ConcaveHull, LabeledNode, NodeLabel, Point2, EPS_GEOM};
use crate::grid::OccupancyGrid;
use crate::rrg::{
    build_vch, expand, merge_into_global, prune_on_window_update, ExpandParams, FailureSet, Rrg, SlidingWindow,
};
use crate::sim::{sense, World};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlannerError {
    #[error("invalid planner setting {name}: {reason}")]
    InvalidConfig { name: &'static str, reason: String },
    #[error("robot would stand on a non-free cell at ({x:.3}, {y:.3})")]
    Collision { x: f64, y: f64 },
    #[error(transparent)]
    Graph(#[from] crate::rrg::RrgError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlannerConfig {
    pub variant: GainVariant,
    pub seed: u64,
    pub robot_size: f64,
    /// Longest exterior edge kept by the concave hull.
    pub hull_max_edge: f64,
    pub downsample_res: f64,
    pub expand: ExpandParams,
    pub gain: GainParams,
    pub window_half_extent: f64,
    pub prune_margin: f64,
    pub n_stall: u32,
    pub step_budget: u64,
    pub sensor_beams: usize,
    pub sensor_range: f64,
    /// Compute both gain variants every local iteration and time them; the
    /// configured variant still drives the robot.
    pub compute_both: bool,
    /// Keep a snapshot every this many iterations, for rendering.
    pub snapshot_every: Option<u64>,
    /// Stop after this many iterations even if not done.
    pub max_iterations: Option<u64>,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        Self {
            variant: GainVariant::Graph,
            seed: 0,
            robot_size: 0.6,
            hull_max_edge: 1.2,
            downsample_res: 0.4,
            expand: ExpandParams::default(),
            gain: GainParams::default(),
            window_half_extent: 15.0,
            prune_margin: 2.0,
            n_stall: 2,
            step_budget: 50_000,
            sensor_beams: 360,
            sensor_range: 6.0,
            compute_both: false,
            snapshot_every: None,
            max_iterations: None,
        }
    }
}

impl PlannerConfig {
    pub fn validate(&self) -> Result<(), PlannerError> {
        let positive = [
            ("robot_size", self.robot_size),
            ("hull_max_edge", self.hull_max_edge),
            ("downsample_res", self.downsample_res),
            ("step_size", self.expand.step_size),
            ("connect_radius", self.expand.connect_radius),
            ("window_half_extent", self.window_half_extent),
            ("sensor_range", self.sensor_range),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(PlannerError::InvalidConfig { name, reason: format!("must be positive, got {v}") });
            }
        }
        for (name, v) in [("prune_margin", self.prune_margin), ("min_node_spacing", self.expand.min_node_spacing)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(PlannerError::InvalidConfig { name, reason: format!("must be non-negative, got {v}") });
            }
        }
        let counts = [
            ("n_sample", self.expand.n_sample as u64),
            ("n_stall", self.n_stall as u64),
            ("sensor_beams", self.sensor_beams as u64),
            ("step_budget", self.step_budget),
        ];
        for (name, v) in counts {
            if v == 0 {
                return Err(PlannerError::InvalidConfig { name, reason: "must be at least 1".into() });
            }
        }
        if self.snapshot_every == Some(0) {
            return Err(PlannerError::InvalidConfig { name: "frames", reason: "must be at least 1".into() });
        }
        self.gain
            .validate()
            .map_err(|e| PlannerError::InvalidConfig { name: "gain", reason: e.to_string() })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Local,
    Relocating,
    Done,
}

impl Stage {
    /// Whether `self → next` is an allowed stage change.
    pub fn can_become(self, next: Stage) -> bool {
        matches!(
            (self, next),
            (Stage::Local, Stage::Relocating)
                | (Stage::Relocating, Stage::Local)
                | (Stage::Local, Stage::Done)
                | (Stage::Relocating, Stage::Done)
        )
    }
}

/// A global node worth coming back to, with its gain frozen at registration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub node: usize,
    pub position: Point2,
    pub gain: f64,
}

#[derive(Debug, Clone)]
pub struct ExplorationState {
    pub stage: Stage,
    pub robot_pose: Point2,
    pub local_rrg: Rrg,
    pub global_rrg: Rrg,
    pub failures: FailureSet,
    /// Every obstacle-collision failure seen so far, over the whole map.
    pub walls: FailureSet,
    pub window: SlidingWindow,
    pub stall_count: u32,
    pub candidates: Vec<Candidate>,
    /// Direction of the last move, used by the branch similarity term.
    pub heading: Option<Point2>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub iteration: u64,
    pub from: Stage,
    pub to: Stage,
    pub position: Point2,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum StepEvent {
    /// Travelled to a local viewpoint.
    Moved { target: Point2, gain: f64 },
    /// No local viewpoint reached the threshold.
    Stalled { best_gain: Option<f64> },
    /// Travelled through the global graph to a stored candidate.
    Relocated { target: Point2, gain: f64, score: f64 },
    /// A candidate was dropped because the global graph cannot reach it.
    Dropped { target: Point2 },
    Finished,
}

/// One line of the exploration log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub iteration: u64,
    pub stage: Stage,
    #[serde(flatten)]
    pub event: StepEvent,
    pub sim_steps: u64,
    pub x: f64,
    pub y: f64,
    pub coverage: f64,
    pub distance: f64,
    pub local_nodes: usize,
    pub global_nodes: usize,
    pub failures: usize,
    pub hull_nodes: usize,
    pub candidates: usize,
    pub stall_count: u32,
    pub window_recentered: bool,
}

/// Everything needed to draw one frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub iteration: u64,
    pub pose: Point2,
    pub window: SlidingWindow,
    /// Map dump in the grid's ASCII format.
    pub map: String,
    pub rrg: Rrg,
    pub hull: Vec<LabeledNode>,
    pub failures: Vec<LabeledNode>,
    pub trace: Vec<Point2>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Complete,
    Incomplete,
}

/// Deterministic end-of-run figures; wall-clock time is kept elsewhere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub world: String,
    pub variant: GainVariant,
    pub seed: u64,
    pub status: RunStatus,
    pub coverage: f64,
    pub iterations: u64,
    pub local_iterations: u64,
    pub sim_steps: u64,
    pub distance: f64,
    pub relocations: u64,
    pub relocation_targets: Vec<Point2>,
    pub dropped_candidates: u64,
    pub global_nodes: usize,
    pub transitions: Vec<Transition>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplorationLog {
    pub records: Vec<StepRecord>,
    pub summary: Summary,
    /// Gain computation times of every local iteration.
    pub timings: Vec<GainTimings>,
    pub wall_time: f64,
    pub snapshots: Vec<Snapshot>,
    /// Gains of the last local iteration.
    pub last_report: Option<GainReport>,
    /// Robot positions, one per simulation step.
    pub trace: Vec<Point2>,
}

/// Result of one local iteration.
#[derive(Debug, Clone)]
pub struct LocalOutcome {
    pub selection: Selection,
    pub report: GainReport,
    pub hull: Option<ConcaveHull>,
}

/// Owns the map, the graphs and the robot for one run in one world.
pub struct Explorer<'w> {
    world: &'w World,
    cfg: PlannerConfig,
    grid: OccupancyGrid,
    state: ExplorationState,
    rng: ChaCha8Rng,
    reachable: Vec<bool>,
    iteration: u64,
    local_iterations: u64,
    sim_steps: u64,
    distance: f64,
    relocation_targets: Vec<Point2>,
    dropped: u64,
    transitions: Vec<Transition>,
    last_hull: Option<ConcaveHull>,
    trace: Vec<Point2>,
    recentered: bool,
}

impl<'w> Explorer<'w> {
    /// Place the robot at the world's spawn and take the first scan.
    pub fn new(world: &'w World, cfg: PlannerConfig) -> Result<Self, PlannerError> {
        cfg.validate()?;
        let spawn = world.spawn;
        let state = ExplorationState {
            stage: Stage::Local,
            robot_pose: spawn,
            local_rrg: Self::fresh_local(spawn),
            global_rrg: Rrg::empty(),
            failures: FailureSet::new(cfg.downsample_res),
            walls: FailureSet::new(cfg.downsample_res),
            window: SlidingWindow::new(spawn, cfg.window_half_extent),
            stall_count: 0,
            candidates: Vec::new(),
            heading: None,
        };
        let mut ex = Explorer {
            world,
            cfg,
            grid: world.blank_map(),
            state,
            rng: ChaCha8Rng::seed_from_u64(cfg.seed),
            reachable: world.reachable(),
            iteration: 0,
            local_iterations: 0,
            sim_steps: 0,
            distance: 0.0,
            relocation_targets: Vec::new(),
            dropped: 0,
            transitions: Vec::new(),
            last_hull: None,
            trace: vec![spawn],
            recentered: false,
        };
        ex.scan()?;
        Ok(ex)
    }

    fn fresh_local(at: Point2) -> Rrg {
        let mut g = Rrg::with_root(at);
        g.node_mut(0).visited = true;
        g
    }

    pub fn state(&self) -> &ExplorationState {
        &self.state
    }

    pub fn grid(&self) -> &OccupancyGrid {
        &self.grid
    }

    pub fn config(&self) -> &PlannerConfig {
        &self.cfg
    }

    pub fn world(&self) -> &World {
        self.world
    }

    pub fn coverage(&self) -> f64 {
        self.world.coverage(&self.grid, &self.reachable)
    }

    pub fn sim_steps(&self) -> u64 {
        self.sim_steps
    }

    pub fn iteration(&self) -> u64 {
        self.iteration
    }

    pub fn last_hull(&self) -> Option<&ConcaveHull> {
        self.last_hull.as_ref()
    }

    fn scan(&mut self) -> Result<(), PlannerError> {
        let p = self.state.robot_pose;
        let scan = sense(self.world, p, self.cfg.sensor_beams, self.cfg.sensor_range)
            .map_err(|_| PlannerError::Collision { x: p.x, y: p.y })?;
        self.grid.integrate_scan(p, &scan).map_err(|_| PlannerError::Collision { x: p.x, y: p.y })?;
        Ok(())
    }

    /// Drive through `waypoints` one map cell per simulation step, scanning
    /// at every stop.
    fn travel(&mut self, waypoints: &[Point2]) -> Result<(), PlannerError> {
        let res = self.grid.resolution();
        for pair in waypoints.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            let len = a.dist(b);
            let n = ((len / res).ceil() as usize).max(1);
            for k in 1..=n {
                let p = a.lerp(b, k as f64 / n as f64);
                self.distance += self.state.robot_pose.dist(p);
                self.state.robot_pose = p;
                self.sim_steps += 1;
                self.trace.push(p);
                self.scan()?;
            }
        }
        Ok(())
    }

    fn set_stage(&mut self, to: Stage) {
        let from = self.state.stage;
        debug_assert!(from.can_become(to), "{from:?} -> {to:?}");
        self.transitions.push(Transition { iteration: self.iteration, from, to, position: self.state.robot_pose });
        self.state.stage = to;
    }

    fn global_node_at(&self, p: Point2) -> Option<usize> {
        self.state.global_rrg.nodes().iter().find(|n| n.position.dist(p) <= EPS_GEOM).map(|n| n.id)
    }

    fn merge_local(&mut self) -> Result<(), PlannerError> {
        merge_into_global(&self.state.local_rrg, &mut self.state.global_rrg, self.cfg.expand.connect_radius)?;
        Ok(())
    }

    fn register_candidates<'a>(&mut self, nodes: impl IntoIterator<Item = &'a crate::rrg::RrgNode>) {
        let threshold = self.cfg.gain.threshold;
        for n in nodes {
            if n.visited || n.exploration_gain < threshold || n.exploration_gain <= 0.0 {
                continue;
            }
            let Some(id) = self.global_node_at(n.position) else { continue };
            if let Some(c) = self.state.candidates.iter_mut().find(|c| c.node == id) {
                c.gain = n.exploration_gain;
            } else {
                self.state.candidates.push(Candidate { node: id, position: n.position, gain: n.exploration_gain });
            }
        }
    }

    /// Candidates back inside the local graph whose volumetric gain has
    /// dropped below the threshold are discarded; the others keep the
    /// gain they were registered with.
    fn refresh_candidates(&mut self) {
        if self.state.candidates.is_empty() {
            return;
        }
        let fresh: HashMap<(u64, u64), u32> =
            self.state.local_rrg.nodes().iter().map(|n| (key(n.position), n.volumetric_gain)).collect();
        let threshold = self.cfg.gain.threshold;
        self.state.candidates.retain(|c| fresh.get(&key(c.position)).map_or(true, |&v| v as f64 >= threshold));
    }

    fn forget_visited_candidates(&mut self) {
        let g = &self.state.global_rrg;
        self.state.candidates.retain(|c| c.node < g.len() && !g.node(c.node).visited);
    }

    /// Hull of the current local graph and failures, filtered for the robot.
    pub fn current_hull(&self) -> Option<ConcaveHull> {
        let vch = build_vch(&self.state.local_rrg, &self.state.failures, self.cfg.downsample_res);
        concave_hull(&vch, self.cfg.hull_max_edge).ok().map(|h| filter_hull(&h, self.cfg.robot_size))
    }

    /// One local-stage iteration: grow the tree, score every node, and drive
    /// to the best one if it clears the threshold.
    pub fn local_step(&mut self) -> Result<LocalOutcome, PlannerError> {
        assert_eq!(self.state.stage, Stage::Local, "local_step needs the local stage");
        self.local_iterations += 1;
        expand(
            &mut self.state.local_rrg,
            &mut self.state.failures,
            &self.grid,
            &self.state.window,
            &self.cfg.expand,
            &mut self.rng,
        );
        for n in self.state.failures.nodes() {
            if n.label == NodeLabel::Occupied {
                let _ = self.state.walls.insert(*n);
            }
        }

        let mut timings = GainTimings::default();
        let want_graph = self.cfg.compute_both || self.cfg.variant == GainVariant::Graph;
        let want_unknown = self.cfg.compute_both || self.cfg.variant == GainVariant::Unknown;
        let mut hull = None;
        let mut graph = None;
        if want_graph {
            let t = Instant::now();
            hull = self.current_hull();
            timings.add_hull(t.elapsed());
            let t = Instant::now();
            graph = Some(match &hull {
                Some(h) => graph_gain(h, &self.state.local_rrg, self.grid.geometry(), &self.cfg.gain),
                None => vec![0; self.state.local_rrg.len()],
            });
            timings.add_gain(t.elapsed());
        }
        let mut unknown = None;
        if want_unknown {
            let t = Instant::now();
            unknown = Some(unknown_gains(&self.grid, &self.state.local_rrg, &self.cfg.gain));
            timings.add_baseline(t.elapsed());
        }
        let chosen = match self.cfg.variant {
            GainVariant::Graph => graph.as_ref(),
            GainVariant::Unknown => unknown.as_ref(),
        }
        .expect("driving variant computed");
        for (node, &g) in self.state.local_rrg.nodes_mut().iter_mut().zip(chosen) {
            node.volumetric_gain = g;
        }
        let sp = update_exploration_gains(&mut self.state.local_rrg, &self.cfg.gain, self.state.heading);
        let selection = select_best(&self.state.local_rrg, &sp.dist, self.cfg.gain.threshold);
        self.refresh_candidates();
        self.merge_local()?;

        let rows = self
            .state
            .local_rrg
            .nodes()
            .iter()
            .map(|n| GainRow {
                id: n.id,
                x: n.position.x,
                y: n.position.y,
                unknown_gain: unknown.as_ref().map(|u| u[n.id]),
                graph_gain: graph.as_ref().map(|g| g[n.id]),
                exploration_gain: n.exploration_gain,
            })
            .collect();
        let report = GainReport { rows, timings };

        match selection {
            Selection::Best { id, .. } => {
                self.state.stall_count = 0;
                let path = sp.path_to(id).expect("selected node is reachable");
                let waypoints: Vec<Point2> = path.iter().map(|&i| self.state.local_rrg.node(i).position).collect();
                let start = self.state.robot_pose;
                self.travel(&waypoints)?;
                for &i in &path {
                    self.state.local_rrg.node_mut(i).visited = true;
                }
                self.state.local_rrg.set_root(id);
                self.state.heading = (self.state.robot_pose - start).normalized();
                self.merge_local()?;
                self.forget_visited_candidates();
                self.maybe_recenter()?;
            }
            Selection::Exhausted { .. } => {
                self.check_stall(false)?;
            }
        }
        self.last_hull = hull.clone();
        Ok(LocalOutcome { selection, report, hull })
    }

    /// Move the window onto the robot once it leaves the window's inner
    /// half. Local nodes that drop out and still promise gain become
    /// relocation candidates.
    fn maybe_recenter(&mut self) -> Result<(), PlannerError> {
        let d = self.state.robot_pose - self.state.window.center;
        if d.x.abs().max(d.y.abs()) <= self.state.window.half_extent / 2.0 {
            return Ok(());
        }
        let old = std::mem::take(&mut self.state.local_rrg);
        self.open_window()?;
        let kept: HashSet<(u64, u64)> = self.state.local_rrg.nodes().iter().map(|n| key(n.position)).collect();
        self.register_candidates(old.nodes().iter().filter(|n| !kept.contains(&key(n.position))));
        self.recentered = true;
        Ok(())
    }

    /// Center a new window on the robot and seed the local graph with the
    /// part of the global graph inside it that the robot can reach, plus the
    /// known walls there. Requires the robot to stand on a global node.
    fn open_window(&mut self) -> Result<(), PlannerError> {
        let window = SlidingWindow::new(self.state.robot_pose, self.cfg.window_half_extent);
        let here = self.global_node_at(self.state.robot_pose).expect("robot stands on a global node");
        let mut local = self.state.global_rrg.clone();
        local.set_root(here);
        let mut failures = std::mem::replace(&mut self.state.failures, FailureSet::new(self.cfg.downsample_res));
        for n in self.state.walls.nodes() {
            let _ = failures.insert(*n);
        }
        prune_on_window_update(&mut local, &mut failures, &window, self.cfg.prune_margin);
        self.state.local_rrg = local;
        self.state.failures = failures;
        self.state.window = window;
        Ok(())
    }

    /// Stall bookkeeping after a local iteration. `progressed` is whether a
    /// viewpoint cleared the threshold. At `n_stall` consecutive stalls the
    /// local graph is folded into the global one and the robot relocates.
    pub fn check_stall(&mut self, progressed: bool) -> Result<(), PlannerError> {
        if progressed {
            self.state.stall_count = 0;
            return Ok(());
        }
        self.state.stall_count += 1;
        if self.state.stall_count >= self.cfg.n_stall {
            self.merge_local()?;
            let nodes: Vec<_> = self.state.local_rrg.nodes().to_vec();
            self.register_candidates(nodes.iter());
            self.forget_visited_candidates();
            self.state.stall_count = 0;
            self.set_stage(Stage::Relocating);
        }
        Ok(())
    }

    /// Global stage: drive to the stored candidate with the best
    /// distance-discounted gain, then start a fresh local stage there.
    pub fn relocate(&mut self) -> Result<StepEvent, PlannerError> {
        assert_eq!(self.state.stage, Stage::Relocating, "relocate needs the relocating stage");
        let lambda2 = self.cfg.gain.lambda2;
        loop {
            self.forget_visited_candidates();
            if self.state.candidates.is_empty() {
                self.set_stage(Stage::Done);
                return Ok(StepEvent::Finished);
            }
            let here = self.global_node_at(self.state.robot_pose).expect("robot stands on a global node");
            let sp = self.state.global_rrg.shortest_paths(here);
            if let Some(k) = self.state.candidates.iter().position(|c| !sp.dist[c.node].is_finite()) {
                let c = self.state.candidates.remove(k);
                self.dropped += 1;
                log::warn!("dropping unreachable candidate at ({:.2}, {:.2})", c.position.x, c.position.y);
                return Ok(StepEvent::Dropped { target: c.position });
            }
            let (k, score) = best_candidate(&self.state.candidates, &sp.dist, lambda2).expect("nonempty");
            let c = self.state.candidates.remove(k);
            let path = sp.path_to(c.node).expect("reachable");
            let waypoints: Vec<Point2> = path.iter().map(|&i| self.state.global_rrg.node(i).position).collect();
            let start = self.state.robot_pose;
            self.travel(&waypoints)?;
            for &i in &path {
                self.state.global_rrg.node_mut(i).visited = true;
            }
            self.state.heading = (self.state.robot_pose - start).normalized();
            self.relocation_targets.push(c.position);
            self.state.failures = FailureSet::new(self.cfg.downsample_res);
            self.open_window()?;
            self.state.stall_count = 0;
            self.set_stage(Stage::Local);
            return Ok(StepEvent::Relocated { target: c.position, gain: c.gain, score });
        }
    }

    /// Advance by one iteration of whichever stage is active.
    pub fn step(&mut self) -> Result<StepRecord, PlannerError> {
        self.advance().map(|(rec, _)| rec)
    }

    fn advance(&mut self) -> Result<(StepRecord, Option<GainReport>), PlannerError> {
        let stage = self.state.stage;
        let before = self.sim_steps;
        self.recentered = false;
        let (event, report) = match stage {
            Stage::Local => {
                let out = self.local_step()?;
                let ev = match out.selection {
                    Selection::Best { gain, .. } => StepEvent::Moved { target: self.state.robot_pose, gain },
                    Selection::Exhausted { best } => StepEvent::Stalled { best_gain: best.map(|b| b.1) },
                };
                (ev, Some(out.report))
            }
            Stage::Relocating => (self.relocate()?, None),
            Stage::Done => return Ok((self.record(stage, StepEvent::Finished), None)),
        };
        if self.sim_steps == before {
            // planning without moving still takes a tick
            self.sim_steps += 1;
        }
        self.iteration += 1;
        Ok((self.record(stage, event), report))
    }

    fn record(&self, stage: Stage, event: StepEvent) -> StepRecord {
        StepRecord {
            iteration: self.iteration,
            stage,
            event,
            sim_steps: self.sim_steps,
            x: self.state.robot_pose.x,
            y: self.state.robot_pose.y,
            coverage: self.coverage(),
            distance: self.distance,
            local_nodes: self.state.local_rrg.len(),
            global_nodes: self.state.global_rrg.len(),
            failures: self.state.failures.len(),
            hull_nodes: self.last_hull.as_ref().map_or(0, |h| h.len()),
            candidates: self.state.candidates.len(),
            stall_count: self.state.stall_count,
            window_recentered: self.recentered,
        }
    }

    pub fn snapshot(&self) -> Snapshot {
        Snapshot {
            iteration: self.iteration,
            pose: self.state.robot_pose,
            window: self.state.window,
            map: self.grid.to_ascii(),
            rrg: self.state.local_rrg.clone(),
            hull: self.last_hull.as_ref().map(|h| h.boundary.clone()).unwrap_or_default(),
            failures: self.state.failures.nodes().to_vec(),
            trace: self.trace.clone(),
        }
    }

    /// Iterate until done, out of budget, or at the iteration cap.
    pub fn run(mut self) -> Result<ExplorationLog, PlannerError> {
        let started = Instant::now();
        let mut records = Vec::new();
        let mut timings = Vec::new();
        let mut snapshots = Vec::new();
        let mut last_report = None;
        while self.state.stage != Stage::Done
            && self.sim_steps < self.cfg.step_budget
            && self.cfg.max_iterations.map_or(true, |m| self.iteration < m)
        {
            if let Some(k) = self.cfg.snapshot_every {
                if self.iteration % k == 0 {
                    snapshots.push(self.snapshot());
                }
            }
            let (record, report) = self.advance()?;
            if let Some(report) = report {
                timings.push(report.timings);
                last_report = Some(report);
            }
            records.push(record);
        }
        let status = if self.state.stage == Stage::Done { RunStatus::Complete } else { RunStatus::Incomplete };
        let summary = Summary {
            world: self.world.name.clone(),
            variant: self.cfg.variant,
            seed: self.cfg.seed,
            status,
            coverage: self.coverage(),
            iterations: self.iteration,
            local_iterations: self.local_iterations,
            sim_steps: self.sim_steps,
            distance: self.distance,
            relocations: self.relocation_targets.len() as u64,
            relocation_targets: self.relocation_targets.clone(),
            dropped_candidates: self.dropped,
            global_nodes: self.state.global_rrg.len(),
            transitions: self.transitions.clone(),
        };
        Ok(ExplorationLog {
            records,
            summary,
            timings,
            wall_time: started.elapsed().as_secs_f64(),
            snapshots,
            last_report,
            trace: self.trace,
        })
    }
}

fn key(p: Point2) -> (u64, u64) {
    (p.x.to_bits(), p.y.to_bits())
}

/// Index and score of the candidate maximizing `gain · exp(−λ₂ · dist)`.
/// Ties go to the shorter path, then the lower node id.
pub fn best_candidate(candidates: &[Candidate], dist: &[f64], lambda2: f64) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (k, c) in candidates.iter().enumerate() {
        let d = dist[c.node];
        if !d.is_finite() {
            continue;
        }
        let score = c.gain * (-lambda2 * d).exp();
        let better = match best {
            None => true,
            Some((b, s)) => {
                let bc = &candidates[b];
                score > s || (score == s && (d < dist[bc.node] || (d == dist[bc.node] && c.node < bc.node)))
            }
        };
        if better {
            best = Some((k, score));
        }
    }
    best
}

/// Convenience wrapper: explore `world` from its spawn until done.
pub fn run_to_completion(world: &World, cfg: PlannerConfig) -> Result<ExplorationLog, PlannerError> {
    Explorer::new(world, cfg)?.run()
}
