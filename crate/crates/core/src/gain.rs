//! Volumetric gains (the occupancy baseline and the hull-based variant) and
//! the branch-aggregated exploration gains used to pick viewpoints.

use std::io::Write;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{cross, point_in_ring, point_segment_distance, segments_cross_strict, ConcaveHull, Point2};
use crate::grid::{GridGeometry, OccupancyGrid};
use crate::rrg::{Rrg, ShortestPaths};

#[derive(Debug, Error)]
pub enum GainError {
    #[error("gain parameter {name} must be non-negative and finite, got {value}")]
    InvalidParam { name: &'static str, value: f64 },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Which endpoints of a crossed hull edge must be passable for the voxel
/// behind it to count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeRule {
    Both,
    Any,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GainVariant {
    /// Count unknown map cells in line of sight.
    Unknown,
    /// Count cells outside the concave hull seen through passable edges.
    Graph,
}

impl GainVariant {
    pub fn as_str(self) -> &'static str {
        match self {
            GainVariant::Unknown => "unknown",
            GainVariant::Graph => "graph",
        }
    }
}

/// How volumetric gains are aggregated along a branch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExplorationModel {
    /// Parent gain plus distance-discounted own gain.
    Nbvp,
    /// Direction-weighted, distance-discounted branch sum.
    Dsvp,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GainParams {
    /// Distance decay of the parent-recurrence model, 1/m.
    pub lambda: f64,
    /// Branch direction penalty, 1/rad.
    pub lambda1: f64,
    /// Cumulative distance decay, 1/m.
    pub lambda2: f64,
    pub gain_radius: f64,
    pub edge_rule: EdgeRule,
    pub model: ExplorationModel,
    /// Best exploration gain below which the local stage counts as stalled.
    pub threshold: f64,
}

impl Default for GainParams {
    fn default() -> Self {
        Self {
            lambda: 0.25,
            lambda1: 0.3,
            lambda2: 0.15,
            gain_radius: 6.0,
            edge_rule: EdgeRule::Both,
            model: ExplorationModel::Dsvp,
            threshold: 5.0,
        }
    }
}

impl GainParams {
    pub fn validate(&self) -> Result<(), GainError> {
        for (name, value) in [
            ("lambda", self.lambda),
            ("lambda1", self.lambda1),
            ("lambda2", self.lambda2),
            ("gain_radius", self.gain_radius),
            ("threshold", self.threshold),
        ] {
            if !value.is_finite() || value < 0.0 {
                return Err(GainError::InvalidParam { name, value });
            }
        }
        if self.gain_radius == 0.0 {
            return Err(GainError::InvalidParam { name: "gain_radius", value: 0.0 });
        }
        Ok(())
    }
}

/// Counters for situations that should not happen but are tolerated.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GainDiagnostics {
    /// Voxels judged outside the hull with no crossing hull edge found.
    pub missed_crossings: u64,
}

fn edge_counts(hull: &ConcaveHull, i: usize, rule: EdgeRule) -> bool {
    let e = hull.edges[i];
    if e.bridged {
        return false;
    }
    let n = hull.len();
    let (a, b) = (hull.boundary[i].label, hull.boundary[(i + 1) % n].label);
    match rule {
        EdgeRule::Both => a.is_passable() && b.is_passable(),
        EdgeRule::Any => a.is_passable() || b.is_passable(),
    }
}

/// Fraction along `node → voxel` where it meets the line through edge `i`.
fn crossing_param(hull: &ConcaveHull, i: usize, node: Point2, voxel: Point2) -> f64 {
    let (a, b) = hull.edge(i);
    let s0 = cross(a, b, node);
    let s1 = cross(a, b, voxel);
    s0 / (s0 - s1)
}

/// Whether the voxel behind the hull is reached through a passable edge.
///
/// Among all hull edges strictly crossing the segment from `node` to
/// `voxel`, the one whose crossing point is nearest `node` decides (ties go
/// to the lower edge index). If nothing crosses, the voxel was not really
/// outside; that is counted in `diag` and the voxel does not count.
pub fn check_intersection(
    hull: &ConcaveHull,
    node: Point2,
    voxel: Point2,
    rule: EdgeRule,
    diag: &mut GainDiagnostics,
) -> bool {
    let mut best: Option<(f64, usize)> = None;
    for i in 0..hull.len() {
        let (a, b) = hull.edge(i);
        if segments_cross_strict(voxel, node, a, b) {
            let t = crossing_param(hull, i, node, voxel);
            if best.map_or(true, |(bt, _)| t < bt) {
                best = Some((t, i));
            }
        }
    }
    match best {
        Some((_, i)) => edge_counts(hull, i, rule),
        None => {
            diag.missed_crossings += 1;
            false
        }
    }
}

/// Hull edges bucketed on a coarse lattice for segment queries.
struct EdgeIndex {
    geo: GridGeometry,
    buckets: Vec<Vec<u32>>,
    stamp: Vec<u32>,
    epoch: u32,
}

impl EdgeIndex {
    fn new(hull: &ConcaveHull, map: &GridGeometry, cell: f64) -> Self {
        let ext = map.extent();
        let w = (ext.x / cell).ceil() as usize + 1;
        let h = (ext.y / cell).ceil() as usize + 1;
        let geo = GridGeometry::new(cell, map.origin, w, h);
        let mut buckets = vec![Vec::new(); w * h];
        for i in 0..hull.len() {
            let (a, b) = hull.edge(i);
            let lo = Point2::new(a.x.min(b.x), a.y.min(b.y));
            let hi = Point2::new(a.x.max(b.x), a.y.max(b.y));
            if let Some((c0, c1)) = geo.cells_in_box(lo, hi) {
                for y in c0.1..=c1.1 {
                    for x in c0.0..=c1.0 {
                        buckets[geo.index((x, y))].push(i as u32);
                    }
                }
            }
        }
        EdgeIndex { geo, buckets, stamp: vec![0; hull.len()], epoch: 0 }
    }

    /// Edges passing within `r` of `p`.
    fn edges_near(&mut self, hull: &ConcaveHull, p: Point2, r: f64, out: &mut Vec<usize>) {
        out.clear();
        self.bump();
        let Some((c0, c1)) = self.geo.cells_in_box(p - Point2::new(r, r), p + Point2::new(r, r)) else { return };
        for y in c0.1..=c1.1 {
            for x in c0.0..=c1.0 {
                for &e in &self.buckets[self.geo.index((x, y))] {
                    let e = e as usize;
                    if self.stamp[e] == self.epoch {
                        continue;
                    }
                    self.stamp[e] = self.epoch;
                    let (a, b) = hull.edge(e);
                    if point_segment_distance(p, a, b) <= r {
                        out.push(e);
                    }
                }
            }
        }
    }

    fn bump(&mut self) {
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.stamp.iter_mut().for_each(|s| *s = 0);
            self.epoch = 1;
        }
    }
}

/// Inside/outside classification of every map cell center.
struct InsideMask {
    inside: Vec<bool>,
}

impl InsideMask {
    /// Even-odd scanline fill; centers within a hair of a crossing are
    /// resolved with the exact point-in-polygon test so boundary behavior
    /// matches it.
    fn new(hull: &ConcaveHull, geo: &GridGeometry) -> Self {
        let ring = hull.ring();
        let n = ring.len();
        let mut inside = vec![false; geo.len()];
        let mut xs = Vec::new();
        for y in 0..geo.height {
            let cy = geo.center((0, y)).y;
            xs.clear();
            for i in 0..n {
                let (a, b) = (ring[i], ring[(i + 1) % n]);
                if (a.y > cy) != (b.y > cy) {
                    xs.push(a.x + (cy - a.y) * (b.x - a.x) / (b.y - a.y));
                }
            }
            if xs.is_empty() {
                continue;
            }
            xs.sort_by(f64::total_cmp);
            for pair in xs.chunks(2) {
                let [x0, x1] = [pair[0], pair[pair.len() - 1]];
                let lo = geo.cells_in_box(Point2::new(x0, cy), Point2::new(x1, cy));
                if let Some(((c0, _), (c1, _))) = lo {
                    for x in c0..=c1 {
                        let cx = geo.center((x, y)).x;
                        if cx > x0 && cx < x1 {
                            inside[y * geo.width + x] = true;
                        }
                    }
                }
            }
            for &xc in &xs {
                if let Some(((c0, _), (c1, _))) = geo.cells_in_box(Point2::new(xc - 1e-6, cy), Point2::new(xc + 1e-6, cy)) {
                    for x in c0..=c1 {
                        let c = geo.center((x, y));
                        if (c.x - xc).abs() <= 1e-6 {
                            inside[y * geo.width + x] = point_in_ring(c, &ring).unwrap_or(false);
                        }
                    }
                }
            }
        }
        // centers lying on horizontal edges are missed by the crossings above
        for i in 0..n {
            let (a, b) = (ring[i], ring[(i + 1) % n]);
            let lo = Point2::new(a.x.min(b.x) - 1e-6, a.y.min(b.y) - 1e-6);
            let hi = Point2::new(a.x.max(b.x) + 1e-6, a.y.max(b.y) + 1e-6);
            if (b.y - a.y).abs() > 1e-6 {
                continue;
            }
            if let Some((c0, c1)) = geo.cells_in_box(lo, hi) {
                for y in c0.1..=c1.1 {
                    for x in c0.0..=c1.0 {
                        let c = geo.center((x, y));
                        if point_segment_distance(c, a, b) <= 1e-6 {
                            inside[y * geo.width + x] = point_in_ring(c, &ring).unwrap_or(false);
                        }
                    }
                }
            }
        }
        InsideMask { inside }
    }

}

/// Hull-based volumetric gain of every graph node.
///
/// For each node, counts map cells whose centers lie within `gain_radius`,
/// outside the hull, and behind a passable hull edge. Only cells in the
/// shadow of a passable edge near the node are examined; nodes with no such
/// edge score zero without looking at any cell.
pub fn graph_gain(
    hull: &ConcaveHull,
    rrg: &Rrg,
    geo: &GridGeometry,
    params: &GainParams,
) -> Vec<u32> {
    let r = params.gain_radius;
    if hull.len() < 3 {
        return vec![0; rrg.len()];
    }
    let counts: Vec<bool> = (0..hull.len()).map(|i| edge_counts(hull, i, params.edge_rule)).collect();
    if !counts.iter().any(|&c| c) {
        return vec![0; rrg.len()];
    }
    let mask = InsideMask::new(hull, geo);
    let mut index = EdgeIndex::new(hull, geo, 1.0);
    let mut seen = vec![0u32; geo.len()];
    let mut epoch = 0u32;
    let mut near = Vec::new();
    let mut occluders = Vec::new();
    let r2 = r * r;
    rrg.nodes()
        .iter()
        .map(|node| {
            let p = node.position;
            index.edges_near(hull, p, r, &mut near);
            if !near.iter().any(|&e| counts[e]) {
                return 0;
            }
            epoch += 1;
            let mut gain = 0;
            for &e in near.iter().filter(|&&e| counts[e]) {
                let (a, b) = hull.edge(e);
                // a segment from p cannot strictly cross an edge whose line holds p
                if cross(a, b, p) == 0.0 {
                    continue;
                }
                let Some((lo, hi)) = shadow_box(p, a, b, r) else { continue };
                let Some((c0, c1)) = geo.cells_in_box(lo, hi) else { continue };
                // anything crossing p→v ahead of e passes through triangle p, a, b
                occluders.clear();
                occluders.extend(near.iter().copied().filter(|&f| {
                    let (f0, f1) = hull.edge(f);
                    f != e && segment_meets_triangle(f0, f1, p, a, b)
                }));
                for y in c0.1..=c1.1 {
                    for x in c0.0..=c1.0 {
                        let i = y * geo.width + x;
                        if seen[i] == epoch || mask.inside[i] {
                            continue;
                        }
                        let v = geo.center((x, y));
                        if v.dist_sq(p) > r2 || !segments_cross_strict(v, p, a, b) {
                            continue;
                        }
                        seen[i] = epoch;
                        let mut best = (crossing_param(hull, e, p, v), e);
                        for &f in &occluders {
                            let (f0, f1) = hull.edge(f);
                            if segments_cross_strict(v, p, f0, f1) {
                                let t = crossing_param(hull, f, p, v);
                                if t < best.0 || (t == best.0 && f < best.1) {
                                    best = (t, f);
                                }
                            }
                        }
                        if counts[best.1] {
                            gain += 1;
                        }
                    }
                }
            }
            gain
        })
        .collect()
}

/// Closed test for segment `f0 f1` touching triangle `p a b`. May report
/// touching for collinear segments that only share the supporting line.
fn segment_meets_triangle(f0: Point2, f1: Point2, p: Point2, a: Point2, b: Point2) -> bool {
    let (lo, hi) = (
        Point2::new(p.x.min(a.x).min(b.x), p.y.min(a.y).min(b.y)),
        Point2::new(p.x.max(a.x).max(b.x), p.y.max(a.y).max(b.y)),
    );
    if f0.x.max(f1.x) < lo.x || f0.x.min(f1.x) > hi.x || f0.y.max(f1.y) < lo.y || f0.y.min(f1.y) > hi.y {
        return false;
    }
    let inside = |q: Point2| {
        let (d1, d2, d3) = (cross(p, a, q), cross(a, b, q), cross(b, p, q));
        !((d1 < 0.0 || d2 < 0.0 || d3 < 0.0) && (d1 > 0.0 || d2 > 0.0 || d3 > 0.0))
    };
    if inside(f0) || inside(f1) {
        return true;
    }
    let touches = |c: Point2, d: Point2| {
        cross(f0, f1, c) * cross(f0, f1, d) <= 0.0 && cross(c, d, f0) * cross(c, d, f1) <= 0.0
    };
    touches(p, a) || touches(a, b) || touches(b, p)
}

/// Whether `v` lies in the closed wedge at `p` spanned by `a` and `b`.
fn in_wedge(p: Point2, a: Point2, b: Point2, v: Point2) -> bool {
    let (da, db, dv) = (a - p, b - p, v - p);
    let s = da.perp_dot(db);
    if s == 0.0 {
        return true;
    }
    da.perp_dot(dv) * s >= 0.0 && dv.perp_dot(db) * s >= 0.0
}

/// Bounding box of the part of the disc of radius `r` around `p` that lies
/// in the wedge behind segment `ab`; the whole disc when `p` is on the line.
fn shadow_box(p: Point2, a: Point2, b: Point2, r: f64) -> Option<(Point2, Point2)> {
    let disc = (p - Point2::new(r, r), p + Point2::new(r, r));
    let (Some(ua), Some(ub)) = ((a - p).normalized(), (b - p).normalized()) else {
        return Some(disc);
    };
    if ua.perp_dot(ub).abs() < 1e-12 {
        return Some(disc);
    }
    let mut pts = vec![a, b, p + ua * r, p + ub * r];
    for axis in [Point2::new(1.0, 0.0), Point2::new(-1.0, 0.0), Point2::new(0.0, 1.0), Point2::new(0.0, -1.0)] {
        if in_wedge(p, p + ua, p + ub, p + axis) {
            pts.push(p + axis * r);
        }
    }
    let lo = pts.iter().fold(Point2::new(f64::INFINITY, f64::INFINITY), |m, q| Point2::new(m.x.min(q.x), m.y.min(q.y)));
    let hi = pts
        .iter()
        .fold(Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY), |m, q| Point2::new(m.x.max(q.x), m.y.max(q.y)));
    // the arc never leaves the disc
    let lo = Point2::new(lo.x.max(disc.0.x), lo.y.max(disc.0.y));
    let hi = Point2::new(hi.x.min(disc.1.x), hi.y.min(disc.1.y));
    (lo.x <= hi.x && lo.y <= hi.y).then_some((lo, hi))
}

/// Baseline volumetric gain of every graph node from the occupancy map.
pub fn unknown_gains(grid: &OccupancyGrid, rrg: &Rrg, params: &GainParams) -> Vec<u32> {
    rrg.nodes()
        .iter()
        .map(|n| grid.unknown_gain(n.position, params.gain_radius).unwrap_or(0))
        .collect()
}

/// One node on a branch: where it is and its volumetric gain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BranchNode {
    pub position: Point2,
    pub volumetric_gain: f64,
}

/// Parent-recurrence exploration gain for every node of a root-first branch.
pub fn exploration_gain_nbvp(branch: &[BranchNode], lambda: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(branch.len());
    for (k, node) in branch.iter().enumerate() {
        let e = match k {
            0 => node.volumetric_gain,
            _ => {
                let d = branch[k - 1].position.dist(node.position);
                out[k - 1] + node.volumetric_gain * (-lambda * d).exp()
            }
        };
        out.push(e);
    }
    out
}

/// Angle in `[0, π]` between the root-to-tip direction and `prev_dir`; zero
/// when either direction is undefined.
pub fn branch_similarity(root: Point2, tip: Point2, prev_dir: Option<Point2>) -> f64 {
    match (prev_dir, (tip - root).normalized()) {
        (Some(prev), Some(dir)) => dir.perp_dot(prev).atan2(dir.dot(prev)).abs(),
        _ => 0.0,
    }
}

/// Direction-weighted exploration gain of the branch tip.
pub fn exploration_gain_dsvp(branch: &[BranchNode], prev_dir: Option<Point2>, lambda1: f64, lambda2: f64) -> f64 {
    let (Some(first), Some(last)) = (branch.first(), branch.last()) else {
        return 0.0;
    };
    let mut dis = 0.0;
    let mut sum = 0.0;
    for (i, node) in branch.iter().enumerate() {
        if i > 0 {
            dis += branch[i - 1].position.dist(node.position);
        }
        sum += node.volumetric_gain * (-lambda2 * dis).exp();
    }
    (-lambda1 * branch_similarity(first.position, last.position, prev_dir)).exp() * sum
}

/// Exploration gain of every node, taking each node's branch to be its
/// shortest path from the root. Writes the result into the graph and
/// returns the path search used.
pub fn update_exploration_gains(rrg: &mut Rrg, params: &GainParams, prev_dir: Option<Point2>) -> ShortestPaths {
    let sp = rrg.shortest_paths(rrg.root());
    let mut order: Vec<usize> = (0..rrg.len()).filter(|&i| sp.dist[i].is_finite()).collect();
    order.sort_by(|&a, &b| sp.dist[a].total_cmp(&sp.dist[b]).then(a.cmp(&b)));
    let root_pos = rrg.node(rrg.root()).position;
    let mut acc = vec![0.0; rrg.len()];
    for &i in &order {
        let v = rrg.node(i).volumetric_gain as f64;
        let pos = rrg.node(i).position;
        acc[i] = match (params.model, sp.pred[i]) {
            (_, None) => v,
            (ExplorationModel::Nbvp, Some(p)) => acc[p] + v * (-params.lambda * pos.dist(rrg.node(p).position)).exp(),
            (ExplorationModel::Dsvp, Some(p)) => acc[p] + v * (-params.lambda2 * sp.dist[i]).exp(),
        };
    }
    for i in 0..rrg.len() {
        let e = if !sp.dist[i].is_finite() {
            0.0
        } else {
            match params.model {
                ExplorationModel::Nbvp => acc[i],
                ExplorationModel::Dsvp => {
                    let sim = branch_similarity(root_pos, rrg.node(i).position, prev_dir);
                    (-params.lambda1 * sim).exp() * acc[i]
                }
            }
        };
        rrg.node_mut(i).exploration_gain = e;
    }
    sp
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum Selection {
    Best { id: usize, gain: f64 },
    /// Nothing reaches the threshold; carries the best candidate if any.
    Exhausted { best: Option<(usize, f64)> },
}

/// Highest exploration gain among unvisited reachable nodes. Ties go to the
/// shorter path from the root, then the lower id.
pub fn select_best(rrg: &Rrg, dist: &[f64], threshold: f64) -> Selection {
    let mut best: Option<(usize, f64)> = None;
    for n in rrg.nodes() {
        if n.visited || !dist[n.id].is_finite() {
            continue;
        }
        let better = match best {
            None => true,
            Some((b, g)) => {
                n.exploration_gain > g
                    || (n.exploration_gain == g && (dist[n.id] < dist[b] || (dist[n.id] == dist[b] && n.id < b)))
            }
        };
        if better {
            best = Some((n.id, n.exploration_gain));
        }
    }
    match best {
        Some((id, gain)) if gain >= threshold && gain > 0.0 => Selection::Best { id, gain },
        other => Selection::Exhausted { best: other },
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GainRow {
    pub id: usize,
    pub x: f64,
    pub y: f64,
    pub unknown_gain: Option<u32>,
    pub graph_gain: Option<u32>,
    pub exploration_gain: f64,
}

/// Wall-clock seconds spent in each gain stage of one iteration.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct GainTimings {
    pub hull_build: f64,
    pub gain_update: f64,
    pub baseline: f64,
}

impl GainTimings {
    pub fn add_hull(&mut self, d: Duration) {
        self.hull_build += d.as_secs_f64();
    }
    pub fn add_gain(&mut self, d: Duration) {
        self.gain_update += d.as_secs_f64();
    }
    pub fn add_baseline(&mut self, d: Duration) {
        self.baseline += d.as_secs_f64();
    }
    /// Hull build plus hull-based gain update.
    pub fn graph_total(&self) -> f64 {
        self.hull_build + self.gain_update
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GainReport {
    pub rows: Vec<GainRow>,
    pub timings: GainTimings,
}

impl GainReport {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), GainError> {
        let mut out = csv::Writer::from_writer(w);
        for row in &self.rows {
            out.serialize(row)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_csv<R: std::io::Read>(r: R) -> Result<Vec<GainRow>, GainError> {
        csv::Reader::from_reader(r).deserialize().collect::<Result<_, _>>().map_err(GainError::from)
    }

    pub fn timings_json(&self) -> String {
        serde_json::to_string_pretty(&self.timings).expect("timings serialize")
    }
}
