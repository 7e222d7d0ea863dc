//! Sliding-window RRT expansion with expansion-failure recording, plus the
//! local and global roadmap graphs.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap, HashMap, HashSet};

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{LabeledNode, NodeLabel, Point2, EPS_GEOM};
use crate::grid::{CellState, OccupancyGrid};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RrgError {
    #[error("no global node within {radius} m of the local root ({x:.3}, {y:.3})")]
    NoJunction { x: f64, y: f64, radius: f64 },
    #[error("local graph is empty")]
    EmptyLocal,
    #[error("successful nodes do not belong in a failure set")]
    SuccessfulFailure,
    #[error("invalid graph document: {0}")]
    Json(String),
}

/// Axis-aligned square region bounding local expansion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlidingWindow {
    pub center: Point2,
    pub half_extent: f64,
}

impl SlidingWindow {
    pub fn new(center: Point2, half_extent: f64) -> Self {
        assert!(half_extent > 0.0, "window half extent must be positive");
        Self { center, half_extent }
    }

    pub fn contains(&self, p: Point2) -> bool {
        (p.x - self.center.x).abs() <= self.half_extent && (p.y - self.center.y).abs() <= self.half_extent
    }

    pub fn inflated(&self, margin: f64) -> Self {
        Self { center: self.center, half_extent: self.half_extent + margin }
    }

    pub fn lo(&self) -> Point2 {
        self.center - Point2::new(self.half_extent, self.half_extent)
    }

    pub fn hi(&self) -> Point2 {
        self.center + Point2::new(self.half_extent, self.half_extent)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RrgNode {
    pub id: usize,
    pub position: Point2,
    pub volumetric_gain: u32,
    pub exploration_gain: f64,
    pub visited: bool,
}

impl RrgNode {
    fn new(id: usize, position: Point2) -> Self {
        Self { id, position, volumetric_gain: 0, exploration_gain: 0.0, visited: false }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RrgEdge {
    pub a: usize,
    pub b: usize,
    pub length: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct RrgDoc {
    root: usize,
    nodes: Vec<RrgNode>,
    edges: Vec<RrgEdge>,
}

/// Roadmap graph. Node ids are indices into `nodes` and are reassigned when
/// nodes are removed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "RrgDoc", try_from = "RrgDoc")]
pub struct Rrg {
    nodes: Vec<RrgNode>,
    edges: Vec<RrgEdge>,
    adjacency: Vec<Vec<(usize, f64)>>,
    root: usize,
}

impl From<Rrg> for RrgDoc {
    fn from(g: Rrg) -> Self {
        RrgDoc { root: g.root, nodes: g.nodes, edges: g.edges }
    }
}

impl TryFrom<RrgDoc> for Rrg {
    type Error = RrgError;

    fn try_from(doc: RrgDoc) -> Result<Self, RrgError> {
        let n = doc.nodes.len();
        if doc.nodes.iter().enumerate().any(|(i, node)| node.id != i) {
            return Err(RrgError::Json("node ids must equal their index".into()));
        }
        if (n > 0 && doc.root >= n) || doc.edges.iter().any(|e| e.a >= n || e.b >= n) {
            return Err(RrgError::Json("index out of range".into()));
        }
        let mut g = Rrg { nodes: doc.nodes, edges: Vec::new(), adjacency: vec![Vec::new(); n], root: doc.root };
        for e in doc.edges {
            g.add_edge(e.a, e.b);
        }
        Ok(g)
    }
}

impl Default for Rrg {
    fn default() -> Self {
        Self::empty()
    }
}

/// Distances and predecessors of a single-source shortest-path search.
#[derive(Debug, Clone)]
pub struct ShortestPaths {
    pub source: usize,
    pub dist: Vec<f64>,
    pub pred: Vec<Option<usize>>,
}

impl ShortestPaths {
    /// Node ids from the source to `target`, both included.
    pub fn path_to(&self, target: usize) -> Option<Vec<usize>> {
        if !self.dist[target].is_finite() {
            return None;
        }
        let mut path = vec![target];
        let mut cur = target;
        while let Some(p) = self.pred[cur] {
            path.push(p);
            cur = p;
        }
        path.reverse();
        Some(path)
    }
}

#[derive(PartialEq)]
struct QueueItem(f64, usize);

impl Eq for QueueItem {}

impl Ord for QueueItem {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for QueueItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Rrg {
    pub fn empty() -> Self {
        Self { nodes: Vec::new(), edges: Vec::new(), adjacency: Vec::new(), root: 0 }
    }

    pub fn with_root(position: Point2) -> Self {
        let mut g = Self::empty();
        g.add_node(position);
        g
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn set_root(&mut self, id: usize) {
        assert!(id < self.nodes.len(), "root id out of range");
        self.root = id;
    }

    pub fn node(&self, id: usize) -> &RrgNode {
        &self.nodes[id]
    }

    pub fn node_mut(&mut self, id: usize) -> &mut RrgNode {
        &mut self.nodes[id]
    }

    pub fn nodes(&self) -> &[RrgNode] {
        &self.nodes
    }

    pub fn nodes_mut(&mut self) -> &mut [RrgNode] {
        &mut self.nodes
    }

    pub fn edges(&self) -> &[RrgEdge] {
        &self.edges
    }

    pub fn neighbors(&self, id: usize) -> &[(usize, f64)] {
        &self.adjacency[id]
    }

    pub fn positions(&self) -> Vec<Point2> {
        self.nodes.iter().map(|n| n.position).collect()
    }

    pub fn add_node(&mut self, position: Point2) -> usize {
        let id = self.nodes.len();
        self.nodes.push(RrgNode::new(id, position));
        self.adjacency.push(Vec::new());
        id
    }

    /// Add an undirected edge; duplicates and self-loops are ignored.
    pub fn add_edge(&mut self, a: usize, b: usize) -> bool {
        if a == b || self.adjacency[a].iter().any(|&(n, _)| n == b) {
            return false;
        }
        let length = self.nodes[a].position.dist(self.nodes[b].position);
        self.edges.push(RrgEdge { a, b, length });
        self.adjacency[a].push((b, length));
        self.adjacency[b].push((a, length));
        true
    }

    pub fn nearest(&self, p: Point2) -> Option<usize> {
        self.nodes
            .iter()
            .map(|n| (n.position.dist_sq(p), n.id))
            .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
            .map(|(_, id)| id)
    }

    pub fn within(&self, p: Point2, radius: f64) -> Vec<usize> {
        let r2 = radius * radius;
        self.nodes.iter().filter(|n| n.position.dist_sq(p) <= r2).map(|n| n.id).collect()
    }

    /// Dijkstra over edge lengths. Ties are settled by smaller node id.
    pub fn shortest_paths(&self, source: usize) -> ShortestPaths {
        let n = self.nodes.len();
        let mut dist = vec![f64::INFINITY; n];
        let mut pred = vec![None; n];
        let mut heap = BinaryHeap::new();
        dist[source] = 0.0;
        heap.push(QueueItem(0.0, source));
        while let Some(QueueItem(d, u)) = heap.pop() {
            if d > dist[u] {
                continue;
            }
            for &(v, w) in &self.adjacency[u] {
                let nd = d + w;
                if nd < dist[v] {
                    dist[v] = nd;
                    pred[v] = Some(u);
                    heap.push(QueueItem(nd, v));
                }
            }
        }
        ShortestPaths { source, dist, pred }
    }

    pub fn is_connected(&self) -> bool {
        self.nodes.is_empty() || self.shortest_paths(0).dist.iter().all(|d| d.is_finite())
    }

    /// Keep the nodes for which `keep` holds, renumbering ids densely in the
    /// original order. Returns the removed nodes. The root must be kept.
    pub fn retain(&mut self, keep: impl Fn(&RrgNode) -> bool) -> Vec<RrgNode> {
        let mut remap = vec![None; self.nodes.len()];
        let mut kept = Vec::new();
        let mut removed = Vec::new();
        for node in self.nodes.drain(..) {
            if keep(&node) {
                remap[node.id] = Some(kept.len());
                kept.push(node);
            } else {
                removed.push(node);
            }
        }
        let root = remap[self.root].expect("retain must keep the root");
        let old_edges = std::mem::take(&mut self.edges);
        for (i, node) in kept.iter_mut().enumerate() {
            node.id = i;
        }
        self.adjacency = vec![Vec::new(); kept.len()];
        self.nodes = kept;
        self.root = root;
        for e in old_edges {
            if let (Some(a), Some(b)) = (remap[e.a], remap[e.b]) {
                self.add_edge(a, b);
            }
        }
        removed
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("graph serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, RrgError> {
        serde_json::from_str(text).map_err(|e| RrgError::Json(e.to_string()))
    }
}

/// Expansion-failure nodes, deduplicated per (downsample cell, label).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FailureSet {
    nodes: Vec<LabeledNode>,
    seen: HashSet<(i64, i64, NodeLabel)>,
    cell: f64,
}

impl FailureSet {
    /// `cell` is the deduplication bucket size in meters.
    pub fn new(cell: f64) -> Self {
        Self { nodes: Vec::new(), seen: HashSet::new(), cell }
    }

    pub fn nodes(&self) -> &[LabeledNode] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn key(&self, n: &LabeledNode) -> (i64, i64, NodeLabel) {
        (
            (n.position.x / self.cell).floor() as i64,
            (n.position.y / self.cell).floor() as i64,
            n.label,
        )
    }

    /// Returns whether the node was new.
    pub fn insert(&mut self, node: LabeledNode) -> Result<bool, RrgError> {
        if node.label == NodeLabel::Successful {
            return Err(RrgError::SuccessfulFailure);
        }
        let fresh = self.seen.insert(self.key(&node));
        if fresh {
            self.nodes.push(node);
        }
        Ok(fresh)
    }

    pub fn count(&self, label: NodeLabel) -> usize {
        self.nodes.iter().filter(|n| n.label == label).count()
    }

    fn rebuild(&mut self, nodes: Vec<LabeledNode>) {
        self.nodes.clear();
        self.seen.clear();
        for n in nodes {
            let _ = self.insert(n);
        }
    }
}

const BLOCKER_NUDGE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpandParams {
    pub n_sample: usize,
    pub step_size: f64,
    pub connect_radius: f64,
    /// Candidates closer than this to an existing node are discarded.
    pub min_node_spacing: f64,
}

impl Default for ExpandParams {
    fn default() -> Self {
        Self { n_sample: 300, step_size: 1.0, connect_radius: 2.0, min_node_spacing: 0.6 }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpandStats {
    pub added: usize,
    pub occupied: usize,
    pub unknown: usize,
    pub beyond_window: usize,
    pub skipped: usize,
}

/// One batch of RRT growth inside `window`. Samples are drawn uniformly from
/// the window grown by one step, so candidates can overshoot the window and
/// be recorded as beyond-window failures. Steering segments that would leave
/// the map are cut at its edge; past the edge counts as unknown.
pub fn expand<R: Rng>(
    rrg: &mut Rrg,
    fail: &mut FailureSet,
    grid: &OccupancyGrid,
    window: &SlidingWindow,
    params: &ExpandParams,
    rng: &mut R,
) -> ExpandStats {
    assert!(!rrg.is_empty(), "expansion needs a root");
    let geo = grid.geometry();
    let pad = 1e-6;
    let map_lo = Point2::new(geo.origin.x + pad, geo.origin.y + pad);
    let map_hi = geo.origin + geo.extent() - Point2::new(pad, pad);
    let region = window.inflated(params.step_size);
    let (lo, hi) = (region.lo(), region.hi());
    let mut stats = ExpandStats::default();
    for _ in 0..params.n_sample {
        let sample = Point2::new(rng.random_range(lo.x..hi.x), rng.random_range(lo.y..hi.y));
        let near = rrg.nearest(sample).expect("nonempty");
        let from = rrg.node(near).position;
        let d = from.dist(sample);
        if d < EPS_GEOM {
            stats.skipped += 1;
            continue;
        }
        let candidate = if d <= params.step_size { sample } else { from.lerp(sample, params.step_size / d) };
        let exit = exit_fraction(from, candidate, map_lo, map_hi);
        let end = if exit < 1.0 { from.lerp(candidate, exit) } else { candidate };
        let blocker = grid.first_non_free(from, end).expect("both ends lie on the map");
        // failures stay on blocked ground: the candidate itself when it is
        // inside an obstacle or off the map, else the first blocking cell
        let at = |entry: f64| from.lerp(candidate, ((entry + BLOCKER_NUDGE) / from.dist(candidate)).min(1.0));
        let candidate_blocked = grid.state_at(candidate).map_or(true, |s| s == CellState::Occupied);
        let failure = match blocker {
            Some((_, CellState::Occupied, _)) if candidate_blocked => Some((NodeLabel::Occupied, candidate)),
            Some((_, CellState::Occupied, entry)) => Some((NodeLabel::Occupied, at(entry))),
            Some((_, _, entry)) => Some((NodeLabel::Unknown, at(entry))),
            None if exit < 1.0 => Some((NodeLabel::Unknown, end)),
            None if !window.contains(candidate) => Some((NodeLabel::BeyondWindow, candidate)),
            None => None,
        };
        if let Some((label, position)) = failure {
            match label {
                NodeLabel::Occupied => stats.occupied += 1,
                NodeLabel::Unknown => stats.unknown += 1,
                _ => stats.beyond_window += 1,
            }
            let _ = fail.insert(LabeledNode::new(position, label));
            continue;
        }
        let crowded = rrg.nodes().iter().any(|n| n.position.dist(candidate) < params.min_node_spacing);
        if crowded {
            stats.skipped += 1;
            continue;
        }
        let id = rrg.add_node(candidate);
        rrg.add_edge(near, id);
        for other in rrg.within(candidate, params.connect_radius) {
            if other != id && other != near && grid.is_line_known_free(candidate, rrg.node(other).position).unwrap_or(false)
            {
                rrg.add_edge(id, other);
            }
        }
        stats.added += 1;
    }
    stats
}

/// Fraction of the way from `a` (inside the box) to `b` at which the segment
/// leaves the box `[lo, hi]`; 1 if it stays inside.
fn exit_fraction(a: Point2, b: Point2, lo: Point2, hi: Point2) -> f64 {
    let mut t: f64 = 1.0;
    for (p, q, l, h) in [(a.x, b.x, lo.x, hi.x), (a.y, b.y, lo.y, hi.y)] {
        if q > h {
            t = t.min((h - p) / (q - p));
        } else if q < l {
            t = t.min((l - p) / (q - p));
        }
    }
    t.max(0.0)
}

/// The hull input set: graph nodes plus failures, thinned to one node per
/// `downsample_res` cell. Within a cell the highest-priority label wins and
/// the first node carrying it supplies the position.
pub fn build_vch(rrg: &Rrg, fail: &FailureSet, downsample_res: f64) -> Vec<LabeledNode> {
    let mut cells: BTreeMap<(i64, i64), LabeledNode> = BTreeMap::new();
    let all = rrg
        .nodes()
        .iter()
        .map(|n| LabeledNode::new(n.position, NodeLabel::Successful))
        .chain(fail.nodes().iter().copied());
    for node in all {
        let key = (
            (node.position.x / downsample_res).floor() as i64,
            (node.position.y / downsample_res).floor() as i64,
        );
        cells
            .entry(key)
            .and_modify(|cur| {
                if node.label.priority() > cur.label.priority() {
                    *cur = node;
                }
            })
            .or_insert(node);
    }
    cells.into_values().collect()
}

/// Apply a window move. Graph nodes outside the new window leave the graph;
/// those within `margin` of it come back as beyond-window failures. Failure
/// nodes beyond the margin are dropped, those in the margin band become
/// beyond-window, and inside the window only occupied failures survive. The
/// graph keeps the root's connected component. Returns the graph nodes that
/// were removed, with their last gains.
pub fn prune_on_window_update(
    rrg: &mut Rrg,
    fail: &mut FailureSet,
    new_window: &SlidingWindow,
    margin: f64,
) -> Vec<RrgNode> {
    let band = new_window.inflated(margin);
    let mut kept_fail = Vec::with_capacity(fail.len());
    for n in fail.nodes() {
        if new_window.contains(n.position) {
            if n.label == NodeLabel::Occupied {
                kept_fail.push(*n);
            }
        } else if band.contains(n.position) {
            kept_fail.push(LabeledNode::new(n.position, NodeLabel::BeyondWindow));
        }
    }
    let reach = {
        let inside: Vec<bool> = rrg.nodes().iter().map(|n| new_window.contains(n.position)).collect();
        let mut seen = vec![false; rrg.len()];
        if inside[rrg.root()] {
            let mut stack = vec![rrg.root()];
            seen[rrg.root()] = true;
            while let Some(u) = stack.pop() {
                for &(v, _) in rrg.neighbors(u) {
                    if inside[v] && !seen[v] {
                        seen[v] = true;
                        stack.push(v);
                    }
                }
            }
        } else {
            seen[rrg.root()] = true;
        }
        seen
    };
    let removed = rrg.retain(|n| reach[n.id]);
    for n in &removed {
        if band.contains(n.position) {
            kept_fail.push(LabeledNode::new(n.position, NodeLabel::BeyondWindow));
        }
    }
    fail.rebuild(kept_fail);
    removed
}

/// Fold a local graph into the global one. Coincident nodes are shared and
/// their visited flags OR-ed; gains are refreshed from the local copy.
pub fn merge_into_global(local: &Rrg, global: &mut Rrg, connect_radius: f64) -> Result<(), RrgError> {
    if local.is_empty() {
        return Err(RrgError::EmptyLocal);
    }
    if global.is_empty() {
        *global = local.clone();
        return Ok(());
    }
    let cell = connect_radius.max(EPS_GEOM);
    let key = |p: Point2| ((p.x / cell).floor() as i64, (p.y / cell).floor() as i64);
    let mut buckets: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    for n in global.nodes() {
        buckets.entry(key(n.position)).or_default().push(n.id);
    }
    let near = |global: &Rrg, buckets: &HashMap<(i64, i64), Vec<usize>>, p: Point2, r: f64| -> Option<usize> {
        let (kx, ky) = key(p);
        let mut best: Option<(f64, usize)> = None;
        for dx in -1..=1 {
            for dy in -1..=1 {
                for &id in buckets.get(&(kx + dx, ky + dy)).into_iter().flatten() {
                    let d = global.node(id).position.dist(p);
                    if d <= r && best.map_or(true, |(bd, bid)| d < bd || (d == bd && id < bid)) {
                        best = Some((d, id));
                    }
                }
            }
        }
        best.map(|(_, id)| id)
    };
    let root_pos = local.node(local.root()).position;
    let junction = near(global, &buckets, root_pos, connect_radius)
        .ok_or(RrgError::NoJunction { x: root_pos.x, y: root_pos.y, radius: connect_radius })?;
    let mut map = Vec::with_capacity(local.len());
    for n in local.nodes() {
        let id = match near(global, &buckets, n.position, EPS_GEOM) {
            Some(id) => id,
            None => {
                let id = global.add_node(n.position);
                buckets.entry(key(n.position)).or_default().push(id);
                id
            }
        };
        let g = global.node_mut(id);
        g.visited |= n.visited;
        g.volumetric_gain = n.volumetric_gain;
        g.exploration_gain = n.exploration_gain;
        map.push(id);
    }
    for e in local.edges() {
        global.add_edge(map[e.a], map[e.b]);
    }
    global.add_edge(map[local.root()], junction);
    Ok(())
}
