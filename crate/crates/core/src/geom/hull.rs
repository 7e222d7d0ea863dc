//! Concave hull by longest-exterior-edge removal, and the narrow-passage
//! filter applied to it.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use super::{delaunay, dedup_nodes, GeomError, LabeledNode, Point2};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct HullEdge {
    /// Both endpoints are `Successful` or `Unknown`, and the edge is original.
    pub passable: bool,
    /// Longer than the hull's maximum edge length, kept because removing it
    /// would have pinched the boundary.
    pub regularity_blocked: bool,
    /// Inserted by [`filter_hull`] to close over a discarded narrow run.
    pub bridged: bool,
}

/// A closed counter-clockwise polygon over labeled nodes.
///
/// Edge `i` runs from `boundary[i]` to `boundary[(i + 1) % n]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcaveHull {
    pub boundary: Vec<LabeledNode>,
    pub edges: Vec<HullEdge>,
    /// Set by [`filter_hull`] when filtering was skipped because it would
    /// have left fewer than three vertices.
    pub filter_warning: bool,
}

impl ConcaveHull {
    /// Build a hull from an ordered ring, deriving passability from labels.
    pub fn from_ring(boundary: Vec<LabeledNode>) -> Self {
        let n = boundary.len();
        let edges = (0..n)
            .map(|i| HullEdge {
                passable: boundary[i].label.is_passable() && boundary[(i + 1) % n].label.is_passable(),
                ..HullEdge::default()
            })
            .collect();
        Self { boundary, edges, filter_warning: false }
    }

    pub fn len(&self) -> usize {
        self.boundary.len()
    }

    pub fn is_empty(&self) -> bool {
        self.boundary.is_empty()
    }

    pub fn edge(&self, i: usize) -> (Point2, Point2) {
        let n = self.boundary.len();
        (self.boundary[i].position, self.boundary[(i + 1) % n].position)
    }

    pub fn edge_length(&self, i: usize) -> f64 {
        let (a, b) = self.edge(i);
        a.dist(b)
    }

    pub fn edge_passable(&self, i: usize) -> bool {
        self.edges[i].passable
    }

    pub fn ring(&self) -> Vec<Point2> {
        self.boundary.iter().map(|n| n.position).collect()
    }

    /// Twice the signed area; positive for counter-clockwise rings.
    pub fn signed_area2(&self) -> f64 {
        let n = self.boundary.len();
        (0..n)
            .map(|i| {
                let (a, b) = self.edge(i);
                a.perp_dot(b)
            })
            .sum()
    }

    /// Maximal runs of passable boundary nodes as `(start, len, cumulative
    /// length)`, where the length spans from the impassable node before the
    /// run to the impassable node after it. `None` if every node is passable.
    pub fn passable_runs(&self) -> Option<Vec<(usize, usize, f64)>> {
        let n = self.boundary.len();
        let anchor = (0..n).find(|&i| !self.boundary[i].label.is_passable())?;
        let mut runs = Vec::new();
        let mut k = 1;
        while k <= n {
            let i = (anchor + k) % n;
            if self.boundary[i].label.is_passable() {
                let start = i;
                let mut len = 0;
                let mut length = self.edge_length((start + n - 1) % n);
                while self.boundary[(start + len) % n].label.is_passable() {
                    length += self.edge_length((start + len) % n);
                    len += 1;
                }
                runs.push((start, len, length));
                k += len;
            } else {
                k += 1;
            }
        }
        Some(runs)
    }
}

/// Total order on f64 for the removal queue; lengths are always finite.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Len(f64);

impl Eq for Len {}

impl PartialOrd for Len {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Len {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Concave hull of `nodes` with maximum exterior edge length `max_edge`.
///
/// Starts from the Delaunay triangulation and repeatedly deletes the
/// triangle behind the longest exterior edge that exceeds `max_edge`. Ties
/// go to the lexicographically smallest vertex-index pair. A deletion is
/// skipped when the triangle's third vertex is already on the boundary,
/// since exposing it a second time would pinch the polygon; every vertex
/// therefore stays inside or on the result. `f64::INFINITY` yields the
/// convex hull.
pub fn concave_hull(nodes: &[LabeledNode], max_edge: f64) -> Result<ConcaveHull, GeomError> {
    if max_edge.is_nan() || max_edge <= 0.0 {
        return Err(GeomError::InvalidEdgeLength(max_edge));
    }
    let nodes = dedup_nodes(nodes);
    let points: Vec<Point2> = nodes.iter().map(|n| n.position).collect();
    let tri = delaunay(&points)?;
    debug_assert_eq!(tri.vertices.len(), nodes.len());

    let nt = tri.triangles.len();
    let mut alive = vec![true; nt];
    let mut on_boundary = vec![false; nodes.len()];
    let mut blocked: Vec<(usize, usize)> = Vec::new();
    let mut heap: BinaryHeap<(Len, Reverse<(usize, usize)>, usize, usize)> = BinaryHeap::new();

    let is_exterior = |alive: &[bool], t: usize, i: usize| match tri.neighbors[t][i] {
        None => true,
        Some(nb) => !alive[nb],
    };
    let push = |heap: &mut BinaryHeap<_>, t: usize, i: usize| {
        let (a, b) = (tri.triangles[t][i], tri.triangles[t][(i + 1) % 3]);
        let len = tri.vertices[a].dist(tri.vertices[b]);
        heap.push((Len(len), Reverse((a.min(b), a.max(b))), t, i));
    };

    for t in 0..nt {
        for i in 0..3 {
            if tri.neighbors[t][i].is_none() {
                on_boundary[tri.triangles[t][i]] = true;
                push(&mut heap, t, i);
            }
        }
    }

    while let Some((Len(len), Reverse(key), t, i)) = heap.pop() {
        if len <= max_edge {
            break;
        }
        if !alive[t] || !is_exterior(&alive, t, i) {
            continue;
        }
        let opposite = tri.triangles[t][(i + 2) % 3];
        if on_boundary[opposite] {
            blocked.push(key);
            continue;
        }
        alive[t] = false;
        on_boundary[opposite] = true;
        for k in [(i + 1) % 3, (i + 2) % 3] {
            // interior edge becomes exterior on the surviving neighbor's side
            let nb = tri.neighbors[t][k].expect("edge to an interior vertex has a neighbor");
            let (a, b) = (tri.triangles[t][k], tri.triangles[t][(k + 1) % 3]);
            let j = (0..3)
                .find(|&j| tri.triangles[nb][j] == b && tri.triangles[nb][(j + 1) % 3] == a)
                .expect("neighbor shares the edge");
            push(&mut heap, nb, j);
        }
    }

    let mut next = vec![usize::MAX; nodes.len()];
    for t in (0..nt).filter(|&t| alive[t]) {
        for i in 0..3 {
            if is_exterior(&alive, t, i) {
                next[tri.triangles[t][i]] = tri.triangles[t][(i + 1) % 3];
            }
        }
    }
    let start = (0..nodes.len()).find(|&v| next[v] != usize::MAX).expect("non-empty boundary");
    let mut ring = vec![start];
    let mut v = next[start];
    while v != start {
        ring.push(v);
        v = next[v];
    }

    let mut hull = ConcaveHull::from_ring(ring.iter().map(|&v| nodes[v]).collect());
    let m = ring.len();
    for (e, edge) in hull.edges.iter_mut().enumerate() {
        let (a, b) = (ring[e], ring[(e + 1) % m]);
        edge.regularity_blocked = blocked.contains(&(a.min(b), a.max(b)));
    }
    Ok(hull)
}

/// Discard passable boundary runs too narrow for the robot.
///
/// A maximal run of `Successful`/`Unknown` nodes whose cumulative length,
/// measured between the impassable nodes that bracket it, is below
/// `2 * robot_size` is cut out, and its two bracketing nodes are joined by an
/// impassable bridge edge. Wider runs are left alone. If cutting would leave
/// fewer than three vertices the input is returned with `filter_warning` set.
pub fn filter_hull(hull: &ConcaveHull, robot_size: f64) -> ConcaveHull {
    let min_width = 2.0 * robot_size;
    let Some(runs) = hull.passable_runs() else {
        // a fully passable ring has no bracketing obstacle nodes
        return hull.clone();
    };
    let n = hull.len();
    let mut drop = vec![false; n];
    for &(start, len, length) in &runs {
        if length < min_width {
            for k in 0..len {
                drop[(start + k) % n] = true;
            }
        }
    }
    let kept = drop.iter().filter(|&&d| !d).count();
    if kept == n {
        return hull.clone();
    }
    if kept < 3 {
        let mut out = hull.clone();
        out.filter_warning = true;
        return out;
    }
    let mut boundary = Vec::with_capacity(kept);
    let mut edges = Vec::with_capacity(kept);
    for i in (0..n).filter(|&i| !drop[i]) {
        boundary.push(hull.boundary[i]);
        if drop[(i + 1) % n] {
            edges.push(HullEdge { passable: false, regularity_blocked: false, bridged: true });
        } else {
            edges.push(hull.edges[i]);
        }
    }
    ConcaveHull { boundary, edges, filter_warning: false }
}
