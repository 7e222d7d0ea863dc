//! Independent reference implementations used by the integration suites.
//!
//! None of these call into the routines they check, apart from the removal
//! loop reference, which shares only the Delaunay input with the
//! implementation under test.
#![allow(dead_code)]

use hullgain::gain::BranchNode;
use hullgain::geom::{LabeledNode, Point2, Triangulation};
use hullgain::rrg::Rrg;
use rand::Rng;

pub fn orient(a: Point2, b: Point2, c: Point2) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

fn sign(v: f64) -> i8 {
    if v > 0.0 {
        1
    } else if v < 0.0 {
        -1
    } else {
        0
    }
}

fn within_box(a: Point2, b: Point2, p: Point2) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

/// Textbook four-orientation closed-segment test with explicit collinear
/// on-segment checks.
pub fn segments_intersect_oracle(a: Point2, b: Point2, c: Point2, d: Point2) -> bool {
    let o1 = sign(orient(a, b, c));
    let o2 = sign(orient(a, b, d));
    let o3 = sign(orient(c, d, a));
    let o4 = sign(orient(c, d, b));
    if o1 != o2 && o3 != o4 {
        return true;
    }
    (o1 == 0 && within_box(a, b, c))
        || (o2 == 0 && within_box(a, b, d))
        || (o3 == 0 && within_box(c, d, a))
        || (o4 == 0 && within_box(c, d, b))
}

/// Winding number of `ring` around `p`; nonzero means inside.
pub fn winding_number(p: Point2, ring: &[Point2]) -> i32 {
    let mut wn = 0;
    for i in 0..ring.len() {
        let (a, b) = (ring[i], ring[(i + 1) % ring.len()]);
        if a.y <= p.y {
            if b.y > p.y && orient(a, b, p) > 0.0 {
                wn += 1;
            }
        } else if b.y <= p.y && orient(a, b, p) < 0.0 {
            wn -= 1;
        }
    }
    wn
}

pub fn dist_to_segment(p: Point2, a: Point2, b: Point2) -> f64 {
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let l2 = dx * dx + dy * dy;
    let t = if l2 == 0.0 { 0.0 } else { (((p.x - a.x) * dx + (p.y - a.y) * dy) / l2).clamp(0.0, 1.0) };
    let (qx, qy) = (a.x + t * dx, a.y + t * dy);
    ((p.x - qx).powi(2) + (p.y - qy).powi(2)).sqrt()
}

pub fn near_ring_boundary(p: Point2, ring: &[Point2], band: f64) -> bool {
    (0..ring.len()).any(|i| dist_to_segment(p, ring[i], ring[(i + 1) % ring.len()]) <= band)
}

/// Circumcenter and squared radius via perpendicular bisectors.
pub fn circumcircle(a: Point2, b: Point2, c: Point2) -> (Point2, f64) {
    let d = 2.0 * (a.x * (b.y - c.y) + b.x * (c.y - a.y) + c.x * (a.y - b.y));
    let a2 = a.x * a.x + a.y * a.y;
    let b2 = b.x * b.x + b.y * b.y;
    let c2 = c.x * c.x + c.y * c.y;
    let ux = (a2 * (b.y - c.y) + b2 * (c.y - a.y) + c2 * (a.y - b.y)) / d;
    let uy = (a2 * (c.x - b.x) + b2 * (a.x - c.x) + c2 * (b.x - a.x)) / d;
    let center = Point2::new(ux, uy);
    let r2 = (a.x - ux).powi(2) + (a.y - uy).powi(2);
    (center, r2)
}

/// Number of (triangle, point) pairs where the point sits strictly inside
/// the triangle's circumcircle by more than a relative tolerance.
pub fn circumcircle_violations(t: &Triangulation, points: &[Point2]) -> usize {
    let mut bad = 0;
    for tri in &t.triangles {
        let (a, b, c) = (t.vertices[tri[0]], t.vertices[tri[1]], t.vertices[tri[2]]);
        let (center, r2) = circumcircle(a, b, c);
        let tol = 1e-9 * r2.max(1.0);
        for &p in points {
            if p == a || p == b || p == c {
                continue;
            }
            let d2 = (p.x - center.x).powi(2) + (p.y - center.y).powi(2);
            if d2 < r2 - tol {
                bad += 1;
            }
        }
    }
    bad
}

/// Andrew's monotone chain; collinear points on hull edges are dropped.
pub fn convex_hull_oracle(points: &[Point2]) -> Vec<Point2> {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut lower: Vec<Point2> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && orient(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<Point2> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && orient(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// Step-by-step concave hull reference: every round rescans all exterior
/// edges, sorts them longest-first (ties by index pair), and deletes the
/// first one whose opposite vertex is not yet on the boundary. Returns the
/// boundary as a sorted list of undirected vertex pairs.
pub fn reference_removal(t: &Triangulation, max_edge: f64) -> Vec<(usize, usize)> {
    let nt = t.triangles.len();
    let mut alive = vec![true; nt];
    loop {
        let mut exterior: Vec<(f64, (usize, usize), usize, usize)> = Vec::new();
        let mut on_boundary = vec![false; t.vertices.len()];
        for ti in 0..nt {
            if !alive[ti] {
                continue;
            }
            for i in 0..3 {
                let ext = t.neighbors[ti][i].map_or(true, |nb| !alive[nb]);
                if ext {
                    let (a, b) = (t.triangles[ti][i], t.triangles[ti][(i + 1) % 3]);
                    on_boundary[a] = true;
                    on_boundary[b] = true;
                    let len = t.vertices[a].dist(t.vertices[b]);
                    exterior.push((len, (a.min(b), a.max(b)), ti, i));
                }
            }
        }
        // longest first, ties by index pair
        let before = |x: &(f64, (usize, usize), usize, usize), y: &(f64, (usize, usize), usize, usize)| {
            x.0 > y.0 || (x.0 == y.0 && x.1 < y.1)
        };
        let mut pick: Option<&(f64, (usize, usize), usize, usize)> = None;
        for e in exterior.iter().filter(|e| e.0 > max_edge && !on_boundary[t.triangles[e.2][(e.3 + 2) % 3]]) {
            if pick.map_or(true, |p| before(e, p)) {
                pick = Some(e);
            }
        }
        match pick {
            Some(&(_, _, ti, _)) => alive[ti] = false,
            None => {
                let mut edges: Vec<(usize, usize)> = exterior.iter().map(|e| e.1).collect();
                edges.sort();
                return edges;
            }
        }
    }
}

/// Random simple polygon: star-shaped around its centroid, with sorted
/// random angles and random radii.
pub fn random_star_polygon<R: Rng>(rng: &mut R, n: usize) -> Vec<Point2> {
    let mut angles: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..std::f64::consts::TAU)).collect();
    angles.sort_by(f64::total_cmp);
    angles.dedup_by(|a, b| (*a - *b).abs() < 1e-6);
    angles
        .into_iter()
        .map(|a| {
            let r = rng.random_range(0.2..1.0);
            Point2::new(0.5 + 0.5 * r * a.cos(), 0.5 + 0.5 * r * a.sin())
        })
        .collect()
}

pub fn random_points<R: Rng>(rng: &mut R, n: usize, extent: f64) -> Vec<Point2> {
    (0..n)
        .map(|_| Point2::new(rng.random_range(0.0..extent), rng.random_range(0.0..extent)))
        .collect()
}

pub fn positions(nodes: &[LabeledNode]) -> Vec<Point2> {
    nodes.iter().map(|n| n.position).collect()
}

/// Whether a closed ring has any pair of non-adjacent edges that touch.
pub fn ring_self_intersects(ring: &[Point2]) -> bool {
    let n = ring.len();
    for i in 0..n {
        for j in i + 1..n {
            if j == i + 1 || (i == 0 && j == n - 1) {
                continue;
            }
            let (a, b) = (ring[i], ring[(i + 1) % n]);
            let (c, d) = (ring[j], ring[(j + 1) % n]);
            if segments_intersect_oracle(a, b, c, d) {
                return true;
            }
        }
    }
    false
}

/// Liang–Barsky clip of segment `a → b` against the closed box. Returns the
/// parameter interval `[t0, t1]` of the segment inside the box, if any.
pub fn clip_segment_to_box(a: Point2, b: Point2, lo: Point2, hi: Point2) -> Option<(f64, f64)> {
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let mut t0: f64 = 0.0;
    let mut t1: f64 = 1.0;
    for (p, q) in [(-dx, a.x - lo.x), (dx, hi.x - a.x), (-dy, a.y - lo.y), (dy, hi.y - a.y)] {
        if p == 0.0 {
            if q < 0.0 {
                return None;
            }
        } else {
            let r = q / p;
            if p < 0.0 {
                t0 = t0.max(r);
            } else {
                t1 = t1.min(r);
            }
        }
    }
    (t0 <= t1).then_some((t0, t1))
}

/// A map that already knows the whole world: free cells free, everything
/// else occupied.
pub fn known_map(world: &hullgain::sim::World) -> hullgain::grid::OccupancyGrid {
    use hullgain::grid::CellState;
    use hullgain::sim::Terrain;
    let mut map = world.blank_map();
    let g = *world.geometry();
    for y in 0..g.height {
        for x in 0..g.width {
            let s = if world.terrain((x, y)) == Terrain::Free { CellState::Free } else { CellState::Occupied };
            map.observe((x, y), s);
        }
    }
    map
}

pub fn random_branch<R: Rng>(rng: &mut R) -> Vec<BranchNode> {
    let mut p = Point2::new(rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0));
    (0..rng.random_range(1..20))
        .map(|_| {
            p = p + Point2::new(rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5));
            BranchNode { position: p, volumetric_gain: rng.random_range(0..400) as f64 }
        })
        .collect()
}

pub fn rel_close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1e-300)
}

/// Parent recurrence written out: g_k = g_{k-1} + v_k · exp(−λ · |x_k − x_{k-1}|).
pub fn nbvp_direct(b: &[BranchNode], lambda: f64) -> Vec<f64> {
    let mut want = vec![b[0].volumetric_gain];
    for k in 1..b.len() {
        let dx = b[k].position.x - b[k - 1].position.x;
        let dy = b[k].position.y - b[k - 1].position.y;
        want.push(want[k - 1] + b[k].volumetric_gain * (-lambda * (dx * dx + dy * dy).sqrt()).exp());
    }
    want
}

/// Direction-weighted branch sum written out term by term.
pub fn dsvp_direct(b: &[BranchNode], prev: Point2, l1: f64, l2: f64) -> f64 {
    let (root, tip) = (b[0].position, b[b.len() - 1].position);
    let sim = if root == tip {
        0.0
    } else {
        let (dx, dy) = (tip.x - root.x, tip.y - root.y);
        let cos = (dx * prev.x + dy * prev.y) / (dx * dx + dy * dy).sqrt();
        cos.clamp(-1.0, 1.0).acos()
    };
    let mut want = 0.0;
    for i in 0..b.len() {
        let dis: f64 = (1..=i).map(|j| b[j].position.dist(b[j - 1].position)).sum();
        want += b[i].volumetric_gain * (-l2 * dis).exp();
    }
    want * (-l1 * sim).exp()
}

/// Random connected graph with random gains and visited flags.
pub fn random_graph<R: Rng>(rng: &mut R) -> Rrg {
    let mut g = Rrg::with_root(Point2::new(0.0, 0.0));
    for _ in 0..rng.random_range(1..40) {
        let p = Point2::new(rng.random_range(-10.0..10.0), rng.random_range(-10.0..10.0));
        let id = g.add_node(p);
        let other = rng.random_range(0..id);
        g.add_edge(id, other);
        if rng.random_bool(0.3) {
            g.add_edge(id, rng.random_range(0..id));
        }
    }
    for n in g.nodes_mut() {
        n.volumetric_gain = rng.random_range(0..50);
        n.visited = rng.random_bool(0.2);
    }
    g
}

/// Every hull edge crossing `node → voxel` (strict four-orientation test),
/// with the crossing point's distance from `node`; the nearest decides,
/// ties to the lower edge index.
pub fn nearest_crossing_oracle(ring: &[Point2], node: Point2, voxel: Point2) -> Option<usize> {
    let n = ring.len();
    let mut best: Option<(f64, usize)> = None;
    for i in 0..n {
        let (a, b) = (ring[i], ring[(i + 1) % n]);
        let (o1, o2) = (orient(node, voxel, a), orient(node, voxel, b));
        let (o3, o4) = (orient(a, b, node), orient(a, b, voxel));
        if !(o1 * o2 < 0.0 && o3 * o4 < 0.0) {
            continue;
        }
        // solve node + t (voxel - node) = a + u (b - a)
        let (dx, dy) = (voxel.x - node.x, voxel.y - node.y);
        let (ex, ey) = (b.x - a.x, b.y - a.y);
        let den = dx * ey - dy * ex;
        let t = ((a.x - node.x) * ey - (a.y - node.y) * ex) / den;
        let d = t * (dx * dx + dy * dy).sqrt();
        if best.map_or(true, |(bd, _)| d < bd) {
            best = Some((d, i));
        }
    }
    best.map(|(_, i)| i)
}
