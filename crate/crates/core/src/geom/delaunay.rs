//! Incremental Bowyer–Watson triangulation.
//!
//! The unbounded outside is covered by "ghost" triangles that share a single
//! vertex at infinity, one per convex-hull edge. A point outside the current
//! hull lies in the circumcircle of every ghost whose hull edge it sees, so
//! inserting it is the same cavity-and-fan operation as for interior points,
//! and the final hull is exactly convex without a bounding super-triangle.

use std::collections::HashMap;

use super::{cross, GeomError, Point2, EPS_CIRC, EPS_GEOM};

const GHOST: usize = usize::MAX;
const NONE: usize = usize::MAX;

/// A Delaunay triangulation of a deduplicated point set.
#[derive(Debug, Clone)]
pub struct Triangulation {
    pub vertices: Vec<Point2>,
    /// Counter-clockwise vertex-index triples.
    pub triangles: Vec<[usize; 3]>,
    /// `neighbors[t][i]` is the triangle across edge `(t[i], t[(i + 1) % 3])`,
    /// `None` on the convex hull.
    pub neighbors: Vec<[Option<usize>; 3]>,
    /// Hull edges, directed so the interior is on the left.
    pub exterior_edges: Vec<(usize, usize)>,
}

/// In-circle determinant: positive when `p` is strictly inside the
/// circumcircle of the counter-clockwise triangle `abc`.
pub fn in_circumcircle(a: Point2, b: Point2, c: Point2, p: Point2) -> f64 {
    let (adx, ady) = (a.x - p.x, a.y - p.y);
    let (bdx, bdy) = (b.x - p.x, b.y - p.y);
    let (cdx, cdy) = (c.x - p.x, c.y - p.y);
    let ad = adx * adx + ady * ady;
    let bd = bdx * bdx + bdy * bdy;
    let cd = cdx * cdx + cdy * cdy;
    adx * (bdy * cd - bd * cdy) - ady * (bdx * cd - bd * cdx) + ad * (bdx * cdy - bdy * cdx)
}

/// Delaunay-triangulate `points`.
///
/// Points within [`EPS_GEOM`] of an earlier point are dropped; the returned
/// `vertices` are the survivors in input order.
pub fn delaunay(points: &[Point2]) -> Result<Triangulation, GeomError> {
    if points.iter().any(|p| !p.is_finite()) {
        return Err(GeomError::NonFinite);
    }
    let labeled: Vec<_> = points
        .iter()
        .map(|&p| super::LabeledNode::new(p, super::NodeLabel::Successful))
        .collect();
    let vertices: Vec<Point2> = super::dedup_nodes(&labeled).into_iter().map(|n| n.position).collect();
    if vertices.len() < 3 {
        return Err(GeomError::TooFewPoints(vertices.len()));
    }

    let order = hilbert_order(&vertices);
    let (a, b) = (order[0], order[1]);
    let c = order[2..]
        .iter()
        .copied()
        .find(|&c| (cross(vertices[a], vertices[b], vertices[c]) / vertices[a].dist(vertices[b])).abs() > EPS_GEOM)
        .ok_or(GeomError::Collinear)?;

    let mut mesh = Mesh::new(&vertices, a, b, c);
    for &i in &order[2..] {
        if i != c {
            mesh.insert(i);
        }
    }
    Ok(mesh.finish())
}

#[derive(Debug, Clone, Copy)]
struct Tri {
    v: [usize; 3],
    n: [usize; 3],
    alive: bool,
}

impl Tri {
    fn is_ghost(&self) -> bool {
        self.v[2] == GHOST
    }
}

struct Mesh<'a> {
    pts: &'a [Point2],
    tris: Vec<Tri>,
    last: usize,
    stamp: Vec<u32>,
    epoch: u32,
}

impl<'a> Mesh<'a> {
    fn new(pts: &'a [Point2], a: usize, b: usize, c: usize) -> Self {
        let (b, c) = if cross(pts[a], pts[b], pts[c]) > 0.0 { (b, c) } else { (c, b) };
        let mut mesh = Mesh { pts, tris: Vec::new(), last: 0, stamp: Vec::new(), epoch: 0 };
        mesh.tris.push(Tri { v: [a, b, c], n: [1, 2, 3], alive: true });
        // ghost across each solid edge x→y is (y, x, ∞)
        mesh.tris.push(Tri { v: [b, a, GHOST], n: [0, 3, 2], alive: true });
        mesh.tris.push(Tri { v: [c, b, GHOST], n: [0, 1, 3], alive: true });
        mesh.tris.push(Tri { v: [a, c, GHOST], n: [0, 2, 1], alive: true });
        mesh
    }

    fn contains_in_circle(&self, t: usize, p: Point2) -> bool {
        let tri = &self.tris[t];
        let [u, w, x] = tri.v;
        if tri.is_ghost() {
            let (pu, pw) = (self.pts[u], self.pts[w]);
            let d = cross(pu, pw, p) / pu.dist(pw);
            if d > EPS_GEOM {
                return true;
            }
            // on the hull edge's line: inside only strictly between its ends
            d >= -EPS_GEOM && (p - pu).dot(pw - pu) > 0.0 && (p - pw).dot(pu - pw) > 0.0
        } else {
            in_circumcircle(self.pts[u], self.pts[w], self.pts[x], p) > EPS_CIRC
        }
    }

    fn locate(&self, p: Point2) -> usize {
        let mut t = self.last;
        let limit = 4 * self.tris.len() + 16;
        let mut offset = 0usize;
        'walk: for _ in 0..limit {
            let tri = &self.tris[t];
            if tri.is_ghost() {
                return t;
            }
            for k in 0..3 {
                let i = (k + offset) % 3;
                let (a, b) = (self.pts[tri.v[i]], self.pts[tri.v[(i + 1) % 3]]);
                if cross(a, b, p) / a.dist(b) < -EPS_GEOM {
                    t = tri.n[i];
                    offset = offset.wrapping_add(1);
                    continue 'walk;
                }
            }
            return t;
        }
        // The visibility walk can cycle on near-degenerate input; any triangle
        // whose circumcircle holds p is a valid cavity seed.
        (0..self.tris.len())
            .find(|&t| self.tris[t].alive && self.contains_in_circle(t, p))
            .unwrap_or(self.last)
    }

    fn next_epoch(&mut self) -> u32 {
        self.stamp.resize(self.tris.len(), 0);
        self.epoch += 1;
        self.epoch
    }

    fn grow_cavity(&mut self, seed: usize, p: Point2, excluded: &[usize]) -> Vec<usize> {
        let epoch = self.next_epoch();
        for &t in excluded {
            self.stamp[t] = epoch;
        }
        self.stamp[seed] = epoch;
        let mut cavity = vec![seed];
        let mut stack = vec![seed];
        while let Some(t) = stack.pop() {
            for k in 0..3 {
                let nb = self.tris[t].n[k];
                if self.stamp[nb] == epoch {
                    continue;
                }
                self.stamp[nb] = epoch;
                if self.contains_in_circle(nb, p) {
                    cavity.push(nb);
                    stack.push(nb);
                }
            }
        }
        cavity
    }

    fn insert(&mut self, pi: usize) {
        let p = self.pts[pi];
        let seed = self.locate(p);
        let mut excluded: Vec<usize> = Vec::new();
        let mut forced: Vec<usize> = Vec::new();

        // Floating-point noise can produce a cavity that is not star-shaped
        // around p; shrink or widen it until every fan triangle is positive.
        let (cavity, boundary) = loop {
            let mut cavity = self.grow_cavity(seed, p, &excluded);
            for &f in &forced {
                if !cavity.contains(&f) {
                    cavity.push(f);
                }
            }
            let epoch = self.next_epoch();
            for &t in &cavity {
                self.stamp[t] = epoch;
            }
            let mut boundary = Vec::new();
            let mut bad = None;
            for &t in &cavity {
                let tri = self.tris[t];
                for i in 0..3 {
                    let nb = tri.n[i];
                    if self.stamp[nb] == epoch {
                        continue;
                    }
                    let (x, y) = (tri.v[i], tri.v[(i + 1) % 3]);
                    if x != GHOST && y != GHOST {
                        let (a, b) = (self.pts[x], self.pts[y]);
                        if cross(a, b, p) / a.dist(b) <= EPS_GEOM && bad.is_none() {
                            bad = Some((t, nb));
                        }
                    }
                    boundary.push((x, y, nb));
                }
            }
            match bad {
                None => break (cavity, boundary),
                Some((t, nb)) if t == seed || forced.contains(&t) => {
                    if forced.contains(&nb) || excluded.contains(&nb) {
                        // give up on repair; accept as is
                        break (cavity, boundary);
                    }
                    forced.push(nb);
                }
                Some((t, _)) => excluded.push(t),
            }
            if excluded.len() + forced.len() > 64 {
                break (cavity, boundary);
            }
        };

        for &t in &cavity {
            self.tris[t].alive = false;
        }

        let first_new = self.tris.len();
        let mut edge_owner: HashMap<(usize, usize), usize> = HashMap::with_capacity(boundary.len() * 3);
        for &(x, y, nb) in &boundary {
            let mut v = [x, y, pi];
            let mut n = [nb, NONE, NONE];
            if let Some(g) = v.iter().position(|&q| q == GHOST) {
                let k = (g + 1) % 3;
                v = [v[k], v[(k + 1) % 3], v[(k + 2) % 3]];
                n = [n[k], n[(k + 1) % 3], n[(k + 2) % 3]];
            }
            let id = self.tris.len();
            for i in 0..3 {
                edge_owner.insert((v[i], v[(i + 1) % 3]), id);
            }
            self.tris.push(Tri { v, n, alive: true });
        }
        for id in first_new..self.tris.len() {
            let v = self.tris[id].v;
            for i in 0..3 {
                let (a, b) = (v[i], v[(i + 1) % 3]);
                if let Some(&other) = edge_owner.get(&(b, a)) {
                    self.tris[id].n[i] = other;
                } else {
                    // cavity boundary edge: re-point the outside triangle at us
                    let nb = self.tris[id].n[i];
                    let out = &mut self.tris[nb];
                    for j in 0..3 {
                        if out.v[j] == b && out.v[(j + 1) % 3] == a {
                            out.n[j] = id;
                        }
                    }
                }
            }
            if !self.tris[id].is_ghost() {
                self.last = id;
            }
        }
    }

    fn finish(self) -> Triangulation {
        let mut remap = vec![NONE; self.tris.len()];
        let mut triangles = Vec::new();
        for (i, t) in self.tris.iter().enumerate() {
            if t.alive && !t.is_ghost() {
                remap[i] = triangles.len();
                triangles.push(t.v);
            }
        }
        let mut neighbors = Vec::with_capacity(triangles.len());
        let mut exterior_edges = Vec::new();
        for t in self.tris.iter().filter(|t| t.alive && !t.is_ghost()) {
            let mut nb = [None; 3];
            for i in 0..3 {
                let r = remap[t.n[i]];
                if r == NONE {
                    exterior_edges.push((t.v[i], t.v[(i + 1) % 3]));
                } else {
                    nb[i] = Some(r);
                }
            }
            neighbors.push(nb);
        }
        Triangulation { vertices: self.pts.to_vec(), triangles, neighbors, exterior_edges }
    }
}

/// Indices of `pts` sorted along a Hilbert curve over their bounding box.
fn hilbert_order(pts: &[Point2]) -> Vec<usize> {
    const SIDE: u32 = 1 << 16;
    let (mut lo, mut hi) = (pts[0], pts[0]);
    for p in pts {
        lo = Point2::new(lo.x.min(p.x), lo.y.min(p.y));
        hi = Point2::new(hi.x.max(p.x), hi.y.max(p.y));
    }
    let span = (hi.x - lo.x).max(hi.y - lo.y).max(EPS_GEOM);
    let scale = (SIDE - 1) as f64 / span;
    let mut keyed: Vec<(u64, usize)> = pts
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let x = ((p.x - lo.x) * scale) as u32;
            let y = ((p.y - lo.y) * scale) as u32;
            (hilbert_d(SIDE, x, y), i)
        })
        .collect();
    keyed.sort_unstable();
    keyed.into_iter().map(|(_, i)| i).collect()
}

fn hilbert_d(n: u32, mut x: u32, mut y: u32) -> u64 {
    let mut d = 0u64;
    let mut s = n / 2;
    while s > 0 {
        let rx = u32::from(x & s > 0);
        let ry = u32::from(y & s > 0);
        d += u64::from(s) * u64::from(s) * u64::from((3 * rx) ^ ry);
        if ry == 0 {
            if rx == 1 {
                x = n - 1 - x;
                y = n - 1 - y;
            }
            std::mem::swap(&mut x, &mut y);
        }
        s /= 2;
    }
    d
}
