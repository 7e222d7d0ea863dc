//! Planar geometry kernel.
//!
//! Everything here is a pure function of its inputs. Predicates use absolute
//! tolerances sized for world coordinates of a few hundred meters.

mod delaunay;
mod hull;
mod predicates;

use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use delaunay::{delaunay, in_circumcircle, Triangulation};
pub use hull::{concave_hull, filter_hull, ConcaveHull, HullEdge};
pub use predicates::{
    cross, point_in_polygon, point_in_ring, point_segment_distance, segments_cross_strict,
    segments_intersect,
};

/// Coincidence and collinearity tolerance, meters.
pub const EPS_GEOM: f64 = 1e-9;
/// Threshold on the in-circle determinant.
pub const EPS_CIRC: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeomError {
    #[error("segment {0} has zero length")]
    DegenerateSegment(&'static str),
    #[error("polygon needs at least 3 vertices, got {0}")]
    TooFewVertices(usize),
    #[error("need at least 3 distinct points, got {0}")]
    TooFewPoints(usize),
    #[error("all input points are collinear")]
    Collinear,
    #[error("maximum edge length must be positive, got {0}")]
    InvalidEdgeLength(f64),
    #[error("non-finite coordinate")]
    NonFinite,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn dot(self, other: Point2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 2D cross product, treating both points as vectors.
    pub fn perp_dot(self, other: Point2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(self, other: Point2) -> f64 {
        (self - other).norm()
    }

    pub fn dist_sq(self, other: Point2) -> f64 {
        let d = self - other;
        d.dot(d)
    }

    /// Unit vector in the same direction, or `None` for the zero vector.
    pub fn normalized(self) -> Option<Point2> {
        let n = self.norm();
        (n > EPS_GEOM).then(|| self * (1.0 / n))
    }

    pub fn lerp(self, other: Point2, t: f64) -> Point2 {
        self + (other - self) * t
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, rhs: Point2) -> Point2 {
        Point2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, rhs: Point2) -> Point2 {
        Point2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Point2;
    fn mul(self, rhs: f64) -> Point2 {
        Point2::new(self.x * rhs, self.y * rhs)
    }
}

/// Classification of a hull-set node.
///
/// `Occupied`, `Unknown` and `BeyondWindow` are the three expansion-failure
/// kinds; `Successful` marks a node that made it into the graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeLabel {
    Successful,
    Occupied,
    Unknown,
    BeyondWindow,
}

impl NodeLabel {
    /// Merge priority when two nodes collapse onto one: higher wins.
    pub fn priority(self) -> u8 {
        match self {
            NodeLabel::Occupied => 3,
            NodeLabel::Successful => 2,
            NodeLabel::Unknown => 1,
            NodeLabel::BeyondWindow => 0,
        }
    }

    /// Whether the robot could continue past a node with this label.
    pub fn is_passable(self) -> bool {
        matches!(self, NodeLabel::Successful | NodeLabel::Unknown)
    }

    /// Keep whichever of `self` and `other` has the higher merge priority.
    pub fn merge(self, other: NodeLabel) -> NodeLabel {
        if other.priority() > self.priority() {
            other
        } else {
            self
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            NodeLabel::Successful => "successful",
            NodeLabel::Occupied => "occupied",
            NodeLabel::Unknown => "unknown",
            NodeLabel::BeyondWindow => "beyond_window",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LabeledNode {
    pub position: Point2,
    pub label: NodeLabel,
}

impl LabeledNode {
    pub const fn new(position: Point2, label: NodeLabel) -> Self {
        Self { position, label }
    }
}

/// Collapse nodes closer than [`EPS_GEOM`] into one, keeping the first
/// position and the highest-priority label. Output order follows first
/// occurrence.
pub fn dedup_nodes(nodes: &[LabeledNode]) -> Vec<LabeledNode> {
    use std::collections::HashMap;

    let cell = |p: Point2| ((p.x / EPS_GEOM).floor() as i64, (p.y / EPS_GEOM).floor() as i64);
    let mut buckets: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    let mut out: Vec<LabeledNode> = Vec::with_capacity(nodes.len());
    for node in nodes {
        let (cx, cy) = cell(node.position);
        let mut hit = None;
        'search: for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(list) = buckets.get(&(cx + dx, cy + dy)) {
                    for &i in list {
                        if out[i].position.dist(node.position) <= EPS_GEOM {
                            hit = Some(i);
                            break 'search;
                        }
                    }
                }
            }
        }
        match hit {
            Some(i) => out[i].label = out[i].label.merge(node.label),
            None => {
                buckets.entry((cx, cy)).or_default().push(out.len());
                out.push(*node);
            }
        }
    }
    out
}
