use super::{ConcaveHull, GeomError, Point2, EPS_GEOM};

/// Signed area of the parallelogram spanned by `a - o` and `b - o`.
///
/// Positive for a counter-clockwise turn o → a → b, negative for clockwise,
/// zero when the three points are collinear.
#[inline]
pub fn cross(o: Point2, a: Point2, b: Point2) -> f64 {
    (a - o).perp_dot(b - o)
}

/// Signed distance of `p` from the line through `a` and `b`, snapped to zero
/// inside the collinearity band.
#[inline]
fn side(p: Point2, a: Point2, b: Point2) -> f64 {
    let len = a.dist(b);
    let d = cross(a, b, p) / len;
    if d.abs() <= EPS_GEOM {
        0.0
    } else {
        d
    }
}

/// Strict crossing test for segments AB and CD.
///
/// Both pairs of endpoints must lie strictly on opposite sides of the other
/// segment's supporting line. Touching at an endpoint and collinear overlap
/// are reported as non-crossing. This is the form used when walking hull
/// edges for gain evaluation.
#[inline]
pub fn segments_cross_strict(a: Point2, b: Point2, c: Point2, d: Point2) -> bool {
    side(a, c, d) * side(b, c, d) < 0.0 && side(c, a, b) * side(d, a, b) < 0.0
}

/// Distance from `p` to the closed segment AB.
pub fn point_segment_distance(p: Point2, a: Point2, b: Point2) -> f64 {
    let ab = b - a;
    let len_sq = ab.dot(ab);
    if len_sq == 0.0 {
        return p.dist(a);
    }
    let t = ((p - a).dot(ab) / len_sq).clamp(0.0, 1.0);
    p.dist(a + ab * t)
}

/// Whether the closed segments AB and CD share at least one point.
///
/// A proper crossing is detected with the strict double sign test; the
/// remaining cases (touching, T-junctions, collinear overlap) all put an
/// endpoint of one segment on the other.
pub fn segments_intersect(a: Point2, b: Point2, c: Point2, d: Point2) -> Result<bool, GeomError> {
    if a.dist(b) <= EPS_GEOM {
        return Err(GeomError::DegenerateSegment("AB"));
    }
    if c.dist(d) <= EPS_GEOM {
        return Err(GeomError::DegenerateSegment("CD"));
    }
    if segments_cross_strict(a, b, c, d) {
        return Ok(true);
    }
    Ok(point_segment_distance(a, c, d) <= EPS_GEOM
        || point_segment_distance(b, c, d) <= EPS_GEOM
        || point_segment_distance(c, a, b) <= EPS_GEOM
        || point_segment_distance(d, a, b) <= EPS_GEOM)
}

/// Even-odd (PNPOLY) containment for a closed ring of vertices.
///
/// Points within [`EPS_GEOM`] of any edge count as inside.
pub fn point_in_ring(p: Point2, ring: &[Point2]) -> Result<bool, GeomError> {
    let n = ring.len();
    if n < 3 {
        return Err(GeomError::TooFewVertices(n));
    }
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (vi, vj) = (ring[i], ring[j]);
        if point_segment_distance(p, vi, vj) <= EPS_GEOM {
            return Ok(true);
        }
        if (vi.y > p.y) != (vj.y > p.y) && p.x < (vj.x - vi.x) * (p.y - vi.y) / (vj.y - vi.y) + vi.x {
            inside = !inside;
        }
        j = i;
    }
    Ok(inside)
}

/// [`point_in_ring`] over a hull's boundary.
pub fn point_in_polygon(p: Point2, poly: &ConcaveHull) -> Result<bool, GeomError> {
    let ring: Vec<Point2> = poly.boundary.iter().map(|n| n.position).collect();
    point_in_ring(p, &ring)
}
