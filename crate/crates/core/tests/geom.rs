mod common;

use common::*;
use hullgain::geom::{
    concave_hull, delaunay, filter_hull, point_in_polygon, point_in_ring, segments_intersect, ConcaveHull,
    LabeledNode, NodeLabel, Point2, EPS_GEOM,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn labeled(points: &[Point2], label: NodeLabel) -> Vec<LabeledNode> {
    points.iter().map(|&p| LabeledNode::new(p, label)).collect()
}

fn undirected_edges(hull: &ConcaveHull, vertices: &[Point2]) -> Vec<(usize, usize)> {
    let idx = |p: Point2| vertices.iter().position(|&v| v == p).unwrap();
    let ring = hull.ring();
    let mut edges: Vec<(usize, usize)> = (0..ring.len())
        .map(|i| {
            let (a, b) = (idx(ring[i]), idx(ring[(i + 1) % ring.len()]));
            (a.min(b), a.max(b))
        })
        .collect();
    edges.sort();
    edges
}

#[test]
fn segment_intersection_matches_oracle_on_random_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..10_000 {
        let p = random_points(&mut rng, 4, 1.0);
        let got = segments_intersect(p[0], p[1], p[2], p[3]).unwrap();
        assert_eq!(got, segments_intersect_oracle(p[0], p[1], p[2], p[3]), "{p:?}");
    }
}

#[test]
fn segment_intersection_on_lattice_matches_oracle() {
    // small integer lattice: lots of touching and collinear cases
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut checked = 0;
    while checked < 5_000 {
        let p: Vec<Point2> =
            (0..4).map(|_| Point2::new(rng.random_range(0..4) as f64, rng.random_range(0..4) as f64)).collect();
        if p[0] == p[1] || p[2] == p[3] {
            continue;
        }
        assert_eq!(
            segments_intersect(p[0], p[1], p[2], p[3]).unwrap(),
            segments_intersect_oracle(p[0], p[1], p[2], p[3]),
            "{p:?}"
        );
        checked += 1;
    }
}

#[test]
fn point_in_polygon_matches_winding_number() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let mut compared = 0;
    for _ in 0..1_000 {
        let n = rng.random_range(3..40);
        let ring = random_star_polygon(&mut rng, n);
        if ring.len() < 3 {
            continue;
        }
        for _ in 0..100 {
            let q = Point2::new(rng.random_range(-0.1..1.1), rng.random_range(-0.1..1.1));
            if near_ring_boundary(q, &ring, 10.0 * EPS_GEOM) {
                continue;
            }
            assert_eq!(point_in_ring(q, &ring).unwrap(), winding_number(q, &ring) != 0);
            compared += 1;
        }
    }
    assert!(compared > 90_000);
}

#[test]
fn point_in_polygon_on_hull_type() {
    let square = ConcaveHull::from_ring(labeled(
        &[Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), Point2::new(1.0, 1.0), Point2::new(0.0, 1.0)],
        NodeLabel::Occupied,
    ));
    assert!(point_in_polygon(Point2::new(0.5, 0.5), &square).unwrap());
    assert!(!point_in_polygon(Point2::new(1.5, 0.5), &square).unwrap());
}

#[test]
fn delaunay_is_empty_circumcircle_on_random_sets() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for round in 0..200 {
        let n = if round == 0 { 200 } else { rng.random_range(3..200) };
        let pts = random_points(&mut rng, n, 100.0);
        let t = delaunay(&pts).unwrap();
        assert_eq!(circumcircle_violations(&t, &t.vertices), 0, "round {round}");
        // Euler: 2n - 2 - h triangles
        let h = t.exterior_edges.len();
        assert_eq!(t.triangles.len(), 2 * t.vertices.len() - 2 - h, "round {round}");
    }
}

#[test]
fn delaunay_handles_clustered_and_gridded_input() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    // grid with jitter around 1e-6: nearly co-circular quads everywhere
    let pts: Vec<Point2> = (0..14)
        .flat_map(|i| (0..14).map(move |j| (i, j)))
        .map(|(i, j)| {
            Point2::new(i as f64 * 0.4 + rng.random_range(-1e-6..1e-6), j as f64 * 0.4 + rng.random_range(-1e-6..1e-6))
        })
        .collect();
    let t = delaunay(&pts).unwrap();
    assert_eq!(circumcircle_violations(&t, &t.vertices), 0);
    assert_eq!(t.triangles.len(), 2 * t.vertices.len() - 2 - t.exterior_edges.len());
}

#[test]
fn square_with_center_follows_reference_trace() {
    let pts = [
        Point2::new(0.0, 0.0),
        Point2::new(1.0, 0.0),
        Point2::new(1.0, 1.0),
        Point2::new(0.0, 1.0),
        Point2::new(0.5, 0.5),
    ];
    let t = delaunay(&pts).unwrap();
    let reference = reference_removal(&t, 0.9);
    assert_eq!(reference, vec![(0, 3), (0, 4), (1, 2), (1, 4), (2, 3)]);
    let hull = concave_hull(&labeled(&pts, NodeLabel::Occupied), 0.9).unwrap();
    assert_eq!(undirected_edges(&hull, &t.vertices), reference);
}

#[test]
fn u_shaped_lattice_follows_the_notch() {
    let mut pts = Vec::new();
    for i in 0..20 {
        for j in 0..20 {
            let in_notch = (7..13).contains(&i) && j >= 6;
            if !in_notch {
                pts.push(Point2::new(i as f64 * 0.5, j as f64 * 0.5));
            }
        }
    }
    let hull = concave_hull(&labeled(&pts, NodeLabel::Occupied), 1.0).unwrap();
    let ring = hull.ring();
    assert!(hull.signed_area2() > 0.0);
    assert!(!ring_self_intersects(&ring));
    for i in 0..hull.len() {
        assert!(hull.edge_length(i) <= 1.0 + 1e-12 || hull.edges[i].regularity_blocked);
    }
    for &p in &pts {
        assert!(point_in_ring(p, &ring).unwrap());
    }
    // the notch interior is carved out
    assert!(!point_in_ring(Point2::new(4.75, 7.0), &ring).unwrap());
    assert!(!point_in_ring(Point2::new(4.75, 9.0), &ring).unwrap());
}

fn check_hull_properties(pts: &[Point2], hull: &ConcaveHull, max_edge: f64) {
    let ring = hull.ring();
    assert!(hull.signed_area2() > 0.0);
    assert!(!ring_self_intersects(&ring), "non-simple hull");
    for i in 0..hull.len() {
        assert!(hull.edge_length(i) <= max_edge || hull.edges[i].regularity_blocked);
    }
    for &p in pts {
        assert!(point_in_ring(p, &ring).unwrap(), "input point {p:?} escaped the hull");
    }
}

#[test]
fn concave_hull_matches_reference_and_properties() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for round in 0..300 {
        let n = rng.random_range(3..200);
        let pts = random_points(&mut rng, n, 10.0);
        let max_edge = rng.random_range(0.5..4.0);
        let t = delaunay(&pts).unwrap();
        let hull = concave_hull(&labeled(&pts, NodeLabel::Occupied), max_edge).unwrap();
        check_hull_properties(&pts, &hull, max_edge);
        assert_eq!(undirected_edges(&hull, &t.vertices), reference_removal(&t, max_edge), "round {round}");
    }
}

#[test]
fn concave_hull_properties_hold_under_input_permutation() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for _ in 0..100 {
        let n = rng.random_range(10..150);
        let mut pts = random_points(&mut rng, n, 10.0);
        let max_edge = rng.random_range(0.8..3.0);
        let a = concave_hull(&labeled(&pts, NodeLabel::Occupied), max_edge).unwrap();
        // reversing the input reverses every tie-break key order
        pts.reverse();
        let b = concave_hull(&labeled(&pts, NodeLabel::Occupied), max_edge).unwrap();
        check_hull_properties(&pts, &a, max_edge);
        check_hull_properties(&pts, &b, max_edge);
    }
}

#[test]
fn infinite_edge_length_gives_convex_hull() {
    let mut rng = ChaCha8Rng::seed_from_u64(51);
    for _ in 0..1_000 {
        let n = rng.random_range(3..120);
        let pts = random_points(&mut rng, n, 50.0);
        let hull = concave_hull(&labeled(&pts, NodeLabel::Successful), f64::INFINITY).unwrap();
        let mut got = hull.ring();
        let mut want = convex_hull_oracle(&pts);
        let key = |a: &Point2, b: &Point2| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y));
        got.sort_by(key);
        want.sort_by(key);
        assert_eq!(got, want);
    }
}

fn random_labeled_ring(rng: &mut ChaCha8Rng) -> ConcaveHull {
    let n = rng.random_range(3..60);
    let ring = random_star_polygon(rng, n);
    let labels = [NodeLabel::Successful, NodeLabel::Occupied, NodeLabel::Unknown, NodeLabel::BeyondWindow];
    let nodes = ring
        .into_iter()
        .map(|p| LabeledNode::new(p * 4.0, labels[rng.random_range(0..4)]))
        .collect();
    ConcaveHull::from_ring(nodes)
}

#[test]
fn filtered_runs_are_wide_and_filter_is_idempotent() {
    let mut rng = ChaCha8Rng::seed_from_u64(61);
    for _ in 0..2_000 {
        let hull = random_labeled_ring(&mut rng);
        let robot_size = rng.random_range(0.05..0.8);
        let once = filter_hull(&hull, robot_size);
        let twice = filter_hull(&once, robot_size);
        assert_eq!(once, twice);
        if once.filter_warning {
            continue;
        }
        if let Some(runs) = once.passable_runs() {
            for (_, _, length) in runs {
                assert!(length >= 2.0 * robot_size);
            }
        }
    }
}

proptest! {
    #[test]
    fn segment_intersection_is_eightfold_symmetric(
        c in proptest::array::uniform8(0.0f64..1.0)
    ) {
        let a = Point2::new(c[0], c[1]);
        let b = Point2::new(c[2], c[3]);
        let p = Point2::new(c[4], c[5]);
        let q = Point2::new(c[6], c[7]);
        prop_assume!(a.dist(b) > 1e-6 && p.dist(q) > 1e-6);
        let r = segments_intersect(a, b, p, q).unwrap();
        for (w, x, y, z) in [(a, b, p, q), (b, a, p, q), (a, b, q, p), (b, a, q, p),
                             (p, q, a, b), (q, p, a, b), (p, q, b, a), (q, p, b, a)] {
            prop_assert_eq!(segments_intersect(w, x, y, z).unwrap(), r);
        }
    }

    #[test]
    fn point_in_polygon_ignores_ring_rotation(seed in any::<u64>(), shift in 0usize..64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.random_range(3..30);
        let ring = random_star_polygon(&mut rng, n);
        prop_assume!(ring.len() >= 3);
        let mut rotated = ring.clone();
        rotated.rotate_left(shift % ring.len());
        for _ in 0..20 {
            let q = Point2::new(rng.random_range(-0.1..1.1), rng.random_range(-0.1..1.1));
            prop_assert_eq!(point_in_ring(q, &ring).unwrap(), point_in_ring(q, &rotated).unwrap());
        }
    }
}
