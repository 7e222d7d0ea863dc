//! Acceptance criteria 1 to 8. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails. Pass criterion numbers as arguments to run a
//! subset, e.g. `cargo test -p hullgain --test acceptance -- 4 6`.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use common::*;
use hullgain::experiment::{self, bench, ExperimentConfig};
use hullgain::gain::{
    exploration_gain_dsvp, exploration_gain_nbvp, select_best, update_exploration_gains, GainParams, GainVariant,
    Selection,
};
use hullgain::geom::{
    concave_hull, delaunay, point_in_ring, segments_intersect, ConcaveHull, LabeledNode, NodeLabel, Point2, EPS_GEOM,
};
use hullgain::geom::filter_hull;
use hullgain::planner::{Explorer, PlannerConfig, RunStatus, Stage};
use hullgain::rrg::{build_vch, expand, FailureSet, Rrg, SlidingWindow};
use hullgain::sim::{builtin_world, Region};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const ROBOT_SIZE: f64 = 0.6;
const SEEDS: std::ops::RangeInclusive<u64> = 1..=10;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn planner(variant: GainVariant, seed: u64) -> PlannerConfig {
    PlannerConfig { variant, seed, ..Default::default() }
}

fn labeled(points: &[Point2]) -> Vec<LabeledNode> {
    points.iter().map(|&p| LabeledNode::new(p, NodeLabel::Occupied)).collect()
}

fn sorted_edges(hull: &ConcaveHull, vertices: &[Point2]) -> Vec<(usize, usize)> {
    let idx = |p: Point2| vertices.iter().position(|&v| v == p).expect("hull vertex is an input point");
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

/// 10,000 instances per predicate, each with at most 200 points.
fn criterion_1() -> Outcome {
    const N: usize = 10_000;
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1001);

    let mut seg_bad = 0;
    for _ in 0..N {
        let p = random_points(&mut rng, 4, 1.0);
        if segments_intersect(p[0], p[1], p[2], p[3]).unwrap() != segments_intersect_oracle(p[0], p[1], p[2], p[3]) {
            seg_bad += 1;
        }
    }

    let (mut pip_bad, mut pip_n) = (0, 0);
    while pip_n < N {
        let n = rng.random_range(3..=200);
        let ring = random_star_polygon(&mut rng, n);
        if ring.len() < 3 {
            continue;
        }
        let q = Point2::new(rng.random_range(-0.1..1.1), rng.random_range(-0.1..1.1));
        if near_ring_boundary(q, &ring, EPS_GEOM) {
            continue;
        }
        if point_in_ring(q, &ring).unwrap() != (winding_number(q, &ring) != 0) {
            pip_bad += 1;
        }
        pip_n += 1;
    }

    let mut del_bad = 0;
    for _ in 0..N {
        let n = rng.random_range(3..=200);
        let pts = random_points(&mut rng, n, 100.0);
        let t = delaunay(&pts).unwrap();
        if circumcircle_violations(&t, &t.vertices) != 0 {
            del_bad += 1;
        }
    }

    let mut hull_bad = 0;
    for _ in 0..N {
        let n = rng.random_range(3..=200);
        let pts = random_points(&mut rng, n, 10.0);
        let max_edge = rng.random_range(0.5..4.0);
        let t = delaunay(&pts).unwrap();
        let hull = concave_hull(&labeled(&pts), max_edge).unwrap();
        let ring = hull.ring();
        let encloses = pts.iter().all(|&p| point_in_ring(p, &ring).unwrap());
        if sorted_edges(&hull, &t.vertices) != reference_removal(&t, max_edge) || !encloses {
            hull_bad += 1;
        }
    }

    let secs = start.elapsed().as_secs_f64();
    let pass = seg_bad + pip_bad + del_bad + hull_bad == 0 && secs < 60.0;
    outcome(
        pass,
        format!(
            "disagreements over {N} instances each: segments {seg_bad}, point_in_polygon {pip_bad}, \
             delaunay {del_bad}, concave_hull {hull_bad}; {secs:.1} s (limit 60 s)"
        ),
    )
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2002);
    let mut bad = 0;
    for _ in 0..1_000 {
        let n = rng.random_range(3..=200);
        let pts = random_points(&mut rng, n, 50.0);
        let hull = concave_hull(&labeled(&pts), f64::INFINITY).unwrap();
        let key = |a: &Point2, b: &Point2| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y));
        let mut got = hull.ring();
        let mut want = convex_hull_oracle(&pts);
        got.sort_by(key);
        want.sort_by(key);
        if got != want {
            bad += 1;
        }
    }
    outcome(bad == 0, format!("{bad} of 1000 vertex sets differ from the convex hull"))
}

/// Maximal runs of consecutive `label` nodes with their cumulative length,
/// measured from the node before the run to the node after it.
fn label_runs(hull: &ConcaveHull, label: NodeLabel) -> Vec<(Vec<usize>, f64)> {
    let n = hull.len();
    let Some(anchor) = (0..n).find(|&i| hull.boundary[i].label != label) else {
        return vec![((0..n).collect(), (0..n).map(|i| hull.edge_length(i)).sum())];
    };
    let mut runs = Vec::new();
    let mut k = 1;
    while k <= n {
        let i = (anchor + k) % n;
        if hull.boundary[i].label != label {
            k += 1;
            continue;
        }
        let mut nodes = Vec::new();
        let mut length = hull.edge_length((i + n - 1) % n);
        while hull.boundary[(i + nodes.len()) % n].label == label {
            length += hull.edge_length((i + nodes.len()) % n);
            nodes.push((i + nodes.len()) % n);
        }
        k += nodes.len();
        runs.push((nodes, length));
    }
    runs
}

fn criterion_3() -> Outcome {
    // empty room under one window with the map fully known: expand until
    // two consecutive batches add no node, then inspect the filtered hull
    let room = builtin_world("empty_room").unwrap();
    let map = known_map(&room);
    let defaults = PlannerConfig::default();
    let mut room_fail = Vec::new();
    for seed in SEEDS {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let window = SlidingWindow::new(room.spawn, defaults.window_half_extent);
        let mut rrg = Rrg::with_root(room.spawn);
        let mut fail = FailureSet::new(defaults.downsample_res);
        let mut idle = 0;
        while idle < defaults.n_stall {
            let added = expand(&mut rrg, &mut fail, &map, &window, &defaults.expand, &mut rng).added;
            idle = if added == 0 { idle + 1 } else { 0 };
        }
        let vch = build_vch(&rrg, &fail, defaults.downsample_res);
        let hull = filter_hull(&concave_hull(&vch, defaults.hull_max_edge).unwrap(), ROBOT_SIZE);
        let open = match hull.passable_runs() {
            None => 1,
            Some(runs) => runs.iter().filter(|r| r.2 >= 2.0 * ROBOT_SIZE).count(),
        };
        if open > 0 {
            room_fail.push(seed);
        }
    }

    // railing: the tree has come round the railing into the pocket but has
    // not yet spread across it
    let world = builtin_world("railing_pocket").unwrap();
    let pocket = Region { name: "pocket_floor".into(), lo: Point2::new(4.0, 3.6), hi: Point2::new(40.0, 7.6) };
    let mut railing_hits = Vec::new();
    for seed in 1..=5 {
        let mut ex = Explorer::new(&world, planner(GainVariant::Graph, seed)).unwrap();
        let mut found = None;
        while ex.state().stage != Stage::Done && found.is_none() {
            ex.step().unwrap();
            let nodes = ex.state().local_rrg.nodes();
            let entered = nodes.iter().any(|n| pocket.contains(n.position));
            let spread = nodes.iter().any(|n| pocket.contains(n.position) && n.position.x < 10.0);
            if !entered {
                continue;
            }
            if spread {
                break;
            }
            let Some(hull) = ex.last_hull() else { continue };
            let best = label_runs(hull, NodeLabel::Successful)
                .into_iter()
                .filter(|(idx, _)| idx.iter().any(|&i| pocket.contains(hull.boundary[i].position)))
                .map(|(_, len)| len)
                .fold(0.0, f64::max);
            if best > 2.0 * ROBOT_SIZE {
                found = Some((ex.iteration(), best));
            }
        }
        if let Some(f) = found {
            railing_hits.push((seed, f));
        }
    }

    let pass = room_fail.is_empty() && !railing_hits.is_empty();
    let shown: Vec<String> =
        railing_hits.iter().map(|(s, (it, len))| format!("seed {s} iter {it} run {len:.2} m")).collect();
    outcome(
        pass,
        format!(
            "empty_room seeds with an open run >= {:.1} m at stall: {:?}; railing pocket Successful gap > {:.1} m: [{}]",
            2.0 * ROBOT_SIZE,
            room_fail,
            2.0 * ROBOT_SIZE,
            shown.join(", ")
        ),
    )
}

fn criterion_4() -> Outcome {
    let world = builtin_world("railing_pocket").unwrap();
    let pocket = world.region("pocket").unwrap().clone();
    let mut graph_cov = Vec::new();
    let mut unknown_hits = 0;
    let mut unknown_cov = Vec::new();
    for seed in SEEDS {
        let g = Explorer::new(&world, planner(GainVariant::Graph, seed)).unwrap().run().unwrap();
        graph_cov.push(if g.summary.status == RunStatus::Complete { g.summary.coverage } else { 0.0 });
        let u = Explorer::new(&world, planner(GainVariant::Unknown, seed)).unwrap().run().unwrap();
        let revisits = u.summary.relocation_targets.iter().filter(|&&p| pocket.contains(p)).count();
        if u.summary.coverage < 0.99 || revisits >= 1 {
            unknown_hits += 1;
        }
        unknown_cov.push(u.summary.coverage);
    }
    let graph_ok = graph_cov.iter().all(|&c| c >= 0.99);
    let min_g = graph_cov.iter().copied().fold(1.0, f64::min);
    let max_u = unknown_cov.iter().copied().fold(0.0, f64::max);
    outcome(
        graph_ok && unknown_hits >= 8,
        format!(
            "graph coverage min {:.4} (need >= 0.99 on 10/10); unknown omits or revisits the pocket on {unknown_hits}/10 \
             (need >= 8), unknown coverage max {:.4}",
            min_g, max_u
        ),
    )
}

fn cv(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if mean <= 0.0 {
        return 0.0;
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    var.sqrt() / mean
}

fn criterion_5() -> Outcome {
    let world = builtin_world("railing_pocket").unwrap();
    let checkpoint = world.region("checkpoint").unwrap().clone();
    let mut passed = 0;
    let mut shown = Vec::new();
    for seed in SEEDS {
        let cfg = PlannerConfig { compute_both: true, ..planner(GainVariant::Graph, seed) };
        let mut ex = Explorer::new(&world, cfg).unwrap();
        // the first local iteration started past the checkpoint's west
        // edge, still in the corridor in front of the railing
        let at_checkpoint = |p: Point2| p.x >= checkpoint.lo.x && p.x < 38.0 && p.y < 3.4;
        let mut result = None;
        while ex.state().stage != Stage::Done {
            if ex.state().stage == Stage::Local && at_checkpoint(ex.state().robot_pose) {
                let out = ex.local_step().unwrap();
                let g: Vec<f64> = out.report.rows.iter().map(|r| r.graph_gain.unwrap() as f64).collect();
                let u: Vec<f64> = out.report.rows.iter().map(|r| r.unknown_gain.unwrap() as f64).collect();
                result = Some((cv(&g), cv(&u)));
                break;
            }
            ex.step().unwrap();
        }
        match result {
            Some((g, u)) => {
                if g > u {
                    passed += 1;
                }
                shown.push(format!("{g:.2}/{u:.2}"));
            }
            None => shown.push("never reached".into()),
        }
    }
    outcome(passed >= 8, format!("CV graph/unknown per seed [{}]; graph higher on {passed}/10 (need >= 8)", shown.join(" ")))
}

fn criterion_6() -> Outcome {
    let mut cfg = ExperimentConfig::default();
    cfg.set("world", "corridors").unwrap();
    cfg.set("seed", "1").unwrap();
    let table = bench(&cfg, 10).unwrap();
    let per_seed: Vec<String> = table.per_seed.iter().map(|s| format!("{:.2}", s.ratio)).collect();
    outcome(
        table.ratio <= 0.6,
        format!(
            "graph {:.2} ms vs unknown {:.2} ms per iteration over {} iterations, ratio {:.3} (limit 0.6); per seed [{}]",
            table.rows[0].mean * 1e3,
            table.rows[1].mean * 1e3,
            table.rows[0].iterations,
            table.ratio,
            per_seed.join(" ")
        ),
    )
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7007);
    let mut formula_bad = 0;
    let mut worst: f64 = 0.0;
    for _ in 0..1_000 {
        let b = random_branch(&mut rng);
        let lambda = rng.random_range(0.0..1.0);
        for (g, w) in exploration_gain_nbvp(&b, lambda).iter().zip(nbvp_direct(&b, lambda)) {
            worst = worst.max((g - w).abs() / w.abs().max(1e-300));
            if !rel_close(*g, w) {
                formula_bad += 1;
            }
        }
        let theta: f64 = rng.random_range(0.0..std::f64::consts::TAU);
        let prev = Point2::new(theta.cos(), theta.sin());
        let (l1, l2) = (rng.random_range(0.0..2.0), rng.random_range(0.0..1.0));
        let (g, w) = (exploration_gain_dsvp(&b, Some(prev), l1, l2), dsvp_direct(&b, prev, l1, l2));
        worst = worst.max((g - w).abs() / w.abs().max(1e-300));
        if !rel_close(g, w) {
            formula_bad += 1;
        }
    }

    let mut scaling_bad = 0;
    let id = |s: Selection| match s {
        Selection::Best { id, .. } => Some(id),
        Selection::Exhausted { .. } => None,
    };
    for round in 0..1_000 {
        let mut g = random_graph(&mut rng);
        let params = GainParams {
            model: if round % 2 == 0 { hullgain::ExplorationModel::Dsvp } else { hullgain::ExplorationModel::Nbvp },
            ..GainParams::default()
        };
        let prev = Some(Point2::new(0.0, 1.0));
        let sp = update_exploration_gains(&mut g, &params, prev);
        let before = id(select_best(&g, &sp.dist, 0.0));
        let c = rng.random_range(2..=50);
        let mut h = g.clone();
        for n in h.nodes_mut() {
            n.volumetric_gain *= c;
        }
        let sp = update_exploration_gains(&mut h, &params, prev);
        if id(select_best(&h, &sp.dist, 0.0)) != before {
            scaling_bad += 1;
        }
    }
    outcome(
        formula_bad == 0 && scaling_bad == 0,
        format!(
            "formula mismatches {formula_bad} (worst relative error {worst:.1e}, limit 1e-12); \
             argmax changes under scaling {scaling_bad}/1000"
        ),
    )
}

fn criterion_8() -> Outcome {
    let mut mismatches = Vec::new();
    for (world, gain, seed) in [("railing_pocket", "graph", "3"), ("narrow_gap", "unknown", "9"), ("corridors", "graph", "4")] {
        let mut cfg = ExperimentConfig::default();
        cfg.set("world", world).unwrap();
        cfg.set("gain", gain).unwrap();
        cfg.set("seed", seed).unwrap();
        if world == "corridors" {
            cfg.set("max_iterations", "60").unwrap();
        }
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        experiment::run(&cfg, Some(a.path())).unwrap();
        experiment::run(&cfg, Some(b.path())).unwrap();
        let read = |d: &std::path::Path| std::fs::read(d.join(experiment::SUMMARY_FILE)).unwrap();
        if read(a.path()) != read(b.path()) {
            mismatches.push(format!("{world}/{gain}/{seed}"));
        }
    }
    outcome(mismatches.is_empty(), format!("summary.json byte-identical across repeated runs; mismatches {mismatches:?}"))
}

fn main() -> ExitCode {
    let criteria: [(u32, &str, fn() -> Outcome); 8] = [
        (1, "geometry oracles", criterion_1),
        (2, "convex-hull limit", criterion_2),
        (3, "gap property", criterion_3),
        (4, "railing omission", criterion_4),
        (5, "gain-field discrimination", criterion_5),
        (6, "runtime ratio", criterion_6),
        (7, "formula suite", criterion_7),
        (8, "determinism", criterion_8),
    ];
    let wanted: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (n, name, check) in criteria {
        if !wanted.is_empty() && !wanted.contains(&n) {
            continue;
        }
        let t = Instant::now();
        let o = check();
        if !o.pass {
            failed += 1;
        }
        println!(
            "criterion {n} {name}: {} ({}) [{:.1} s]",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            t.elapsed().as_secs_f64()
        );
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
