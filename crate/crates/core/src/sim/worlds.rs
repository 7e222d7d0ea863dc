//! Built-in synthetic worlds, drawn from rectangles in meters.

use super::{Region, Terrain, World, WorldError};
use crate::geom::Point2;

pub const BUILTIN_NAMES: [&str; 4] = ["empty_room", "corridors", "railing_pocket", "narrow_gap"];

const RES: f64 = 0.2;

struct Canvas {
    width: usize,
    height: usize,
    cells: Vec<Terrain>,
}

impl Canvas {
    fn solid(width_m: f64, height_m: f64) -> Self {
        let width = (width_m / RES).round() as usize;
        let height = (height_m / RES).round() as usize;
        Canvas { width, height, cells: vec![Terrain::Solid; width * height] }
    }

    /// Paint the cells whose centers fall inside `[x0, x1] × [y0, y1]`.
    fn fill(&mut self, x0: f64, y0: f64, x1: f64, y1: f64, t: Terrain) -> &mut Self {
        for y in 0..self.height {
            let cy = (y as f64 + 0.5) * RES;
            if cy < y0 || cy > y1 {
                continue;
            }
            for x in 0..self.width {
                let cx = (x as f64 + 0.5) * RES;
                if cx >= x0 && cx <= x1 {
                    self.cells[y * self.width + x] = t;
                }
            }
        }
        self
    }

    fn carve(&mut self, x0: f64, y0: f64, x1: f64, y1: f64) -> &mut Self {
        self.fill(x0, y0, x1, y1, Terrain::Free)
    }

    fn finish(self, name: &str, spawn: Point2) -> World {
        let (cx, cy) = ((spawn.x / RES).floor(), (spawn.y / RES).floor());
        let spawn = Point2::new((cx + 0.5) * RES, (cy + 0.5) * RES);
        World::new(name, RES, self.width, self.height, self.cells, spawn).expect("builtin world is valid")
    }
}

fn region(name: &str, x0: f64, y0: f64, x1: f64, y1: f64) -> Region {
    Region { name: name.into(), lo: Point2::new(x0, y0), hi: Point2::new(x1, y1) }
}

/// 10 m × 10 m box, spawn in the middle.
fn empty_room() -> World {
    let mut c = Canvas::solid(10.0, 10.0);
    c.carve(0.2, 0.2, 9.8, 9.8);
    c.finish("empty_room", Point2::new(5.0, 5.0))
}

/// Two halves of a room joined by a 0.8 m slot.
fn narrow_gap() -> World {
    let mut c = Canvas::solid(12.0, 8.0);
    c.carve(0.2, 0.2, 11.8, 7.8).fill(5.8, 0.0, 6.2, 8.0, Terrain::Solid).carve(5.8, 3.6, 6.2, 4.4);
    let mut w = c.finish("narrow_gap", Point2::new(2.0, 4.0));
    w.regions.push(region("gap", 5.8, 3.6, 6.2, 4.4));
    w
}

/// A 60 m × 40 m corridor grid with four rooms hanging off it.
fn corridors() -> World {
    let mut c = Canvas::solid(60.0, 40.0);
    for (y0, y1) in [(3.0, 6.0), (18.6, 21.4), (34.0, 37.0)] {
        c.carve(3.0, y0, 57.0, y1);
    }
    for (x0, x1) in [(3.0, 6.0), (28.6, 31.4), (54.0, 57.0)] {
        c.carve(x0, 3.0, x1, 37.0);
    }
    c.carve(8.0, 8.0, 26.6, 16.6).carve(16.0, 6.0, 17.6, 8.0);
    c.carve(33.4, 8.0, 52.0, 16.6).carve(31.4, 11.0, 33.4, 12.6);
    c.carve(8.0, 23.4, 26.6, 32.0).carve(12.0, 32.0, 13.6, 34.0);
    c.carve(33.4, 23.4, 52.0, 32.0).carve(44.0, 21.4, 45.6, 23.4);
    c.finish("corridors", Point2::new(4.5, 4.5))
}

/// A corridor running under a long railing. The area behind the railing can
/// be seen from the corridor but is only entered around the railing's far
/// end, and it leads on to a room that cannot be seen from the corridor.
fn railing_pocket() -> World {
    let mut c = Canvas::solid(52.0, 24.0);
    c.carve(0.2, 0.2, 51.8, 3.4);
    c.carve(4.0, 3.6, 40.0, 7.6).fill(4.0, 3.4, 38.0, 3.6, Terrain::Penetrable).carve(38.0, 3.4, 40.0, 3.6);
    c.carve(4.0, 7.6, 6.0, 11.0).carve(0.2, 11.0, 12.0, 22.0);
    c.carve(44.0, 3.4, 46.0, 5.0).carve(42.0, 5.0, 51.8, 20.0);
    let mut w = c.finish("railing_pocket", Point2::new(2.0, 1.8));
    w.regions = vec![
        region("pocket", 0.0, 3.6, 40.0, 24.0),
        region("hidden_room", 0.0, 7.6, 12.0, 24.0),
        region("checkpoint", 19.0, 1.0, 21.0, 2.6),
    ];
    w
}

pub fn builtin_world(name: &str) -> Result<World, WorldError> {
    match name {
        "empty_room" => Ok(empty_room()),
        "corridors" => Ok(corridors()),
        "railing_pocket" => Ok(railing_pocket()),
        "narrow_gap" => Ok(narrow_gap()),
        other => Err(WorldError::UnknownWorld(other.to_string())),
    }
}

pub fn builtin_worlds() -> Vec<World> {
    BUILTIN_NAMES.iter().map(|n| builtin_world(n).expect("listed builtin")).collect()
}
