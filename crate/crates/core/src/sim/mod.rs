//! Ground-truth worlds and the simulated range sensor.

mod sensor;
mod worlds;

use std::collections::VecDeque;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::Point2;
use crate::grid::{CellIndex, CellState, GridGeometry, OccupancyGrid};

pub use sensor::{sense, Beam, Hit, HitKind, SensorScan};
pub use worlds::{builtin_world, builtin_worlds, BUILTIN_NAMES};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WorldError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("world must contain exactly one spawn cell 'S', found {0}")]
    Spawn(usize),
    #[error("boundary cell ({0}, {1}) is not solid")]
    OpenBoundary(usize, usize),
    #[error("world must be at least 3x3 cells")]
    TooSmall,
    #[error("pose ({x:.3}, {y:.3}) is not on a free cell")]
    PoseNotFree { x: f64, y: f64 },
    #[error("unknown builtin world {0:?}")]
    UnknownWorld(String),
    #[error("{0}")]
    Io(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Terrain {
    Free,
    Solid,
    /// Blocks motion but not sensing, e.g. a railing.
    Penetrable,
}

impl Terrain {
    pub fn to_char(self) -> char {
        match self {
            Terrain::Free => '.',
            Terrain::Solid => '#',
            Terrain::Penetrable => '=',
        }
    }
}

/// Axis-aligned named area of a world, used by experiments to ask where the
/// robot went.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub name: String,
    pub lo: Point2,
    pub hi: Point2,
}

impl Region {
    pub fn contains(&self, p: Point2) -> bool {
        p.x >= self.lo.x && p.x <= self.hi.x && p.y >= self.lo.y && p.y <= self.hi.y
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct World {
    pub name: String,
    geometry: GridGeometry,
    cells: Vec<Terrain>,
    pub spawn: Point2,
    pub regions: Vec<Region>,
}

impl World {
    /// Build and validate a world from a row-major terrain array whose first
    /// row is the bottom of the map.
    pub fn new(
        name: impl Into<String>,
        resolution: f64,
        width: usize,
        height: usize,
        cells: Vec<Terrain>,
        spawn: Point2,
    ) -> Result<Self, WorldError> {
        if width < 3 || height < 3 {
            return Err(WorldError::TooSmall);
        }
        assert_eq!(cells.len(), width * height, "terrain array does not match dimensions");
        let world = World {
            name: name.into(),
            geometry: GridGeometry::new(resolution, Point2::new(0.0, 0.0), width, height),
            cells,
            spawn,
            regions: Vec::new(),
        };
        world.validate()?;
        Ok(world)
    }

    fn validate(&self) -> Result<(), WorldError> {
        let (w, h) = (self.geometry.width, self.geometry.height);
        for x in 0..w {
            for y in [0, h - 1] {
                if self.terrain((x, y)) != Terrain::Solid {
                    return Err(WorldError::OpenBoundary(x, y));
                }
            }
        }
        for y in 0..h {
            for x in [0, w - 1] {
                if self.terrain((x, y)) != Terrain::Solid {
                    return Err(WorldError::OpenBoundary(x, y));
                }
            }
        }
        if self.terrain_at(self.spawn) != Some(Terrain::Free) {
            return Err(WorldError::PoseNotFree { x: self.spawn.x, y: self.spawn.y });
        }
        Ok(())
    }

    pub fn geometry(&self) -> &GridGeometry {
        &self.geometry
    }

    pub fn resolution(&self) -> f64 {
        self.geometry.resolution
    }

    pub fn terrain(&self, c: CellIndex) -> Terrain {
        self.cells[self.geometry.index(c)]
    }

    pub fn terrain_at(&self, p: Point2) -> Option<Terrain> {
        self.geometry.cell_of(p).map(|c| self.terrain(c))
    }

    pub fn region(&self, name: &str) -> Option<&Region> {
        self.regions.iter().find(|r| r.name == name)
    }

    /// An empty map sized and placed like this world.
    pub fn blank_map(&self) -> OccupancyGrid {
        OccupancyGrid::new(self.geometry)
    }

    /// Free cells 4-connected to the spawn cell.
    pub fn reachable(&self) -> Vec<bool> {
        let g = &self.geometry;
        let mut seen = vec![false; g.len()];
        let start = g.cell_of(self.spawn).expect("spawn validated in bounds");
        let mut queue = VecDeque::from([start]);
        seen[g.index(start)] = true;
        while let Some((x, y)) = queue.pop_front() {
            let nbrs = [(x + 1, y), (x.wrapping_sub(1), y), (x, y + 1), (x, y.wrapping_sub(1))];
            for c in nbrs {
                if c.0 >= g.width || c.1 >= g.height {
                    continue;
                }
                let i = g.index(c);
                if !seen[i] && self.cells[i] == Terrain::Free {
                    seen[i] = true;
                    queue.push_back(c);
                }
            }
        }
        seen
    }

    pub fn reachable_count(&self) -> usize {
        self.reachable().iter().filter(|&&r| r).count()
    }

    /// Fraction of reachable free cells that `map` knows to be free.
    pub fn coverage(&self, map: &OccupancyGrid, reachable: &[bool]) -> f64 {
        let total = reachable.iter().filter(|&&r| r).count();
        if total == 0 {
            return 1.0;
        }
        let known = reachable
            .iter()
            .zip(map.cells())
            .filter(|(&r, &s)| r && s == CellState::Free)
            .count();
        known as f64 / total as f64
    }

    /// Parse the ASCII world format: a `resolution=<meters>` header followed
    /// by one row of `.#=S` per line, top row first.
    pub fn from_ascii(name: &str, text: &str) -> Result<Self, WorldError> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or(WorldError::Parse { line: 1, msg: "empty file".into() })?;
        let resolution = header
            .trim()
            .strip_prefix("resolution=")
            .and_then(|v| v.trim().parse::<f64>().ok())
            .filter(|r| r.is_finite() && *r > 0.0)
            .ok_or(WorldError::Parse { line: 1, msg: "expected header resolution=<positive meters>".into() })?;
        let rows: Vec<(usize, &str)> = lines.map(|(i, l)| (i + 1, l.trim_end())).collect();
        let height = rows.len();
        let width = rows.first().map_or(0, |(_, r)| r.chars().count());
        if width < 3 || height < 3 {
            return Err(WorldError::TooSmall);
        }
        let mut cells = vec![Terrain::Solid; width * height];
        let mut spawns = Vec::new();
        for (r, &(line, row)) in rows.iter().enumerate() {
            if row.chars().count() != width {
                return Err(WorldError::Parse { line, msg: format!("expected {width} columns") });
            }
            let y = height - 1 - r;
            for (x, ch) in row.chars().enumerate() {
                cells[y * width + x] = match ch {
                    '.' => Terrain::Free,
                    '#' => Terrain::Solid,
                    '=' => Terrain::Penetrable,
                    'S' => {
                        spawns.push((x, y));
                        Terrain::Free
                    }
                    other => return Err(WorldError::Parse { line, msg: format!("unexpected character {other:?}") }),
                };
            }
        }
        if spawns.len() != 1 {
            return Err(WorldError::Spawn(spawns.len()));
        }
        let geo = GridGeometry::new(resolution, Point2::new(0.0, 0.0), width, height);
        let spawn = geo.center(spawns[0]);
        World::new(name, resolution, width, height, cells, spawn)
    }

    pub fn load(path: &std::path::Path) -> Result<Self, WorldError> {
        let text = std::fs::read_to_string(path).map_err(|e| WorldError::Io(format!("{}: {e}", path.display())))?;
        let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("world");
        World::from_ascii(name, &text)
    }

    pub fn to_ascii(&self) -> String {
        let g = &self.geometry;
        let spawn = g.cell_of(self.spawn);
        let mut out = String::with_capacity((g.width + 1) * g.height + 32);
        let _ = writeln!(out, "resolution={}", g.resolution);
        for y in (0..g.height).rev() {
            for x in 0..g.width {
                out.push(if Some((x, y)) == spawn { 'S' } else { self.terrain((x, y)).to_char() });
            }
            out.push('\n');
        }
        out
    }
}
