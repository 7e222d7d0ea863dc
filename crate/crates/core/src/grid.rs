//! 2D occupancy grid with monotone cell knowledge, ray traversal and the
//! unknown-cell volumetric gain.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::Point2;
use crate::sim::{HitKind, SensorScan};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("point ({x:.3}, {y:.3}) lies outside the grid")]
    OutOfBounds { x: f64, y: f64 },
    #[error("gain radius must be positive, got {0}")]
    InvalidRadius(f64),
    #[error("malformed grid dump: {0}")]
    Parse(String),
}

/// Column/row of a cell; row 0 is the bottom edge.
pub type CellIndex = (usize, usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CellState {
    Unknown,
    Free,
    Occupied,
}

impl CellState {
    pub fn to_char(self) -> char {
        match self {
            CellState::Unknown => '?',
            CellState::Free => '.',
            CellState::Occupied => '#',
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            '?' => Some(CellState::Unknown),
            '.' => Some(CellState::Free),
            '#' => Some(CellState::Occupied),
            _ => None,
        }
    }
}

/// Placement of a regular lattice of square cells in the world frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridGeometry {
    pub resolution: f64,
    pub origin: Point2,
    pub width: usize,
    pub height: usize,
}

impl GridGeometry {
    pub fn new(resolution: f64, origin: Point2, width: usize, height: usize) -> Self {
        Self { resolution, origin, width, height }
    }

    pub fn len(&self) -> usize {
        self.width * self.height
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn extent(&self) -> Point2 {
        Point2::new(self.width as f64 * self.resolution, self.height as f64 * self.resolution)
    }

    pub fn contains(&self, p: Point2) -> bool {
        self.cell_of(p).is_some()
    }

    pub fn cell_of(&self, p: Point2) -> Option<CellIndex> {
        let gx = ((p.x - self.origin.x) / self.resolution).floor();
        let gy = ((p.y - self.origin.y) / self.resolution).floor();
        if gx >= 0.0 && gy >= 0.0 && (gx as usize) < self.width && (gy as usize) < self.height {
            Some((gx as usize, gy as usize))
        } else {
            None
        }
    }

    pub fn index(&self, c: CellIndex) -> usize {
        c.1 * self.width + c.0
    }

    pub fn center(&self, c: CellIndex) -> Point2 {
        Point2::new(
            self.origin.x + (c.0 as f64 + 0.5) * self.resolution,
            self.origin.y + (c.1 as f64 + 0.5) * self.resolution,
        )
    }

    /// Cell index range `[lo, hi]` overlapping the axis-aligned box, clamped
    /// to the grid. `None` if the box misses the grid entirely.
    pub fn cells_in_box(&self, lo: Point2, hi: Point2) -> Option<(CellIndex, CellIndex)> {
        let to_cell = |v: f64, o: f64| ((v - o) / self.resolution).floor();
        let (x0, y0) = (to_cell(lo.x, self.origin.x).max(0.0), to_cell(lo.y, self.origin.y).max(0.0));
        let x1 = to_cell(hi.x, self.origin.x).min(self.width as f64 - 1.0);
        let y1 = to_cell(hi.y, self.origin.y).min(self.height as f64 - 1.0);
        (x0 <= x1 && y0 <= y1).then(|| ((x0 as usize, y0 as usize), (x1 as usize, y1 as usize)))
    }

    /// Cells crossed by the segment `from → to`, in order. Stops early if the
    /// segment leaves the grid.
    pub fn walk(&self, from: Point2, to: Point2) -> CellWalker {
        CellWalker::new(self, from, to)
    }
}

/// Amanatides–Woo traversal over a segment. Yields each cell together with
/// the distance from the segment start at which the segment enters it.
#[derive(Debug, Clone)]
pub struct CellWalker {
    width: i64,
    height: i64,
    cell: (i64, i64),
    step: (i64, i64),
    remaining: (i64, i64),
    t_max: (f64, f64),
    t_delta: (f64, f64),
    t_enter: f64,
    length: f64,
    done: bool,
}

impl CellWalker {
    fn new(geo: &GridGeometry, from: Point2, to: Point2) -> Self {
        let g0 = ((from.x - geo.origin.x) / geo.resolution, (from.y - geo.origin.y) / geo.resolution);
        let g1 = ((to.x - geo.origin.x) / geo.resolution, (to.y - geo.origin.y) / geo.resolution);
        let cell = (g0.0.floor() as i64, g0.1.floor() as i64);
        let end = (g1.0.floor() as i64, g1.1.floor() as i64);
        let (dx, dy) = (g1.0 - g0.0, g1.1 - g0.1);
        let axis = |d: f64, g: f64, c: i64| -> (i64, f64, f64) {
            if d > 0.0 {
                (1, ((c + 1) as f64 - g) / d, 1.0 / d)
            } else if d < 0.0 {
                (-1, (g - c as f64) / -d, -1.0 / d)
            } else {
                (0, f64::INFINITY, f64::INFINITY)
            }
        };
        let (sx, tmx, tdx) = axis(dx, g0.0, cell.0);
        let (sy, tmy, tdy) = axis(dy, g0.1, cell.1);
        let mut walker = CellWalker {
            width: geo.width as i64,
            height: geo.height as i64,
            cell,
            step: (sx, sy),
            remaining: ((end.0 - cell.0).abs(), (end.1 - cell.1).abs()),
            t_max: (tmx, tmy),
            t_delta: (tdx, tdy),
            t_enter: 0.0,
            length: from.dist(to),
            done: false,
        };
        walker.done = !walker.in_bounds();
        walker
    }

    fn in_bounds(&self) -> bool {
        self.cell.0 >= 0 && self.cell.1 >= 0 && self.cell.0 < self.width && self.cell.1 < self.height
    }
}

impl Iterator for CellWalker {
    /// Cell and the distance along the segment where it is entered.
    type Item = (CellIndex, f64);

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        let out = ((self.cell.0 as usize, self.cell.1 as usize), self.t_enter * self.length);
        let (rx, ry) = self.remaining;
        if rx == 0 && ry == 0 {
            self.done = true;
            return Some(out);
        }
        // ties step along x first; exhausting one axis forces the other
        if ry == 0 || (rx > 0 && self.t_max.0 <= self.t_max.1) {
            self.t_enter = self.t_max.0.min(1.0);
            self.t_max.0 += self.t_delta.0;
            self.cell.0 += self.step.0;
            self.remaining.0 -= 1;
        } else {
            self.t_enter = self.t_max.1.min(1.0);
            self.t_max.1 += self.t_delta.1;
            self.cell.1 += self.step.1;
            self.remaining.1 -= 1;
        }
        if !self.in_bounds() {
            self.done = true;
        }
        Some(out)
    }
}

/// The robot's map.
///
/// Knowledge is monotone: `Unknown` may become `Free` or `Occupied`, `Free`
/// may become `Occupied`, and nothing ever reverts. Occupied cells that the
/// sensor has seen through are remembered as see-through: they block motion
/// but not line of sight.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyGrid {
    geometry: GridGeometry,
    cells: Vec<CellState>,
    see_through: Vec<bool>,
}

impl OccupancyGrid {
    pub fn new(geometry: GridGeometry) -> Self {
        Self { cells: vec![CellState::Unknown; geometry.len()], see_through: vec![false; geometry.len()], geometry }
    }

    pub fn geometry(&self) -> &GridGeometry {
        &self.geometry
    }

    pub fn resolution(&self) -> f64 {
        self.geometry.resolution
    }

    pub fn state(&self, c: CellIndex) -> CellState {
        self.cells[self.geometry.index(c)]
    }

    pub fn state_at(&self, p: Point2) -> Option<CellState> {
        self.geometry.cell_of(p).map(|c| self.state(c))
    }

    /// Record an observation, respecting monotone knowledge. Returns whether
    /// the cell changed.
    pub fn observe(&mut self, c: CellIndex, state: CellState) -> bool {
        let i = self.geometry.index(c);
        let next = match (self.cells[i], state) {
            (CellState::Occupied, _) | (_, CellState::Unknown) => return false,
            (_, CellState::Occupied) => CellState::Occupied,
            (_, CellState::Free) => CellState::Free,
        };
        let changed = self.cells[i] != next;
        self.cells[i] = next;
        changed
    }

    /// Mark an occupied cell that beams pass through.
    pub fn observe_see_through(&mut self, c: CellIndex) -> bool {
        let changed = self.observe(c, CellState::Occupied);
        self.see_through[self.geometry.index(c)] = true;
        changed
    }

    pub fn is_see_through(&self, c: CellIndex) -> bool {
        self.see_through[self.geometry.index(c)]
    }

    fn blocks_sight(&self, c: CellIndex) -> bool {
        let i = self.geometry.index(c);
        self.cells[i] == CellState::Occupied && !self.see_through[i]
    }

    pub fn count(&self, state: CellState) -> usize {
        self.cells.iter().filter(|&&s| s == state).count()
    }

    pub fn cells(&self) -> &[CellState] {
        &self.cells
    }

    fn check_bounds(&self, p: Point2) -> Result<(), GridError> {
        if self.geometry.contains(p) {
            Ok(())
        } else {
            Err(GridError::OutOfBounds { x: p.x, y: p.y })
        }
    }

    /// Cells crossed by the segment, both endpoint cells included.
    pub fn raycast(&self, from: Point2, to: Point2) -> Result<Vec<CellIndex>, GridError> {
        self.check_bounds(from)?;
        self.check_bounds(to)?;
        Ok(self.geometry.walk(from, to).map(|(c, _)| c).collect())
    }

    /// Line of sight: no crossed cell is an opaque `Occupied` cell. Unknown
    /// and see-through cells do not block.
    pub fn is_line_free(&self, a: Point2, b: Point2) -> Result<bool, GridError> {
        self.check_bounds(a)?;
        self.check_bounds(b)?;
        Ok(self.line_free_unchecked(a, b))
    }

    fn line_free_unchecked(&self, a: Point2, b: Point2) -> bool {
        self.geometry.walk(a, b).all(|(c, _)| !self.blocks_sight(c))
    }

    /// First crossed cell that is not known `Free`, with its state and the
    /// distance from `a` at which the segment enters it.
    pub fn first_non_free(&self, a: Point2, b: Point2) -> Result<Option<(CellIndex, CellState, f64)>, GridError> {
        self.check_bounds(a)?;
        self.check_bounds(b)?;
        Ok(self
            .geometry
            .walk(a, b)
            .map(|(c, d)| (c, self.state(c), d))
            .find(|&(_, s, _)| s != CellState::Free))
    }

    /// Every crossed cell is known `Free`.
    pub fn is_line_known_free(&self, a: Point2, b: Point2) -> Result<bool, GridError> {
        Ok(self.first_non_free(a, b)?.is_none())
    }

    /// Fold a sensor scan taken at `pose` into the map. Returns the number of
    /// cells whose state changed.
    pub fn integrate_scan(&mut self, pose: Point2, scan: &SensorScan) -> Result<usize, GridError> {
        self.check_bounds(pose)?;
        let mut changed = 0;
        for beam in &scan.beams {
            let end = pose + Point2::new(beam.angle.cos(), beam.angle.sin()) * scan.max_range;
            let mut hits = beam.hits.iter().peekable();
            for (cell, _) in self.geometry.walk(pose, end) {
                match hits.peek() {
                    Some(hit) if hit.cell == cell => {
                        if hit.kind == HitKind::Solid {
                            changed += usize::from(self.observe(cell, CellState::Occupied));
                            break;
                        }
                        changed += usize::from(self.observe_see_through(cell));
                        hits.next();
                    }
                    _ => changed += usize::from(self.observe(cell, CellState::Free)),
                }
            }
        }
        Ok(changed)
    }

    /// Unknown cells within `radius` of `node` (by cell center) that are in
    /// line of sight of it.
    pub fn unknown_gain(&self, node: Point2, radius: f64) -> Result<u32, GridError> {
        self.check_bounds(node)?;
        if radius.is_nan() || radius <= 0.0 {
            return Err(GridError::InvalidRadius(radius));
        }
        let reach = Point2::new(radius, radius);
        let Some((lo, hi)) = self.geometry.cells_in_box(node - reach, node + reach) else {
            return Ok(0);
        };
        let r2 = radius * radius;
        let mut gain = 0;
        for y in lo.1..=hi.1 {
            for x in lo.0..=hi.0 {
                if self.state((x, y)) != CellState::Unknown {
                    continue;
                }
                let center = self.geometry.center((x, y));
                if center.dist_sq(node) <= r2 && self.line_free_unchecked(node, center) {
                    gain += 1;
                }
            }
        }
        Ok(gain)
    }

    /// One character per cell ('?', '.', '#', and '=' for see-through
    /// occupied cells), top row first.
    pub fn to_ascii(&self) -> String {
        let g = &self.geometry;
        let mut out = String::with_capacity((g.width + 1) * g.height + 64);
        let _ = writeln!(out, "resolution={} origin={},{} size={}x{}", g.resolution, g.origin.x, g.origin.y, g.width, g.height);
        for y in (0..g.height).rev() {
            out.extend((0..g.width).map(|x| match self.is_see_through((x, y)) {
                true => '=',
                false => self.state((x, y)).to_char(),
            }));
            out.push('\n');
        }
        out
    }

    pub fn from_ascii(text: &str) -> Result<Self, GridError> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| GridError::Parse("empty input".into()))?;
        let mut resolution = None;
        let mut origin = Point2::default();
        for field in header.split_whitespace() {
            let (k, v) = field.split_once('=').ok_or_else(|| GridError::Parse(format!("bad header field {field:?}")))?;
            let num = |s: &str| s.parse::<f64>().map_err(|e| GridError::Parse(format!("{k}: {e}")));
            match k {
                "resolution" => resolution = Some(num(v)?),
                "origin" => {
                    let (x, y) = v.split_once(',').ok_or_else(|| GridError::Parse("origin needs x,y".into()))?;
                    origin = Point2::new(num(x)?, num(y)?);
                }
                "size" => {}
                _ => return Err(GridError::Parse(format!("unknown header key {k:?}"))),
            }
        }
        let resolution = resolution.ok_or_else(|| GridError::Parse("missing resolution".into()))?;
        let rows: Vec<&str> = lines.filter(|l| !l.is_empty()).collect();
        let height = rows.len();
        let width = rows.first().map_or(0, |r| r.chars().count());
        let mut grid = OccupancyGrid::new(GridGeometry::new(resolution, origin, width, height));
        for (r, row) in rows.iter().enumerate() {
            if row.chars().count() != width {
                return Err(GridError::Parse(format!("row {r} has a different width")));
            }
            let y = height - 1 - r;
            for (x, ch) in row.chars().enumerate() {
                if ch == '=' {
                    grid.observe_see_through((x, y));
                    continue;
                }
                let s = CellState::from_char(ch).ok_or_else(|| GridError::Parse(format!("bad cell char {ch:?}")))?;
                grid.observe((x, y), s);
            }
        }
        Ok(grid)
    }
}
