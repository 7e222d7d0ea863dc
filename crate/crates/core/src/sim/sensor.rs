use serde::{Deserialize, Serialize};

use super::{Terrain, World, WorldError};
use crate::geom::Point2;
use crate::grid::CellIndex;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum HitKind {
    Solid,
    Penetrable,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hit {
    /// Distance from the pose to where the beam enters the cell.
    pub range: f64,
    pub cell: CellIndex,
    pub kind: HitKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Beam {
    pub angle: f64,
    /// Sorted by range; at most one `Solid` hit, always last.
    pub hits: Vec<Hit>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorScan {
    pub max_range: f64,
    pub beams: Vec<Beam>,
}

/// Cast `n_beams` evenly spaced rays from `pose`. Solid cells stop a beam;
/// penetrable cells are reported and the beam carries on.
pub fn sense(world: &World, pose: Point2, n_beams: usize, max_range: f64) -> Result<SensorScan, WorldError> {
    if world.terrain_at(pose) != Some(Terrain::Free) {
        return Err(WorldError::PoseNotFree { x: pose.x, y: pose.y });
    }
    let geo = world.geometry();
    let beams = (0..n_beams)
        .map(|i| {
            let angle = std::f64::consts::TAU * i as f64 / n_beams as f64;
            let end = pose + Point2::new(angle.cos(), angle.sin()) * max_range;
            let mut hits = Vec::new();
            for (cell, range) in geo.walk(pose, end) {
                match world.terrain(cell) {
                    Terrain::Free => {}
                    Terrain::Penetrable => hits.push(Hit { range, cell, kind: HitKind::Penetrable }),
                    Terrain::Solid => {
                        hits.push(Hit { range, cell, kind: HitKind::Solid });
                        break;
                    }
                }
            }
            Beam { angle, hits }
        })
        .collect();
    Ok(SensorScan { max_range, beams })
}
