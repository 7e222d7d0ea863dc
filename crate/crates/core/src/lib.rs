//! Concave-hull volumetric gain for sampling-based 2D exploration, with the
//! occupancy-count baseline, a grid simulator and an experiment harness.

pub mod geom;
pub mod grid;
pub mod sim;
pub mod rrg;
pub mod gain;
pub mod planner;
pub mod experiment;

pub use experiment::{BenchTable, ExperimentConfig, ExperimentError};
pub use gain::{EdgeRule, ExplorationModel, GainParams, GainReport, GainVariant};
pub use geom::{ConcaveHull, LabeledNode, NodeLabel, Point2};
pub use grid::{CellState, OccupancyGrid};
pub use planner::{run_to_completion, ExplorationLog, Explorer, PlannerConfig, RunStatus, Stage, Summary};
pub use rrg::{Rrg, SlidingWindow};
pub use sim::{builtin_world, World};
