//! Discretized world: occupancy, observation ledger, partition, rays and paths.

pub mod grid;
pub mod partition;
pub mod path;
pub mod raycast;

pub use grid::{CellState, OccupancyGrid, PathMode};
pub use partition::{partition, Partition, RegionId, SubRegion};
pub use path::{shortest_path, DistanceField, NoPath, Path};
pub use raycast::{line_of_sight, reveal, RayScratch, SensorModel};
