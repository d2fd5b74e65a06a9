//! Time-domain dynamics of the pumped resonator: integration with fluctuation
//! seeding and qubit jumps, region maps, and latch detection.

mod export;
mod integrator;
mod latch;
mod region;

pub use export::write_trajectory;
pub use integrator::{
    check_stiffness, fastest_rate, integrate, Event, EventKind, InputDrive, JumpSchedule,
    RelaxationModel, SimulationConfig, Trajectory,
};
pub use latch::detect_latch;
pub use region::{
    boundary_mismatches, cell_point, map_region, measured_growth_rate, numerical_threshold,
    onset_map, CellFailure, RegionGrid, RegionMap,
};
