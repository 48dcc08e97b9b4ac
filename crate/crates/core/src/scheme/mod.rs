//! The modified staggered Lax-Friedrichs scheme.

mod build;
mod cell;
mod fan;
mod params;
mod state;

pub use build::{build_cell, build_cell_vacuum, midtime_profile, CellContext};
pub use cell::{CellCase, CellSolution, Front, FrontKind, Piece, SideCase};
pub use fan::{
    build_fan, fan_size, locus_state_with_z, solve_front, CellFrame, FanDescriptor, FrontSolution,
    InverseShock,
};
pub use params::{Exponents, SchemeParameters};
pub use state::{
    advance, advance_baseline, initial_average, initialize, project_node, run, FarField,
    InitialData, Mode, Problem, ProjectionEvent, RunSummary, StaggeredState, StepOutput,
    StepRecord, StepStats, BOUND_SAFETY, GAUSSIAN_TRUNCATION,
};
