//! Nozzle geometry, the admissibility condition and in-cell profiles.

mod bound;
mod geometry;
mod profile;

pub use bound::{
    admissibility_constants, envelope, minimal_bound, validate_condition, AdmissibilityConstants,
    BoundFunction, InvariantEnvelope, ValidationReport,
};
pub use geometry::{AreaProfile, AreaTable, NozzleGeometry};
pub use profile::{steady_profile, time_correct, Medium, Profile};
