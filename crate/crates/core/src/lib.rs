//! Modified Lax-Friedrichs scheme for one-dimensional isentropic gas flow
//! through a nozzle of variable cross section.
//!
//! The crate is organised bottom-up:
//!
//! * [`gas`]: gamma-law equation of state, Riemann invariants and the
//!   mechanical energy pair.
//! * [`riemann`]: exact Riemann solver for the homogeneous system.
//! * [`nozzle`]: cross-section geometry, the bound function `b(x)`, the
//!   invariant envelope and steady in-cell profiles.
//! * [`scheme`]: the staggered-grid scheme with rarefaction fans, front
//!   solves and the near-vacuum cell construction.
//! * [`diagnostics`]: energy, mass and recurrence monitors.
//! * [`cli`]: configuration parsing and the command-line front end.

pub mod cli;
pub mod diagnostics;
pub mod error;
pub mod gas;
pub mod nozzle;
pub mod quadrature;
pub mod riemann;
pub mod roots;
pub mod scheme;

pub use error::{Error, Result};
pub use gas::{GasConstants, GasState, InvariantPair};
