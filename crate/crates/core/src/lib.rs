//! Numerical laboratory for the Zitterbewegung picture of the electron.
//!
//! The crate follows a single pipeline:
//!
//! 1. [`constants`]: Gaussian-CGS constants and the derived electron scales.
//! 2. [`dirac_beat`]: expectation values of velocity and position built from
//!    positive/negative-energy amplitude ensembles, and their beat.
//! 3. [`kinematics`]: rest-frame oscillation superpositions and the two
//!    special trajectories (linear diagonal and cylindrical).
//! 4. [`density`]: time-marginalised charge distributions, both closed-form
//!    and Monte Carlo on 3D grids.
//! 5. [`electrostatics`]: self-energy of those distributions.
//! 6. [`mass_solver`]: the trial-mass fixed point `w_Z(mu) = mu c^2`.
//!
//! Everything is computed in Gaussian CGS units; electron-volts only appear
//! at the I/O boundary.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod constants;
pub mod density;
pub mod dirac_beat;
pub mod electrostatics;
pub mod error;
pub mod io;
pub mod kinematics;
pub mod mass_solver;
pub mod vec3;

pub use constants::{ElectronScales, PhysicalConstants};
pub use density::{DensityGrid, GridSpec};
pub use dirac_beat::{Axis, BeatComponent, CellEnsemble, MomentumCell};
pub use electrostatics::{SelfEnergyMethod, SelfEnergyReport};
pub use error::{Result, ZbwError};
pub use kinematics::{CylinderTrajectory, LinearTrajectory, ModeEnsemble, OscillationMode};
pub use mass_solver::{FixedPointVerdict, GeometryShape, GeometrySpec, VerdictKind};
pub use vec3::Vec3;
