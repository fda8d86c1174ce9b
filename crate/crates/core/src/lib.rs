//! Group-covariant hyperbolic 2×2 systems of conservation laws.
//!
//! A system is assembled from a one-parameter space-time group, a
//! representation acting on the state space and a scalar entropy on the
//! null-velocity manifold. From those three ingredients the crate derives the
//! conserved state, flux, mathematical entropy and entropy variables, checks
//! the structural identities numerically, and integrates the resulting system
//! with a first-order finite-volume scheme.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod catalog;
pub mod construction;
pub mod error;
pub mod kinematics;
pub mod manifold;
pub mod numdiff;
pub mod parallel;
pub mod solver;
pub mod verify;

pub use construction::{CovariantSystem, EntropyVariables, FiberPoint, State};
pub use error::{Error, Result};
pub use kinematics::{Curvature, GroupSpec, Mat2, RepSpec};
pub use manifold::EntropyDatum;
