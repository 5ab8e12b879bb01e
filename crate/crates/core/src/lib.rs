//! Configuration-space Faddeev–Yakubovsky solver for few-body systems in the
//! S-wave approximation.
//!
//! The crate is organised bottom-up:
//!
//! * [`basis`]: radial grids, cubic Hermite splines, Gauss–Legendre rules and
//!   tensor-product expansions.
//! * [`twobody`]: pair potentials and the two-body bound state.
//! * [`krylov`]: BiCGSTAB, the Kronecker-sum ("tensor trick") preconditioner,
//!   inverse iteration and a dense reference solver.
//! * [`fy3`]: three identical particles, bound states and 1+(2) elastic
//!   scattering.
//! * [`fy4`]: four identical bosons, bound states.
//! * [`chains`]: complete partition chains of an N-body cluster.
//!
//! Units: ħ²/m = 1 throughout, lengths in the mass-scaled Jacobi convention
//! where the pair coordinate is the interparticle distance.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod basis;
pub mod chains;
pub mod error;
pub mod fy3;
pub mod fy4;
pub mod krylov;
pub mod twobody;

pub use error::{FyError, Result};
