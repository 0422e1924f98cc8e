//! Farey-sector geometry and first-exit statistics for the periodic
//! Lorentz gas with small circular scatterers in the first octant.
//!
//! The crate is layered:
//!
//! * [`farey`]: Farey fractions, neighbors, modular inverses and the four
//!   neighbor-denominator cases.
//! * [`sector`]: the vertical-scatterer model, its exact first-hit sectors and
//!   the associated Farey sums.
//! * [`billiard`]: circular scatterers, first exits, tangent widths and the
//!   folded trajectory.
//! * [`limits`]: the limiting distributions and their identities.
//! * [`stats`]: empirical distributions over angle samples.
//! * [`check`]: the invariant suite run by the command line tool.
//!
//! Batch work goes through [`Execution`], which is data-parallel when the
//! `parallel` feature is enabled and sequential otherwise.

// NaN-rejecting guards are written as `!(x > 0.0)` on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::excessive_precision)]

pub mod billiard;
pub mod check;
pub mod error;
pub mod exec;
pub mod farey;
mod lattice;
pub mod limits;
pub mod quadrature;
pub mod sector;
pub mod stats;

pub use error::{Error, Result};
pub use exec::{with_workers, Execution};
pub use farey::{Case, CaseTag, Fraction, UnitInterval};
