//! Numerical laboratory for period reproducing kernels on the unit disk
//! minus finitely many holes.

// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod capacity;
pub mod criterion;
pub mod domain;
pub mod fdsolver;
pub mod geometry;
pub mod kernels;
pub mod linalg;
mod multigrid;
pub mod report;
pub mod rho;
pub mod riesz;
mod serde_util;

pub use domain::{CurveBasis, DomainError, DomainSpec, ValidationReport};
pub use geometry::{GeometryError, Hole, MobiusMap, Point};
pub use report::BoundReport;
