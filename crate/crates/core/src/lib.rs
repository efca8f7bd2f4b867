// SPDX-License-Identifier: MIT OR Apache-2.0

//! Core library for MIP-based offline change-point detection via piecewise
//! linear fitting.
//!
//! The crate provides:
//!
//! * a solver-agnostic mixed-integer model representation with LP-format
//!   emission ([`model`]),
//! * data-driven parameter and big-M bounds ([`bounds`]),
//! * the Basic, Alternate, and Extended segment-assignment formulations with
//!   pluggable continuity and loss blocks ([`formulations`]),
//! * multidimensional, sparse, and segment-count-regularized variants
//!   ([`extensions`]),
//! * an exact dynamic-programming reference optimizer ([`oracle`]),
//! * exact-arithmetic polyhedral checks for the assignment blocks
//!   ([`polyhedra`]),
//! * a subprocess driver for external LP/MIP solvers ([`backend`]).
//!
//! Numeric kernels are generic over the scalar type through [`num::Real`];
//! concrete `f64` aliases are exported at the crate root.

#![forbid(unsafe_code)]

pub mod backend;
pub mod bounds;
pub mod extensions;
pub mod formulations;
pub mod model;
pub mod num;
pub mod oracle;
pub mod polyhedra;
pub mod series;
pub mod synth;

pub use backend::{Backend, SolDialect, Solution, SolveOptions, SolveStatus, SolverCapabilities};
pub use formulations::{AssignmentKind, ContinuityMode, FitSpec, Loss, PwlFit, VarIndex};
pub use model::{MipModel, ModelBuilder, VarId, VarKind};
pub use series::{MultiSeries, TimeSeries};

/// Exact rational scalar used by the polyhedral checks.
pub type Rational = num_rational::BigRational;

/// Time series over the default `f64` scalar.
pub type Series64 = series::TimeSeries<f64>;
/// Multivariate series over the default `f64` scalar.
pub type MultiSeries64 = series::MultiSeries<f64>;
/// Parameter space over the default `f64` scalar.
pub type ParameterSpace64 = bounds::ParameterSpace<f64>;
/// Big-M table over the default `f64` scalar.
pub type BigMTable64 = bounds::BigMTable<f64>;
/// Assignment-block polyhedron with exact rational data.
pub type RationalPolyhedron = polyhedra::PolyhedronSpec<Rational>;
/// Assignment-block polyhedron with floating-point data.
pub type FloatPolyhedron = polyhedra::PolyhedronSpec<f64>;
