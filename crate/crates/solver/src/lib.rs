// SPDX-License-Identifier: MIT OR Apache-2.0

//! A small LP/MILP/convex-MIQP solver for desk-scale models.
//!
//! The crate reads LP-format files, solves linear relaxations with a
//! simplex engine (interior-point fallback), solves separable convex
//! quadratic relaxations with an interior-point engine, runs its own
//! branch-and-bound over binary variables, and writes annotated solution
//! files. It exists so that model-building pipelines can talk to a solver
//! strictly through files and subprocesses, and double-duties as an
//! independent reader for LP files produced elsewhere.

#![forbid(unsafe_code)]

pub mod branch;
pub mod lp_read;
pub mod milp;
pub mod problem;
pub mod relax;
pub mod sol_write;

pub use branch::{solve_problem, BbConfig, Outcome, SolveStatusKind};
pub use lp_read::{parse_lp, LpParseError};
pub use problem::{Problem, Row, RowSense};
