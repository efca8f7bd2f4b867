// SPDX-License-Identifier: MIT OR Apache-2.0

//! Library behind the `cpfit` command line: CSV ingestion, the fit /
//! compare / export / analysis commands, and the benchmark harness.

#![forbid(unsafe_code)]

pub mod bench;
pub mod commands;
pub mod ingest;
pub mod report;

/// Exit codes shared by every subcommand: 0 success, 1 claim or agreement
/// failure, 2 configuration or capability error.
pub const EXIT_OK: u8 = 0;
pub const EXIT_CLAIM_FAILED: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;
