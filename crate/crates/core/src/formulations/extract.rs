// SPDX-License-Identifier: MIT OR Apache-2.0

//! Reading fitted functions back from solver output.

use std::fmt;

use crate::backend::{Solution, SolveStatus};
use crate::series::TimeSeries;

use super::{ContinuityMode, FitSpec, PwlFit, VarIndex};

/// Rounding tolerance for binary values; anything farther from both 0 and 1
/// is treated as fractional, not rounded.
const DELTA_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub enum ExtractError {
    /// Solution carries no usable point (wrong status).
    NoSolution { status: SolveStatus },
    /// A membership value is neither 0 nor 1 within tolerance; typically the
    /// input was a relaxed model.
    FractionalAssignment { segment: usize, observation: usize, value: f64 },
    /// Rounded memberships do not form contiguous nondecreasing blocks.
    NonContiguous { observation: usize },
    /// Solver objective disagrees with the recomputed loss.
    ObjectiveMismatch { reported: f64, recomputed: f64 },
}

impl fmt::Display for ExtractError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtractError::NoSolution { status } => {
                write!(f, "solution status {status} carries no incumbent")
            }
            ExtractError::FractionalAssignment { segment, observation, value } => write!(
                f,
                "membership of observation {observation} in segment {segment} is fractional ({value})"
            ),
            ExtractError::NonContiguous { observation } => {
                write!(f, "rounded assignment is non-contiguous at observation {observation}")
            }
            ExtractError::ObjectiveMismatch { reported, recomputed } => write!(
                f,
                "solver objective {reported} disagrees with recomputed loss {recomputed}"
            ),
        }
    }
}

impl std::error::Error for ExtractError {}

/// Extracts the fitted piecewise-linear function from a solve.
///
/// Memberships are rounded with a `1e-6` tolerance. Breakpoints are read
/// from the breakpoint variables when the model has them; otherwise they are
/// recovered from the intercept and slope differences under linearized
/// continuity (clamped into the boundary gap, midpoint for equal slopes) and
/// reported as gap midpoints for discontinuous fits.
pub fn extract_fit(
    solution: &Solution,
    index: &VarIndex,
    series: &TimeSeries<f64>,
    spec: &FitSpec,
) -> Result<PwlFit<f64>, ExtractError> {
    if !matches!(solution.status, SolveStatus::Optimal | SolveStatus::FeasibleLimit) {
        return Err(ExtractError::NoSolution { status: solution.status });
    }
    let k = spec.segments;
    let len = series.len();
    let values = &solution.values;

    let mut assignment = Vec::with_capacity(len);
    for t in 0..len {
        let mut chosen: Option<usize> = None;
        for j in 0..k {
            let v = values[index.delta[j][t]];
            if (v - 1.0).abs() <= DELTA_TOL {
                // The partition rows make a second near-one value impossible
                // unless the point is fractional anyway.
                chosen = Some(j);
            } else if v.abs() > DELTA_TOL {
                return Err(ExtractError::FractionalAssignment {
                    segment: j + 1,
                    observation: t + 1,
                    value: v,
                });
            }
        }
        match chosen {
            Some(j) => assignment.push(j),
            None => {
                return Err(ExtractError::FractionalAssignment {
                    segment: 0,
                    observation: t + 1,
                    value: values[index.delta[0][t]],
                })
            }
        }
    }
    for t in 1..len {
        if assignment[t] < assignment[t - 1] {
            return Err(ExtractError::NonContiguous { observation: t + 1 });
        }
    }

    let slopes: Vec<f64> = index.slope.iter().map(|&v| values[v]).collect();
    let intercepts: Vec<f64> = index.icept.iter().map(|&v| values[v]).collect();

    let breakpoints = if !index.brk.is_empty() {
        let mut brk: Vec<f64> = index.brk.iter().map(|&v| values[v]).collect();
        for j in 1..brk.len() {
            // Enforce exact ordering against solver-tolerance noise.
            if brk[j] < brk[j - 1] {
                brk[j] = brk[j - 1];
            }
        }
        brk
    } else {
        recover_breakpoints(series, spec, &assignment, &slopes, &intercepts)
    };

    let fitted: Vec<f64> = (0..len)
        .map(|t| slopes[assignment[t]] * series.x(t) + intercepts[assignment[t]])
        .collect();
    let objective: f64 = (0..len).map(|t| spec.loss.apply(series.y(t) - fitted[t])).sum();

    // Guard against reading values through a mismatched index: the solver's
    // claimed objective must essentially equal the recomputed loss.
    let scale = 1.0_f64.max(objective.abs());
    if solution.status == SolveStatus::Optimal
        && (solution.objective - objective).abs() > 1e-5 * scale
    {
        return Err(ExtractError::ObjectiveMismatch {
            reported: solution.objective,
            recomputed: objective,
        });
    }

    Ok(PwlFit { slopes, intercepts, breakpoints, assignment, objective, fitted })
}

/// Boundary locations for models without breakpoint variables.
fn recover_breakpoints(
    series: &TimeSeries<f64>,
    spec: &FitSpec,
    assignment: &[usize],
    slopes: &[f64],
    intercepts: &[f64],
) -> Vec<f64> {
    let k = spec.segments;
    let len = series.len();
    let mut brk = vec![series.x(0); k + 1];
    brk[k] = series.x(len - 1);
    // Last observation of each segment; the alternate assignment uses every
    // segment, so each boundary has a well-defined gap.
    for j in 0..k - 1 {
        let last_in = assignment.iter().rposition(|&a| a <= j);
        let gap = match last_in {
            Some(t) if t + 1 < len => (series.x(t), series.x(t + 1)),
            _ => (series.x(len - 1), series.x(len - 1)),
        };
        let midpoint = 0.5 * (gap.0 + gap.1);
        let r = if spec.effective_continuity() == ContinuityMode::AlternateLinear {
            let dm = slopes[j] - slopes[j + 1];
            if dm.abs() > 1e-9 * (1.0 + slopes[j].abs().max(slopes[j + 1].abs())) {
                ((intercepts[j + 1] - intercepts[j]) / dm).clamp(gap.0, gap.1)
            } else {
                midpoint
            }
        } else {
            midpoint
        };
        brk[j + 1] = r.max(brk[j]);
    }
    brk
}
