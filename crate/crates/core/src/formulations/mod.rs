// SPDX-License-Identifier: MIT OR Apache-2.0

//! The univariate MIP formulations, assembled from reusable constraint
//! blocks.
//!
//! Three segment-assignment blocks are available: the plain partition rows,
//! the contiguity-row variant, and the nested-transition variant that
//! replaces both. Value-assignment and breakpoint-localization rows, two
//! continuity blocks, and the loss objective complete a model. Fitted
//! functions are read back from solver output through [`extract_fit`].

pub(crate) mod blocks;
mod build;
mod extract;

pub use blocks::{
    block_alternate_assignment, block_alternate_continuity, block_basic_assignment,
    block_basic_continuity, block_breakpoint_localization, block_extended_assignment,
    block_value_assignment, objective_block,
};
pub use build::{build_model, BuildError};
pub use extract::{extract_fit, ExtractError};

use serde::{Deserialize, Serialize};

use crate::num::Real;

/// Loss exponent for the fitting objective.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Loss {
    /// Absolute deviations.
    L1,
    /// Squared deviations.
    L2,
}

impl Loss {
    pub fn exponent(self) -> u32 {
        match self {
            Loss::L1 => 1,
            Loss::L2 => 2,
        }
    }

    pub fn apply<R: Real>(self, residual: R) -> R {
        match self {
            Loss::L1 => residual.abs(),
            Loss::L2 => residual * residual,
        }
    }
}

impl std::fmt::Display for Loss {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Loss::L1 => "l1",
            Loss::L2 => "l2",
        })
    }
}

/// Which segment-assignment block a model is built with.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum AssignmentKind {
    Basic,
    Alternate,
    Extended,
}

impl std::fmt::Display for AssignmentKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            AssignmentKind::Basic => "basic",
            AssignmentKind::Alternate => "alternate",
            AssignmentKind::Extended => "extended",
        })
    }
}

/// How continuity across segment boundaries is enforced, if at all.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ContinuityMode {
    None,
    /// Product rows `m_j r_j + c_j = m_{j+1} r_j + c_{j+1}`.
    BasicBilinear,
    /// Linearized rows on intercept differences with activation variables.
    AlternateLinear,
}

impl std::fmt::Display for ContinuityMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ContinuityMode::None => "none",
            ContinuityMode::BasicBilinear => "basic",
            ContinuityMode::AlternateLinear => "alternate",
        })
    }
}

/// Configuration of one fitting model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FitSpec {
    pub segments: usize,
    pub loss: Loss,
    pub continuity: ContinuityMode,
    pub assignment: AssignmentKind,
}

impl FitSpec {
    pub fn new(segments: usize, loss: Loss, continuity: ContinuityMode, assignment: AssignmentKind) -> Self {
        Self { segments, loss, continuity, assignment }
    }

    /// Breakpoint variables ride with the basic and extended assignment
    /// blocks; the alternate block never builds them.
    pub fn has_breakpoint_vars(&self) -> bool {
        matches!(self.assignment, AssignmentKind::Basic | AssignmentKind::Extended)
    }

    /// Continuity degrades to none when there is no interior boundary.
    pub fn effective_continuity(&self) -> ContinuityMode {
        if self.segments < 2 {
            ContinuityMode::None
        } else {
            self.continuity
        }
    }
}

/// Map from the formulation's symbolic variables to model ids.
///
/// Outer index is the segment, inner the observation, matching the block
/// definitions. Tables that a given [`FitSpec`] does not use stay empty.
#[derive(Clone, Debug, Default)]
pub struct VarIndex {
    /// Segment-membership binaries, `K x T`.
    pub delta: Vec<Vec<crate::model::VarId>>,
    /// Nested transition binaries, `(K-1) x T`; extended assignment only.
    pub x_nested: Vec<Vec<crate::model::VarId>>,
    /// Per-segment slopes, length `K`.
    pub slope: Vec<crate::model::VarId>,
    /// Per-segment intercepts, length `K`.
    pub icept: Vec<crate::model::VarId>,
    /// Breakpoints, length `K + 1`; empty for the alternate assignment.
    pub brk: Vec<crate::model::VarId>,
    /// Fitted values, length `T`.
    pub yhat: Vec<crate::model::VarId>,
    /// Residual variables, length `T` (bound variables for the absolute
    /// loss, equality residuals for the squared loss).
    pub resid: Vec<crate::model::VarId>,
    /// Slope-direction indicators, length `K - 1`; linearized continuity only.
    pub gamma: Vec<crate::model::VarId>,
    /// Continuity activation variables, `(K-1) x (T-1)`.
    pub act_pos: Vec<Vec<crate::model::VarId>>,
    pub act_neg: Vec<Vec<crate::model::VarId>>,
}

/// Extracted piecewise-linear fit.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PwlFit<R> {
    pub slopes: Vec<R>,
    pub intercepts: Vec<R>,
    /// `K + 1` boundary locations, first and last pinned to the domain ends.
    pub breakpoints: Vec<R>,
    /// Segment index per observation, 0-based, nondecreasing.
    pub assignment: Vec<usize>,
    /// Total loss of the fit, recomputed from the parameters.
    pub objective: R,
    /// Fitted value per observation.
    pub fitted: Vec<R>,
}

impl<R: Real> PwlFit<R> {
    /// Number of segments the fit was built with.
    pub fn num_segments(&self) -> usize {
        self.slopes.len()
    }

    /// Segments that actually received observations.
    pub fn active_segments(&self) -> usize {
        let mut used = vec![false; self.slopes.len()];
        for &j in &self.assignment {
            used[j] = true;
        }
        used.iter().filter(|&&u| u).count()
    }

    /// Evaluates the fitted function at `x` using half-open intervals
    /// `(r_{j-1}, r_j]`, ties resolved to the left segment.
    pub fn evaluate(&self, x: R) -> R {
        let k = self.slopes.len();
        let mut j = 0;
        while j + 1 < k && x > self.breakpoints[j + 1] {
            j += 1;
        }
        self.slopes[j] * x + self.intercepts[j]
    }

    /// Recomputes the total loss from slopes, intercepts, and assignment.
    pub fn recompute_objective(&self, series: &crate::series::TimeSeries<R>, loss: Loss) -> R {
        (0..series.len())
            .map(|t| {
                let j = self.assignment[t];
                let fitted = self.slopes[j] * series.x(t) + self.intercepts[j];
                loss.apply(series.y(t) - fitted)
            })
            .sum()
    }
}
