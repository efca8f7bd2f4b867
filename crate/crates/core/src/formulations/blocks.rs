// SPDX-License-Identifier: MIT OR Apache-2.0

//! Reusable constraint blocks.
//!
//! Each block appends rows to a model whose variables were already created
//! (see [`super::build_model`]) and returns the labels of the added rows.
//! Deactivation of indicator-gated rows always uses the big-M tables from
//! [`crate::bounds`].

use crate::bounds::BigMTable;
use crate::model::{AffineExpr, MipModel, Sense};
use crate::series::TimeSeries;

use super::{Loss, VarIndex};

/// Partition rows: every observation belongs to exactly one segment.
pub fn block_basic_assignment(
    model: &mut MipModel,
    index: &VarIndex,
    segments: usize,
    len: usize,
) -> Vec<String> {
    let mut labels = Vec::with_capacity(len);
    for t in 0..len {
        let mut row = AffineExpr::new();
        for j in 0..segments {
            row.add(index.delta[j][t], 1.0);
        }
        labels.push(model.add_constraint(format!("assign_t{}", t + 1), row, Sense::Eq, 1.0));
    }
    labels
}

/// Partition rows plus pairwise contiguity rows and monotone first/last
/// segment rows. With a single segment only the partition rows remain.
pub fn block_alternate_assignment(
    model: &mut MipModel,
    index: &VarIndex,
    segments: usize,
    len: usize,
) -> Vec<String> {
    let mut labels = block_basic_assignment(model, index, segments, len);
    if segments < 2 {
        return labels;
    }
    for j in 0..segments - 1 {
        for t in 0..len - 1 {
            // d[j+1][t+1] <= d[j][t] + d[j+1][t]
            let row = AffineExpr::term(index.delta[j + 1][t + 1], 1.0)
                .plus(index.delta[j][t], -1.0)
                .plus(index.delta[j + 1][t], -1.0);
            labels.push(model.add_constraint(
                format!("contig_j{}_t{}", j + 1, t + 1),
                row,
                Sense::Le,
                0.0,
            ));
        }
    }
    for t in 0..len - 1 {
        let first = AffineExpr::term(index.delta[0][t + 1], 1.0).plus(index.delta[0][t], -1.0);
        labels.push(model.add_constraint(format!("first_mono_t{}", t + 1), first, Sense::Le, 0.0));
        let last = AffineExpr::term(index.delta[segments - 1][t + 1], 1.0)
            .plus(index.delta[segments - 1][t], -1.0);
        labels.push(model.add_constraint(format!("last_mono_t{}", t + 1), last, Sense::Ge, 0.0));
    }
    labels
}

/// Segment membership from nested, temporally nonincreasing binaries: the
/// 1-to-0 transition of row `j` marks where segment `j + 1` begins.
pub fn block_extended_assignment(
    model: &mut MipModel,
    index: &VarIndex,
    segments: usize,
    len: usize,
) -> Vec<String> {
    let mut labels = Vec::new();
    if segments < 2 {
        for t in 0..len {
            let row = AffineExpr::term(index.delta[0][t], 1.0);
            labels.push(model.add_constraint(format!("assign_t{}", t + 1), row, Sense::Eq, 1.0));
        }
        return labels;
    }
    for t in 0..len {
        for j in 0..segments {
            let (row, rhs) = if j == 0 {
                (
                    AffineExpr::term(index.delta[0][t], 1.0).plus(index.x_nested[0][t], -1.0),
                    0.0,
                )
            } else if j < segments - 1 {
                (
                    AffineExpr::term(index.delta[j][t], 1.0)
                        .plus(index.x_nested[j][t], -1.0)
                        .plus(index.x_nested[j - 1][t], 1.0),
                    0.0,
                )
            } else {
                (
                    AffineExpr::term(index.delta[segments - 1][t], 1.0)
                        .plus(index.x_nested[segments - 2][t], 1.0),
                    1.0,
                )
            };
            labels.push(model.add_constraint(
                format!("xdef_j{}_t{}", j + 1, t + 1),
                row,
                Sense::Eq,
                rhs,
            ));
        }
    }
    for j in 0..segments - 1 {
        for t in 0..len - 1 {
            let row = AffineExpr::term(index.x_nested[j][t], 1.0)
                .plus(index.x_nested[j][t + 1], -1.0);
            labels.push(model.add_constraint(
                format!("xmono_j{}_t{}", j + 1, t + 1),
                row,
                Sense::Ge,
                0.0,
            ));
        }
    }
    for j in 0..segments.saturating_sub(2) {
        for t in 0..len {
            let row = AffineExpr::term(index.x_nested[j + 1][t], 1.0)
                .plus(index.x_nested[j][t], -1.0);
            labels.push(model.add_constraint(
                format!("xnest_j{}_t{}", j + 1, t + 1),
                row,
                Sense::Ge,
                0.0,
            ));
        }
    }
    labels
}

/// Value-assignment rows: the fitted value coincides with segment `j`'s line
/// whenever observation `t` is assigned to it.
pub fn block_value_assignment(
    model: &mut MipModel,
    index: &VarIndex,
    series: &TimeSeries<f64>,
    bigm: &BigMTable<f64>,
) -> Vec<String> {
    value_rows(model, index, series, bigm, "")
}

/// Multidimensional builds reuse the rows with a dimension label suffix.
pub(crate) fn value_rows(
    model: &mut MipModel,
    index: &VarIndex,
    series: &TimeSeries<f64>,
    bigm: &BigMTable<f64>,
    suffix: &str,
) -> Vec<String> {
    let segments = index.delta.len();
    let mut labels = Vec::with_capacity(2 * segments * series.len());
    for j in 0..segments {
        for t in 0..series.len() {
            let x = series.x(t);
            let m1 = bigm.value[t];
            // m_j x_t + c_j - yh_t + M1 d <= M1
            let up = AffineExpr::term(index.slope[j], x)
                .plus(index.icept[j], 1.0)
                .plus(index.yhat[t], -1.0)
                .plus(index.delta[j][t], m1);
            labels.push(model.add_constraint(
                format!("val_hi_j{}_t{}{suffix}", j + 1, t + 1),
                up,
                Sense::Le,
                m1,
            ));
            // m_j x_t + c_j - yh_t - M1 d >= -M1
            let lo = AffineExpr::term(index.slope[j], x)
                .plus(index.icept[j], 1.0)
                .plus(index.yhat[t], -1.0)
                .plus(index.delta[j][t], -m1);
            labels.push(model.add_constraint(
                format!("val_lo_j{}_t{}{suffix}", j + 1, t + 1),
                lo,
                Sense::Ge,
                -m1,
            ));
        }
    }
    labels
}

/// Breakpoint-localization rows: assigned observations lie between their
/// segment's breakpoints, and breakpoints are ordered. The first and last
/// breakpoints are pinned to the domain ends through their variable bounds.
pub fn block_breakpoint_localization(
    model: &mut MipModel,
    index: &VarIndex,
    series: &TimeSeries<f64>,
    bigm: &BigMTable<f64>,
) -> Vec<String> {
    let segments = index.delta.len();
    let mut labels = Vec::new();
    for j in 0..segments {
        for t in 0..series.len() {
            let x = series.x(t);
            // x_t <= r_j + M2 (1 - d)  ->  M2 d - r_j <= M2 - x_t
            let m2 = bigm.loc_upper[t];
            let up = AffineExpr::term(index.delta[j][t], m2).plus(index.brk[j + 1], -1.0);
            labels.push(model.add_constraint(
                format!("loc_hi_j{}_t{}", j + 1, t + 1),
                up,
                Sense::Le,
                m2 - x,
            ));
            // x_t >= r_{j-1} - M3 (1 - d)  ->  r_{j-1} + M3 d <= x_t + M3
            let m3 = bigm.loc_lower[t];
            let lo = AffineExpr::term(index.brk[j], 1.0).plus(index.delta[j][t], m3);
            labels.push(model.add_constraint(
                format!("loc_lo_j{}_t{}", j + 1, t + 1),
                lo,
                Sense::Le,
                x + m3,
            ));
        }
    }
    for j in 0..segments {
        let row = AffineExpr::term(index.brk[j], 1.0).plus(index.brk[j + 1], -1.0);
        labels.push(model.add_constraint(format!("brk_ord_{j}"), row, Sense::Le, 0.0));
    }
    labels
}

/// Product continuity rows `m_j r_j + c_j = m_{j+1} r_j + c_{j+1}`.
///
/// Adds no rows for a single segment. Flags the model as bilinear.
pub fn block_basic_continuity(model: &mut MipModel, index: &VarIndex, segments: usize) -> Vec<String> {
    let mut labels = Vec::new();
    for j in 0..segments.saturating_sub(1) {
        let lhs = AffineExpr::term(index.icept[j], 1.0).plus(index.icept[j + 1], -1.0);
        let bilinear = vec![
            (index.slope[j], index.brk[j + 1], 1.0),
            (index.slope[j + 1], index.brk[j + 1], -1.0),
        ];
        labels.push(model.add_bilinear_constraint(
            format!("cont_j{}", j + 1),
            lhs,
            bilinear,
            Sense::Eq,
            0.0,
        ));
    }
    labels
}

/// Linearized continuity: intercept differences are pinned between the
/// slope-difference products at consecutive observations whenever a boundary
/// sits there, with the active side selected by the slope-direction
/// indicator. Adds no rows for a single segment.
pub fn block_alternate_continuity(
    model: &mut MipModel,
    index: &VarIndex,
    series: &TimeSeries<f64>,
    bigm: &BigMTable<f64>,
    segments: usize,
) -> Vec<String> {
    let mut labels = Vec::new();
    if segments < 2 {
        return labels;
    }
    for j in 0..segments - 1 {
        for t in 0..series.len() - 1 {
            let x_t = series.x(t);
            let x_n = series.x(t + 1);
            let m4_t = bigm.continuity[t];
            let m4_n = bigm.continuity[t + 1];
            let diff = |mult: f64| {
                // c_{j+1} - c_j - x (m_j - m_{j+1}) with x = mult
                AffineExpr::term(index.icept[j + 1], 1.0)
                    .plus(index.icept[j], -1.0)
                    .plus(index.slope[j], -mult)
                    .plus(index.slope[j + 1], mult)
            };
            // >= -M4_t (1 - ap):  diff(x_t) - M4_t ap >= -M4_t
            labels.push(model.add_constraint(
                format!("bp_lo_j{}_t{}", j + 1, t + 1),
                diff(x_t).plus(index.act_pos[j][t], -m4_t),
                Sense::Ge,
                -m4_t,
            ));
            // <= M4_{t+1} (1 - ap): diff(x_{t+1}) + M4_{t+1} ap <= M4_{t+1}
            labels.push(model.add_constraint(
                format!("bp_hi_j{}_t{}", j + 1, t + 1),
                diff(x_n).plus(index.act_pos[j][t], m4_n),
                Sense::Le,
                m4_n,
            ));
            // <= M4_t (1 - an): diff(x_t) + M4_t an <= M4_t
            labels.push(model.add_constraint(
                format!("bn_hi_j{}_t{}", j + 1, t + 1),
                diff(x_t).plus(index.act_neg[j][t], m4_t),
                Sense::Le,
                m4_t,
            ));
            // >= -M4_{t+1} (1 - an): diff(x_{t+1}) - M4_{t+1} an >= -M4_{t+1}
            labels.push(model.add_constraint(
                format!("bn_lo_j{}_t{}", j + 1, t + 1),
                diff(x_n).plus(index.act_neg[j][t], -m4_n),
                Sense::Ge,
                -m4_n,
            ));
            // d[j][t] + d[j+1][t+1] + gam_j - ap <= 2
            labels.push(model.add_constraint(
                format!("act_pos_j{}_t{}", j + 1, t + 1),
                AffineExpr::term(index.delta[j][t], 1.0)
                    .plus(index.delta[j + 1][t + 1], 1.0)
                    .plus(index.gamma[j], 1.0)
                    .plus(index.act_pos[j][t], -1.0),
                Sense::Le,
                2.0,
            ));
            // d[j][t] + d[j+1][t+1] - gam_j - an <= 1
            labels.push(model.add_constraint(
                format!("act_neg_j{}_t{}", j + 1, t + 1),
                AffineExpr::term(index.delta[j][t], 1.0)
                    .plus(index.delta[j + 1][t + 1], 1.0)
                    .plus(index.gamma[j], -1.0)
                    .plus(index.act_neg[j][t], -1.0),
                Sense::Le,
                1.0,
            ));
        }
    }
    labels
}

/// Residual rows and the loss objective.
///
/// Absolute loss: nonnegative bound variables with `eps_t >= +/-(y_t - yh_t)`
/// and objective `sum eps_t`. Squared loss: free residuals pinned by
/// equality, objective `sum res_t^2`.
pub fn objective_block(
    model: &mut MipModel,
    index: &VarIndex,
    series: &TimeSeries<f64>,
    loss: Loss,
) -> Vec<String> {
    let (labels, linear, quad) = residual_rows(model, index, series, loss, "");
    model.set_objective(linear, quad);
    labels
}

/// Residual rows plus the objective contribution, without installing the
/// objective; multidimensional builds sum contributions across dimensions.
pub(crate) fn residual_rows(
    model: &mut MipModel,
    index: &VarIndex,
    series: &TimeSeries<f64>,
    loss: Loss,
    suffix: &str,
) -> (Vec<String>, AffineExpr, Vec<(crate::model::VarId, crate::model::VarId, f64)>) {
    let mut labels = Vec::new();
    let mut linear = AffineExpr::new();
    let mut quad = Vec::new();
    match loss {
        Loss::L1 => {
            for t in 0..series.len() {
                let y = series.y(t);
                // eps_t + yh_t >= y_t
                labels.push(model.add_constraint(
                    format!("res_hi_t{}{suffix}", t + 1),
                    AffineExpr::term(index.resid[t], 1.0).plus(index.yhat[t], 1.0),
                    Sense::Ge,
                    y,
                ));
                // eps_t - yh_t >= -y_t
                labels.push(model.add_constraint(
                    format!("res_lo_t{}{suffix}", t + 1),
                    AffineExpr::term(index.resid[t], 1.0).plus(index.yhat[t], -1.0),
                    Sense::Ge,
                    -y,
                ));
                linear.add(index.resid[t], 1.0);
            }
        }
        Loss::L2 => {
            for t in 0..series.len() {
                // res_t + yh_t = y_t
                labels.push(model.add_constraint(
                    format!("res_eq_t{}{suffix}", t + 1),
                    AffineExpr::term(index.resid[t], 1.0).plus(index.yhat[t], 1.0),
                    Sense::Eq,
                    series.y(t),
                ));
                quad.push((index.resid[t], index.resid[t], 1.0));
            }
        }
    }
    (labels, linear, quad)
}
