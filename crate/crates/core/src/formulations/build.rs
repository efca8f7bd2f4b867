// SPDX-License-Identifier: MIT OR Apache-2.0

//! Model assembly.

use std::fmt;

use crate::bounds::{BigMTable, ParameterSpace};
use crate::model::{MipModel, VariableDef};
use crate::series::TimeSeries;

use super::blocks::*;
use super::{AssignmentKind, ContinuityMode, FitSpec, Loss, VarIndex};

#[derive(Clone, Debug, PartialEq)]
pub enum BuildError {
    /// Requested combination is not a formulation under study.
    IncompatibleSpec(String),
    ZeroSegments,
}

impl fmt::Display for BuildError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BuildError::IncompatibleSpec(msg) => write!(f, "incompatible fit spec: {msg}"),
            BuildError::ZeroSegments => write!(f, "segment count must be at least 1"),
        }
    }
}

impl std::error::Error for BuildError {}

/// Extra build switches recorded in the model metadata.
#[derive(Clone, Copy, Debug, Default)]
pub struct BuildOptions {
    /// Also bound the fitted values by the value big-M constants. Redundant
    /// for correctness; off by default.
    pub bound_fitted_values: bool,
}

/// Assembles the univariate model for a fit spec.
///
/// The model contains the chosen assignment block, the value-assignment
/// rows, breakpoint variables with localization rows when the assignment is
/// basic or extended, the chosen continuity block, parameter-space variable
/// domains, and the loss objective. The alternate assignment never builds
/// breakpoint variables, so pairing it with the bilinear continuity block is
/// rejected.
pub fn build_model(
    series: &TimeSeries<f64>,
    spec: &FitSpec,
    space: &ParameterSpace<f64>,
    bigm: &BigMTable<f64>,
) -> Result<(MipModel, VarIndex), BuildError> {
    build_model_with(series, spec, space, bigm, BuildOptions::default())
}

pub fn build_model_with(
    series: &TimeSeries<f64>,
    spec: &FitSpec,
    space: &ParameterSpace<f64>,
    bigm: &BigMTable<f64>,
    options: BuildOptions,
) -> Result<(MipModel, VarIndex), BuildError> {
    if spec.segments == 0 {
        return Err(BuildError::ZeroSegments);
    }
    if spec.assignment == AssignmentKind::Alternate
        && spec.effective_continuity() == ContinuityMode::BasicBilinear
    {
        return Err(BuildError::IncompatibleSpec(
            "bilinear continuity needs breakpoint variables, which the alternate assignment omits"
                .into(),
        ));
    }
    let k = spec.segments;
    let len = series.len();
    let continuity = spec.effective_continuity();

    let mut model = MipModel::new(format!(
        "pwl_{}_{}_k{}_t{}_{}",
        spec.assignment,
        continuity,
        k,
        len,
        spec.loss
    ));
    let mut index = VarIndex::default();

    let var = |model: &mut MipModel, def: VariableDef| {
        // Bounds come from validated inputs; insertion cannot fail.
        model.add_variable(def).expect("variable bounds are valid by construction")
    };

    for j in 0..k {
        let mut row = Vec::with_capacity(len);
        for t in 0..len {
            row.push(var(&mut model, VariableDef::binary(format!("d_{}_{}", j + 1, t + 1))));
        }
        index.delta.push(row);
    }
    if spec.assignment == AssignmentKind::Extended && k >= 2 {
        for j in 0..k - 1 {
            let mut row = Vec::with_capacity(len);
            for t in 0..len {
                row.push(var(&mut model, VariableDef::binary(format!("xn_{}_{}", j + 1, t + 1))));
            }
            index.x_nested.push(row);
        }
    }
    for j in 0..k {
        index.slope.push(var(
            &mut model,
            VariableDef::continuous(format!("m_{}", j + 1), space.slope_lo, space.slope_hi),
        ));
    }
    for j in 0..k {
        index.icept.push(var(
            &mut model,
            VariableDef::continuous(format!("c_{}", j + 1), space.icept_lo, space.icept_hi),
        ));
    }
    if spec.has_breakpoint_vars() {
        for j in 0..=k {
            let (lo, hi) = if j == 0 {
                (space.domain_lo, space.domain_lo)
            } else if j == k {
                (space.domain_hi, space.domain_hi)
            } else {
                (space.domain_lo, space.domain_hi)
            };
            index.brk.push(var(&mut model, VariableDef::continuous(format!("r_{j}"), lo, hi)));
        }
    }
    for t in 0..len {
        let def = if options.bound_fitted_values {
            VariableDef::continuous(format!("yh_{}", t + 1), -bigm.value[t], bigm.value[t])
        } else {
            VariableDef::free(format!("yh_{}", t + 1))
        };
        index.yhat.push(var(&mut model, def));
    }
    for t in 0..len {
        let def = match spec.loss {
            Loss::L1 => VariableDef::continuous(format!("eps_{}", t + 1), 0.0, f64::INFINITY),
            Loss::L2 => VariableDef::free(format!("res_{}", t + 1)),
        };
        index.resid.push(var(&mut model, def));
    }
    if continuity == ContinuityMode::AlternateLinear {
        for j in 0..k - 1 {
            index.gamma.push(var(&mut model, VariableDef::binary(format!("gam_{}", j + 1))));
        }
        for j in 0..k - 1 {
            let mut pos = Vec::with_capacity(len - 1);
            let mut neg = Vec::with_capacity(len - 1);
            for t in 0..len - 1 {
                pos.push(var(
                    &mut model,
                    VariableDef::continuous(format!("ap_{}_{}", j + 1, t + 1), 0.0, 1.0),
                ));
                neg.push(var(
                    &mut model,
                    VariableDef::continuous(format!("an_{}_{}", j + 1, t + 1), 0.0, 1.0),
                ));
            }
            index.act_pos.push(pos);
            index.act_neg.push(neg);
        }
    }

    match spec.assignment {
        AssignmentKind::Basic => {
            block_basic_assignment(&mut model, &index, k, len);
        }
        AssignmentKind::Alternate => {
            block_alternate_assignment(&mut model, &index, k, len);
        }
        AssignmentKind::Extended => {
            block_extended_assignment(&mut model, &index, k, len);
        }
    }
    block_value_assignment(&mut model, &index, series, bigm);
    if spec.has_breakpoint_vars() {
        block_breakpoint_localization(&mut model, &index, series, bigm);
    }
    match continuity {
        ContinuityMode::None => {}
        ContinuityMode::BasicBilinear => {
            block_basic_continuity(&mut model, &index, k);
        }
        ContinuityMode::AlternateLinear => {
            block_alternate_continuity(&mut model, &index, series, bigm, k);
        }
    }
    objective_block(&mut model, &index, series, spec.loss);

    model.metadata.insert("assignment".into(), spec.assignment.to_string());
    model.metadata.insert("continuity".into(), continuity.to_string());
    model.metadata.insert("loss".into(), spec.loss.to_string());
    model.metadata.insert("segments".into(), k.to_string());
    model.metadata.insert("observations".into(), len.to_string());
    model
        .metadata
        .insert("bound_fitted_values".into(), options.bound_fitted_values.to_string());

    debug_assert!(model.validate().is_empty(), "{:?}", model.validate());
    Ok((model, index))
}
