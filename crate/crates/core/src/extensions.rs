// SPDX-License-Identifier: MIT OR Apache-2.0

//! Multidimensional shared-boundary models, sparse single-change models,
//! and segment-count regularization.

use std::fmt;

use crate::backend::Solution;
use crate::bounds::{BigMTable, ParameterSpace};
use crate::formulations::{
    block_alternate_assignment, block_basic_assignment, block_breakpoint_localization,
    block_extended_assignment, extract_fit, AssignmentKind, ContinuityMode, ExtractError, FitSpec,
    Loss, PwlFit, VarIndex,
};
use crate::model::{AffineExpr, MipModel, Sense, VarId, VariableDef};
use crate::series::MultiSeries;

#[derive(Clone, Debug, PartialEq)]
pub enum ExtensionError {
    /// Continuity blocks are not part of the multidimensional models.
    ContinuityUnsupported,
    /// One parameter pack per dimension is required.
    DimensionMismatch { expected: usize, got: usize },
    /// Change budget exceeds the number of dimensions.
    BudgetTooLarge { budget: usize, dims: usize },
    /// Segment-count regularization requires a model that admits unused
    /// segments.
    UnusedSegmentsForbidden,
}

impl fmt::Display for ExtensionError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtensionError::ContinuityUnsupported => {
                write!(f, "continuity is not supported in multidimensional models")
            }
            ExtensionError::DimensionMismatch { expected, got } => {
                write!(f, "expected {expected} per-dimension parameter packs, got {got}")
            }
            ExtensionError::BudgetTooLarge { budget, dims } => {
                write!(f, "change budget {budget} exceeds dimension count {dims}")
            }
            ExtensionError::UnusedSegmentsForbidden => write!(
                f,
                "segment-count regularization needs the basic or extended assignment, which \
                 admit unused segments"
            ),
        }
    }
}

impl std::error::Error for ExtensionError {}

/// Variable tables of one response dimension.
#[derive(Clone, Debug, Default)]
pub struct DimVars {
    pub slope: Vec<VarId>,
    pub icept: Vec<VarId>,
    pub yhat: Vec<VarId>,
    pub resid: Vec<VarId>,
}

/// Index for multidimensional models: one shared assignment block plus
/// per-dimension parameter tables.
#[derive(Clone, Debug, Default)]
pub struct MultiVarIndex {
    /// Shared tables: `delta`, `x_nested`, and `brk` are populated; the
    /// per-dimension tables stay empty here.
    pub shared: VarIndex,
    pub dims: Vec<DimVars>,
    /// Change indicators of the sparse model; empty otherwise.
    pub eta: Vec<VarId>,
}

/// Sparse-change configuration: the budget and the per-dimension constants
/// that deactivate parameter changes.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseSpec {
    pub budget: usize,
    pub slope_change: Vec<f64>,
    pub icept_change: Vec<f64>,
}

impl SparseSpec {
    /// Derives the change constants `U - L` from per-dimension parameter
    /// spaces.
    pub fn from_spaces(budget: usize, spaces: &[ParameterSpace<f64>]) -> Self {
        Self {
            budget,
            slope_change: spaces.iter().map(|s| s.slope_hi - s.slope_lo).collect(),
            icept_change: spaces.iter().map(|s| s.icept_hi - s.icept_lo).collect(),
        }
    }
}

/// Segment-count regularization configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct L0Spec {
    /// Upper bound on the number of segments (the model's `K`).
    pub max_segments: usize,
    /// Penalty per active segment.
    pub lambda: f64,
    /// Constant dominating the number of observations a segment can carry;
    /// the observation count is always valid.
    pub usage_big_m: f64,
    /// Emit the usage rows with the indicator complemented. The penalty is
    /// then vacuous under minimization; kept for auditing the row shape.
    pub inverted_indicator: bool,
}

impl L0Spec {
    pub fn new(max_segments: usize, lambda: f64, len: usize) -> Self {
        Self { max_segments, lambda, usage_big_m: len as f64, inverted_indicator: false }
    }
}

/// Builds the shared-boundary multidimensional model: one assignment block,
/// per-dimension lines and residuals, and a summed objective. Continuity is
/// rejected.
pub fn build_multidim_model(
    multi: &MultiSeries<f64>,
    spec: &FitSpec,
    spaces: &[ParameterSpace<f64>],
    bigms: &[BigMTable<f64>],
) -> Result<(MipModel, MultiVarIndex), ExtensionError> {
    if spec.effective_continuity() != ContinuityMode::None {
        return Err(ExtensionError::ContinuityUnsupported);
    }
    let dims = multi.dims();
    if spaces.len() != dims || bigms.len() != dims {
        return Err(ExtensionError::DimensionMismatch {
            expected: dims,
            got: spaces.len().min(bigms.len()),
        });
    }
    let k = spec.segments;
    let len = multi.len();
    let mut model = MipModel::new(format!(
        "pwl_multi_{}_d{}_k{}_t{}_{}",
        spec.assignment, dims, k, len, spec.loss
    ));
    let mut index = MultiVarIndex::default();

    let var = |model: &mut MipModel, def: VariableDef| {
        model.add_variable(def).expect("variable bounds are valid by construction")
    };

    for j in 0..k {
        let mut row = Vec::with_capacity(len);
        for t in 0..len {
            row.push(var(&mut model, VariableDef::binary(format!("d_{}_{}", j + 1, t + 1))));
        }
        index.shared.delta.push(row);
    }
    if spec.assignment == AssignmentKind::Extended && k >= 2 {
        for j in 0..k - 1 {
            let mut row = Vec::with_capacity(len);
            for t in 0..len {
                row.push(var(&mut model, VariableDef::binary(format!("xn_{}_{}", j + 1, t + 1))));
            }
            index.shared.x_nested.push(row);
        }
    }
    if spec.has_breakpoint_vars() {
        let lo = multi.xs()[0];
        let hi = multi.xs()[len - 1];
        for j in 0..=k {
            let (l, u) = if j == 0 {
                (lo, lo)
            } else if j == k {
                (hi, hi)
            } else {
                (lo, hi)
            };
            index
                .shared
                .brk
                .push(var(&mut model, VariableDef::continuous(format!("r_{j}"), l, u)));
        }
    }
    for d in 0..dims {
        let mut dv = DimVars::default();
        for j in 0..k {
            dv.slope.push(var(
                &mut model,
                VariableDef::continuous(
                    format!("m_{}_d{}", j + 1, d + 1),
                    spaces[d].slope_lo,
                    spaces[d].slope_hi,
                ),
            ));
        }
        for j in 0..k {
            dv.icept.push(var(
                &mut model,
                VariableDef::continuous(
                    format!("c_{}_d{}", j + 1, d + 1),
                    spaces[d].icept_lo,
                    spaces[d].icept_hi,
                ),
            ));
        }
        for t in 0..len {
            dv.yhat.push(var(&mut model, VariableDef::free(format!("yh_{}_d{}", t + 1, d + 1))));
        }
        for t in 0..len {
            let def = match spec.loss {
                Loss::L1 => VariableDef::continuous(
                    format!("eps_{}_d{}", t + 1, d + 1),
                    0.0,
                    f64::INFINITY,
                ),
                Loss::L2 => VariableDef::free(format!("res_{}_d{}", t + 1, d + 1)),
            };
            dv.resid.push(var(&mut model, def));
        }
        index.dims.push(dv);
    }

    match spec.assignment {
        AssignmentKind::Basic => {
            block_basic_assignment(&mut model, &index.shared, k, len);
        }
        AssignmentKind::Alternate => {
            block_alternate_assignment(&mut model, &index.shared, k, len);
        }
        AssignmentKind::Extended => {
            block_extended_assignment(&mut model, &index.shared, k, len);
        }
    }

    let mut obj_linear = AffineExpr::new();
    let mut obj_quad = Vec::new();
    for d in 0..dims {
        let series = multi.dim(d);
        let view = VarIndex {
            delta: index.shared.delta.clone(),
            slope: index.dims[d].slope.clone(),
            icept: index.dims[d].icept.clone(),
            yhat: index.dims[d].yhat.clone(),
            resid: index.dims[d].resid.clone(),
            ..VarIndex::default()
        };
        let suffix = format!("_d{}", d + 1);
        crate::formulations::blocks::value_rows(&mut model, &view, &series, &bigms[d], &suffix);
        let (_, linear, quad) =
            crate::formulations::blocks::residual_rows(&mut model, &view, &series, spec.loss, &suffix);
        for &(v, c) in linear.terms() {
            obj_linear.add(v, c);
        }
        obj_quad.extend(quad);
    }
    if spec.has_breakpoint_vars() {
        // The localization constants depend only on the shared domain.
        let series0 = multi.dim(0);
        block_breakpoint_localization(&mut model, &index.shared, &series0, &bigms[0]);
    }
    model.set_objective(obj_linear, obj_quad);

    model.metadata.insert("assignment".into(), spec.assignment.to_string());
    model.metadata.insert("continuity".into(), "none".into());
    model.metadata.insert("loss".into(), spec.loss.to_string());
    model.metadata.insert("segments".into(), k.to_string());
    model.metadata.insert("observations".into(), len.to_string());
    model.metadata.insert("dimensions".into(), dims.to_string());
    debug_assert!(model.validate().is_empty(), "{:?}", model.validate());
    Ok((model, index))
}

/// Builds the sparse single-change model: the two-segment shared-boundary
/// model plus per-dimension change indicators and the cardinality row.
pub fn build_sparse_model(
    multi: &MultiSeries<f64>,
    sparse: &SparseSpec,
    assignment: AssignmentKind,
    loss: Loss,
    spaces: &[ParameterSpace<f64>],
    bigms: &[BigMTable<f64>],
) -> Result<(MipModel, MultiVarIndex), ExtensionError> {
    let dims = multi.dims();
    if sparse.budget > dims {
        return Err(ExtensionError::BudgetTooLarge { budget: sparse.budget, dims });
    }
    if sparse.slope_change.len() != dims || sparse.icept_change.len() != dims {
        return Err(ExtensionError::DimensionMismatch {
            expected: dims,
            got: sparse.slope_change.len().min(sparse.icept_change.len()),
        });
    }
    let spec = FitSpec::new(2, loss, ContinuityMode::None, assignment);
    let (mut model, mut index) = build_multidim_model(multi, &spec, spaces, bigms)?;
    let mut card = AffineExpr::new();
    for d in 0..dims {
        let eta = model
            .add_variable(VariableDef::binary(format!("eta_{}", d + 1)))
            .expect("variable bounds are valid by construction");
        index.eta.push(eta);
        let dm = AffineExpr::term(index.dims[d].slope[1], 1.0).plus(index.dims[d].slope[0], -1.0);
        let dc = AffineExpr::term(index.dims[d].icept[1], 1.0).plus(index.dims[d].icept[0], -1.0);
        // m_2 - m_1 <= Mm eta ; m_2 - m_1 >= -Mm eta
        model.add_constraint(
            format!("sp_slope_hi_d{}", d + 1),
            dm.clone().plus(eta, -sparse.slope_change[d]),
            Sense::Le,
            0.0,
        );
        model.add_constraint(
            format!("sp_slope_lo_d{}", d + 1),
            dm.plus(eta, sparse.slope_change[d]),
            Sense::Ge,
            0.0,
        );
        model.add_constraint(
            format!("sp_icept_hi_d{}", d + 1),
            dc.clone().plus(eta, -sparse.icept_change[d]),
            Sense::Le,
            0.0,
        );
        model.add_constraint(
            format!("sp_icept_lo_d{}", d + 1),
            dc.plus(eta, sparse.icept_change[d]),
            Sense::Ge,
            0.0,
        );
        card.add(eta, 1.0);
    }
    model.add_constraint("sp_card", card, Sense::Le, sparse.budget as f64);
    model.metadata.insert("sparse_budget".into(), sparse.budget.to_string());
    debug_assert!(model.validate().is_empty());
    Ok((model, index))
}

/// Rows and objective terms added by segment-count regularization.
#[derive(Clone, Debug)]
pub struct L0Block {
    pub labels: Vec<String>,
    /// Indicator variables marking used segments.
    pub usage: Vec<VarId>,
    /// Linear objective terms added (`lambda` per indicator).
    pub objective_delta: AffineExpr,
}

/// Adds segment-usage indicators and the per-segment penalty.
///
/// Default orientation: any observation assigned to segment `j` forces its
/// indicator up, and the objective pays `lambda` per raised indicator. The
/// inverted orientation emits `sum_t d_{j,t} <= M (1 - u_j)` instead, which
/// makes the penalty vacuous under minimization and exists only for audits.
pub fn block_l0_regularization(
    model: &mut MipModel,
    index: &VarIndex,
    l0: &L0Spec,
    len: usize,
    segments: usize,
) -> Result<L0Block, ExtensionError> {
    if model.metadata.get("assignment").map(String::as_str) == Some("alternate") {
        return Err(ExtensionError::UnusedSegmentsForbidden);
    }
    let mut labels = Vec::with_capacity(segments);
    let mut usage = Vec::with_capacity(segments);
    let mut delta_obj = AffineExpr::new();
    for j in 0..segments {
        let u = model
            .add_variable(VariableDef::binary(format!("use_{}", j + 1)))
            .expect("variable bounds are valid by construction");
        usage.push(u);
        let mut row = AffineExpr::new();
        for t in 0..len {
            row.add(index.delta[j][t], 1.0);
        }
        let (row, rhs) = if l0.inverted_indicator {
            (row.plus(u, l0.usage_big_m), l0.usage_big_m)
        } else {
            (row.plus(u, -l0.usage_big_m), 0.0)
        };
        labels.push(model.add_constraint(format!("seg_used_j{}", j + 1), row, Sense::Le, rhs));
        delta_obj.add(u, l0.lambda);
    }
    model.extend_objective(delta_obj.clone(), Vec::new());
    model.metadata.insert("l0_lambda".into(), format!("{}", l0.lambda));
    Ok(L0Block { labels, usage, objective_delta: delta_obj })
}

/// Extracted multidimensional fit: shared segmentation, one line set per
/// dimension.
#[derive(Clone, Debug)]
pub struct MultiFit {
    pub per_dim: Vec<PwlFit<f64>>,
    pub assignment: Vec<usize>,
    pub breakpoints: Vec<f64>,
    pub objective: f64,
    /// Dimensions whose change indicator is raised (sparse models only).
    pub support: Vec<usize>,
}

/// Reads a multidimensional solution back through the shared index.
pub fn extract_multi_fit(
    solution: &Solution,
    index: &MultiVarIndex,
    multi: &MultiSeries<f64>,
    spec: &FitSpec,
) -> Result<MultiFit, ExtractError> {
    let mut per_dim = Vec::with_capacity(index.dims.len());
    for (d, dv) in index.dims.iter().enumerate() {
        let view = VarIndex {
            delta: index.shared.delta.clone(),
            x_nested: index.shared.x_nested.clone(),
            brk: index.shared.brk.clone(),
            slope: dv.slope.clone(),
            icept: dv.icept.clone(),
            yhat: dv.yhat.clone(),
            resid: dv.resid.clone(),
            ..VarIndex::default()
        };
        let series = multi.dim(d);
        let mut fit = extract_fit_unchecked(solution, &view, &series, spec)?;
        fit.objective = fit.recompute_objective(&series, spec.loss);
        per_dim.push(fit);
    }
    let assignment = per_dim[0].assignment.clone();
    // Shared binaries guarantee identical segmentation across dimensions.
    debug_assert!(per_dim.iter().all(|f| f.assignment == assignment));
    let breakpoints = per_dim[0].breakpoints.clone();
    let objective = per_dim.iter().map(|f| f.objective).sum();
    let support = index
        .eta
        .iter()
        .enumerate()
        .filter(|&(_, &v)| solution.values[v] > 0.5)
        .map(|(d, _)| d)
        .collect();
    Ok(MultiFit { per_dim, assignment, breakpoints, objective, support })
}

/// Per-dimension extraction skips the aggregate objective cross-check; the
/// model objective sums over dimensions.
fn extract_fit_unchecked(
    solution: &Solution,
    view: &VarIndex,
    series: &crate::series::TimeSeries<f64>,
    spec: &FitSpec,
) -> Result<PwlFit<f64>, ExtractError> {
    use crate::backend::SolveStatus;
    if !matches!(solution.status, SolveStatus::Optimal | SolveStatus::FeasibleLimit) {
        return Err(ExtractError::NoSolution { status: solution.status });
    }
    let mut relaxed = solution.clone();
    relaxed.status = SolveStatus::FeasibleLimit;
    extract_fit(&relaxed, view, series, spec)
}
