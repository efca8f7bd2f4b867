// SPDX-License-Identifier: MIT OR Apache-2.0

//! End-to-end checks: formulation models built by the core crate, solved
//! through the solver binary as a subprocess, certified against the exact
//! dynamic-programming reference.

use cpfit_core::backend::{self, Backend, SolveOptions, SolveStatus};
use cpfit_core::bounds;
use cpfit_core::formulations::{
    build_model, extract_fit, AssignmentKind, ContinuityMode, ExtractError, FitSpec, Loss,
};
use cpfit_core::oracle;
use cpfit_core::synth::{generate_univariate, SynthConfig};
use cpfit_core::TimeSeries;

fn reference_backend() -> Backend {
    Backend::reference(env!("CARGO_BIN_EXE_cpfit-solver"))
}

fn close_rel(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

#[test]
fn basic_milp_matches_dp_reference() {
    let cfg = SynthConfig { segments: 2, len: 12, noise_sigma: 0.3, seed: 5, ..Default::default() };
    let (series, _) = generate_univariate(&cfg);
    let space = bounds::parameter_space(&series);
    let bigm = bounds::big_m_values(&series, &space);
    let backend = reference_backend();
    for loss in [Loss::L1, Loss::L2] {
        let spec = FitSpec::new(2, loss, ContinuityMode::None, AssignmentKind::Basic);
        let (model, index) = build_model(&series, &spec, &space, &bigm).unwrap();
        let solution = backend::solve(&model, &SolveOptions::default(), &backend).unwrap();
        assert_eq!(solution.status, SolveStatus::Optimal);
        let fit = extract_fit(&solution, &index, &series, &spec).unwrap();
        let reference = oracle::dp_optimal_partition(&series, 2, loss).unwrap();
        assert!(
            close_rel(fit.objective, reference.objective, 1e-6),
            "{loss}: mip {} vs dp {}",
            fit.objective,
            reference.objective
        );
    }
}

#[test]
fn all_assignment_blocks_agree_on_one_instance() {
    let cfg = SynthConfig { segments: 3, len: 10, noise_sigma: 0.5, seed: 9, ..Default::default() };
    let (series, _) = generate_univariate(&cfg);
    let space = bounds::parameter_space(&series);
    let bigm = bounds::big_m_values(&series, &space);
    let backend = reference_backend();
    for loss in [Loss::L1, Loss::L2] {
        let reference = oracle::dp_optimal_partition(&series, 3, loss).unwrap();
        for assignment in
            [AssignmentKind::Basic, AssignmentKind::Alternate, AssignmentKind::Extended]
        {
            let spec = FitSpec::new(3, loss, ContinuityMode::None, assignment);
            let (model, index) = build_model(&series, &spec, &space, &bigm).unwrap();
            let solution = backend::solve(&model, &SolveOptions::default(), &backend).unwrap();
            assert_eq!(solution.status, SolveStatus::Optimal, "{assignment} {loss}");
            let fit = extract_fit(&solution, &index, &series, &spec).unwrap();
            assert!(
                close_rel(fit.objective, reference.objective, 1e-6),
                "{assignment} {loss}: mip {} vs dp {}",
                fit.objective,
                reference.objective
            );
        }
    }
}

#[test]
fn emitted_lp_files_parse_back_with_matching_shape() {
    let series = TimeSeries::new(
        vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0],
        vec![1.0, 3.0, 2.0, 5.0, 4.0, 6.0],
    )
    .unwrap();
    let space = bounds::parameter_space(&series);
    let bigm = bounds::big_m_values(&series, &space);

    // A bilinear-continuity model: the independent reader must accept the
    // quadratic-constraint section even though the engine refuses to solve
    // it.
    let spec = FitSpec::new(2, Loss::L1, ContinuityMode::BasicBilinear, AssignmentKind::Basic);
    let (model, _) = build_model(&series, &spec, &space, &bigm).unwrap();
    assert!(model.has_bilinear);
    let text = model.emit_lp_text();
    let parsed = cpfit_solver::parse_lp(&text).expect("emitted LP must parse");
    assert_eq!(parsed.num_vars(), model.num_vars());
    assert_eq!(parsed.rows.len(), model.constraints().len());
    assert!(parsed.has_quadratic_rows());
    assert_eq!(
        parsed.binary.iter().filter(|&&b| b).count(),
        model.num_binaries()
    );

    // A squared-loss model round-trips its quadratic objective.
    let spec = FitSpec::new(2, Loss::L2, ContinuityMode::None, AssignmentKind::Extended);
    let (model, _) = build_model(&series, &spec, &space, &bigm).unwrap();
    let parsed = cpfit_solver::parse_lp(&model.emit_lp_text()).unwrap();
    assert_eq!(parsed.obj_quad.len(), series.len());
    assert!(parsed.obj_quad.iter().all(|&(a, b, c)| a == b && (c - 1.0).abs() < 1e-12));
}

#[test]
fn relaxed_solution_reports_fractional_assignment() {
    let cfg = SynthConfig { segments: 2, len: 8, noise_sigma: 0.8, seed: 3, ..Default::default() };
    let (series, _) = generate_univariate(&cfg);
    let space = bounds::parameter_space(&series);
    let bigm = bounds::big_m_values(&series, &space);
    let spec = FitSpec::new(2, Loss::L1, ContinuityMode::None, AssignmentKind::Basic);
    let (model, index) = build_model(&series, &spec, &space, &bigm).unwrap();
    let solution =
        backend::solve(&model.relax_integrality(), &SolveOptions::default(), &reference_backend())
            .unwrap();
    match extract_fit(&solution, &index, &series, &spec) {
        Err(ExtractError::FractionalAssignment { .. }) => {}
        other => panic!("expected a fractional-assignment error, got {other:?}"),
    }
}

#[test]
fn infeasible_model_round_trips_status() {
    let mut model = cpfit_core::MipModel::new("infeasible");
    let x = model
        .add_variable(cpfit_core::model::VariableDef::continuous("x", 0.0, 1.0))
        .unwrap();
    model.add_constraint(
        "high",
        cpfit_core::model::AffineExpr::term(x, 1.0),
        cpfit_core::model::Sense::Ge,
        2.0,
    );
    let solution =
        backend::solve(&model, &SolveOptions::default(), &reference_backend()).unwrap();
    assert_eq!(solution.status, SolveStatus::Infeasible);
    assert!(solution.values.is_empty());
}

#[test]
fn root_relaxation_bounds_the_milp() {
    let cfg = SynthConfig { segments: 3, len: 14, noise_sigma: 0.4, seed: 21, ..Default::default() };
    let (series, _) = generate_univariate(&cfg);
    let space = bounds::parameter_space(&series);
    let bigm = bounds::big_m_values(&series, &space);
    let backend = reference_backend();
    let spec = FitSpec::new(3, Loss::L1, ContinuityMode::None, AssignmentKind::Extended);
    let (model, _) = build_model(&series, &spec, &space, &bigm).unwrap();
    let relaxed = backend::solve(&model.relax_integrality(), &SolveOptions::default(), &backend)
        .unwrap();
    let reference = oracle::dp_optimal_partition(&series, 3, Loss::L1).unwrap();
    let scale = 1.0 + reference.objective.abs();
    assert!(
        relaxed.objective <= reference.objective + 1e-9 * scale,
        "root bound {} above the true optimum {}",
        relaxed.objective,
        reference.objective
    );
}
