// SPDX-License-Identifier: MIT OR Apache-2.0

//! Relaxation engines: simplex for linear nodes (with an interior-point
//! fallback), interior-point for separable convex quadratic nodes.

use clarabel::algebra::CscMatrix;
use clarabel::solver::{
    DefaultSettings, DefaultSolver, IPSolver, SolverStatus, SupportedConeT,
};
use microlp::{ComparisonOp, LinearExpr, OptimizationDirection};

use crate::problem::{Problem, RowSense};

#[derive(Clone, Debug)]
pub enum RelaxOutcome {
    Optimal { objective: f64, x: Vec<f64> },
    Infeasible,
    Unbounded,
    Error(String),
}

/// Solves the continuous relaxation under the given bounds.
pub fn solve_relaxation(problem: &Problem, lower: &[f64], upper: &[f64]) -> RelaxOutcome {
    if problem.has_quadratic_objective() {
        solve_qp(problem, lower, upper)
    } else {
        match solve_lp_simplex(problem, lower, upper) {
            RelaxOutcome::Error(_) => solve_qp(problem, lower, upper),
            outcome => outcome,
        }
    }
}

fn solve_lp_simplex(problem: &Problem, lower: &[f64], upper: &[f64]) -> RelaxOutcome {
    let n = problem.num_vars();
    let mut objective = vec![0.0f64; n];
    for &(i, c) in &problem.obj_terms {
        objective[i] += c;
    }
    let mut lp = microlp::Problem::new(OptimizationDirection::Minimize);
    let vars: Vec<microlp::Variable> =
        (0..n).map(|i| lp.add_var(objective[i], (lower[i], upper[i]))).collect();
    for row in &problem.rows {
        let mut expr = LinearExpr::empty();
        for &(i, c) in &row.terms {
            expr.add(vars[i], c);
        }
        let op = match row.sense {
            RowSense::Le => ComparisonOp::Le,
            RowSense::Ge => ComparisonOp::Ge,
            RowSense::Eq => ComparisonOp::Eq,
        };
        lp.add_constraint(expr, op, row.rhs);
    }
    match lp.solve() {
        Ok(solution) => {
            let x: Vec<f64> = vars.iter().map(|&v| *solution.var_value(v)).collect();
            RelaxOutcome::Optimal { objective: problem.objective_value(&x), x }
        }
        Err(microlp::Error::Infeasible) => RelaxOutcome::Infeasible,
        Err(microlp::Error::Unbounded) => RelaxOutcome::Unbounded,
        Err(e) => RelaxOutcome::Error(format!("simplex failed: {e:?}")),
    }
}

fn build_csc(m: usize, n: usize, mut trips: Vec<(usize, usize, f64)>) -> CscMatrix<f64> {
    trips.sort_by(|a, b| (a.1, a.0).cmp(&(b.1, b.0)));
    // Merge duplicates.
    let mut merged: Vec<(usize, usize, f64)> = Vec::with_capacity(trips.len());
    for (r, c, v) in trips {
        match merged.last_mut() {
            Some(last) if last.0 == r && last.1 == c => last.2 += v,
            _ => merged.push((r, c, v)),
        }
    }
    let mut colptr = vec![0usize; n + 1];
    for &(_, c, _) in &merged {
        colptr[c + 1] += 1;
    }
    for c in 0..n {
        colptr[c + 1] += colptr[c];
    }
    let rowval: Vec<usize> = merged.iter().map(|&(r, _, _)| r).collect();
    let nzval: Vec<f64> = merged.iter().map(|&(_, _, v)| v).collect();
    CscMatrix::new(m, n, colptr, rowval, nzval)
}

/// Interior-point solve of the (possibly quadratic) relaxation. The
/// quadratic objective must be separable with nonnegative coefficients;
/// anything else is outside this solver's capabilities.
fn solve_qp(problem: &Problem, lower: &[f64], upper: &[f64]) -> RelaxOutcome {
    let n = problem.num_vars();
    for &(a, b, c) in &problem.obj_quad {
        if a != b {
            return RelaxOutcome::Error(
                "nonseparable quadratic objective is unsupported".into(),
            );
        }
        if c < 0.0 {
            return RelaxOutcome::Error("nonconvex quadratic objective is unsupported".into());
        }
    }
    let mut p_trips: Vec<(usize, usize, f64)> = Vec::with_capacity(problem.obj_quad.len());
    for &(a, _, c) in &problem.obj_quad {
        p_trips.push((a, a, 2.0 * c));
    }
    let p = build_csc(n, n, p_trips);
    let mut q = vec![0.0f64; n];
    for &(i, c) in &problem.obj_terms {
        q[i] += c;
    }

    let mut a_trips: Vec<(usize, usize, f64)> = Vec::new();
    let mut b = Vec::new();
    let mut row_idx = 0usize;
    // Equality rows first (zero cone), then inequalities (nonnegative cone).
    for row in &problem.rows {
        if row.sense == RowSense::Eq {
            for &(i, c) in &row.terms {
                a_trips.push((row_idx, i, c));
            }
            b.push(row.rhs);
            row_idx += 1;
        }
    }
    for i in 0..n {
        if lower[i] == upper[i] {
            a_trips.push((row_idx, i, 1.0));
            b.push(lower[i]);
            row_idx += 1;
        }
    }
    let eq_rows = row_idx;
    for row in &problem.rows {
        match row.sense {
            RowSense::Eq => {}
            RowSense::Le => {
                for &(i, c) in &row.terms {
                    a_trips.push((row_idx, i, c));
                }
                b.push(row.rhs);
                row_idx += 1;
            }
            RowSense::Ge => {
                for &(i, c) in &row.terms {
                    a_trips.push((row_idx, i, -c));
                }
                b.push(-row.rhs);
                row_idx += 1;
            }
        }
    }
    for i in 0..n {
        if lower[i] == upper[i] {
            continue;
        }
        if upper[i].is_finite() {
            a_trips.push((row_idx, i, 1.0));
            b.push(upper[i]);
            row_idx += 1;
        }
        if lower[i].is_finite() {
            a_trips.push((row_idx, i, -1.0));
            b.push(-lower[i]);
            row_idx += 1;
        }
    }
    let ineq_rows = row_idx - eq_rows;
    let a = build_csc(row_idx, n, a_trips);
    let cones: Vec<SupportedConeT<f64>> = vec![
        SupportedConeT::ZeroConeT(eq_rows),
        SupportedConeT::NonnegativeConeT(ineq_rows),
    ];
    let settings = DefaultSettings {
        verbose: false,
        tol_gap_abs: 1e-10,
        tol_gap_rel: 1e-10,
        tol_feas: 1e-10,
        max_iter: 200,
        ..DefaultSettings::default()
    };
    let mut solver = match DefaultSolver::new(&p, &q, &a, &b, &cones, settings) {
        Ok(s) => s,
        Err(e) => return RelaxOutcome::Error(format!("interior-point setup failed: {e:?}")),
    };
    solver.solve();
    let status = solver.solution.status;
    match status {
        SolverStatus::Solved | SolverStatus::AlmostSolved => {
            let x = solver.solution.x.clone();
            RelaxOutcome::Optimal { objective: problem.objective_value(&x), x }
        }
        SolverStatus::PrimalInfeasible | SolverStatus::AlmostPrimalInfeasible => {
            RelaxOutcome::Infeasible
        }
        SolverStatus::DualInfeasible | SolverStatus::AlmostDualInfeasible => {
            RelaxOutcome::Unbounded
        }
        other => RelaxOutcome::Error(format!("interior-point solve ended with {other:?}")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp_read::parse_lp;

    #[test]
    fn simplex_solves_minimal_lp() {
        let p = parse_lp("Minimize\n obj: 1 x\nSubject To\n low: 1 x >= 1\nEnd\n").unwrap();
        match solve_relaxation(&p, &p.lower, &p.upper) {
            RelaxOutcome::Optimal { objective, x } => {
                assert!((objective - 1.0).abs() < 1e-9);
                assert!((x[0] - 1.0).abs() < 1e-9);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn detects_infeasible_and_unbounded() {
        let p =
            parse_lp("Minimize\n obj: 1 x\nSubject To\n a: 1 x >= 2\n b: 1 x <= 1\nEnd\n").unwrap();
        assert!(matches!(solve_relaxation(&p, &p.lower, &p.upper), RelaxOutcome::Infeasible));

        let p = parse_lp("Minimize\n obj: 1 x\nSubject To\n a: 1 x <= 0\nBounds\n x free\nEnd\n")
            .unwrap();
        assert!(matches!(solve_relaxation(&p, &p.lower, &p.upper), RelaxOutcome::Unbounded));
    }

    #[test]
    fn quadratic_projection_onto_box() {
        // min (x-3)^2/1 with 0 <= x <= 2 -> x = 2.
        let p = parse_lp(
            "Minimize\n obj: - 6 x + [ 2 x ^ 2 ] / 2 + 9\nSubject To\n r: 1 x <= 2\nEnd\n",
        )
        .unwrap();
        match solve_relaxation(&p, &p.lower, &p.upper) {
            RelaxOutcome::Optimal { objective, x } => {
                assert!((x[0] - 2.0).abs() < 1e-6, "{x:?}");
                assert!((objective - 1.0).abs() < 1e-6, "{objective}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn fixed_variables_are_respected() {
        let p = parse_lp("Minimize\n obj: 1 x + 1 y\nSubject To\n r: 1 x + 1 y >= 1\nBounds\n x = 0.25\nEnd\n").unwrap();
        match solve_relaxation(&p, &p.lower, &p.upper) {
            RelaxOutcome::Optimal { objective, x } => {
                assert!((x[0] - 0.25).abs() < 1e-9);
                assert!((objective - 1.0).abs() < 1e-9);
            }
            other => panic!("{other:?}"),
        }
    }
}
