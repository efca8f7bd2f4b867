// SPDX-License-Identifier: MIT OR Apache-2.0

//! Warm-started branch and bound for binary programs with linear
//! objectives.
//!
//! The simplex engine re-solves incrementally when a variable is fixed, so
//! the search runs depth-first along fix chains: each child is one dual
//! re-solve away from its parent. Before a child is solved, the branching
//! fix is propagated through row activities, so partition rows and
//! monotonicity chains collapse whole groups of binaries in one step.
//! Cheapest-child-first ordering makes the leading dive double as the
//! primal heuristic.

use std::time::Instant;

use microlp::{ComparisonOp, LinearExpr, OptimizationDirection};

use crate::branch::{BbConfig, Outcome, SolveStatusKind};
use crate::problem::{Problem, RowSense};

/// A constraint row preprocessed for binary propagation: binary terms kept
/// explicit, continuous terms folded into static activity offsets.
struct PropRow {
    terms: Vec<(usize, f64)>,
    /// Static min/max contribution of the continuous variables.
    cont_min: f64,
    cont_max: f64,
    sense: RowSense,
    rhs: f64,
}

struct Search<'a> {
    problem: &'a Problem,
    binaries: Vec<usize>,
    all_vars: Vec<microlp::Variable>,
    prop_rows: Vec<PropRow>,
    /// -1 unknown, 0 or 1 fixed; indexed by variable id.
    fixed: Vec<i8>,
    cfg: BbConfig,
    start: Instant,
    nodes: u64,
    incumbent: Option<(f64, Vec<f64>)>,
    /// Relaxation bounds of sibling subtrees still open along the current
    /// path; their minimum together with the current subtree's bound is the
    /// proven global lower bound.
    open_bounds: Vec<f64>,
    timed_out: bool,
    /// Valid global lower bound snapshotted when the limit hits.
    timeout_bound: f64,
    root_bound: f64,
}

fn build_prop_rows(problem: &Problem) -> Vec<PropRow> {
    let mut out = Vec::new();
    for row in &problem.rows {
        let mut terms = Vec::new();
        let mut cont_min = 0.0f64;
        let mut cont_max = 0.0f64;
        for &(i, c) in &row.terms {
            if problem.binary[i] {
                terms.push((i, c));
            } else {
                let (lo, hi) = (problem.lower[i], problem.upper[i]);
                if c > 0.0 {
                    cont_min += c * lo;
                    cont_max += c * hi;
                } else {
                    cont_min += c * hi;
                    cont_max += c * lo;
                }
            }
        }
        if !terms.is_empty() {
            out.push(PropRow { terms, cont_min, cont_max, sense: row.sense, rhs: row.rhs });
        }
    }
    out
}

impl<'a> Search<'a> {
    fn values_of(&self, solution: &microlp::Solution) -> Vec<f64> {
        self.all_vars.iter().map(|&v| *solution.var_value(v)).collect()
    }

    fn fractional_branch_var(&self, solution: &microlp::Solution) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64, f64)> = None;
        for &i in &self.binaries {
            if self.fixed[i] >= 0 {
                continue;
            }
            let v = *solution.var_value(self.all_vars[i]);
            let frac = (v - v.round()).abs();
            if frac > self.cfg.int_tol && best.map_or(true, |(.., f)| frac > f) {
                best = Some((i, v, frac));
            }
        }
        best.map(|(i, v, _)| (i, v))
    }

    fn cutoff(&self) -> f64 {
        match &self.incumbent {
            Some((obj, _)) => obj - self.cfg.rel_gap * obj.abs().max(1e-10),
            None => f64::INFINITY,
        }
    }

    fn global_bound(&self, current: f64) -> f64 {
        self.open_bounds.iter().copied().fold(current, f64::min)
    }

    /// Fixes the seeds and everything they imply through row activities.
    /// Returns the full assignment batch, with the internal state reverted;
    /// `None` signals a propagation contradiction (the child is infeasible
    /// without any simplex work).
    fn propagate(&mut self, seeds: &[(usize, u8)]) -> Option<Vec<(usize, u8)>> {
        let mut trail: Vec<usize> = Vec::new();
        let mut contradiction = false;
        for &(v, val) in seeds {
            match self.fixed[v] {
                -1 => {
                    self.fixed[v] = val as i8;
                    trail.push(v);
                }
                f if f == val as i8 => {}
                _ => contradiction = true,
            }
        }
        while !contradiction {
            let mut changed = false;
            'rows: for row in &self.prop_rows {
                let eps = 1e-7 * (1.0 + row.rhs.abs());
                let mut min_act = row.cont_min;
                let mut max_act = row.cont_max;
                for &(i, c) in &row.terms {
                    let (lo, hi) = match self.fixed[i] {
                        -1 => (0.0, 1.0),
                        f => (f as f64, f as f64),
                    };
                    if c > 0.0 {
                        min_act += c * lo;
                        max_act += c * hi;
                    } else {
                        min_act += c * hi;
                        max_act += c * lo;
                    }
                }
                let check_le = row.sense != RowSense::Ge;
                let check_ge = row.sense != RowSense::Le;
                if check_le && min_act > row.rhs + eps {
                    contradiction = true;
                    break 'rows;
                }
                if check_ge && max_act < row.rhs - eps {
                    contradiction = true;
                    break 'rows;
                }
                for &(i, c) in &row.terms {
                    if self.fixed[i] >= 0 {
                        continue;
                    }
                    let mut force: Option<u8> = None;
                    if check_le {
                        let min_others = min_act - c.min(0.0);
                        if min_others + c > row.rhs + eps {
                            force = Some(0);
                        } else if min_others > row.rhs + eps {
                            force = Some(1);
                        }
                    }
                    if force.is_none() && check_ge {
                        let max_others = max_act - c.max(0.0);
                        if max_others + c < row.rhs - eps {
                            force = Some(0);
                        } else if max_others < row.rhs - eps {
                            force = Some(1);
                        }
                    }
                    if let Some(val) = force {
                        self.fixed[i] = val as i8;
                        trail.push(i);
                        changed = true;
                        // Activities are stale now; restart the row scan.
                        break 'rows;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        let result: Option<Vec<(usize, u8)>> = if contradiction {
            None
        } else {
            Some(trail.iter().map(|&v| (v, self.fixed[v] as u8)).collect())
        };
        for &v in &trail {
            self.fixed[v] = -1;
        }
        result
    }

    fn apply(&mut self, assignments: &[(usize, u8)]) {
        for &(v, val) in assignments {
            self.fixed[v] = val as i8;
        }
    }

    fn unapply(&mut self, assignments: &[(usize, u8)]) {
        for &(v, _) in assignments {
            self.fixed[v] = -1;
        }
    }

    /// Depth-first walk; `solution` is already solved for this node's fix
    /// chain.
    fn dfs(&mut self, solution: microlp::Solution) {
        if self.timed_out {
            return;
        }
        let objective = solution.objective() + self.problem.obj_const;
        if objective >= self.cutoff() {
            return;
        }
        let Some((branch_var, value)) = self.fractional_branch_var(&solution) else {
            let x = self.values_of(&solution);
            let obj = self.problem.objective_value(&x);
            if self.incumbent.as_ref().map_or(true, |(inc, _)| obj < *inc) {
                self.incumbent = Some((obj, x));
            }
            return;
        };
        // The limit is only enforced once an incumbent exists, so the
        // leading dive always completes and a limited solve still reports a
        // feasible point with a gap.
        if self.incumbent.is_some() && self.start.elapsed().as_secs_f64() > self.cfg.time_limit {
            self.timed_out = true;
            self.timeout_bound = self.global_bound(objective);
            return;
        }
        let preferred = u8::from(value >= 0.5);
        let mut children: Vec<(microlp::Solution, Vec<(usize, u8)>)> = Vec::with_capacity(2);
        for val in [preferred, 1 - preferred] {
            self.nodes += 1;
            let Some(assignments) = self.propagate(&[(branch_var, val)]) else {
                continue;
            };
            let mut child = Some(solution.clone());
            for &(v, value) in &assignments {
                match child.take().unwrap().fix_var(self.all_vars[v], value as f64) {
                    Ok(next) => child = Some(next),
                    Err(_) => break,
                }
            }
            if let Some(child) = child {
                children.push((child, assignments));
            }
        }
        drop(solution);
        children.sort_by(|a, b| {
            a.0.objective().partial_cmp(&b.0.objective()).unwrap_or(std::cmp::Ordering::Equal)
        });
        match children.len() {
            0 => {}
            1 => {
                let (child, assignments) = children.pop().unwrap();
                self.apply(&assignments);
                self.dfs(child);
                self.unapply(&assignments);
            }
            _ => {
                let (second, second_fixes) = children.pop().unwrap();
                let (first, first_fixes) = children.pop().unwrap();
                self.open_bounds.push(second.objective() + self.problem.obj_const);
                self.apply(&first_fixes);
                self.dfs(first);
                self.unapply(&first_fixes);
                self.open_bounds.pop();
                self.apply(&second_fixes);
                self.dfs(second);
                self.unapply(&second_fixes);
            }
        }
    }
}

/// Branch and bound with the incremental simplex engine. The problem must
/// have a linear objective and only binary integer variables.
pub fn solve_milp_lp(problem: &Problem, cfg: &BbConfig) -> Outcome {
    let start = Instant::now();
    // Snap binary bounds to integer corners; fractional boxes around an
    // integer value collapse, empty ones mean infeasibility.
    let mut problem = problem.clone();
    for i in 0..problem.num_vars() {
        if !problem.binary[i] {
            continue;
        }
        let lo = if problem.lower[i] <= 0.0 { 0.0 } else { 1.0 };
        let hi = if problem.upper[i] >= 1.0 { 1.0 } else { 0.0 };
        if lo > hi || problem.lower[i] > 1.0 || problem.upper[i] < 0.0 {
            return Outcome {
                status: SolveStatusKind::Infeasible,
                objective: None,
                best_bound: None,
                gap: f64::INFINITY,
                values: None,
                nodes: 0,
                wall_seconds: start.elapsed().as_secs_f64(),
                message: Some(format!(
                    "binary variable {} has no integer value inside its bounds",
                    problem.var_names[i]
                )),
            };
        }
        problem.lower[i] = lo;
        problem.upper[i] = hi;
    }
    let problem = &problem;
    let sign = if problem.maximize { -1.0 } else { 1.0 };
    let n = problem.num_vars();
    let mut objective = vec![0.0f64; n];
    for &(i, c) in &problem.obj_terms {
        objective[i] += c;
    }
    let mut lp = microlp::Problem::new(OptimizationDirection::Minimize);
    let all_vars: Vec<microlp::Variable> =
        (0..n).map(|i| lp.add_var(objective[i], (problem.lower[i], problem.upper[i]))).collect();
    for row in &problem.rows {
        let mut expr = LinearExpr::empty();
        for &(i, c) in &row.terms {
            expr.add(all_vars[i], c);
        }
        let op = match row.sense {
            RowSense::Le => ComparisonOp::Le,
            RowSense::Ge => ComparisonOp::Ge,
            RowSense::Eq => ComparisonOp::Eq,
        };
        lp.add_constraint(expr, op, row.rhs);
    }

    let finish = |status: SolveStatusKind,
                  objective: Option<f64>,
                  bound: Option<f64>,
                  gap: f64,
                  values: Option<Vec<f64>>,
                  nodes: u64,
                  message: Option<String>| Outcome {
        status,
        objective: objective.map(|v| sign * v),
        best_bound: bound.map(|v| sign * v),
        gap,
        values,
        nodes,
        wall_seconds: start.elapsed().as_secs_f64(),
        message,
    };

    let root = match lp.solve() {
        Ok(s) => s,
        Err(microlp::Error::Infeasible) => {
            return finish(SolveStatusKind::Infeasible, None, None, f64::INFINITY, None, 1, None)
        }
        Err(microlp::Error::Unbounded) => {
            return finish(SolveStatusKind::Unbounded, None, None, f64::INFINITY, None, 1, None)
        }
        Err(e) => {
            return finish(
                SolveStatusKind::Error,
                None,
                None,
                f64::INFINITY,
                None,
                1,
                Some(format!("root relaxation failed: {e:?}")),
            )
        }
    };

    let binaries: Vec<usize> = (0..n).filter(|&i| problem.binary[i]).collect();
    let mut fixed = vec![-1i8; n];
    for &i in &binaries {
        // Binaries pinned by their bounds are fixed for the whole search.
        if problem.lower[i] == problem.upper[i] {
            fixed[i] = problem.lower[i] as i8;
        }
    }
    let prop_rows = if std::env::var_os("CPFIT_SOLVER_NO_PROPAGATION").is_some() {
        Vec::new()
    } else {
        build_prop_rows(problem)
    };

    let root_bound = root.objective() + problem.obj_const;
    let mut search = Search {
        problem,
        binaries,
        all_vars,
        prop_rows,
        fixed,
        cfg: *cfg,
        start,
        nodes: 1,
        incumbent: None,
        open_bounds: Vec::new(),
        timed_out: false,
        timeout_bound: root_bound,
        root_bound,
    };
    search.dfs(root);

    let nodes = search.nodes;
    match search.incumbent {
        Some((inc_obj, inc_x)) => {
            if search.timed_out {
                let bound = search.timeout_bound.min(inc_obj);
                let gap = (inc_obj - bound).max(0.0) / inc_obj.abs().max(1e-10);
                finish(
                    SolveStatusKind::FeasibleLimit,
                    Some(inc_obj),
                    Some(bound),
                    gap,
                    Some(inc_x),
                    nodes,
                    None,
                )
            } else {
                finish(
                    SolveStatusKind::Optimal,
                    Some(inc_obj),
                    Some(inc_obj),
                    0.0,
                    Some(inc_x),
                    nodes,
                    None,
                )
            }
        }
        None => {
            if search.timed_out {
                finish(
                    SolveStatusKind::Error,
                    None,
                    Some(search.root_bound),
                    f64::INFINITY,
                    None,
                    nodes,
                    Some("time limit reached before any feasible point was found".into()),
                )
            } else {
                finish(SolveStatusKind::Infeasible, None, None, f64::INFINITY, None, nodes, None)
            }
        }
    }
}
