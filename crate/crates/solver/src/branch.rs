// SPDX-License-Identifier: MIT OR Apache-2.0

//! Branch and bound over binary variables.
//!
//! Best-bound search with lazy node evaluation: each open node stores its
//! parent's relaxation value as a bound and is solved when popped. An
//! initial rounding dive supplies an incumbent early so that the time-limit
//! path still reports a feasible point and a gap.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::Instant;

use crate::problem::Problem;
use crate::relax::{solve_relaxation, RelaxOutcome};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveStatusKind {
    Optimal,
    FeasibleLimit,
    Infeasible,
    Unbounded,
    Error,
}

impl SolveStatusKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SolveStatusKind::Optimal => "optimal",
            SolveStatusKind::FeasibleLimit => "feasible_limit",
            SolveStatusKind::Infeasible => "infeasible",
            SolveStatusKind::Unbounded => "unbounded",
            SolveStatusKind::Error => "error",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Outcome {
    pub status: SolveStatusKind,
    /// Incumbent objective in the problem's original direction.
    pub objective: Option<f64>,
    /// Proven bound in the original direction.
    pub best_bound: Option<f64>,
    pub gap: f64,
    pub values: Option<Vec<f64>>,
    pub nodes: u64,
    pub wall_seconds: f64,
    pub message: Option<String>,
}

#[derive(Clone, Copy, Debug)]
pub struct BbConfig {
    pub time_limit: f64,
    pub rel_gap: f64,
    pub int_tol: f64,
}

impl Default for BbConfig {
    fn default() -> Self {
        Self { time_limit: 2000.0, rel_gap: 1e-6, int_tol: 1e-6 }
    }
}

struct OpenNode {
    bound: f64,
    id: u64,
    fixes: Vec<(u32, u8)>,
}

impl PartialEq for OpenNode {
    fn eq(&self, other: &Self) -> bool {
        self.bound == other.bound && self.id == other.id
    }
}
impl Eq for OpenNode {}
impl PartialOrd for OpenNode {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for OpenNode {
    fn cmp(&self, other: &Self) -> Ordering {
        // BinaryHeap is a max-heap; reverse for best-bound-first, breaking
        // ties toward the most recent node (deeper, dive-like).
        other
            .bound
            .partial_cmp(&self.bound)
            .unwrap_or(Ordering::Equal)
            .then(self.id.cmp(&other.id))
    }
}

fn rel_gap(incumbent: f64, bound: f64) -> f64 {
    (incumbent - bound).max(0.0) / incumbent.abs().max(1e-10)
}

fn most_fractional(x: &[f64], binaries: &[usize], tol: f64) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for &i in binaries {
        let frac = (x[i] - x[i].round()).abs();
        if frac > tol && best.map_or(true, |(_, f)| frac > f) {
            best = Some((i, frac));
        }
    }
    best.map(|(i, _)| i)
}

/// Solves a parsed problem: straight relaxation when no integer variables
/// are present, branch and bound otherwise.
pub fn solve_problem(problem: &Problem, cfg: &BbConfig) -> Outcome {
    let start = Instant::now();
    let finish = |status: SolveStatusKind,
                  objective: Option<f64>,
                  bound: Option<f64>,
                  gap: f64,
                  values: Option<Vec<f64>>,
                  nodes: u64,
                  message: Option<String>| {
        Outcome {
            status,
            objective,
            best_bound: bound,
            gap,
            values,
            nodes,
            wall_seconds: start.elapsed().as_secs_f64(),
            message,
        }
    };
    let sign = if problem.maximize { -1.0 } else { 1.0 };

    if problem.has_quadratic_rows() {
        return finish(
            SolveStatusKind::Error,
            None,
            None,
            f64::INFINITY,
            None,
            0,
            Some("quadratic (bilinear) constraints are outside this solver's capabilities".into()),
        );
    }
    if problem.integer.iter().any(|&g| g) {
        return finish(
            SolveStatusKind::Error,
            None,
            None,
            f64::INFINITY,
            None,
            0,
            Some("general integer variables are unsupported; only binaries".into()),
        );
    }

    // Binary programs with linear objectives go through the warm-started
    // simplex search; quadratic objectives use the interior-point engine
    // with the generic best-bound loop below.
    if !problem.has_quadratic_objective() && problem.binary.iter().any(|&b| b) {
        return crate::milp::solve_milp_lp(problem, cfg);
    }

    let binaries: Vec<usize> = (0..problem.num_vars()).filter(|&i| problem.binary[i]).collect();

    // Root relaxation.
    let root = solve_relaxation(problem, &problem.lower, &problem.upper);
    let (root_obj, root_x) = match root {
        RelaxOutcome::Optimal { objective, x } => (objective, x),
        RelaxOutcome::Infeasible => {
            return finish(SolveStatusKind::Infeasible, None, None, f64::INFINITY, None, 1, None)
        }
        RelaxOutcome::Unbounded => {
            return finish(SolveStatusKind::Unbounded, None, None, f64::INFINITY, None, 1, None)
        }
        RelaxOutcome::Error(msg) => {
            return finish(SolveStatusKind::Error, None, None, f64::INFINITY, None, 1, Some(msg))
        }
    };

    if binaries.is_empty() || most_fractional(&root_x, &binaries, cfg.int_tol).is_none() {
        return finish(
            SolveStatusKind::Optimal,
            Some(sign * root_obj),
            Some(sign * root_obj),
            0.0,
            Some(root_x),
            1,
            None,
        );
    }

    let mut nodes = 1u64;
    let mut incumbent: Option<(f64, Vec<f64>)> = None;

    let apply_fixes = |fixes: &[(u32, u8)]| {
        let mut lower = problem.lower.clone();
        let mut upper = problem.upper.clone();
        for &(var, val) in fixes {
            lower[var as usize] = val as f64;
            upper[var as usize] = val as f64;
        }
        (lower, upper)
    };

    // Rounding dive from the root for an early incumbent.
    {
        let mut fixes: Vec<(u32, u8)> = Vec::new();
        let mut x = root_x.clone();
        loop {
            let Some(var) = most_fractional(&x, &binaries, cfg.int_tol) else {
                let obj = problem.objective_value(&x);
                incumbent = Some((obj, x.clone()));
                break;
            };
            let preferred = u8::from(x[var] >= 0.5);
            let mut advanced = false;
            for val in [preferred, 1 - preferred] {
                fixes.push((var as u32, val));
                let (lo, hi) = apply_fixes(&fixes);
                nodes += 1;
                match solve_relaxation(problem, &lo, &hi) {
                    RelaxOutcome::Optimal { x: nx, .. } => {
                        x = nx;
                        advanced = true;
                        break;
                    }
                    _ => {
                        fixes.pop();
                    }
                }
            }
            // The dive runs to completion regardless of the time limit (it
            // is bounded by the number of binaries) so that a limited solve
            // still reports an incumbent and a gap.
            if !advanced {
                break;
            }
        }
    }

    let mut heap: BinaryHeap<OpenNode> = BinaryHeap::new();
    let mut next_id = 0u64;
    {
        let var = most_fractional(&root_x, &binaries, cfg.int_tol).expect("root is fractional");
        for val in [u8::from(root_x[var] >= 0.5), 1 - u8::from(root_x[var] >= 0.5)] {
            heap.push(OpenNode { bound: root_obj, id: next_id, fixes: vec![(var as u32, val)] });
            next_id += 1;
        }
    }

    let mut timed_out = false;
    while let Some(node) = heap.pop() {
        let best_bound = node.bound;
        if let Some((inc_obj, _)) = &incumbent {
            if rel_gap(*inc_obj, best_bound) <= cfg.rel_gap {
                // Everything open is within tolerance of the incumbent.
                let (inc_obj, inc_x) = incumbent.unwrap();
                return finish(
                    SolveStatusKind::Optimal,
                    Some(sign * inc_obj),
                    Some(sign * best_bound),
                    rel_gap(inc_obj, best_bound),
                    Some(inc_x),
                    nodes,
                    None,
                );
            }
        }
        if start.elapsed().as_secs_f64() > cfg.time_limit {
            timed_out = true;
            break;
        }

        let (lo, hi) = apply_fixes(&node.fixes);
        nodes += 1;
        match solve_relaxation(problem, &lo, &hi) {
            RelaxOutcome::Infeasible => continue,
            RelaxOutcome::Unbounded => {
                return finish(
                    SolveStatusKind::Error,
                    None,
                    None,
                    f64::INFINITY,
                    None,
                    nodes,
                    Some("child relaxation unbounded under a bounded root".into()),
                );
            }
            RelaxOutcome::Error(msg) => {
                return finish(
                    SolveStatusKind::Error,
                    None,
                    None,
                    f64::INFINITY,
                    None,
                    nodes,
                    Some(msg),
                );
            }
            RelaxOutcome::Optimal { objective, x } => {
                if let Some((inc_obj, _)) = &incumbent {
                    if rel_gap(*inc_obj, objective) <= cfg.rel_gap {
                        continue;
                    }
                }
                match most_fractional(&x, &binaries, cfg.int_tol) {
                    None => {
                        let better = incumbent
                            .as_ref()
                            .map_or(true, |(inc_obj, _)| objective < *inc_obj);
                        if better {
                            incumbent = Some((objective, x));
                        }
                    }
                    Some(var) => {
                        let preferred = u8::from(x[var] >= 0.5);
                        for val in [preferred, 1 - preferred] {
                            let mut fixes = node.fixes.clone();
                            fixes.push((var as u32, val));
                            heap.push(OpenNode { bound: objective, id: next_id, fixes });
                            next_id += 1;
                        }
                    }
                }
            }
        }
    }

    let open_bound = heap.peek().map(|n| n.bound);
    match incumbent {
        Some((inc_obj, inc_x)) => {
            if timed_out {
                let bound = open_bound.unwrap_or(inc_obj);
                finish(
                    SolveStatusKind::FeasibleLimit,
                    Some(sign * inc_obj),
                    Some(sign * bound),
                    rel_gap(inc_obj, bound),
                    Some(inc_x),
                    nodes,
                    None,
                )
            } else {
                // Heap exhausted: the incumbent is proven optimal.
                finish(
                    SolveStatusKind::Optimal,
                    Some(sign * inc_obj),
                    Some(sign * inc_obj),
                    0.0,
                    Some(inc_x),
                    nodes,
                    None,
                )
            }
        }
        None => {
            if timed_out {
                finish(
                    SolveStatusKind::Error,
                    None,
                    open_bound.map(|b| sign * b),
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

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp_read::parse_lp;

    #[test]
    fn pure_lp_passes_through() {
        let p = parse_lp("Minimize\n obj: 1 x\nSubject To\n low: 1 x >= 1\nEnd\n").unwrap();
        let out = solve_problem(&p, &BbConfig::default());
        assert_eq!(out.status, SolveStatusKind::Optimal);
        assert!((out.objective.unwrap() - 1.0).abs() < 1e-9);
        assert_eq!(out.gap, 0.0);
    }

    #[test]
    fn binary_knapsack_selects_best_subset() {
        // max 5a + 4b + 3c with 2a + 3b + c <= 4: best is a + c = 8.
        let text = "Maximize\n obj: 5 a + 4 b + 3 c\nSubject To\n cap: 2 a + 3 b + 1 c <= 4\nBinaries\n a b c\nEnd\n";
        let p = parse_lp(text).unwrap();
        let out = solve_problem(&p, &BbConfig::default());
        assert_eq!(out.status, SolveStatusKind::Optimal);
        assert!((out.objective.unwrap() - 8.0).abs() < 1e-7, "{:?}", out.objective);
        let x = out.values.unwrap();
        assert!(x[0] > 0.5 && x[1] < 0.5 && x[2] > 0.5);
    }

    #[test]
    fn binary_quadratic_picks_closest_corner() {
        // min (x - 0.3)^2 over x binary: x = 0 with value 0.09.
        let text =
            "Minimize\n obj: - 0.6 x + [ 2 x ^ 2 ] / 2 + 0.09\nSubject To\n r: 1 x <= 1\nBinaries\n x\nEnd\n";
        let p = parse_lp(text).unwrap();
        let out = solve_problem(&p, &BbConfig::default());
        assert_eq!(out.status, SolveStatusKind::Optimal);
        assert!((out.objective.unwrap() - 0.09).abs() < 1e-6, "{:?}", out.objective);
        assert!(out.values.unwrap()[0] < 1e-6);
    }

    #[test]
    fn infeasible_binary_model_reports_infeasible() {
        let text = "Minimize\n obj: 1 x\nSubject To\n a: 1 x + 1 y >= 3\nBinaries\n x y\nEnd\n";
        let p = parse_lp(text).unwrap();
        let out = solve_problem(&p, &BbConfig::default());
        assert_eq!(out.status, SolveStatusKind::Infeasible);
    }

    #[test]
    fn bilinear_rows_are_rejected() {
        let text = "Minimize\n obj: 1 x\nSubject To\n q: [ 1 a * b ] + 1 x = 0\nEnd\n";
        let p = parse_lp(text).unwrap();
        let out = solve_problem(&p, &BbConfig::default());
        assert_eq!(out.status, SolveStatusKind::Error);
        assert!(out.message.unwrap().contains("bilinear"));
    }

    #[test]
    fn tiny_time_limit_still_returns_incumbent() {
        // 12 binaries with a fractional LP optimum; the dive must produce an
        // incumbent even with no time to search.
        let mut rows = String::new();
        let mut obj = String::new();
        let mut bins = String::new();
        for i in 0..12 {
            obj.push_str(&format!(" + {} x{i}", 1.0 + (i as f64) * 0.37));
            bins.push_str(&format!(" x{i}"));
        }
        rows.push_str(" r:");
        for i in 0..12 {
            rows.push_str(&format!(" + 2.5 x{i}"));
        }
        rows.push_str(" >= 7\n");
        let text = format!("Minimize\n obj:{obj}\nSubject To\n{rows}Binaries\n{bins}\nEnd\n");
        let p = parse_lp(&text).unwrap();
        let out = solve_problem(&p, &BbConfig { time_limit: 0.0, ..BbConfig::default() });
        assert_eq!(out.status, SolveStatusKind::FeasibleLimit);
        assert!(out.objective.is_some());
        assert!(out.gap > 0.0 || out.gap == 0.0);
    }
}
