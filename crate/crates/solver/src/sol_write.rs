// SPDX-License-Identifier: MIT OR Apache-2.0

//! Solution-file writer: `# key = value` headers plus `name value` rows.

use std::fmt::Write;

use crate::branch::Outcome;
use crate::problem::Problem;

pub fn write_sol(problem: &Problem, outcome: &Outcome, gap_tol: f64, seed: u64) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# Solution for model {}", problem.name);
    let _ = writeln!(out, "# Status = {}", outcome.status.as_str());
    if let Some(obj) = outcome.objective {
        let _ = writeln!(out, "# Objective value = {obj}");
    }
    if let Some(bound) = outcome.best_bound {
        let _ = writeln!(out, "# Best bound = {bound}");
    }
    if outcome.gap.is_finite() {
        let _ = writeln!(out, "# Gap = {}", outcome.gap);
    }
    let _ = writeln!(out, "# Gap tolerance = {gap_tol}");
    let _ = writeln!(out, "# Wall seconds = {}", outcome.wall_seconds);
    let _ = writeln!(out, "# Nodes = {}", outcome.nodes);
    let _ = writeln!(out, "# Seed = {seed}");
    if let Some(msg) = &outcome.message {
        let _ = writeln!(out, "# Note = {msg}");
    }
    if let Some(values) = &outcome.values {
        for (name, value) in problem.var_names.iter().zip(values) {
            let _ = writeln!(out, "{name} {value}");
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::branch::{solve_problem, BbConfig};
    use crate::lp_read::parse_lp;

    #[test]
    fn writes_headers_and_rows() {
        let p = parse_lp("Minimize\n obj: 1 x\nSubject To\n low: 1 x >= 1\nEnd\n").unwrap();
        let out = solve_problem(&p, &BbConfig::default());
        let text = write_sol(&p, &out, 1e-6, 0);
        assert!(text.contains("# Status = optimal"));
        assert!(text.contains("# Objective value = 1"));
        assert!(text.lines().any(|l| l == "x 1"));
    }
}
