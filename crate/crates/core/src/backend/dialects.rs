// SPDX-License-Identifier: MIT OR Apache-2.0

//! Solution-file dialect parsers.

use std::fmt;

use super::SolveStatus;

#[derive(Clone, Debug, PartialEq)]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

impl ParseError {
    pub fn new(line: usize, message: impl Into<String>) -> Self {
        Self { line, message: message.into() }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

impl std::error::Error for ParseError {}

/// Dialect-independent parse result, values still keyed by name.
#[derive(Clone, Debug, Default)]
pub struct RawSolution {
    pub status: SolveStatus,
    pub objective: Option<f64>,
    pub best_bound: Option<f64>,
    pub gap: Option<f64>,
    pub wall_seconds: Option<f64>,
    pub values: Vec<(String, f64)>,
    lines: Vec<(String, usize)>,
}

impl RawSolution {
    /// Source line of a variable entry, for error reporting.
    pub fn line_of(&self, name: &str) -> usize {
        self.lines.iter().find(|(n, _)| n == name).map(|&(_, l)| l).unwrap_or(0)
    }
}

fn parse_status(token: &str) -> Option<SolveStatus> {
    match token.trim().to_ascii_lowercase().as_str() {
        "optimal" => Some(SolveStatus::Optimal),
        "feasible_limit" | "timelimit" | "time_limit" | "feasible" => {
            Some(SolveStatus::FeasibleLimit)
        }
        "infeasible" => Some(SolveStatus::Infeasible),
        "unbounded" => Some(SolveStatus::Unbounded),
        "error" | "unknown" => Some(SolveStatus::Error),
        _ => None,
    }
}

fn parse_value(token: &str, line_no: usize) -> Result<f64, ParseError> {
    token
        .parse::<f64>()
        .map_err(|_| ParseError::new(line_no, format!("expected a number, found '{token}'")))
}

/// Parses the reference dialect: `# key = value` comment headers followed by
/// one `name value` row per variable. Files written by Gurobi-style tools
/// (`# Objective value = ...` plus rows) parse as optimal solutions.
pub fn parse_reference_sol(text: &str) -> Result<RawSolution, ParseError> {
    let mut raw = RawSolution::default();
    let mut saw_status = false;
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some((key, value)) = comment.split_once('=') {
                let value = value.trim();
                match key.trim().to_ascii_lowercase().as_str() {
                    "status" => {
                        raw.status = parse_status(value).ok_or_else(|| {
                            ParseError::new(line_no, format!("unknown status '{value}'"))
                        })?;
                        saw_status = true;
                    }
                    "objective value" => raw.objective = Some(parse_value(value, line_no)?),
                    "best bound" => raw.best_bound = Some(parse_value(value, line_no)?),
                    "gap" => raw.gap = Some(parse_value(value, line_no)?),
                    "wall seconds" => raw.wall_seconds = Some(parse_value(value, line_no)?),
                    _ => {}
                }
            }
            continue;
        }
        let mut parts = line.split_whitespace();
        let name = parts
            .next()
            .ok_or_else(|| ParseError::new(line_no, "expected 'name value'"))?
            .to_string();
        let value = parts
            .next()
            .ok_or_else(|| ParseError::new(line_no, format!("missing value for '{name}'")))?;
        raw.values.push((name.clone(), parse_value(value, line_no)?));
        raw.lines.push((name, line_no));
    }
    if !saw_status {
        // Plain Gurobi-style files carry no status; an objective plus rows
        // means an optimal solve, anything else is unusable.
        raw.status = if raw.objective.is_some() && !raw.values.is_empty() {
            SolveStatus::Optimal
        } else {
            SolveStatus::Error
        };
    }
    Ok(raw)
}

/// Parses the SCIP-style dialect: a `solution status:` line, an
/// `objective value:` line, then sparse `name value [(obj:..)]` rows.
pub fn parse_scip_sol(text: &str) -> Result<RawSolution, ParseError> {
    let mut raw = RawSolution::default();
    let mut saw_status = false;
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(rest) = line.strip_prefix("solution status:") {
            let token = rest.trim();
            raw.status = if token.starts_with("no solution") {
                SolveStatus::Infeasible
            } else {
                parse_status(token)
                    .ok_or_else(|| ParseError::new(line_no, format!("unknown status '{token}'")))?
            };
            saw_status = true;
            continue;
        }
        if let Some(rest) = line.strip_prefix("objective value:") {
            raw.objective = Some(parse_value(rest.trim(), line_no)?);
            continue;
        }
        let mut parts = line.split_whitespace();
        let name = parts
            .next()
            .ok_or_else(|| ParseError::new(line_no, "expected 'name value'"))?
            .to_string();
        let value = parts
            .next()
            .ok_or_else(|| ParseError::new(line_no, format!("missing value for '{name}'")))?;
        raw.values.push((name.clone(), parse_value(value, line_no)?));
        raw.lines.push((name, line_no));
    }
    if !saw_status {
        return Err(ParseError::new(1, "missing 'solution status:' line"));
    }
    Ok(raw)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gurobi_style_file_without_status_is_optimal() {
        let raw = parse_reference_sol("# Objective value = 1.5\nx 1\n").unwrap();
        assert_eq!(raw.status, SolveStatus::Optimal);
        assert_eq!(raw.objective, Some(1.5));
        assert_eq!(raw.values, vec![("x".into(), 1.0)]);
    }

    #[test]
    fn scip_no_solution_maps_to_infeasible() {
        let raw = parse_scip_sol("solution status: no solution available\n").unwrap();
        assert_eq!(raw.status, SolveStatus::Infeasible);
    }

    #[test]
    fn malformed_number_reports_line() {
        let err = parse_reference_sol("# Status = optimal\nx abc\n").unwrap_err();
        assert_eq!(err.line, 2);
    }
}
