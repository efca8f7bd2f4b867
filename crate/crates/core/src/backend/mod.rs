// SPDX-License-Identifier: MIT OR Apache-2.0

//! Subprocess driver for external LP/MIP solvers.
//!
//! Models travel as LP files, results come back as solution files. A
//! backend is an executable plus a capability declaration; models whose
//! flags exceed the declared capabilities are refused before any process is
//! launched. Two solution-file dialects are parsed: the comment-annotated
//! `name value` format written by the bundled reference solver (and by
//! Gurobi-style tools) and the `solution status:` format written by
//! SCIP-style tools.

mod dialects;

use std::fmt;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::model::MipModel;

pub use dialects::{parse_reference_sol, parse_scip_sol, ParseError, RawSolution};

/// What a backend executable can solve.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolverCapabilities {
    pub solves_lp: bool,
    pub solves_milp: bool,
    pub solves_convex_miqp: bool,
    pub solves_bilinear: bool,
}

impl SolverCapabilities {
    /// Capabilities of the bundled reference solver.
    pub fn reference() -> Self {
        Self { solves_lp: true, solves_milp: true, solves_convex_miqp: true, solves_bilinear: false }
    }

    pub fn lp_only() -> Self {
        Self { solves_lp: true, solves_milp: false, solves_convex_miqp: false, solves_bilinear: false }
    }
}

/// Per-solve options passed through to the backend.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SolveOptions {
    pub time_limit_seconds: f64,
    /// Relative MIP gap tolerance; `None` keeps the solver default.
    pub rel_gap_tol: Option<f64>,
    pub threads: u32,
    pub seed: u64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { time_limit_seconds: 2000.0, rel_gap_tol: None, threads: 1, seed: 0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    /// Limit reached with an incumbent.
    FeasibleLimit,
    Infeasible,
    Unbounded,
    Error,
}

impl Default for SolveStatus {
    fn default() -> Self {
        SolveStatus::Error
    }
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::FeasibleLimit => "feasible_limit",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::Unbounded => "unbounded",
            SolveStatus::Error => "error",
        })
    }
}

/// Backend output mapped onto a model's variables.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Solution {
    pub status: SolveStatus,
    pub objective: f64,
    pub best_bound: f64,
    /// Relative gap between objective and best bound.
    pub gap: f64,
    /// Dense values indexed by variable id; empty when no incumbent exists.
    pub values: Vec<f64>,
    pub wall_seconds: f64,
}

/// Solution-file dialect spoken by a backend.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolDialect {
    /// `# key = value` comments plus `name value` rows.
    Reference,
    /// `solution status:` / `objective value:` header plus sparse rows.
    Scip,
}

/// An external solver executable and how to talk to it.
#[derive(Clone, Debug)]
pub struct Backend {
    pub exe: PathBuf,
    pub capabilities: SolverCapabilities,
    pub dialect: SolDialect,
    /// Extra argument template. Empty means the reference convention
    /// `<lp> <sol> --time-limit T --threads N --seed S [--rel-gap G]`.
    /// Placeholders `{lp}`, `{sol}`, `{time_limit}`, `{threads}`, `{seed}`,
    /// `{rel_gap}` are substituted otherwise.
    pub args: Vec<String>,
    /// Working directory for solve artifacts; a temp dir when unset.
    pub workdir: Option<PathBuf>,
}

impl Backend {
    /// Backend instance for the bundled reference solver.
    pub fn reference(exe: impl Into<PathBuf>) -> Self {
        Self {
            exe: exe.into(),
            capabilities: SolverCapabilities::reference(),
            dialect: SolDialect::Reference,
            args: Vec::new(),
            workdir: None,
        }
    }

    /// Resolves a backend from `CPFIT_SOLVER` or from a `cpfit-solver`
    /// binary next to the current executable (or its parent directory,
    /// which covers test binaries living under `target/<profile>/deps`).
    pub fn discover() -> Option<Self> {
        if let Ok(path) = std::env::var("CPFIT_SOLVER") {
            if !path.is_empty() {
                return Some(Self::reference(path));
            }
        }
        let exe = std::env::current_exe().ok()?;
        let name = format!("cpfit-solver{}", std::env::consts::EXE_SUFFIX);
        let mut dir = exe.parent()?.to_path_buf();
        for _ in 0..2 {
            let candidate = dir.join(&name);
            if candidate.is_file() {
                return Some(Self::reference(candidate));
            }
            dir = dir.parent()?.to_path_buf();
        }
        None
    }
}

#[derive(Debug)]
pub enum SolveError {
    /// The model needs a capability the backend does not declare.
    CapabilityMismatch { needed: &'static str },
    /// Backend exited nonzero.
    SolverProcess { code: Option<i32>, stderr: String },
    Parse(ParseError),
    Io(std::io::Error),
}

impl fmt::Display for SolveError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolveError::CapabilityMismatch { needed } => write!(
                f,
                "backend lacks capability '{needed}'; export the model instead or configure a \
                 capable solver via CPFIT_SOLVER"
            ),
            SolveError::SolverProcess { code, stderr } => {
                write!(f, "solver process failed (exit {code:?}): {stderr}")
            }
            SolveError::Parse(e) => write!(f, "solution parse error: {e}"),
            SolveError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl std::error::Error for SolveError {}

impl From<ParseError> for SolveError {
    fn from(e: ParseError) -> Self {
        SolveError::Parse(e)
    }
}

impl From<std::io::Error> for SolveError {
    fn from(e: std::io::Error) -> Self {
        SolveError::Io(e)
    }
}

/// Checks that the backend declares everything the model needs.
pub fn check_capabilities(model: &MipModel, caps: &SolverCapabilities) -> Result<(), SolveError> {
    if model.has_bilinear && !caps.solves_bilinear {
        return Err(SolveError::CapabilityMismatch { needed: "solves_bilinear" });
    }
    if model.has_quadratic_objective && !caps.solves_convex_miqp {
        return Err(SolveError::CapabilityMismatch { needed: "solves_convex_miqp" });
    }
    if model.num_binaries() > 0 && !caps.solves_milp {
        return Err(SolveError::CapabilityMismatch { needed: "solves_milp" });
    }
    if !caps.solves_lp {
        return Err(SolveError::CapabilityMismatch { needed: "solves_lp" });
    }
    Ok(())
}

/// Writes the model's LP text to `path`.
pub fn export(model: &MipModel, path: impl AsRef<Path>) -> Result<PathBuf, SolveError> {
    let path = path.as_ref();
    std::fs::write(path, model.emit_lp_text())?;
    Ok(path.to_path_buf())
}

fn build_args(backend: &Backend, lp: &Path, sol: &Path, options: &SolveOptions) -> Vec<String> {
    if backend.args.is_empty() {
        let mut args = vec![
            lp.display().to_string(),
            sol.display().to_string(),
            "--time-limit".into(),
            format!("{}", options.time_limit_seconds),
            "--threads".into(),
            format!("{}", options.threads),
            "--seed".into(),
            format!("{}", options.seed),
        ];
        if let Some(gap) = options.rel_gap_tol {
            args.push("--rel-gap".into());
            args.push(format!("{gap}"));
        }
        args
    } else {
        backend
            .args
            .iter()
            .map(|a| {
                a.replace("{lp}", &lp.display().to_string())
                    .replace("{sol}", &sol.display().to_string())
                    .replace("{time_limit}", &format!("{}", options.time_limit_seconds))
                    .replace("{threads}", &format!("{}", options.threads))
                    .replace("{seed}", &format!("{}", options.seed))
                    .replace("{rel_gap}", &format!("{}", options.rel_gap_tol.unwrap_or(1e-6)))
            })
            .collect()
    }
}

/// Solves a model through the backend subprocess.
pub fn solve(
    model: &MipModel,
    options: &SolveOptions,
    backend: &Backend,
) -> Result<Solution, SolveError> {
    check_capabilities(model, &backend.capabilities)?;
    let tmp;
    let dir = match &backend.workdir {
        Some(d) => {
            std::fs::create_dir_all(d)?;
            d.clone()
        }
        None => {
            tmp = tempfile::tempdir()?;
            tmp.path().to_path_buf()
        }
    };
    let lp_path = dir.join("model.lp");
    let sol_path = dir.join("model.sol");
    export(model, &lp_path)?;

    // The subprocess runs inside the work dir; a relative executable path
    // must be resolved against the caller's directory first. Bare names
    // stay untouched for PATH lookup.
    let exe = if backend.exe.is_absolute() || backend.exe.components().count() < 2 {
        backend.exe.clone()
    } else {
        std::env::current_dir()?.join(&backend.exe)
    };
    let start = Instant::now();
    let output = Command::new(&exe)
        .args(build_args(backend, &lp_path, &sol_path, options))
        .current_dir(&dir)
        .output()?;
    let measured = start.elapsed().as_secs_f64();
    if !output.status.success() {
        return Err(SolveError::SolverProcess {
            code: output.status.code(),
            stderr: String::from_utf8_lossy(&output.stderr).into_owned(),
        });
    }
    let text = std::fs::read_to_string(&sol_path)?;
    let mut solution = parse_solution_file(&text, backend.dialect, model)?;
    if solution.wall_seconds == 0.0 {
        solution.wall_seconds = measured;
    }
    Ok(solution)
}

/// Parses a solution file and maps values onto the model's variables.
pub fn parse_solution_file(
    text: &str,
    dialect: SolDialect,
    model: &MipModel,
) -> Result<Solution, ParseError> {
    let raw = match dialect {
        SolDialect::Reference => parse_reference_sol(text)?,
        SolDialect::Scip => parse_scip_sol(text)?,
    };
    let status = raw.status;
    if !matches!(status, SolveStatus::Optimal | SolveStatus::FeasibleLimit) {
        return Ok(Solution {
            status,
            objective: f64::NAN,
            best_bound: raw.best_bound.unwrap_or(f64::NAN),
            gap: f64::NAN,
            values: Vec::new(),
            wall_seconds: raw.wall_seconds.unwrap_or(0.0),
        });
    }
    let mut values = vec![f64::NAN; model.num_vars()];
    let mut lookup = std::collections::HashMap::with_capacity(model.num_vars());
    for (id, var) in model.variables().iter().enumerate() {
        lookup.insert(var.name.as_str(), id);
    }
    for (name, value) in &raw.values {
        match lookup.get(name.as_str()) {
            Some(&id) => values[id] = *value,
            None => {
                return Err(ParseError::new(
                    raw.line_of(name),
                    format!("solution references unknown variable '{name}'"),
                ))
            }
        }
    }
    match dialect {
        // The reference dialect writes every variable; a hole means the
        // file does not belong to this model.
        SolDialect::Reference => {
            if let Some(id) = values.iter().position(|v| v.is_nan()) {
                return Err(ParseError::new(
                    0,
                    format!("missing value for variable '{}'", model.var(id).name),
                ));
            }
        }
        // SCIP-style files omit zero variables.
        SolDialect::Scip => {
            for v in values.iter_mut() {
                if v.is_nan() {
                    *v = 0.0;
                }
            }
        }
    }
    let objective = raw.objective.unwrap_or(f64::NAN);
    let best_bound = raw.best_bound.unwrap_or(objective);
    let gap = raw.gap.unwrap_or_else(|| {
        if status == SolveStatus::Optimal {
            0.0
        } else {
            (objective - best_bound).abs() / objective.abs().max(1e-10)
        }
    });
    Ok(Solution {
        status,
        objective,
        best_bound,
        gap,
        values,
        wall_seconds: raw.wall_seconds.unwrap_or(0.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{AffineExpr, MipModel, Sense, VariableDef};

    fn bilinear_model() -> MipModel {
        let mut m = MipModel::new("b");
        let a = m.add_variable(VariableDef::continuous("a", 0.0, 1.0)).unwrap();
        let b = m.add_variable(VariableDef::continuous("b", 0.0, 1.0)).unwrap();
        m.add_bilinear_constraint("q", AffineExpr::new(), vec![(a, b, 1.0)], Sense::Le, 1.0);
        m
    }

    #[test]
    fn capability_gate_blocks_before_subprocess() {
        let model = bilinear_model();
        let backend = Backend {
            exe: PathBuf::from("/nonexistent/solver"),
            capabilities: SolverCapabilities::reference(),
            dialect: SolDialect::Reference,
            args: Vec::new(),
            workdir: None,
        };
        // The error must be the capability mismatch, not a process failure:
        // gating happens before the executable would be touched.
        let err = solve(&model, &SolveOptions::default(), &backend).unwrap_err();
        assert!(matches!(err, SolveError::CapabilityMismatch { needed: "solves_bilinear" }));
    }

    #[test]
    fn quadratic_objective_needs_miqp() {
        let mut m = MipModel::new("q");
        let e = m.add_variable(VariableDef::free("res_1")).unwrap();
        m.set_objective(AffineExpr::new(), vec![(e, e, 1.0)]);
        let err = check_capabilities(&m, &SolverCapabilities::lp_only()).unwrap_err();
        assert!(matches!(err, SolveError::CapabilityMismatch { needed: "solves_convex_miqp" }));
    }

    #[test]
    fn reference_dialect_maps_values() {
        let mut m = MipModel::new("t");
        m.add_variable(VariableDef::continuous("x", 0.0, 2.0)).unwrap();
        m.add_variable(VariableDef::continuous("y", 0.0, 2.0)).unwrap();
        let text = "# Status = optimal\n# Objective value = 3\n# Best bound = 3\nx 1\ny 2\n";
        let sol = parse_solution_file(text, SolDialect::Reference, &m).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert_eq!(sol.values, vec![1.0, 2.0]);
        assert_eq!(sol.objective, 3.0);
        assert_eq!(sol.gap, 0.0);
    }

    #[test]
    fn reference_dialect_rejects_missing_variable() {
        let mut m = MipModel::new("t");
        m.add_variable(VariableDef::continuous("x", 0.0, 2.0)).unwrap();
        m.add_variable(VariableDef::continuous("y", 0.0, 2.0)).unwrap();
        let text = "# Status = optimal\n# Objective value = 1\nx 1\n";
        let err = parse_solution_file(text, SolDialect::Reference, &m).unwrap_err();
        assert!(err.to_string().contains("'y'"), "{err}");
    }

    #[test]
    fn infeasible_file_yields_empty_values() {
        let m = MipModel::new("t");
        let text = "# Status = infeasible\n";
        let sol = parse_solution_file(text, SolDialect::Reference, &m).unwrap();
        assert_eq!(sol.status, SolveStatus::Infeasible);
        assert!(sol.values.is_empty());
    }

    #[test]
    fn scip_dialect_fills_omitted_zeros() {
        let mut m = MipModel::new("t");
        m.add_variable(VariableDef::continuous("x", 0.0, 2.0)).unwrap();
        m.add_variable(VariableDef::continuous("y", 0.0, 2.0)).unwrap();
        let text = "solution status: optimal\nobjective value: 2\ny 2 (obj:1)\n";
        let sol = parse_solution_file(text, SolDialect::Scip, &m).unwrap();
        assert_eq!(sol.values, vec![0.0, 2.0]);
    }
}
