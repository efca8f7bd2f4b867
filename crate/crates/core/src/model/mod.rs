// SPDX-License-Identifier: MIT OR Apache-2.0

//! Solver-agnostic mixed-integer model representation.
//!
//! Models are assembled through [`MipModel`] construction methods, then
//! treated as immutable: solving, relaxing, fixing, and emission all either
//! borrow the model or return a transformed copy. Bilinear constraint terms
//! exist only for the breakpoint continuity rows and are gated by the
//! `has_bilinear` flag so that backends can refuse them before a subprocess
//! is ever launched.

mod lp_text;

use std::collections::BTreeMap;
use std::fmt;

pub use lp_text::emit_lp_text;

/// Dense variable index, unique within one model.
pub type VarId = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VarKind {
    Continuous,
    Binary,
}

/// A single decision variable. Infinite bounds are stored as IEEE
/// infinities, never as large finite sentinels.
#[derive(Clone, Debug, PartialEq)]
pub struct VariableDef {
    pub name: String,
    pub kind: VarKind,
    pub lower: f64,
    pub upper: f64,
}

impl VariableDef {
    pub fn continuous(name: impl Into<String>, lower: f64, upper: f64) -> Self {
        Self { name: name.into(), kind: VarKind::Continuous, lower, upper }
    }

    pub fn binary(name: impl Into<String>) -> Self {
        Self { name: name.into(), kind: VarKind::Binary, lower: 0.0, upper: 1.0 }
    }

    pub fn free(name: impl Into<String>) -> Self {
        Self::continuous(name, f64::NEG_INFINITY, f64::INFINITY)
    }

    fn check(&self) -> Result<(), ModelError> {
        if self.lower.is_nan() || self.upper.is_nan() || self.lower > self.upper {
            return Err(ModelError::InvalidBounds {
                name: self.name.clone(),
                lower: self.lower,
                upper: self.upper,
            });
        }
        if self.kind == VarKind::Binary && (self.lower < 0.0 || self.upper > 1.0) {
            return Err(ModelError::InvalidBounds {
                name: self.name.clone(),
                lower: self.lower,
                upper: self.upper,
            });
        }
        Ok(())
    }
}

/// Linear expression `sum(coeff * var) + constant` in normalized form:
/// terms sorted by id, duplicate ids combined, zero coefficients dropped.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct AffineExpr {
    terms: Vec<(VarId, f64)>,
    constant: f64,
}

impl AffineExpr {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn constant(value: f64) -> Self {
        Self { terms: Vec::new(), constant: value }
    }

    pub fn term(var: VarId, coeff: f64) -> Self {
        Self::new().plus(var, coeff)
    }

    /// Adds `coeff * var`, keeping the expression normalized.
    pub fn plus(mut self, var: VarId, coeff: f64) -> Self {
        self.add(var, coeff);
        self
    }

    pub fn plus_const(mut self, value: f64) -> Self {
        self.constant += value;
        self
    }

    pub fn add(&mut self, var: VarId, coeff: f64) {
        match self.terms.binary_search_by_key(&var, |&(v, _)| v) {
            Ok(pos) => {
                self.terms[pos].1 += coeff;
                if self.terms[pos].1 == 0.0 {
                    self.terms.remove(pos);
                }
            }
            Err(pos) => {
                if coeff != 0.0 {
                    self.terms.insert(pos, (var, coeff));
                }
            }
        }
    }

    pub fn terms(&self) -> &[(VarId, f64)] {
        &self.terms
    }

    pub fn constant_part(&self) -> f64 {
        self.constant
    }

    /// Evaluates the expression at the given dense assignment.
    pub fn eval(&self, values: &[f64]) -> f64 {
        self.terms.iter().map(|&(v, c)| c * values[v]).sum::<f64>() + self.constant
    }
}

impl FromIterator<(VarId, f64)> for AffineExpr {
    fn from_iter<I: IntoIterator<Item = (VarId, f64)>>(iter: I) -> Self {
        let mut expr = AffineExpr::new();
        for (v, c) in iter {
            expr.add(v, c);
        }
        expr
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

impl fmt::Display for Sense {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sense::Le => "<=",
            Sense::Eq => "=",
            Sense::Ge => ">=",
        })
    }
}

/// One constraint row. `bilinear` carries `coeff * var_a * var_b` product
/// terms and stays empty for everything except the bilinear continuity rows.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstraintDef {
    pub label: String,
    pub lhs: AffineExpr,
    pub sense: Sense,
    pub rhs: f64,
    pub bilinear: Vec<(VarId, VarId, f64)>,
}

/// Minimization objective; the quadratic part is a sum of squared residual
/// variables, so it is positive semidefinite by construction.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ObjectiveDef {
    pub linear: AffineExpr,
    pub quadratic: Vec<(VarId, VarId, f64)>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ModelError {
    InvalidBounds { name: String, lower: f64, upper: f64 },
    UnknownVariable { id: VarId },
    OutOfDomain { name: String, value: f64 },
}

impl fmt::Display for ModelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelError::InvalidBounds { name, lower, upper } => {
                write!(f, "invalid bounds [{lower}, {upper}] for variable '{name}'")
            }
            ModelError::UnknownVariable { id } => write!(f, "unknown variable id {id}"),
            ModelError::OutOfDomain { name, value } => {
                write!(f, "value {value} outside the domain of variable '{name}'")
            }
        }
    }
}

impl std::error::Error for ModelError {}

/// Validation findings; an empty list means every invariant holds.
#[derive(Clone, Debug, PartialEq)]
pub enum Diagnostic {
    DanglingVariable { context: String, id: VarId },
    DuplicateLabel { label: String },
    InvalidBounds { name: String },
    NonFiniteCoefficient { context: String },
    FlagMismatch { flag: &'static str, expected: bool },
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diagnostic::DanglingVariable { context, id } => {
                write!(f, "dangling variable id {id} in {context}")
            }
            Diagnostic::DuplicateLabel { label } => write!(f, "duplicate constraint label '{label}'"),
            Diagnostic::InvalidBounds { name } => write!(f, "invalid bounds on variable '{name}'"),
            Diagnostic::NonFiniteCoefficient { context } => {
                write!(f, "non-finite coefficient in {context}")
            }
            Diagnostic::FlagMismatch { flag, expected } => {
                write!(f, "model flag {flag} should be {expected} given the model content")
            }
        }
    }
}

/// Solver-agnostic mixed-integer model.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct MipModel {
    name: String,
    variables: Vec<VariableDef>,
    constraints: Vec<ConstraintDef>,
    objective: ObjectiveDef,
    pub has_bilinear: bool,
    pub has_quadratic_objective: bool,
    pub metadata: BTreeMap<String, String>,
}

impl MipModel {
    pub fn new(name: impl Into<String>) -> Self {
        Self { name: name.into(), ..Self::default() }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn variables(&self) -> &[VariableDef] {
        &self.variables
    }

    pub fn constraints(&self) -> &[ConstraintDef] {
        &self.constraints
    }

    pub fn objective(&self) -> &ObjectiveDef {
        &self.objective
    }

    pub fn var(&self, id: VarId) -> &VariableDef {
        &self.variables[id]
    }

    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn num_binaries(&self) -> usize {
        self.variables.iter().filter(|v| v.kind == VarKind::Binary).count()
    }

    /// Adds a variable, returning its dense id.
    pub fn add_variable(&mut self, def: VariableDef) -> Result<VarId, ModelError> {
        def.check()?;
        self.variables.push(def);
        Ok(self.variables.len() - 1)
    }

    /// Adds a linear constraint row.
    pub fn add_constraint(
        &mut self,
        label: impl Into<String>,
        lhs: AffineExpr,
        sense: Sense,
        rhs: f64,
    ) -> String {
        let label = label.into();
        self.constraints.push(ConstraintDef {
            label: label.clone(),
            lhs,
            sense,
            rhs,
            bilinear: Vec::new(),
        });
        label
    }

    /// Adds a constraint with bilinear product terms and flags the model.
    pub fn add_bilinear_constraint(
        &mut self,
        label: impl Into<String>,
        lhs: AffineExpr,
        bilinear: Vec<(VarId, VarId, f64)>,
        sense: Sense,
        rhs: f64,
    ) -> String {
        let label = label.into();
        if !bilinear.is_empty() {
            self.has_bilinear = true;
        }
        self.constraints.push(ConstraintDef { label: label.clone(), lhs, sense, rhs, bilinear });
        label
    }

    pub fn set_objective(&mut self, linear: AffineExpr, quadratic: Vec<(VarId, VarId, f64)>) {
        self.has_quadratic_objective = !quadratic.is_empty();
        self.objective = ObjectiveDef { linear, quadratic };
    }

    /// Adds linear terms and squared-variable terms to the existing objective.
    pub fn extend_objective(&mut self, linear: AffineExpr, quadratic: Vec<(VarId, VarId, f64)>) {
        for &(v, c) in linear.terms() {
            self.objective.linear.add(v, c);
        }
        self.objective.linear.constant += linear.constant_part();
        self.objective.quadratic.extend(quadratic);
        self.has_quadratic_objective = !self.objective.quadratic.is_empty();
    }

    /// Converts every binary variable to a continuous one on `[0, 1]`,
    /// leaving all other content untouched. Idempotent.
    pub fn relax_integrality(&self) -> MipModel {
        let mut relaxed = self.clone();
        for var in &mut relaxed.variables {
            if var.kind == VarKind::Binary {
                var.kind = VarKind::Continuous;
            }
        }
        relaxed
    }

    /// Pins the listed variables to values by collapsing their bounds.
    pub fn fix_variables(&self, assignments: &[(VarId, f64)]) -> Result<MipModel, ModelError> {
        let mut fixed = self.clone();
        for &(id, value) in assignments {
            let var = fixed.variables.get_mut(id).ok_or(ModelError::UnknownVariable { id })?;
            let in_domain = match var.kind {
                VarKind::Binary => value == 0.0 || value == 1.0,
                VarKind::Continuous => value >= var.lower && value <= var.upper,
            };
            if !in_domain {
                return Err(ModelError::OutOfDomain { name: var.name.clone(), value });
            }
            var.lower = value;
            var.upper = value;
        }
        Ok(fixed)
    }

    /// Emits the model in LP text format; deterministic and byte-stable.
    pub fn emit_lp_text(&self) -> String {
        emit_lp_text(self)
    }

    /// Checks every structural invariant, reporting all violations.
    pub fn validate(&self) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        let n = self.variables.len();
        for var in &self.variables {
            if var.check().is_err() {
                out.push(Diagnostic::InvalidBounds { name: var.name.clone() });
            }
        }
        let mut seen = std::collections::BTreeMap::new();
        for c in &self.constraints {
            if let Some(count) = seen.get_mut(&c.label) {
                *count += 1;
            } else {
                seen.insert(c.label.clone(), 1usize);
            }
        }
        for (label, count) in seen {
            if count > 1 {
                out.push(Diagnostic::DuplicateLabel { label });
            }
        }
        let check_expr = |context: &str, expr: &AffineExpr, out: &mut Vec<Diagnostic>| {
            for &(v, c) in expr.terms() {
                if v >= n {
                    out.push(Diagnostic::DanglingVariable { context: context.to_string(), id: v });
                }
                if !c.is_finite() {
                    out.push(Diagnostic::NonFiniteCoefficient { context: context.to_string() });
                }
            }
            if !expr.constant_part().is_finite() {
                out.push(Diagnostic::NonFiniteCoefficient { context: context.to_string() });
            }
        };
        let mut any_bilinear = false;
        for c in &self.constraints {
            check_expr(&format!("constraint '{}'", c.label), &c.lhs, &mut out);
            for &(a, b, coeff) in &c.bilinear {
                any_bilinear = true;
                for id in [a, b] {
                    if id >= n {
                        out.push(Diagnostic::DanglingVariable {
                            context: format!("constraint '{}'", c.label),
                            id,
                        });
                    }
                }
                if !coeff.is_finite() {
                    out.push(Diagnostic::NonFiniteCoefficient {
                        context: format!("constraint '{}'", c.label),
                    });
                }
            }
            if !c.rhs.is_finite() {
                out.push(Diagnostic::NonFiniteCoefficient {
                    context: format!("constraint '{}'", c.label),
                });
            }
        }
        check_expr("objective", &self.objective.linear, &mut out);
        for &(a, b, coeff) in &self.objective.quadratic {
            for id in [a, b] {
                if id >= n {
                    out.push(Diagnostic::DanglingVariable { context: "objective".into(), id });
                }
            }
            if !coeff.is_finite() {
                out.push(Diagnostic::NonFiniteCoefficient { context: "objective".into() });
            }
        }
        if any_bilinear != self.has_bilinear {
            out.push(Diagnostic::FlagMismatch { flag: "has_bilinear", expected: any_bilinear });
        }
        let any_quad = !self.objective.quadratic.is_empty();
        if any_quad != self.has_quadratic_objective {
            out.push(Diagnostic::FlagMismatch {
                flag: "has_quadratic_objective",
                expected: any_quad,
            });
        }
        out
    }
}

/// Convenience alias kept for call sites that build models incrementally.
pub type ModelBuilder = MipModel;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn add_variable_assigns_dense_ids() {
        let mut m = MipModel::new("t");
        let a = m.add_variable(VariableDef::binary("delta_1_1")).unwrap();
        assert_eq!(a, 0);
        let b = m.add_variable(VariableDef::binary("delta_1_2")).unwrap();
        let c = m.add_variable(VariableDef::continuous("m_1", -1.0, 1.0)).unwrap();
        assert_eq!((b, c), (1, 2));
        assert_eq!(m.num_vars(), 3);
    }

    #[test]
    fn add_variable_rejects_inverted_bounds() {
        let mut m = MipModel::new("t");
        let err = m.add_variable(VariableDef::continuous("bad", 3.0, 1.0)).unwrap_err();
        assert!(matches!(err, ModelError::InvalidBounds { .. }));
    }

    #[test]
    fn relax_converts_all_binaries() {
        let mut m = MipModel::new("t");
        for i in 0..5 {
            m.add_variable(VariableDef::binary(format!("d_{i}"))).unwrap();
        }
        for i in 0..3 {
            m.add_variable(VariableDef::continuous(format!("x_{i}"), 0.0, 2.0)).unwrap();
        }
        let relaxed = m.relax_integrality();
        assert_eq!(relaxed.num_binaries(), 0);
        assert_eq!(relaxed.num_vars(), 8);
        assert_eq!(relaxed.var(0).lower, 0.0);
        assert_eq!(relaxed.var(0).upper, 1.0);
        // Idempotent.
        assert_eq!(relaxed.relax_integrality(), relaxed);
    }

    #[test]
    fn relax_of_pure_continuous_model_is_identity() {
        let mut m = MipModel::new("t");
        m.add_variable(VariableDef::continuous("x", 0.0, 1.0)).unwrap();
        assert_eq!(m.relax_integrality(), m);
    }

    #[test]
    fn fix_checks_domains() {
        let mut m = MipModel::new("t");
        let d = m.add_variable(VariableDef::binary("d")).unwrap();
        let err = m.fix_variables(&[(d, 0.5)]).unwrap_err();
        assert!(matches!(err, ModelError::OutOfDomain { .. }));

        let relaxed = m.relax_integrality();
        let fixed = relaxed.fix_variables(&[(d, 0.5)]).unwrap();
        assert_eq!((fixed.var(d).lower, fixed.var(d).upper), (0.5, 0.5));

        assert_eq!(m.fix_variables(&[]).unwrap(), m);
    }

    #[test]
    fn affine_expr_normalizes() {
        let mut e = AffineExpr::new();
        e.add(3, 1.0);
        e.add(1, 2.0);
        e.add(3, -1.0);
        e.add(2, 0.0);
        assert_eq!(e.terms(), &[(1, 2.0)]);
    }

    #[test]
    fn validate_flags_dangling_and_duplicates() {
        let mut m = MipModel::new("t");
        let x = m.add_variable(VariableDef::continuous("x", 0.0, 1.0)).unwrap();
        m.add_constraint("row", AffineExpr::term(x, 1.0), Sense::Le, 1.0);
        m.add_constraint("row", AffineExpr::term(7, 1.0), Sense::Le, 1.0);
        let diags = m.validate();
        assert!(diags.iter().any(|d| matches!(d, Diagnostic::DuplicateLabel { .. })));
        assert!(diags.iter().any(|d| matches!(d, Diagnostic::DanglingVariable { id: 7, .. })));
    }

    #[test]
    fn validate_clean_model_is_empty() {
        let mut m = MipModel::new("t");
        let x = m.add_variable(VariableDef::continuous("x", 0.0, 1.0)).unwrap();
        m.add_constraint("row", AffineExpr::term(x, 1.0), Sense::Ge, 1.0);
        m.set_objective(AffineExpr::term(x, 1.0), Vec::new());
        assert!(m.validate().is_empty());
    }
}
