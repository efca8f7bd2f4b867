// SPDX-License-Identifier: MIT OR Apache-2.0

//! LP text emission (CPLEX-LP dialect).
//!
//! Output is a pure function of the model content: variables appear in id
//! order, constraints in insertion order, and numbers use the shortest
//! round-trip decimal form, so repeated emission is byte-identical.
//!
//! Conventions used here:
//! * every variable gets an explicit line in the `Bounds` section
//!   (`x free`, `x = v`, `l <= x <= u`, `x >= l`, `-inf <= x <= u`);
//! * quadratic objective terms are written as `[ 2c x ^ 2 ] / 2`;
//! * bilinear constraint terms are written as `[ c a * b ]` inside the row.

use std::fmt::Write;

use super::{MipModel, VarKind};

fn num(v: f64) -> String {
    if v == f64::INFINITY {
        "+inf".to_string()
    } else if v == f64::NEG_INFINITY {
        "-inf".to_string()
    } else if v == 0.0 {
        // Normalizes -0.0.
        "0".to_string()
    } else {
        format!("{v}")
    }
}

/// Appends `sign coeff name` with an explicit leading sign when `lead` is
/// false; the first term of an expression carries a bare minus only.
fn push_term(out: &mut String, first: bool, coeff: f64, body: &str) {
    if first {
        if coeff < 0.0 {
            let _ = write!(out, "- {} {}", num(-coeff), body);
        } else {
            let _ = write!(out, "{} {}", num(coeff), body);
        }
    } else if coeff < 0.0 {
        let _ = write!(out, " - {} {}", num(-coeff), body);
    } else {
        let _ = write!(out, " + {} {}", num(coeff), body);
    }
}

pub fn emit_lp_text(model: &MipModel) -> String {
    let name = |id: usize| model.var(id).name.as_str();
    let mut out = String::new();
    let _ = writeln!(out, "\\ Problem: {}", model.name());
    for (key, value) in &model.metadata {
        let _ = writeln!(out, "\\ {key}: {value}");
    }
    out.push_str("Minimize\n obj:");
    let obj = model.objective();
    let mut wrote_any = false;
    if !obj.linear.terms().is_empty() || obj.quadratic.is_empty() {
        out.push(' ');
        let mut first = true;
        for &(v, c) in obj.linear.terms() {
            push_term(&mut out, first, c, name(v));
            first = false;
        }
        if obj.linear.constant_part() != 0.0 || first {
            push_term(&mut out, first, obj.linear.constant_part(), "");
            // Drop the trailing space left by the empty body.
            while out.ends_with(' ') {
                out.pop();
            }
        }
        wrote_any = true;
    }
    if !obj.quadratic.is_empty() {
        out.push_str(if wrote_any { " + [ " } else { " [ " });
        let mut first = true;
        for &(a, b, c) in &obj.quadratic {
            let body = if a == b {
                format!("{} ^ 2", name(a))
            } else {
                format!("{} * {}", name(a), name(b))
            };
            // The bracket block is halved by convention, so double here.
            push_term(&mut out, first, 2.0 * c, &body);
            first = false;
        }
        out.push_str(" ] / 2");
    }
    out.push('\n');

    out.push_str("Subject To\n");
    for row in model.constraints() {
        let _ = write!(out, " {}:", row.label);
        let mut first = true;
        if !row.bilinear.is_empty() {
            out.push_str(" [ ");
            for &(a, b, c) in &row.bilinear {
                let body = if a == b {
                    format!("{} ^ 2", name(a))
                } else {
                    format!("{} * {}", name(a), name(b))
                };
                push_term(&mut out, first, c, &body);
                first = false;
            }
            out.push_str(" ]");
            for &(v, c) in row.lhs.terms() {
                push_term(&mut out, false, c, name(v));
            }
        } else {
            out.push(' ');
            if row.lhs.terms().is_empty() {
                out.push('0');
                first = false;
            }
            for &(v, c) in row.lhs.terms() {
                push_term(&mut out, first, c, name(v));
                first = false;
            }
        }
        let rhs = row.rhs - row.lhs.constant_part();
        let _ = writeln!(out, " {} {}", row.sense, num(rhs));
    }

    out.push_str("Bounds\n");
    for var in model.variables() {
        let line = match (var.lower.is_finite(), var.upper.is_finite()) {
            (false, false) => format!(" {} free", var.name),
            (true, true) if var.lower == var.upper => {
                format!(" {} = {}", var.name, num(var.lower))
            }
            (true, true) => format!(" {} <= {} <= {}", num(var.lower), var.name, num(var.upper)),
            (true, false) => format!(" {} >= {}", var.name, num(var.lower)),
            (false, true) => format!(" -inf <= {} <= {}", var.name, num(var.upper)),
        };
        out.push_str(&line);
        out.push('\n');
    }

    let binaries: Vec<&str> = model
        .variables()
        .iter()
        .filter(|v| v.kind == VarKind::Binary)
        .map(|v| v.name.as_str())
        .collect();
    if !binaries.is_empty() {
        out.push_str("Binaries\n");
        for chunk in binaries.chunks(8) {
            let _ = writeln!(out, " {}", chunk.join(" "));
        }
    }
    out.push_str("End\n");
    out
}

#[cfg(test)]
mod tests {
    use crate::model::{AffineExpr, MipModel, Sense, VariableDef};

    fn tiny() -> MipModel {
        let mut m = MipModel::new("tiny");
        let x = m.add_variable(VariableDef::continuous("x", 1.0, f64::INFINITY)).unwrap();
        m.set_objective(AffineExpr::term(x, 1.0), Vec::new());
        m.add_constraint("low", AffineExpr::term(x, 1.0), Sense::Ge, 1.0);
        m
    }

    #[test]
    fn emission_is_byte_stable() {
        let m = tiny();
        let a = m.emit_lp_text();
        let b = m.emit_lp_text();
        assert_eq!(a, b);
        assert!(a.contains(" low: 1 x >= 1"));
        assert!(a.contains(" x >= 1"));
        assert!(a.ends_with("End\n"));
    }

    #[test]
    fn quadratic_objective_emits_bracket_block() {
        let mut m = MipModel::new("quad");
        let e = m.add_variable(VariableDef::free("res_1")).unwrap();
        m.set_objective(AffineExpr::new(), vec![(e, e, 1.0)]);
        let text = m.emit_lp_text();
        assert!(text.contains("[ 2 res_1 ^ 2 ] / 2"), "{text}");
    }

    #[test]
    fn bilinear_rows_emit_product_terms() {
        let mut m = MipModel::new("bil");
        let a = m.add_variable(VariableDef::continuous("m_1", -1.0, 1.0)).unwrap();
        let r = m.add_variable(VariableDef::continuous("r_1", 0.0, 4.0)).unwrap();
        let c = m.add_variable(VariableDef::free("c_1")).unwrap();
        m.add_bilinear_constraint(
            "cont_1",
            AffineExpr::term(c, 1.0),
            vec![(a, r, 1.0)],
            Sense::Eq,
            0.0,
        );
        assert!(m.has_bilinear);
        let text = m.emit_lp_text();
        assert!(text.contains(" cont_1: [ 1 m_1 * r_1 ] + 1 c_1 = 0"), "{text}");
    }

    #[test]
    fn relaxation_changes_only_binaries_section() {
        let mut m = MipModel::new("relax");
        let d = m.add_variable(VariableDef::binary("d_1")).unwrap();
        let x = m.add_variable(VariableDef::continuous("x", 0.0, 2.0)).unwrap();
        m.add_constraint(
            "row",
            AffineExpr::term(d, 1.0).plus(x, 1.0),
            Sense::Le,
            2.0,
        );
        m.set_objective(AffineExpr::term(x, 1.0), Vec::new());
        let full = m.emit_lp_text();
        let relaxed = m.relax_integrality().emit_lp_text();
        let relaxed_lines: std::collections::HashSet<&str> = relaxed.lines().collect();
        let diff: Vec<&str> = full.lines().filter(|l| !relaxed_lines.contains(l)).collect();
        assert_eq!(diff, vec!["Binaries", " d_1"]);
    }
}
