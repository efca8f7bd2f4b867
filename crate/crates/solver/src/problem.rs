// SPDX-License-Identifier: MIT OR Apache-2.0

//! Internal problem representation shared by the parser and the engines.

use std::collections::HashMap;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RowSense {
    Le,
    Eq,
    Ge,
}

#[derive(Clone, Debug)]
pub struct Row {
    pub name: String,
    pub terms: Vec<(usize, f64)>,
    /// Product terms `coeff * x_a * x_b`; non-empty rows are rejected by
    /// the engines (quadratic constraints are out of capability).
    pub quad: Vec<(usize, usize, f64)>,
    pub sense: RowSense,
    pub rhs: f64,
}

/// A parsed optimization problem. Objectives are stored in minimization
/// form (`maximize` records the original direction for reporting).
#[derive(Clone, Debug, Default)]
pub struct Problem {
    pub name: String,
    pub maximize: bool,
    pub var_names: Vec<String>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub binary: Vec<bool>,
    pub integer: Vec<bool>,
    pub obj_terms: Vec<(usize, f64)>,
    /// Quadratic objective terms `coeff * x_a * x_b` (the LP-format `/ 2`
    /// already applied).
    pub obj_quad: Vec<(usize, usize, f64)>,
    pub obj_const: f64,
    pub rows: Vec<Row>,
    lookup: HashMap<String, usize>,
}

impl Problem {
    pub fn num_vars(&self) -> usize {
        self.var_names.len()
    }

    pub fn has_integers(&self) -> bool {
        self.binary.iter().chain(self.integer.iter()).any(|&b| b)
    }

    pub fn has_quadratic_objective(&self) -> bool {
        !self.obj_quad.is_empty()
    }

    pub fn has_quadratic_rows(&self) -> bool {
        self.rows.iter().any(|r| !r.quad.is_empty())
    }

    /// Index of `name`, creating the variable with default LP bounds
    /// `[0, +inf)` on first appearance.
    pub fn intern(&mut self, name: &str) -> usize {
        if let Some(&id) = self.lookup.get(name) {
            return id;
        }
        let id = self.var_names.len();
        self.var_names.push(name.to_string());
        self.lower.push(0.0);
        self.upper.push(f64::INFINITY);
        self.binary.push(false);
        self.integer.push(false);
        self.lookup.insert(name.to_string(), id);
        id
    }

    pub fn find(&self, name: &str) -> Option<usize> {
        self.lookup.get(name).copied()
    }

    /// Objective value of a point, in the original direction.
    pub fn objective_value(&self, x: &[f64]) -> f64 {
        let mut v = self.obj_const;
        for &(i, c) in &self.obj_terms {
            v += c * x[i];
        }
        for &(a, b, c) in &self.obj_quad {
            v += c * x[a] * x[b];
        }
        v
    }

    /// Largest constraint violation of a point.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.num_vars() {
            worst = worst.max(self.lower[i] - x[i]).max(x[i] - self.upper[i]);
        }
        for row in &self.rows {
            let lhs: f64 = row.terms.iter().map(|&(i, c)| c * x[i]).sum();
            let gap = match row.sense {
                RowSense::Le => lhs - row.rhs,
                RowSense::Ge => row.rhs - lhs,
                RowSense::Eq => (lhs - row.rhs).abs(),
            };
            worst = worst.max(gap);
        }
        worst
    }
}
