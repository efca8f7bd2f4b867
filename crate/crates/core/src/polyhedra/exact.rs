// SPDX-License-Identifier: MIT OR Apache-2.0

//! Exact rational vertex verification.

use num_traits::Zero;
use serde::Serialize;

use crate::Rational;

use super::{PolyhedronSpec, RowSense};

/// Rank of a rational matrix by Gaussian elimination.
pub fn rational_rank(rows: &[Vec<Rational>]) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let ncols = rows[0].len();
    let mut m: Vec<Vec<Rational>> = rows.to_vec();
    let mut rank = 0usize;
    let mut row = 0usize;
    for col in 0..ncols {
        let pivot = (row..m.len()).find(|&r| !m[r][col].is_zero());
        let Some(p) = pivot else { continue };
        m.swap(row, p);
        let inv = m[row][col].clone();
        for r in 0..m.len() {
            if r != row && !m[r][col].is_zero() {
                let factor = m[r][col].clone() / inv.clone();
                for c in col..ncols {
                    let v = m[row][c].clone() * factor.clone();
                    m[r][c] = m[r][c].clone() - v;
                }
            }
        }
        rank += 1;
        row += 1;
        if row == m.len() {
            break;
        }
    }
    rank
}

/// Outcome of the exact vertex check.
#[derive(Clone, Debug, Serialize)]
pub struct VertexReport {
    pub feasible: bool,
    /// Label of the first violated row, when infeasible.
    pub violated: Option<String>,
    /// Labels of constraint rows satisfied with equality.
    pub tight_rows: Vec<String>,
    /// Variables at their lower/upper bound.
    pub tight_lower: Vec<String>,
    pub tight_upper: Vec<String>,
    /// Rank of the full tight system.
    pub rank: usize,
    pub ambient_dim: usize,
    pub is_vertex: bool,
}

/// Checks feasibility of `point` exactly, collects every tight constraint
/// (rows and variable bounds), and decides vertexhood by the rational rank
/// of the tight system.
pub fn verify_vertex(poly: &PolyhedronSpec<Rational>, point: &[Rational]) -> VertexReport {
    assert_eq!(point.len(), poly.num_vars(), "point dimension mismatch");
    let n = poly.num_vars();
    let mut tight_rows = Vec::new();
    let mut tight_matrix: Vec<Vec<Rational>> = Vec::new();
    let mut violated = None;
    let mut feasible = true;

    for row in &poly.rows {
        let lhs: Rational = row
            .coeffs
            .iter()
            .zip(point)
            .map(|(c, x)| c.clone() * x.clone())
            .fold(Rational::zero(), |a, b| a + b);
        let (ok, tight) = match row.sense {
            RowSense::Le => (lhs <= row.rhs, lhs == row.rhs),
            RowSense::Eq => (lhs == row.rhs, lhs == row.rhs),
            RowSense::Ge => (lhs >= row.rhs, lhs == row.rhs),
        };
        if !ok && feasible {
            feasible = false;
            violated = Some(row.label.clone());
        }
        if ok && tight {
            tight_rows.push(row.label.clone());
            tight_matrix.push(row.coeffs.clone());
        }
    }

    let mut tight_lower = Vec::new();
    let mut tight_upper = Vec::new();
    for i in 0..n {
        if point[i] < poly.lower[i] || point[i] > poly.upper[i] {
            if feasible {
                feasible = false;
                violated = Some(format!("bounds of {}", poly.var_names[i]));
            }
            continue;
        }
        if point[i] == poly.lower[i] {
            tight_lower.push(poly.var_names[i].clone());
            let mut unit = vec![Rational::zero(); n];
            unit[i] = Rational::from_integer(1.into());
            tight_matrix.push(unit);
        }
        if point[i] == poly.upper[i] {
            tight_upper.push(poly.var_names[i].clone());
            let mut unit = vec![Rational::zero(); n];
            unit[i] = Rational::from_integer(1.into());
            tight_matrix.push(unit);
        }
    }

    let rank = rational_rank(&tight_matrix);
    VertexReport {
        feasible,
        violated,
        tight_rows,
        tight_lower,
        tight_upper,
        rank,
        ambient_dim: n,
        is_vertex: feasible && rank == n,
    }
}

#[cfg(test)]
mod tests {
    use num_traits::FromPrimitive;

    use super::*;
    use crate::polyhedra::{build_b1_polyhedron, flatten_pattern, fractional_vertex_pattern};

    fn rat(v: f64) -> Rational {
        Rational::from_f64(v).unwrap()
    }

    #[test]
    fn rank_of_identity_and_dependent_rows() {
        let rows = vec![
            vec![rat(1.0), rat(0.0), rat(0.0)],
            vec![rat(0.0), rat(1.0), rat(0.0)],
            vec![rat(1.0), rat(1.0), rat(0.0)],
        ];
        assert_eq!(rational_rank(&rows), 2);
    }

    #[test]
    fn fractional_point_is_a_vertex_of_the_alternate_polyhedron() {
        let poly = build_b1_polyhedron::<Rational>(4, 6);
        let point = flatten_pattern::<Rational>(&fractional_vertex_pattern());
        let report = verify_vertex(&poly, &point);
        assert!(report.feasible, "{:?}", report.violated);
        assert!(report.tight_rows.len() + report.tight_lower.len() + report.tight_upper.len() >= 24);
        assert_eq!(report.rank, 24);
        assert!(report.is_vertex);
    }

    #[test]
    fn interior_point_is_not_a_vertex() {
        let poly = build_b1_polyhedron::<Rational>(4, 6);
        let quarter = rat(0.25);
        let point = vec![quarter; 24];
        let report = verify_vertex(&poly, &point);
        assert!(report.feasible);
        assert!(!report.is_vertex);
        assert!(report.rank < 24);
    }

    #[test]
    fn integral_contiguous_point_is_a_vertex() {
        let pattern = [
            vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0],
            vec![0.0, 1.0, 1.0, 0.0, 0.0, 0.0],
            vec![0.0, 0.0, 0.0, 1.0, 0.0, 0.0],
            vec![0.0, 0.0, 0.0, 0.0, 1.0, 1.0],
        ];
        let poly = build_b1_polyhedron::<Rational>(4, 6);
        let point = flatten_pattern::<Rational>(&pattern);
        let report = verify_vertex(&poly, &point);
        assert!(report.feasible);
        assert!(report.is_vertex, "rank {} of {}", report.rank, report.ambient_dim);
    }
}
