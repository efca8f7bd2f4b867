// SPDX-License-Identifier: MIT OR Apache-2.0

//! Exhaustive total-unimodularity checking for small constraint matrices.
//!
//! Minor enumeration uses the cofactor reduction lemma: a square submatrix
//! with a zero row or column has determinant 0, and one with a single-entry
//! row or column has the absolute determinant of a one-smaller minor. Every
//! determinant outside `{-1, 0, 1}` therefore already appears in an
//! *irreducible* submatrix, one whose rows and columns all carry at least
//! two nonzeros. Iterated pruning shrinks the matrix to the core that can
//! contain irreducible submatrices; when every core row has exactly two
//! nonzeros the irreducible submatrices are disjoint unions of simple cycles
//! of the column multigraph, and because a union's determinant is the signed
//! product of its cycles' determinants, checking single cycles is
//! exhaustive. A direct subset enumeration covers small cores with denser
//! rows.

use serde::Serialize;

#[derive(Clone, Debug, Serialize)]
pub struct TuViolation {
    pub order: usize,
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    pub det: i64,
}

#[derive(Clone, Debug, Serialize)]
pub struct TuReport {
    /// All entries lie in `{-1, 0, 1}`.
    pub entries_ok: bool,
    /// Every row, restricted to the signed columns, has at most two nonzero
    /// entries in `{-1, +1}`, of opposite signs when there are two.
    pub structural_ok: bool,
    pub minors_checked: u64,
    pub max_order: usize,
    pub violation: Option<TuViolation>,
    /// False when the direct enumeration hit the work cap.
    pub exhaustive: bool,
    pub ok: bool,
}

const WORK_CAP: u64 = 20_000_000;

fn int_det(mut m: Vec<Vec<i128>>) -> i128 {
    // Fraction-free Gaussian elimination.
    let n = m.len();
    if n == 0 {
        return 1;
    }
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n - 1 {
        if m[k][k] == 0 {
            let Some(swap) = (k + 1..n).find(|&r| m[r][k] != 0) else {
                return 0;
            };
            m.swap(k, swap);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) / prev;
            }
            m[i][k] = 0;
        }
        prev = m[k][k];
    }
    sign * m[n - 1][n - 1]
}

/// Checks total unimodularity of an integer matrix by exhaustive minor
/// enumeration up to `max_order`, with the structural sign check applied to
/// columns from `signed_cols_start` on.
pub fn check_tu_small(matrix: &[Vec<i64>], max_order: usize, signed_cols_start: usize) -> TuReport {
    let nrows = matrix.len();
    let ncols = matrix.first().map_or(0, Vec::len);

    let entries_ok = matrix.iter().all(|row| row.iter().all(|&v| (-1..=1).contains(&v)));

    let mut structural_ok = true;
    for row in matrix {
        let signed: Vec<i64> =
            row.iter().skip(signed_cols_start).copied().filter(|&v| v != 0).collect();
        match signed.as_slice() {
            [] | [1] | [-1] => {}
            [a, b] if a.abs() == 1 && b.abs() == 1 && a * b == -1 => {}
            _ => structural_ok = false,
        }
    }

    let mut report = TuReport {
        entries_ok,
        structural_ok,
        minors_checked: nrows as u64 * ncols as u64,
        max_order,
        violation: None,
        exhaustive: true,
        ok: false,
    };
    if !entries_ok {
        // An out-of-range entry is already an order-1 violation.
        'outer: for (i, row) in matrix.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if !(-1..=1).contains(&v) {
                    report.violation =
                        Some(TuViolation { order: 1, rows: vec![i], cols: vec![j], det: v });
                    break 'outer;
                }
            }
        }
        return report;
    }

    // Prune to the irreducible core.
    let mut live_rows: Vec<bool> = vec![true; nrows];
    let mut live_cols: Vec<bool> = vec![true; ncols];
    loop {
        let mut changed = false;
        for r in 0..nrows {
            if live_rows[r] {
                let deg = (0..ncols).filter(|&c| live_cols[c] && matrix[r][c] != 0).count();
                if deg < 2 {
                    live_rows[r] = false;
                    changed = true;
                }
            }
        }
        for c in 0..ncols {
            if live_cols[c] {
                let deg = (0..nrows).filter(|&r| live_rows[r] && matrix[r][c] != 0).count();
                if deg < 2 {
                    live_cols[c] = false;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    let core_rows: Vec<usize> = (0..nrows).filter(|&r| live_rows[r]).collect();
    let core_cols: Vec<usize> = (0..ncols).filter(|&c| live_cols[c]).collect();

    let core_row_degree = |r: usize| core_cols.iter().filter(|&&c| matrix[r][c] != 0).count();
    let two_nonzero_core = core_rows.iter().all(|&r| core_row_degree(r) == 2);

    if two_nonzero_core {
        check_cycles(matrix, &core_rows, &core_cols, max_order, &mut report);
    } else {
        check_subsets(matrix, &core_rows, &core_cols, max_order, &mut report);
    }
    report.ok = report.entries_ok && report.violation.is_none() && report.exhaustive;
    report
}

/// Cycle enumeration over the column multigraph (columns are vertices, core
/// rows are edges). Each simple cycle of `k` edges is the unique irreducible
/// submatrix on those rows and columns.
fn check_cycles(
    matrix: &[Vec<i64>],
    core_rows: &[usize],
    core_cols: &[usize],
    max_order: usize,
    report: &mut TuReport,
) {
    // Edges as (vertex a, vertex b) in core-column positions.
    let edges: Vec<(usize, usize)> = core_rows
        .iter()
        .map(|&r| {
            let mut it = core_cols.iter().enumerate().filter(|&(_, &c)| matrix[r][c] != 0);
            let a = it.next().expect("core rows have two nonzeros").0;
            let b = it.next().expect("core rows have two nonzeros").0;
            (a, b)
        })
        .collect();
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); core_cols.len()];
    for (e, &(a, b)) in edges.iter().enumerate() {
        adj[a].push((b, e));
        adj[b].push((a, e));
    }

    // Depth-first search for simple cycles whose smallest edge id is the
    // anchor, so each cycle is found exactly once. The walk starts at the
    // anchor's second endpoint and must return to the first.
    let mut path_edges: Vec<usize> = Vec::new();
    let mut on_path = vec![false; core_cols.len()];
    for anchor in 0..edges.len() {
        let (goal, from) = edges[anchor];
        path_edges.clear();
        path_edges.push(anchor);
        on_path[goal] = true;
        on_path[from] = true;
        dfs_cycles(
            matrix, core_rows, core_cols, &adj, anchor, goal, from, max_order, &mut path_edges,
            &mut on_path, report,
        );
        on_path[goal] = false;
        on_path[from] = false;
        if report.violation.is_some() {
            return;
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn dfs_cycles(
    matrix: &[Vec<i64>],
    core_rows: &[usize],
    core_cols: &[usize],
    adj: &[Vec<(usize, usize)>],
    anchor: usize,
    goal: usize,
    at: usize,
    max_order: usize,
    path_edges: &mut Vec<usize>,
    on_path: &mut Vec<bool>,
    report: &mut TuReport,
) {
    for &(next, edge) in &adj[at] {
        if edge <= anchor || report.violation.is_some() {
            continue;
        }
        if path_edges.contains(&edge) {
            continue;
        }
        if next == goal {
            // Closed a cycle through the anchor.
            path_edges.push(edge);
            evaluate_cycle(matrix, core_rows, core_cols, path_edges, report);
            path_edges.pop();
            continue;
        }
        if on_path[next] || path_edges.len() >= max_order.saturating_sub(1) {
            continue;
        }
        path_edges.push(edge);
        on_path[next] = true;
        dfs_cycles(
            matrix, core_rows, core_cols, adj, anchor, goal, next, max_order, path_edges, on_path,
            report,
        );
        on_path[next] = false;
        path_edges.pop();
    }
}

fn evaluate_cycle(
    matrix: &[Vec<i64>],
    core_rows: &[usize],
    core_cols: &[usize],
    cycle_edges: &[usize],
    report: &mut TuReport,
) {
    let rows: Vec<usize> = cycle_edges.iter().map(|&e| core_rows[e]).collect();
    let mut cols: Vec<usize> = Vec::with_capacity(rows.len());
    for &r in &rows {
        for &c in core_cols {
            if matrix[r][c] != 0 && !cols.contains(&c) {
                cols.push(c);
            }
        }
    }
    if cols.len() != rows.len() {
        return;
    }
    let sub: Vec<Vec<i128>> =
        rows.iter().map(|&r| cols.iter().map(|&c| matrix[r][c] as i128).collect()).collect();
    report.minors_checked += 1;
    let det = int_det(sub);
    if det.abs() > 1 {
        report.violation = Some(TuViolation {
            order: rows.len(),
            rows,
            cols,
            det: det.clamp(i64::MIN as i128, i64::MAX as i128) as i64,
        });
    }
}

/// Direct enumeration of irreducible row/column subsets for cores with
/// denser rows; bounded by the work cap.
fn check_subsets(
    matrix: &[Vec<i64>],
    core_rows: &[usize],
    core_cols: &[usize],
    max_order: usize,
    report: &mut TuReport,
) {
    let max_k = max_order.min(core_rows.len()).min(core_cols.len());
    let mut row_subset: Vec<usize> = Vec::new();
    for k in 2..=max_k {
        enumerate_rows(matrix, core_rows, core_cols, k, 0, &mut row_subset, report);
        if report.violation.is_some() || !report.exhaustive {
            return;
        }
    }
}

fn enumerate_rows(
    matrix: &[Vec<i64>],
    core_rows: &[usize],
    core_cols: &[usize],
    k: usize,
    start: usize,
    chosen: &mut Vec<usize>,
    report: &mut TuReport,
) {
    if report.violation.is_some() || !report.exhaustive {
        return;
    }
    if chosen.len() == k {
        // Columns with at least two hits among the chosen rows.
        let cols: Vec<usize> = core_cols
            .iter()
            .copied()
            .filter(|&c| chosen.iter().filter(|&&r| matrix[r][c] != 0).count() >= 2)
            .collect();
        if cols.len() < k {
            return;
        }
        let mut col_subset: Vec<usize> = Vec::new();
        enumerate_cols(matrix, chosen, &cols, k, 0, &mut col_subset, report);
        return;
    }
    for i in start..core_rows.len() {
        chosen.push(core_rows[i]);
        enumerate_rows(matrix, core_rows, core_cols, k, i + 1, chosen, report);
        chosen.pop();
    }
}

fn enumerate_cols(
    matrix: &[Vec<i64>],
    rows: &[usize],
    cols: &[usize],
    k: usize,
    start: usize,
    chosen: &mut Vec<usize>,
    report: &mut TuReport,
) {
    if report.violation.is_some() || !report.exhaustive {
        return;
    }
    if chosen.len() == k {
        // Irreducibility: every chosen row needs two hits in chosen cols.
        if rows.iter().any(|&r| chosen.iter().filter(|&&c| matrix[r][c] != 0).count() < 2) {
            return;
        }
        report.minors_checked += 1;
        if report.minors_checked > WORK_CAP {
            report.exhaustive = false;
            return;
        }
        let sub: Vec<Vec<i128>> =
            rows.iter().map(|&r| chosen.iter().map(|&c| matrix[r][c] as i128).collect()).collect();
        let det = int_det(sub);
        if det.abs() > 1 {
            report.violation = Some(TuViolation {
                order: k,
                rows: rows.to_vec(),
                cols: chosen.clone(),
                det: det.clamp(i64::MIN as i128, i64::MAX as i128) as i64,
            });
        }
        return;
    }
    for i in start..cols.len() {
        chosen.push(cols[i]);
        enumerate_cols(matrix, rows, cols, k, i + 1, chosen, report);
        chosen.pop();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyhedra::{build_c1_polyhedron, integer_matrix};
    use crate::Rational;

    #[test]
    fn identity_is_totally_unimodular() {
        let eye: Vec<Vec<i64>> = (0..5)
            .map(|i| (0..5).map(|j| i64::from(i == j)).collect())
            .collect();
        let report = check_tu_small(&eye, 5, 0);
        assert!(report.ok && report.structural_ok);
    }

    #[test]
    fn known_non_tu_matrix_is_caught_at_order_two() {
        let m = vec![vec![1, 1], vec![1, -1]];
        let report = check_tu_small(&m, 2, 0);
        assert!(!report.ok);
        let v = report.violation.unwrap();
        assert_eq!(v.order, 2);
        assert_eq!(v.det.abs(), 2);
        assert!(!report.structural_ok);
    }

    #[test]
    fn entry_outside_range_is_an_order_one_violation() {
        let m = vec![vec![2]];
        let report = check_tu_small(&m, 1, 0);
        assert!(!report.entries_ok && !report.ok);
        assert_eq!(report.violation.unwrap().order, 1);
    }

    #[test]
    fn nested_transition_system_is_tu_small() {
        let poly = build_c1_polyhedron::<Rational>(3, 4);
        let matrix = integer_matrix(&poly).unwrap();
        let report = check_tu_small(&matrix, 4, 12);
        assert!(report.entries_ok);
        assert!(report.structural_ok);
        assert!(report.ok, "{:?}", report.violation);
        assert!(report.exhaustive);
    }

    #[test]
    fn determinant_helper_matches_known_values() {
        assert_eq!(int_det(vec![vec![1, 2], vec![3, 4]]), -2);
        assert_eq!(int_det(vec![vec![0, 1], vec![1, 0]]), -1);
        assert_eq!(
            int_det(vec![vec![2, 0, 0], vec![0, 3, 0], vec![0, 0, 4]]),
            24
        );
        assert_eq!(int_det(vec![vec![1, 1], vec![1, 1]]), 0);
    }
}
