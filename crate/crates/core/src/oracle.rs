// SPDX-License-Identifier: MIT OR Apache-2.0

//! Exact, solver-free reference optimizer for non-continuous segmented
//! fitting.
//!
//! Window costs are exact: ordinary least squares in closed form for the
//! squared loss, and candidate-pair enumeration for the absolute loss (an
//! optimal absolute-deviation line can be chosen through two data points, so
//! enumerating all interpolating pairs is exact; cubic cost per window is
//! acceptable at the sizes this oracle certifies). Dynamic programming over
//! window costs then yields the global optimum for a given segment count.

use std::fmt;

use crate::formulations::{Loss, PwlFit};
use crate::num::Real;
use crate::series::TimeSeries;

#[derive(Clone, Debug, PartialEq)]
pub enum OracleError {
    TooManySegments { segments: usize, len: usize },
}

impl fmt::Display for OracleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OracleError::TooManySegments { segments, len } => {
                write!(f, "cannot split {len} observations into {segments} nonempty segments")
            }
        }
    }
}

impl std::error::Error for OracleError {}

/// Least-squares line for the inclusive window `[a, b]`.
///
/// Returns `(cost, slope, intercept)`; a single point costs zero and fits a
/// horizontal line through it.
pub fn segment_cost_l2<R: Real>(series: &TimeSeries<R>, a: usize, b: usize) -> (R, R, R) {
    debug_assert!(a <= b && b < series.len());
    if a == b {
        return (R::zero(), R::zero(), series.y(a));
    }
    let n = R::from_usize(b - a + 1).unwrap();
    let mut sx = R::zero();
    let mut sy = R::zero();
    let mut sxx = R::zero();
    let mut sxy = R::zero();
    for t in a..=b {
        let (x, y) = (series.x(t), series.y(t));
        sx = sx + x;
        sy = sy + y;
        sxx = sxx + x * x;
        sxy = sxy + x * y;
    }
    let denom = n * sxx - sx * sx;
    let slope = (n * sxy - sx * sy) / denom;
    let icept = (sy - slope * sx) / n;
    let mut cost = R::zero();
    for t in a..=b {
        let r = series.y(t) - slope * series.x(t) - icept;
        cost = cost + r * r;
    }
    (cost, slope, icept)
}

/// Exact least-absolute-deviations line for the inclusive window `[a, b]`
/// via interpolating-pair enumeration.
pub fn segment_cost_l1<R: Real>(series: &TimeSeries<R>, a: usize, b: usize) -> (R, R, R) {
    debug_assert!(a <= b && b < series.len());
    if a == b {
        return (R::zero(), R::zero(), series.y(a));
    }
    let mut best = (R::infinity(), R::zero(), R::zero());
    for i in a..=b {
        for j in (i + 1)..=b {
            let slope = (series.y(i) - series.y(j)) / (series.x(i) - series.x(j));
            let icept = series.y(i) - slope * series.x(i);
            let mut cost = R::zero();
            for t in a..=b {
                cost = cost + (series.y(t) - slope * series.x(t) - icept).abs();
            }
            if cost < best.0 {
                best = (cost, slope, icept);
            }
        }
    }
    best
}

/// Optimal single-line fits for every window, shared across segment counts.
#[derive(Clone, Debug)]
pub struct SegmentCostTable<R> {
    len: usize,
    cost: Vec<R>,
    slope: Vec<R>,
    icept: Vec<R>,
}

impl<R: Real> SegmentCostTable<R> {
    pub fn build(series: &TimeSeries<R>, loss: Loss) -> Self {
        let len = series.len();
        let mut cost = vec![R::zero(); len * len];
        let mut slope = vec![R::zero(); len * len];
        let mut icept = vec![R::zero(); len * len];
        for a in 0..len {
            for b in a..len {
                let (c, m, q) = match loss {
                    Loss::L1 => segment_cost_l1(series, a, b),
                    Loss::L2 => segment_cost_l2(series, a, b),
                };
                cost[a * len + b] = c;
                slope[a * len + b] = m;
                icept[a * len + b] = q;
            }
        }
        Self { len, cost, slope, icept }
    }

    pub fn cost(&self, a: usize, b: usize) -> R {
        self.cost[a * self.len + b]
    }

    pub fn line(&self, a: usize, b: usize) -> (R, R) {
        (self.slope[a * self.len + b], self.icept[a * self.len + b])
    }
}

/// Streams all ways to split `len` observations into `segments` contiguous
/// nonempty blocks, as vectors of block-end indices (exclusive), the last
/// always being `len`.
pub fn enumerate_partitions(len: usize, segments: usize) -> PartitionIter {
    PartitionIter::new(len, segments)
}

pub struct PartitionIter {
    len: usize,
    cuts: Vec<usize>,
    done: bool,
}

impl PartitionIter {
    fn new(len: usize, segments: usize) -> Self {
        if segments == 0 || segments > len {
            return Self { len, cuts: Vec::new(), done: true };
        }
        // Initial cuts 1, 2, ..., k-1.
        let cuts = (1..segments).collect();
        Self { len, cuts, done: false }
    }
}

impl Iterator for PartitionIter {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        let mut item = self.cuts.clone();
        item.push(self.len);

        // Advance the combination 1 <= c_1 < ... < c_{k-1} <= len-1.
        let k = self.cuts.len();
        let mut i = k;
        loop {
            if i == 0 {
                self.done = true;
                break;
            }
            i -= 1;
            if self.cuts[i] < self.len - (k - i) {
                self.cuts[i] += 1;
                for j in i + 1..k {
                    self.cuts[j] = self.cuts[j - 1] + 1;
                }
                break;
            }
        }
        Some(item)
    }
}

fn fit_from_partition<R: Real>(
    series: &TimeSeries<R>,
    table: &SegmentCostTable<R>,
    ends: &[usize],
) -> PwlFit<R> {
    let len = series.len();
    let segments = ends.len();
    let mut slopes = Vec::with_capacity(segments);
    let mut intercepts = Vec::with_capacity(segments);
    let mut assignment = vec![0usize; len];
    let mut breakpoints = Vec::with_capacity(segments + 1);
    breakpoints.push(series.x(0));
    let mut start = 0usize;
    let two = R::from_f64(2.0).unwrap();
    for (j, &end) in ends.iter().enumerate() {
        let (m, c) = table.line(start, end - 1);
        slopes.push(m);
        intercepts.push(c);
        for t in start..end {
            assignment[t] = j;
        }
        if end < len {
            breakpoints.push((series.x(end - 1) + series.x(end)) / two);
        }
        start = end;
    }
    breakpoints.push(series.x(len - 1));
    let fitted: Vec<R> = (0..len)
        .map(|t| slopes[assignment[t]] * series.x(t) + intercepts[assignment[t]])
        .collect();
    PwlFit {
        slopes,
        intercepts,
        breakpoints,
        assignment,
        objective: R::zero(),
        fitted,
    }
}

fn dp_over_table<R: Real>(table: &SegmentCostTable<R>, segments: usize) -> (R, Vec<usize>) {
    let len = table.len;
    // best[k-1][t] = optimal cost of covering 0..=t with k blocks.
    let mut best = vec![vec![R::infinity(); len]; segments];
    let mut back = vec![vec![0usize; len]; segments];
    for t in 0..len {
        best[0][t] = table.cost(0, t);
    }
    for k in 1..segments {
        for t in k..len {
            let mut lo = R::infinity();
            let mut arg = k;
            for s in k..=t {
                let v = best[k - 1][s - 1] + table.cost(s, t);
                if v < lo {
                    lo = v;
                    arg = s;
                }
            }
            best[k][t] = lo;
            back[k][t] = arg;
        }
    }
    let mut ends = vec![0usize; segments];
    ends[segments - 1] = len;
    let mut t = len - 1;
    for k in (1..segments).rev() {
        let s = back[k][t];
        ends[k - 1] = s;
        t = s - 1;
    }
    (best[segments - 1][len - 1], ends)
}

/// Globally optimal `segments`-block fit by dynamic programming over the
/// window-cost table.
pub fn dp_optimal_partition<R: Real>(
    series: &TimeSeries<R>,
    segments: usize,
    loss: Loss,
) -> Result<PwlFit<R>, OracleError> {
    if segments == 0 || segments > series.len() {
        return Err(OracleError::TooManySegments { segments, len: series.len() });
    }
    let table = SegmentCostTable::build(series, loss);
    dp_with_table(series, &table, segments, loss)
}

/// Same as [`dp_optimal_partition`] but reusing a prebuilt cost table.
pub fn dp_with_table<R: Real>(
    series: &TimeSeries<R>,
    table: &SegmentCostTable<R>,
    segments: usize,
    loss: Loss,
) -> Result<PwlFit<R>, OracleError> {
    if segments == 0 || segments > series.len() {
        return Err(OracleError::TooManySegments { segments, len: series.len() });
    }
    let (_, ends) = dp_over_table(table, segments);
    let mut fit = fit_from_partition(series, table, &ends);
    fit.objective = fit.recompute_objective(series, loss);
    Ok(fit)
}

/// Best fit over all block counts `1..=segments`; the companion oracle for
/// models that may leave segments unused.
pub fn dp_optimal_partition_upto<R: Real>(
    series: &TimeSeries<R>,
    segments: usize,
    loss: Loss,
) -> Result<PwlFit<R>, OracleError> {
    if segments == 0 {
        return Err(OracleError::TooManySegments { segments, len: series.len() });
    }
    let table = SegmentCostTable::build(series, loss);
    let cap = segments.min(series.len());
    let mut best: Option<PwlFit<R>> = None;
    for k in 1..=cap {
        let fit = dp_with_table(series, &table, k, loss)?;
        if best.as_ref().map_or(true, |b| fit.objective < b.objective) {
            best = Some(fit);
        }
    }
    Ok(best.unwrap())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(xs: &[f64], ys: &[f64]) -> TimeSeries<f64> {
        TimeSeries::new(xs.to_vec(), ys.to_vec()).unwrap()
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-9 * (1.0 + b.abs())
    }

    #[test]
    fn least_squares_window_matches_hand_computation() {
        let s = series(&[1.0, 2.0, 3.0], &[0.0, 1.0, 0.0]);
        let (cost, slope, icept) = segment_cost_l2(&s, 0, 2);
        // Residuals (-1/3, 2/3, -1/3).
        assert!(close(cost, 2.0 / 3.0), "{cost}");
        assert!(close(slope, 0.0));
        assert!(close(icept, 1.0 / 3.0));
    }

    #[test]
    fn least_squares_degenerate_windows() {
        let s = series(&[1.0, 2.0, 3.0], &[1.0, 3.0, 5.0]);
        let (cost, ..) = segment_cost_l2(&s, 0, 2);
        assert!(close(cost, 0.0));
        let (cost, slope, icept) = segment_cost_l2(&s, 1, 1);
        assert!(cost == 0.0 && slope == 0.0 && icept == 3.0);
    }

    #[test]
    fn absolute_loss_window_picks_interpolating_pair() {
        let s = series(&[1.0, 2.0, 3.0], &[0.0, 1.0, 0.0]);
        let (cost, slope, icept) = segment_cost_l1(&s, 0, 2);
        // The flat line through the endpoints leaves residual 1 at t=2; no
        // line does better.
        assert!(close(cost, 1.0), "{cost}");
        assert!(close(slope, 0.0));
        assert!(close(icept, 0.0));
    }

    #[test]
    fn absolute_loss_degenerate_windows() {
        let s = series(&[0.0, 1.0, 2.0], &[5.0, 5.0, 5.0]);
        assert!(close(segment_cost_l1(&s, 0, 2).0, 0.0));
        assert!(close(segment_cost_l1(&s, 0, 1).0, 0.0));
    }

    #[test]
    fn absolute_loss_never_beaten_by_grid_search() {
        let s = series(&[1.0, 2.0, 3.0, 4.0, 5.0], &[2.0, -1.0, 0.5, 3.0, -2.0]);
        let (best, ..) = segment_cost_l1(&s, 0, 4);
        // Coarse grid over slope/intercept pairs as a sanity oracle.
        for mi in -40..=40 {
            let m = mi as f64 * 0.25;
            for ci in -40..=40 {
                let c = ci as f64 * 0.25;
                let cost: f64 = (0..5).map(|t| (s.y(t) - m * s.x(t) - c).abs()).sum();
                assert!(cost >= best - 1e-6);
            }
        }
    }

    #[test]
    fn partition_counts_match_binomials() {
        assert_eq!(enumerate_partitions(4, 2).count(), 3);
        assert_eq!(enumerate_partitions(6, 4).count(), 10);
        assert_eq!(enumerate_partitions(5, 1).count(), 1);
        assert_eq!(enumerate_partitions(3, 4).count(), 0);
    }

    #[test]
    fn partitions_are_valid_and_distinct() {
        let all: Vec<_> = enumerate_partitions(7, 3).collect();
        assert_eq!(all.len(), 15); // C(6, 2)
        for ends in &all {
            assert_eq!(*ends.last().unwrap(), 7);
            assert!(ends.windows(2).all(|w| w[0] < w[1]));
        }
        let mut dedup = all.clone();
        dedup.dedup();
        assert_eq!(dedup.len(), all.len());
    }

    #[test]
    fn dp_recovers_noiseless_two_segment_signal() {
        let xs: Vec<f64> = (1..=12).map(|t| t as f64).collect();
        let ys: Vec<f64> =
            xs.iter().map(|&x| if x <= 6.0 { 2.0 * x } else { -x + 30.0 }).collect();
        let s = series(&xs, &ys);
        for loss in [Loss::L1, Loss::L2] {
            let fit = dp_optimal_partition(&s, 2, loss).unwrap();
            assert!(close(fit.objective, 0.0), "{loss}: {}", fit.objective);
            assert_eq!(fit.assignment, vec![0, 0, 0, 0, 0, 0, 1, 1, 1, 1, 1, 1]);
        }
    }

    #[test]
    fn dp_each_point_own_segment_costs_nothing() {
        let s = series(&[1.0, 2.0, 3.0, 4.0], &[4.0, -1.0, 7.0, 2.0]);
        let fit = dp_optimal_partition(&s, 4, Loss::L2).unwrap();
        assert!(close(fit.objective, 0.0));
    }

    #[test]
    fn dp_rejects_oversized_segment_counts() {
        let s = series(&[1.0, 2.0], &[1.0, 2.0]);
        assert!(dp_optimal_partition(&s, 3, Loss::L1).is_err());
    }

    #[test]
    fn dp_equals_exhaustive_enumeration() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        for _ in 0..6 {
            let len = rng.random_range(6..=12usize);
            let xs: Vec<f64> = (1..=len).map(|t| t as f64).collect();
            let ys: Vec<f64> = (0..len).map(|_| rng.random_range(-5.0..5.0)).collect();
            let s = series(&xs, &ys);
            for loss in [Loss::L1, Loss::L2] {
                let table = SegmentCostTable::build(&s, loss);
                for k in 1..=4.min(len) {
                    let dp = dp_with_table(&s, &table, k, loss).unwrap();
                    let brute = enumerate_partitions(len, k)
                        .map(|ends| {
                            let mut start = 0;
                            let mut total = 0.0;
                            for &end in &ends {
                                total += table.cost(start, end - 1);
                                start = end;
                            }
                            total
                        })
                        .fold(f64::INFINITY, f64::min);
                    assert!(
                        close(dp.objective, brute),
                        "{loss} k={k}: dp {} vs brute {brute}",
                        dp.objective
                    );
                }
            }
        }
    }

    #[test]
    fn dp_objective_nonincreasing_in_segment_count() {
        let s = series(
            &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0],
            &[3.0, 1.0, 4.0, 1.0, 5.0, 9.0, 2.0, 6.0],
        );
        for loss in [Loss::L1, Loss::L2] {
            let mut prev = f64::INFINITY;
            for k in 1..=6 {
                let fit = dp_optimal_partition(&s, k, loss).unwrap();
                assert!(fit.objective <= prev + 1e-12);
                prev = fit.objective;
            }
        }
    }

    #[test]
    fn upto_variant_takes_best_over_smaller_counts() {
        // A perfectly linear signal: one segment is optimal no matter the cap.
        let xs: Vec<f64> = (1..=8).map(|t| t as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|&x| 3.0 * x - 1.0).collect();
        let s = series(&xs, &ys);
        let fit = dp_optimal_partition_upto(&s, 4, Loss::L2).unwrap();
        assert!(close(fit.objective, 0.0));
        assert_eq!(fit.active_segments(), 1);
    }
}
