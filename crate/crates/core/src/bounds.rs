// SPDX-License-Identifier: MIT OR Apache-2.0

//! Data-driven parameter space and big-M constants.
//!
//! The slope interval is spanned by the pairwise difference quotients of the
//! data, the intercept interval by anchoring those extreme slopes at each
//! observation, and the big-M tables are the smallest constants that
//! deactivate the value-assignment, breakpoint-localization, and linearized
//! continuity rows for parameters inside that space. Every max-derived
//! constant is rounded outward by one ulp so it stays valid after floating
//! accumulation.

use crate::num::Real;
use crate::series::TimeSeries;

/// Box bounds for segment slopes and intercepts plus the fixed domain ends.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ParameterSpace<R> {
    pub slope_lo: R,
    pub slope_hi: R,
    pub icept_lo: R,
    pub icept_hi: R,
    /// First domain point; the leading breakpoint is pinned here.
    pub domain_lo: R,
    /// Last domain point; the trailing breakpoint is pinned here.
    pub domain_hi: R,
}

/// Per-observation big-M constants.
#[derive(Clone, Debug, PartialEq)]
pub struct BigMTable<R> {
    /// Dominates `|m x_t + c|` over the parameter space; deactivates the
    /// value-assignment rows.
    pub value: Vec<R>,
    /// `x_t - x_1`; deactivates the upper breakpoint-localization row.
    pub loc_upper: Vec<R>,
    /// `x_T - x_t`; deactivates the lower breakpoint-localization row.
    pub loc_lower: Vec<R>,
    /// Dominates `|x_t (m_j - m_{j+1}) - (c_{j+1} - c_j)|`; deactivates the
    /// linearized continuity rows.
    pub continuity: Vec<R>,
}

impl<R: Real> BigMTable<R> {
    pub fn len(&self) -> usize {
        self.value.len()
    }

    pub fn is_empty(&self) -> bool {
        self.value.is_empty()
    }
}

fn nudge_up<R: Real>(x: R) -> R {
    if x == R::zero() {
        R::min_positive_value()
    } else {
        x + x.abs() * R::epsilon()
    }
}

fn nudge_down<R: Real>(x: R) -> R {
    -nudge_up(-x)
}

/// Extreme difference quotients over all observation pairs.
pub fn slope_bounds<R: Real>(series: &TimeSeries<R>) -> (R, R) {
    let xs = series.xs();
    let ys = series.ys();
    let mut lo = R::infinity();
    let mut hi = R::neg_infinity();
    for t1 in 0..xs.len() {
        for t2 in (t1 + 1)..xs.len() {
            let q = (ys[t1] - ys[t2]) / (xs[t1] - xs[t2]);
            lo = lo.min(q);
            hi = hi.max(q);
        }
    }
    (nudge_down(lo), nudge_up(hi))
}

/// Intercept interval obtained by requiring each extreme-slope line to pass
/// through every observation.
pub fn intercept_bounds<R: Real>(series: &TimeSeries<R>, slope_lo: R, slope_hi: R) -> (R, R) {
    let mut lo = R::infinity();
    let mut hi = R::neg_infinity();
    for t in 0..series.len() {
        for m in [slope_lo, slope_hi] {
            let c = series.y(t) - m * series.x(t);
            lo = lo.min(c);
            hi = hi.max(c);
        }
    }
    (nudge_down(lo), nudge_up(hi))
}

/// Computes the full parameter space of a series.
pub fn parameter_space<R: Real>(series: &TimeSeries<R>) -> ParameterSpace<R> {
    let (slope_lo, slope_hi) = slope_bounds(series);
    let (icept_lo, icept_hi) = intercept_bounds(series, slope_lo, slope_hi);
    ParameterSpace {
        slope_lo,
        slope_hi,
        icept_lo,
        icept_hi,
        domain_lo: series.x(0),
        domain_hi: series.x(series.len() - 1),
    }
}

/// Computes all four big-M tables for a series and its parameter space.
pub fn big_m_values<R: Real>(series: &TimeSeries<R>, space: &ParameterSpace<R>) -> BigMTable<R> {
    let xs = series.xs();
    let last = xs[xs.len() - 1];
    let first = xs[0];
    let mut value = Vec::with_capacity(xs.len());
    let mut loc_upper = Vec::with_capacity(xs.len());
    let mut loc_lower = Vec::with_capacity(xs.len());
    let mut continuity = Vec::with_capacity(xs.len());
    let slope_range = space.slope_hi - space.slope_lo;
    let icept_range = space.icept_hi - space.icept_lo;
    for &x in xs {
        let mut m1 = R::zero();
        for m in [space.slope_lo, space.slope_hi] {
            for c in [space.icept_lo, space.icept_hi] {
                m1 = m1.max((m * x).abs() + c.abs());
            }
        }
        value.push(nudge_up(m1));
        loc_upper.push(x - first);
        loc_lower.push(last - x);
        continuity.push(nudge_up(x.abs() * slope_range + icept_range));
    }
    BigMTable { value, loc_upper, loc_lower, continuity }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12 * (1.0 + b.abs())
    }

    fn demo() -> TimeSeries<f64> {
        TimeSeries::new(vec![1.0, 2.0, 3.0], vec![1.0, 3.0, 2.0]).unwrap()
    }

    #[test]
    fn slope_bounds_span_all_pairs() {
        // Brute-force oracle over the three pairs gives quotients {2, -1, 0.5}.
        let (lo, hi) = slope_bounds(&demo());
        assert!(close(lo, -1.0) && close(hi, 2.0), "({lo}, {hi})");
    }

    #[test]
    fn slope_bounds_degenerate_cases() {
        let flat = TimeSeries::new(vec![1.0, 2.0, 4.0], vec![3.0, 3.0, 3.0]).unwrap();
        let (lo, hi) = slope_bounds(&flat);
        assert!(close(lo, 0.0) && close(hi, 0.0));

        let two = TimeSeries::new(vec![0.0, 1.0], vec![0.0, 5.0]).unwrap();
        let (lo, hi) = slope_bounds(&two);
        assert!(close(lo, 5.0) && close(hi, 5.0));
    }

    #[test]
    fn intercept_bounds_enumerate_candidates() {
        // Candidates at slopes {-1, 2}: {2, 5, 5} and {-1, -1, -4}.
        let (lo, hi) = intercept_bounds(&demo(), -1.0, 2.0);
        assert!(close(lo, -4.0) && close(hi, 5.0), "({lo}, {hi})");
    }

    #[test]
    fn intercept_bounds_constant_series() {
        let flat = TimeSeries::new(vec![1.0, 2.0], vec![4.0, 4.0]).unwrap();
        let (lo, hi) = intercept_bounds(&flat, 0.0, 0.0);
        assert!(close(lo, 4.0) && close(hi, 4.0));
    }

    #[test]
    fn intercept_bounds_single_pair() {
        // Both extreme slopes equal 5; anchoring at (0,0) and (1,5) gives
        // candidates {0, 0} for either slope.
        let two = TimeSeries::new(vec![0.0, 1.0], vec![0.0, 5.0]).unwrap();
        let (lo, hi) = intercept_bounds(&two, 5.0, 5.0);
        assert!(close(lo, 0.0) && close(hi, 0.0), "({lo}, {hi})");
    }

    #[test]
    fn big_m_matches_hand_enumeration() {
        let series = demo();
        let space = parameter_space(&series);
        let table = big_m_values(&series, &space);
        // max(|-1*2| + |-4|, |2*2| + |-4|, |-1*2| + |5|, |2*2| + |5|) = 9.
        assert!(close(table.value[1], 9.0), "{}", table.value[1]);
        assert!(close(table.loc_upper[2], 2.0));
        assert!(close(table.loc_lower[2], 0.0));
        // |2| * (2 - (-1)) + (5 - (-4)) = 15.
        assert!(close(table.continuity[1], 15.0), "{}", table.continuity[1]);
        assert!(table.value.iter().all(|&v| v >= 0.0));
        assert_eq!(table.len(), series.len());
    }

    #[test]
    fn value_constant_dominates_sampled_lines() {
        let series = demo();
        let space = parameter_space(&series);
        let table = big_m_values(&series, &space);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let m = rng.random_range(space.slope_lo..=space.slope_hi);
            let c = rng.random_range(space.icept_lo..=space.icept_hi);
            for t in 0..series.len() {
                assert!((m * series.x(t) + c).abs() <= table.value[t]);
            }
        }
    }

    #[test]
    fn continuity_constant_dominates_sampled_pairs() {
        let series = demo();
        let space = parameter_space(&series);
        let table = big_m_values(&series, &space);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..1000 {
            let m_a = rng.random_range(space.slope_lo..=space.slope_hi);
            let m_b = rng.random_range(space.slope_lo..=space.slope_hi);
            let c_a = rng.random_range(space.icept_lo..=space.icept_hi);
            let c_b = rng.random_range(space.icept_lo..=space.icept_hi);
            for t in 0..series.len() {
                let v = (series.x(t) * (m_a - m_b) - (c_b - c_a)).abs();
                assert!(v <= table.continuity[t]);
            }
        }
    }

    #[test]
    fn interpolants_stay_inside_space() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..50 {
            let n = rng.random_range(2..10usize);
            let mut xs: Vec<f64> = Vec::new();
            let mut acc = rng.random_range(-3.0..3.0);
            for _ in 0..n {
                xs.push(acc);
                acc += rng.random_range(0.1..2.0);
            }
            let ys: Vec<f64> = (0..n).map(|_| rng.random_range(-10.0..10.0)).collect();
            let series = TimeSeries::new(xs, ys).unwrap();
            let space = parameter_space(&series);
            for a in 0..n {
                for b in (a + 1)..n {
                    let m = (series.y(a) - series.y(b)) / (series.x(a) - series.x(b));
                    let c = series.y(a) - m * series.x(a);
                    assert!(m >= space.slope_lo && m <= space.slope_hi);
                    assert!(c >= space.icept_lo && c <= space.icept_hi, "{c} {space:?}");
                }
            }
        }
    }

    #[test]
    fn translation_shifts_intercepts_only() {
        let series = demo();
        let shifted = series.translate_y(11.5);
        let (lo0, hi0) = slope_bounds(&series);
        let (lo1, hi1) = slope_bounds(&shifted);
        assert!(close(lo0, lo1) && close(hi0, hi1));
        let (clo0, chi0) = intercept_bounds(&series, lo0, hi0);
        let (clo1, chi1) = intercept_bounds(&shifted, lo1, hi1);
        assert!(close(clo1, clo0 + 11.5), "{clo1} vs {}", clo0 + 11.5);
        assert!(close(chi1, chi0 + 11.5));
    }
}
