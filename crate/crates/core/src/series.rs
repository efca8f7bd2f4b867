// SPDX-License-Identifier: MIT OR Apache-2.0

//! Ordered observation series.

use std::fmt;

use crate::num::Real;

/// Errors produced when validating series data.
#[derive(Clone, Debug, PartialEq)]
pub enum SeriesError {
    /// Fewer than two observations.
    TooShort { len: usize },
    /// Domain values are not strictly increasing at the given index.
    NonIncreasingX { index: usize },
    /// Domain and response lengths differ.
    LengthMismatch { xs: usize, ys: usize },
    /// A value is NaN or infinite.
    NonFinite { index: usize },
}

impl fmt::Display for SeriesError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SeriesError::TooShort { len } => {
                write!(f, "series needs at least 2 observations, got {len}")
            }
            SeriesError::NonIncreasingX { index } => {
                write!(f, "x values must be strictly increasing (violated at index {index})")
            }
            SeriesError::LengthMismatch { xs, ys } => {
                write!(f, "x/y length mismatch: {xs} vs {ys}")
            }
            SeriesError::NonFinite { index } => {
                write!(f, "non-finite value at index {index}")
            }
        }
    }
}

impl std::error::Error for SeriesError {}

/// Ordered observations `(x_t, y_t)` with strictly increasing domain.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeSeries<R> {
    xs: Vec<R>,
    ys: Vec<R>,
}

impl<R: Real> TimeSeries<R> {
    /// Validates and wraps raw observation vectors.
    pub fn new(xs: Vec<R>, ys: Vec<R>) -> Result<Self, SeriesError> {
        if xs.len() != ys.len() {
            return Err(SeriesError::LengthMismatch { xs: xs.len(), ys: ys.len() });
        }
        if xs.len() < 2 {
            return Err(SeriesError::TooShort { len: xs.len() });
        }
        for (i, v) in xs.iter().chain(ys.iter()).enumerate() {
            if !v.is_finite() {
                return Err(SeriesError::NonFinite { index: i % xs.len() });
            }
        }
        for i in 1..xs.len() {
            if xs[i] <= xs[i - 1] {
                return Err(SeriesError::NonIncreasingX { index: i });
            }
        }
        Ok(Self { xs, ys })
    }

    /// Builds a series over the implicit domain `1..=T`.
    pub fn from_values(ys: Vec<R>) -> Result<Self, SeriesError> {
        let xs = (1..=ys.len()).map(|t| R::from_usize(t).unwrap()).collect();
        Self::new(xs, ys)
    }

    /// Collapses duplicate x values by averaging their responses.
    ///
    /// Returns the deduplicated series and the number of collapsed groups.
    /// Strictly decreasing x still fails validation afterwards.
    pub fn dedup_x(xs: Vec<R>, ys: Vec<R>) -> Result<(Self, usize), SeriesError> {
        if xs.len() != ys.len() {
            return Err(SeriesError::LengthMismatch { xs: xs.len(), ys: ys.len() });
        }
        let mut out_x: Vec<R> = Vec::with_capacity(xs.len());
        let mut out_y: Vec<R> = Vec::with_capacity(ys.len());
        let mut collapsed = 0usize;
        let mut i = 0usize;
        while i < xs.len() {
            let mut j = i + 1;
            let mut acc = ys[i];
            while j < xs.len() && xs[j] == xs[i] {
                acc = acc + ys[j];
                j += 1;
            }
            if j > i + 1 {
                collapsed += 1;
            }
            out_x.push(xs[i]);
            out_y.push(acc / R::from_usize(j - i).unwrap());
            i = j;
        }
        Ok((Self::new(out_x, out_y)?, collapsed))
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn xs(&self) -> &[R] {
        &self.xs
    }

    pub fn ys(&self) -> &[R] {
        &self.ys
    }

    pub fn x(&self, t: usize) -> R {
        self.xs[t]
    }

    pub fn y(&self, t: usize) -> R {
        self.ys[t]
    }

    /// Returns the series with every response shifted by `k`.
    pub fn translate_y(&self, k: R) -> Self {
        Self { xs: self.xs.clone(), ys: self.ys.iter().map(|&y| y + k).collect() }
    }
}

/// Shared-domain multivariate series: one x grid, `D` response sequences.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiSeries<R> {
    xs: Vec<R>,
    ys: Vec<Vec<R>>,
}

impl<R: Real> MultiSeries<R> {
    pub fn new(xs: Vec<R>, ys: Vec<Vec<R>>) -> Result<Self, SeriesError> {
        if ys.is_empty() {
            return Err(SeriesError::TooShort { len: 0 });
        }
        for col in &ys {
            // Validation is per-dimension; reuses the univariate checks.
            TimeSeries::new(xs.clone(), col.clone())?;
        }
        Ok(Self { xs, ys })
    }

    pub fn from_dims(dims: Vec<TimeSeries<R>>) -> Result<Self, SeriesError> {
        let xs = dims[0].xs.clone();
        let ys = dims
            .into_iter()
            .map(|d| {
                if d.xs == xs {
                    Ok(d.ys)
                } else {
                    Err(SeriesError::NonIncreasingX { index: 0 })
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(xs, ys)
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dims(&self) -> usize {
        self.ys.len()
    }

    pub fn xs(&self) -> &[R] {
        &self.xs
    }

    /// Response sequence of dimension `d`.
    pub fn dim(&self, d: usize) -> TimeSeries<R> {
        TimeSeries { xs: self.xs.clone(), ys: self.ys[d].clone() }
    }

    pub fn y(&self, d: usize, t: usize) -> R {
        self.ys[d][t]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accepts_strictly_increasing() {
        let s = TimeSeries::new(vec![1.0, 2.0, 3.0], vec![1.0, 3.0, 2.0]).unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(s.x(1), 2.0);
    }

    #[test]
    fn rejects_duplicate_x() {
        let err = TimeSeries::new(vec![1.0, 1.0, 3.0], vec![1.0, 3.0, 2.0]).unwrap_err();
        assert_eq!(err, SeriesError::NonIncreasingX { index: 1 });
    }

    #[test]
    fn rejects_short_and_mismatched() {
        assert_eq!(
            TimeSeries::new(vec![1.0], vec![1.0]).unwrap_err(),
            SeriesError::TooShort { len: 1 }
        );
        assert_eq!(
            TimeSeries::new(vec![1.0, 2.0], vec![1.0]).unwrap_err(),
            SeriesError::LengthMismatch { xs: 2, ys: 1 }
        );
    }

    #[test]
    fn dedup_averages_tied_responses() {
        let (s, groups) =
            TimeSeries::dedup_x(vec![1.0, 2.0, 2.0, 3.0], vec![1.0, 2.0, 4.0, 5.0]).unwrap();
        assert_eq!(groups, 1);
        assert_eq!(s.xs(), &[1.0, 2.0, 3.0]);
        assert_eq!(s.ys(), &[1.0, 3.0, 5.0]);
    }

    #[test]
    fn multi_series_shares_domain() {
        let m = MultiSeries::new(vec![1.0, 2.0], vec![vec![1.0, 2.0], vec![5.0, 3.0]]).unwrap();
        assert_eq!(m.dims(), 2);
        assert_eq!(m.dim(1).ys(), &[5.0, 3.0]);
    }
}
