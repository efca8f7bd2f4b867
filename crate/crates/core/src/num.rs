// SPDX-License-Identifier: MIT OR Apache-2.0

//! Scalar abstractions shared by the numeric kernels.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point scalar for series, bounds, and oracle computations.
///
/// Implemented by `f32` and `f64`; the crate-root aliases fix `f64`.
pub trait Real: Float + FromPrimitive + ToPrimitive + Debug + Display + Sum + 'static {}

impl<T> Real for T where T: Float + FromPrimitive + ToPrimitive + Debug + Display + Sum + 'static {}

/// Ring scalar for assembling constraint systems that are instantiated both
/// in floating point and in exact rational arithmetic.
pub trait Coeff:
    num_traits::Num + num_traits::Signed + FromPrimitive + Clone + PartialOrd + Debug + 'static
{
}

impl<T> Coeff for T where
    T: num_traits::Num + num_traits::Signed + FromPrimitive + Clone + PartialOrd + Debug + 'static
{
}

/// Nudges an upper bound up by one ulp so that constants derived from a
/// floating max stay valid after rounding.
pub fn round_up_ulp(value: f64) -> f64 {
    if value.is_finite() {
        f64::from_bits(if value >= 0.0 {
            value.to_bits() + 1
        } else {
            value.to_bits() - 1
        })
    } else {
        value
    }
}

#[cfg(test)]
mod tests {
    use super::round_up_ulp;

    #[test]
    fn ulp_rounding_moves_up() {
        assert!(round_up_ulp(1.0) > 1.0);
        assert!(round_up_ulp(-1.0) > -1.0);
        assert_eq!(round_up_ulp(f64::INFINITY), f64::INFINITY);
    }
}
