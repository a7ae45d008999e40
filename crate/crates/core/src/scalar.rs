//! Scalar abstraction shared by every numeric routine in the crate.

use nalgebra::RealField;

/// Floating point scalar the analysis is generic over (`f32` or `f64`).
///
/// Everything in the crate is written against this trait; tolerances are
/// configured in `f64` and converted with [`Scalar::lit`].
pub trait Scalar: RealField + Copy {
    /// Converts an `f64` literal into the scalar type.
    #[inline]
    fn lit(x: f64) -> Self {
        nalgebra::convert(x)
    }

    /// Lossy conversion to `f64`, used for reporting.
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_subset().unwrap_or(f64::NAN)
    }

    /// True when the value is a finite integer.
    #[inline]
    fn is_integral(self) -> bool {
        self.is_finite() && self.round() == self
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn literals_round_trip() {
        assert_eq!(<f64 as Scalar>::lit(0.25), 0.25);
        assert_eq!(<f32 as Scalar>::lit(0.25), 0.25f32);
        assert_eq!(3.0f32.as_f64(), 3.0);
    }

    #[test]
    fn integrality() {
        assert!((-27.0f64).is_integral());
        assert!(!(1.0f64 / 3.0).is_integral());
        assert!(!f64::NAN.is_integral());
        assert!(!f64::INFINITY.is_integral());
    }
}
