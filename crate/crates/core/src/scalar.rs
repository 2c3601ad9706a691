//! Scalar abstraction shared by every numeric routine in the crate.

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};

/// Real scalar usable throughout the crate (`f32` or `f64`).
///
/// Random variates are always drawn in `f64` and converted, so a given seed
/// consumes the generator identically regardless of the scalar type.
pub trait Real: RealField + Copy + FromPrimitive + ToPrimitive {
    /// Converts an `f64` literal or draw into `Self`.
    #[inline]
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 is representable in every Real")
    }

    #[inline]
    fn of_usize(n: usize) -> Self {
        Self::of(n as f64)
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("Real converts to f64")
    }

    /// Smallest convergence tolerance that is meaningful at this precision.
    fn tolerance_floor() -> Self {
        Self::default_epsilon() * Self::of(64.0)
    }
}

impl Real for f32 {}
impl Real for f64 {}
