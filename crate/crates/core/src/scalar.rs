//! Scalar abstraction for the numeric core.

use ndarray::NdFloat;
use num_traits::FromPrimitive;

/// Floating-point scalar usable throughout the numeric core.
///
/// Implemented by `f32` and `f64`. `NdFloat` brings the arithmetic,
/// assignment and linear-algebra bounds required by `ndarray`;
/// `FromPrimitive` converts counts and `f64` hyperparameters.
pub trait Scalar: NdFloat + FromPrimitive {
    /// Lossy conversion from `f64` (used for hyperparameters and literals).
    fn from_f64_lossy(x: f64) -> Self {
        Self::from_f64(x).expect("finite f64 converts to any float scalar")
    }

    /// Conversion from a count.
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("usize converts to any float scalar")
    }
}

impl<T: NdFloat + FromPrimitive> Scalar for T {}
