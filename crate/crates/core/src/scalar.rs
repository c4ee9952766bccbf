//! Floating-point scalar abstraction shared by every numerical routine in the crate.

use ndarray::NdFloat;
use num_traits::FromPrimitive;
use serde::de::DeserializeOwned;
use serde::Serialize;

/// A real scalar the solvers and models can be instantiated with (`f32` or `f64`).
pub trait Scalar: NdFloat + FromPrimitive + Default + Serialize + DeserializeOwned {
    /// Lossy conversion from an `f64` literal.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    /// Widening conversion used when serialising or reporting.
    fn as_f64(self) -> f64 {
        num_traits::ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
