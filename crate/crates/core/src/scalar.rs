use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumCast};

/// Floating point scalar the numerical code is generic over: `f32` or `f64`.
pub trait Scalar:
    Float + FromPrimitive + NumCast + Sum + Debug + Display + Send + Sync + 'static
{
    /// Lossy conversion from `f64`, used for constants and user-supplied values.
    fn of(v: f64) -> Self {
        <Self as NumCast>::from(v).expect("f64 value representable in scalar type")
    }

    fn lossy_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
