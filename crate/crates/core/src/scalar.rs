use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Real scalar type the numerical core is generic over.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + rustfft::FftNum
    + serde::Serialize
    + 'static
{
    /// Converts an `f64` literal into this type.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    fn of_usize(x: usize) -> Self {
        Self::from_usize(x).expect("usize representable")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Complex scalar over `T`.
pub type C<T> = num_complex::Complex<T>;

pub(crate) fn c<T: Real>(re: T, im: T) -> C<T> {
    C::new(re, im)
}

pub(crate) fn cr<T: Real>(re: T) -> C<T> {
    C::new(re, T::zero())
}
