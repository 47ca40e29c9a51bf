//! Scalar abstraction: every numeric kernel in this crate is generic over
//! [`Real`], instantiated as `f32` or `f64` (the pipeline default).

use std::fmt::{Debug, Display};
use std::iter::Sum;

/// Floating-point scalar usable by all geometry and registration code.
///
/// `nalgebra::RealField` supplies the transcendental functions and linear
/// algebra support; the extra methods bridge to `f64` for RNG draws and
/// serialization, which always go through double precision so that the
/// sampled streams do not depend on the scalar type.
pub trait Real:
    nalgebra::RealField
    + num_traits::FromPrimitive
    + num_traits::ToPrimitive
    + num_traits::NumAssign
    + Copy
    + Default
    + Sum
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    fn of(v: f64) -> Self;
    fn f64(self) -> f64;
    fn finite(self) -> bool;
}

macro_rules! impl_real {
    ($t:ty) => {
        impl Real for $t {
            #[inline]
            fn of(v: f64) -> Self {
                v as $t
            }
            #[inline]
            fn f64(self) -> f64 {
                self as f64
            }
            #[inline]
            fn finite(self) -> bool {
                self.is_finite()
            }
        }
    };
}

impl_real!(f32);
impl_real!(f64);
