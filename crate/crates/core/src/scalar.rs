//! Generic scalar abstraction for the whole crate.
//!
//! All numerics are written against [`Real`] so the same code runs in f32 or
//! f64. The crate root exports f64 aliases, which is what the CLI uses.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

/// Floating-point scalar: f32 or f64.
pub trait Real:
    num_traits::Float
    + num_traits::FromPrimitive
    + num_traits::ToPrimitive
    + Debug
    + Display
    + LowerExp
    + Default
    + Sum
    + Send
    + Sync
    + 'static
{
}

impl Real for f32 {}
impl Real for f64 {}

/// Converts an f64 literal into the working scalar type.
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("literal representable in scalar type")
}

/// Tolerance floor: `tol` unless the scalar type cannot resolve it, in which
/// case a small multiple of machine epsilon is used instead.
#[inline]
pub fn tol_floor<T: Real>(tol: f64) -> T {
    lit::<T>(tol).max(T::epsilon() * lit(64.0))
}
