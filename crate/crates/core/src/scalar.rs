//! Scalar abstraction shared by every module.
//!
//! All math in this crate is written against [`Real`], which is implemented
//! for `f32` and `f64`. Tolerances are expressed in double-precision terms and
//! widened for single precision through [`Real::TOLERANCE_SCALE`].

use std::fmt;

use nalgebra::{Complex, DMatrix, DVector, RealField};
use num_traits::{FromPrimitive, ToPrimitive};

pub type CMatrix<T> = DMatrix<Complex<T>>;
pub type CVector<T> = DVector<Complex<T>>;

/// Real scalar usable as the field of a complex matrix.
pub trait Real:
    RealField + Copy + FromPrimitive + ToPrimitive + fmt::LowerExp + Default
{
    /// Factor applied to every double-precision tolerance.
    const TOLERANCE_SCALE: f64;

    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal")
    }

    /// A double-precision tolerance widened for this scalar type.
    #[inline]
    fn tol(x: f64) -> Self {
        Self::lit(x * Self::TOLERANCE_SCALE)
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn infinity() -> Self;

    fn is_finite_value(self) -> bool;
}

impl Real for f64 {
    const TOLERANCE_SCALE: f64 = 1.0;

    fn infinity() -> Self {
        f64::INFINITY
    }

    fn is_finite_value(self) -> bool {
        self.is_finite()
    }
}

impl Real for f32 {
    const TOLERANCE_SCALE: f64 = 1e6;

    fn infinity() -> Self {
        f32::INFINITY
    }

    fn is_finite_value(self) -> bool {
        self.is_finite()
    }
}

#[inline]
pub fn c<T: Real>(re: f64, im: f64) -> Complex<T> {
    Complex::new(T::lit(re), T::lit(im))
}

#[inline]
pub fn cr<T: Real>(re: T) -> Complex<T> {
    Complex::new(re, T::zero())
}

#[inline]
pub fn ci<T: Real>() -> Complex<T> {
    Complex::new(T::zero(), T::one())
}

/// Sign of a real number with ties (including zero) resolved to `+1`.
#[inline]
pub fn sign_or_plus<T: Real>(x: T) -> T {
    if x < T::zero() {
        -T::one()
    } else {
        T::one()
    }
}
