use std::fmt::Debug;
use std::ops::{AddAssign, DivAssign, MulAssign, Neg, SubAssign};

use num_complex::Complex;
use num_traits::Num;

use super::dd::Dd;

/// Scalar field the precision-generic kernels run in.
pub trait Real:
    Num
    + Copy
    + Debug
    + PartialOrd
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Send
    + Sync
    + 'static
{
    fn from_f64(x: f64) -> Self;
    fn to_f64(self) -> f64;
    fn abs(self) -> Self;
    fn sqrt(self) -> Self;
    /// Unit roundoff.
    fn epsilon() -> f64;
    fn is_finite(self) -> bool;

    fn from_i64(x: i64) -> Self {
        Self::from_f64(x as f64)
    }

    fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }
}

impl Real for f64 {
    #[inline]
    fn from_f64(x: f64) -> f64 {
        x
    }
    #[inline]
    fn to_f64(self) -> f64 {
        self
    }
    #[inline]
    fn abs(self) -> f64 {
        f64::abs(self)
    }
    #[inline]
    fn sqrt(self) -> f64 {
        f64::sqrt(self)
    }
    fn epsilon() -> f64 {
        f64::EPSILON / 2.0
    }
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
}

impl Real for Dd {
    #[inline]
    fn from_f64(x: f64) -> Dd {
        Dd::from_f64(x)
    }
    #[inline]
    fn to_f64(self) -> f64 {
        Dd::to_f64(self)
    }
    #[inline]
    fn abs(self) -> Dd {
        Dd::abs(self)
    }
    #[inline]
    fn sqrt(self) -> Dd {
        Dd::sqrt(self)
    }
    fn epsilon() -> f64 {
        Dd::EPSILON
    }
    fn is_finite(self) -> bool {
        Dd::is_finite(self)
    }
    fn from_i64(x: i64) -> Dd {
        Dd::from(x)
    }
}

/// Modulus of a complex number in the generic field.
pub fn cabs<T: Real>(z: Complex<T>) -> T {
    let (a, b) = (z.re.abs(), z.im.abs());
    let (big, small) = if a > b { (a, b) } else { (b, a) };
    if big == T::zero() {
        return T::zero();
    }
    let r = small / big;
    big * (T::one() + r * r).sqrt()
}

pub fn to_c64<T: Real>(z: Complex<T>) -> Complex<f64> {
    Complex::new(z.re.to_f64(), z.im.to_f64())
}

pub fn from_c64<T: Real>(z: Complex<f64>) -> Complex<T> {
    Complex::new(T::from_f64(z.re), T::from_f64(z.im))
}
