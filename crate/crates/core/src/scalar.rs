//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real floating point type the solvers are generic over (`f32` or `f64`).
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Default + Debug + Display + Send + Sync + 'static
{
    /// Converts an `f64` literal into this type.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    /// Converts an index or count.
    #[inline]
    fn from_count(k: usize) -> Self {
        Self::from_usize(k).expect("count representable")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Complex scalar over a [`Real`] type.
pub type Cx<T> = Complex<T>;

#[inline]
pub(crate) fn cx<T: Real>(re: T, im: T) -> Cx<T> {
    Complex::new(re, im)
}

/// `e^{i phi}`.
#[inline]
pub fn unit_phase<T: Real>(phi: T) -> Cx<T> {
    let (s, c) = phi.sin_cos();
    Complex::new(c, s)
}

/// `e^{i pi k / 4}` evaluated exactly from the eighth roots of unity.
pub fn eighth_turn<T: Real>(k: i64) -> Cx<T> {
    let r = T::FRAC_1_SQRT_2();
    let (o, z) = (T::one(), T::zero());
    match k.rem_euclid(8) {
        0 => cx(o, z),
        1 => cx(r, r),
        2 => cx(z, o),
        3 => cx(-r, r),
        4 => cx(-o, z),
        5 => cx(-r, -r),
        6 => cx(z, -o),
        _ => cx(r, -r),
    }
}

/// `(i)^k` for any integer `k`.
#[inline]
pub fn i_pow<T: Real>(k: i64) -> Cx<T> {
    eighth_turn(2 * k)
}

/// Euclidean norm of a slice.
#[inline]
pub fn norm<T: Real>(v: &[T]) -> T {
    norm_sqr(v).sqrt()
}

#[inline]
pub fn norm_sqr<T: Real>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |acc, &x| acc + x * x)
}

#[inline]
pub fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}
