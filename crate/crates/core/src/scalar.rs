use std::fmt::Debug;
use std::ops::Neg;

use num_complex::Complex64;
use num_traits::{Num, NumAssign};

/// Coefficient field of polynomials and jets: `f64` or `Complex64`.
pub trait Scalar:
    Copy + Debug + Default + PartialEq + Send + Sync + 'static + Num + NumAssign + Neg<Output = Self>
{
    const IS_COMPLEX: bool;

    fn from_f64(x: f64) -> Self;
    fn modulus(self) -> f64;
    fn re(self) -> f64;
    fn im(self) -> f64;
    fn conj(self) -> Self;
    /// `None` when `im != 0` for a real scalar type.
    fn from_parts(re: f64, im: f64) -> Option<Self>;
}

impl Scalar for f64 {
    const IS_COMPLEX: bool = false;

    fn from_f64(x: f64) -> Self {
        x
    }
    fn modulus(self) -> f64 {
        self.abs()
    }
    fn re(self) -> f64 {
        self
    }
    fn im(self) -> f64 {
        0.0
    }
    fn conj(self) -> Self {
        self
    }
    fn from_parts(re: f64, im: f64) -> Option<Self> {
        (im == 0.0).then_some(re)
    }
}

impl Scalar for Complex64 {
    const IS_COMPLEX: bool = true;

    fn from_f64(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    fn modulus(self) -> f64 {
        self.norm()
    }
    fn re(self) -> f64 {
        self.re
    }
    fn im(self) -> f64 {
        self.im
    }
    fn conj(self) -> Self {
        Complex64::conj(&self)
    }
    fn from_parts(re: f64, im: f64) -> Option<Self> {
        Some(Complex64::new(re, im))
    }
}
