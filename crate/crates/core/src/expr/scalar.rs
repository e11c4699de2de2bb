//! Numeric scalar types used by the evaluator.
//!
//! `Measured<T>` carries a running magnitude next to the value: an upper
//! scale for the rounding error accumulated so far. Zero tests compare the
//! value against this scale instead of against an absolute threshold.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_rational::BigRational;
use num_traits::ToPrimitive;
use qd::Quad;

pub trait Scalar:
    Copy + Send + Sync + Debug + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Div<Output = Self> + Neg<Output = Self>
{
    fn from_f64(x: f64) -> Self;
    fn from_rational(r: &BigRational) -> Self;
    fn from_dd(x: DD) -> Self;
    fn to_f64(self) -> f64;
    /// Scale against which the value is judged small.
    fn magnitude(self) -> f64;
    fn sqrt(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn powi(self, n: i64) -> Self;
    /// `self^r` for a rational exponent; the base is positive.
    fn powr(self, r: &BigRational) -> Self;
    /// Replaces the tracked magnitude, where there is one.
    fn with_magnitude(self, _m: f64) -> Self {
        self
    }

    fn zero() -> Self {
        Self::from_f64(0.0)
    }
    fn one() -> Self {
        Self::from_f64(1.0)
    }
}

fn powi_by_squaring<T: Scalar>(x: T, n: i64) -> T {
    let mut base = if n < 0 { T::one() / x } else { x };
    let mut k = n.unsigned_abs();
    let mut acc = T::one();
    while k > 0 {
        if k & 1 == 1 {
            acc = acc * base;
        }
        base = base * base;
        k >>= 1;
    }
    acc
}

impl Scalar for f64 {
    fn from_f64(x: f64) -> Self {
        x
    }
    fn from_rational(r: &BigRational) -> Self {
        r.to_f64().unwrap_or(f64::NAN)
    }
    fn from_dd(x: DD) -> Self {
        x.to_f64()
    }
    fn to_f64(self) -> f64 {
        self
    }
    fn magnitude(self) -> f64 {
        self.abs()
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn powi(self, n: i64) -> Self {
        powi_by_squaring(self, n)
    }
    fn powr(self, r: &BigRational) -> Self {
        self.powf(r.to_f64().unwrap_or(f64::NAN))
    }
}

/// Double-double number with the accurate addition.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct DD(pub Quad);

impl Add for DD {
    type Output = DD;
    fn add(self, rhs: DD) -> DD {
        DD(self.0.add_accurate(rhs.0))
    }
}

impl Sub for DD {
    type Output = DD;
    fn sub(self, rhs: DD) -> DD {
        DD(self.0.sub_accurate(rhs.0))
    }
}

impl Mul for DD {
    type Output = DD;
    fn mul(self, rhs: DD) -> DD {
        DD(self.0 * rhs.0)
    }
}

impl Div for DD {
    type Output = DD;
    fn div(self, rhs: DD) -> DD {
        DD(self.0 / rhs.0)
    }
}

impl Neg for DD {
    type Output = DD;
    fn neg(self) -> DD {
        DD(-self.0)
    }
}

impl Scalar for DD {
    fn from_f64(x: f64) -> Self {
        DD(Quad::from_f64(x))
    }
    fn from_rational(r: &BigRational) -> Self {
        let n = big_to_dd(r.numer());
        let d = big_to_dd(r.denom());
        n / d
    }
    fn from_dd(x: DD) -> Self {
        x
    }
    fn to_f64(self) -> f64 {
        self.0 .0 + self.0 .1
    }
    fn magnitude(self) -> f64 {
        self.to_f64().abs()
    }
    fn sqrt(self) -> Self {
        DD(self.0.sqrt())
    }
    fn exp(self) -> Self {
        DD(self.0.exp())
    }
    fn ln(self) -> Self {
        DD(self.0.ln())
    }
    fn powi(self, n: i64) -> Self {
        powi_by_squaring(self, n)
    }
    fn powr(self, r: &BigRational) -> Self {
        let (n, d) = (r.numer().to_i64(), r.denom().to_i64());
        match (n, d) {
            (Some(n), Some(1)) => self.powi(n),
            (Some(n), Some(2)) => self.sqrt().powi(n),
            (Some(n), Some(4)) => self.sqrt().sqrt().powi(n),
            _ => (Self::from_rational(r) * self.ln()).exp(),
        }
    }
}

fn big_to_dd(n: &num_bigint::BigInt) -> DD {
    // Split into a leading double and the exactly representable remainder.
    let hi = n.to_f64().unwrap_or(f64::INFINITY);
    if !hi.is_finite() || hi.abs() >= 1.7e38 {
        return DD::from_f64(hi);
    }
    let rest = (n - num_bigint::BigInt::from(hi as i128)).to_f64().unwrap_or(0.0);
    DD(Quad::from_f64(hi).add_accurate(Quad::from_f64(rest)))
}

/// Value together with an accumulated rounding-error scale.
#[derive(Clone, Copy, Debug)]
pub struct Measured<T> {
    pub value: T,
    pub mag: f64,
}

impl<T: Scalar> Measured<T> {
    pub fn exact(value: T) -> Self {
        Measured { value, mag: value.magnitude() }
    }
}

impl<T: Scalar> Add for Measured<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Measured { value: self.value + rhs.value, mag: self.mag + rhs.mag }
    }
}

impl<T: Scalar> Sub for Measured<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Measured { value: self.value - rhs.value, mag: self.mag + rhs.mag }
    }
}

impl<T: Scalar> Mul for Measured<T> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Measured { value: self.value * rhs.value, mag: self.mag * rhs.mag }
    }
}

impl<T: Scalar> Div for Measured<T> {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        // Term-magnitude of a quotient: the numerator's terms over |b|.
        let b = rhs.value.magnitude();
        Measured { value: self.value / rhs.value, mag: self.mag / b }
    }
}

impl<T: Scalar> Neg for Measured<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Measured { value: -self.value, mag: self.mag }
    }
}

impl<T: Scalar> Scalar for Measured<T> {
    fn from_f64(x: f64) -> Self {
        Measured::exact(T::from_f64(x))
    }
    fn from_rational(r: &BigRational) -> Self {
        Measured::exact(T::from_rational(r))
    }
    fn from_dd(x: DD) -> Self {
        Measured::exact(T::from_dd(x))
    }
    fn to_f64(self) -> f64 {
        self.value.to_f64()
    }
    fn magnitude(self) -> f64 {
        self.mag
    }
    fn with_magnitude(self, m: f64) -> Self {
        Measured { value: self.value, mag: m }
    }
    fn sqrt(self) -> Self {
        let v = self.value.sqrt();
        let s = v.magnitude();
        Measured { value: v, mag: s + self.mag / (2.0 * s) }
    }
    fn exp(self) -> Self {
        let v = self.value.exp();
        let s = v.magnitude();
        Measured { value: v, mag: s * (1.0 + self.mag) }
    }
    fn ln(self) -> Self {
        let v = self.value.ln();
        Measured { value: v, mag: v.magnitude() + self.mag / self.value.magnitude() }
    }
    fn powi(self, n: i64) -> Self {
        let v = self.value.powi(n);
        let a = self.value.magnitude();
        let m = v.magnitude() + (n.unsigned_abs() as f64) * a.powi(n as i32 - 1) * self.mag;
        Measured { value: v, mag: m }
    }
    fn powr(self, r: &BigRational) -> Self {
        let v = self.value.powr(r);
        let a = self.value.magnitude();
        let rf = r.to_f64().unwrap_or(f64::NAN);
        let m = v.magnitude() + rf.abs() * a.powf(rf - 1.0) * self.mag;
        Measured { value: v, mag: m }
    }
}

pub(crate) fn is_negative<T: Scalar>(x: T) -> bool {
    x.to_f64() < 0.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    #[test]
    fn dd_is_more_accurate_than_f64() {
        let two = DD::from_f64(2.0);
        let r = BigRational::new(BigInt::from(1), BigInt::from(3));
        let c = two.powr(&r);
        let err = (c * c * c - two).to_f64().abs();
        assert!(err < 1e-28, "{}", err);
    }

    #[test]
    fn rational_conversion() {
        let r = BigRational::new(BigInt::from(1), BigInt::from(10));
        let x = DD::from_rational(&r);
        assert!((x * DD::from_f64(10.0) - DD::from_f64(1.0)).to_f64().abs() < 1e-30);
    }

    #[test]
    fn measured_tracks_cancellation_scale() {
        let a = Measured::exact(1.0e8_f64);
        let b = Measured::exact(1.0e8_f64);
        let d = a - b;
        assert_eq!(d.value, 0.0);
        assert_eq!(d.mag, 2.0e8);
    }
}
