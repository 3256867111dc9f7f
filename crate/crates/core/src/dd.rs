//! Double-double arithmetic (an unevaluated sum `hi + lo` of two `f64`s).
//!
//! The closed-form secrecy expressions are alternating binomial sums whose
//! individual terms exceed the result by up to thirteen orders of magnitude.
//! Every term is therefore formed and accumulated with error-free
//! transformations, giving roughly 106 bits of working precision.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

/// A double-double number `hi + lo` with `|lo| <= ulp(hi) / 2`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct DoubleDouble {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

const LN2: DoubleDouble = DoubleDouble {
    hi: std::f64::consts::LN_2,
    lo: 2.319_046_813_846_299_6e-17,
};

impl DoubleDouble {
    pub const ZERO: Self = Self { hi: 0.0, lo: 0.0 };
    pub const ONE: Self = Self { hi: 1.0, lo: 0.0 };
    pub const PI: Self = Self {
        hi: std::f64::consts::PI,
        lo: 1.224_646_799_147_353_2e-16,
    };

    pub const fn new(hi: f64, lo: f64) -> Self {
        Self { hi, lo }
    }

    pub fn from_f64(x: f64) -> Self {
        Self { hi: x, lo: 0.0 }
    }

    /// Exact conversion of an integer up to 2^106.
    pub fn from_u128(n: u128) -> Self {
        let hi = n as f64;
        // `hi` may round up past `n`, so the residual is signed.
        let rounded = hi as u128;
        let lo = if rounded >= n {
            -((rounded - n) as f64)
        } else {
            (n - rounded) as f64
        };
        let (hi, lo) = quick_two_sum(hi, lo);
        Self { hi, lo }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn is_finite(self) -> bool {
        self.hi.is_finite()
    }

    pub fn abs(self) -> Self {
        if self.hi < 0.0 {
            -self
        } else {
            self
        }
    }

    /// Multiplication by an exact power of two.
    pub fn ldexp(self, exp: i32) -> Self {
        let scale = 2f64.powi(exp);
        Self {
            hi: self.hi * scale,
            lo: self.lo * scale,
        }
    }

    pub fn square(self) -> Self {
        self * self
    }

    pub fn recip(self) -> Self {
        Self::ONE / self
    }

    pub fn exp(self) -> Self {
        if self.hi > 709.78 {
            return Self::from_f64(f64::INFINITY);
        }
        if self.hi < -745.2 {
            return Self::ZERO;
        }
        if self.hi == 0.0 {
            return Self::ONE;
        }
        let k = (self.hi / LN2.hi).round();
        let r = self - LN2 * Self::from_f64(k);
        // |r| <= ln2/2; shrink by 2^10 so a short Taylor series suffices, then
        // undo by squaring in expm1 form to keep the low-order bits.
        let r = r.ldexp(-10);
        let mut term = r;
        let mut p = r;
        for n in 2..=14 {
            term = term * r / Self::from_f64(n as f64);
            p += term;
            if term.hi.abs() < 1e-36 {
                break;
            }
        }
        for _ in 0..10 {
            p = p.ldexp(1) + p.square();
        }
        let ek = 2f64.powi(k as i32);
        // Split the scaling so subnormal results do not overflow `powi`.
        if ek == 0.0 || !ek.is_finite() {
            let half = (k / 2.0).trunc() as i32;
            return (p + Self::ONE).ldexp(half).ldexp(k as i32 - half);
        }
        (p + Self::ONE).ldexp(k as i32)
    }

    /// Natural logarithm; one Newton step on `exp` from the `f64` estimate.
    pub fn ln(self) -> Self {
        if self.hi <= 0.0 {
            return if self.hi == 0.0 {
                Self::from_f64(f64::NEG_INFINITY)
            } else {
                Self::from_f64(f64::NAN)
            };
        }
        if !self.hi.is_finite() {
            return self;
        }
        // Work on the mantissa so `exp(-y)` stays far from the subnormal range
        // and the f64 seed error (and hence the Newton residual) stays small.
        let e = self.hi.log2().floor() as i32;
        let m = self.ldexp(-(e / 2)).ldexp(-(e - e / 2));
        let y = Self::from_f64(m.hi.ln());
        let ln_m = y + m * (-y).exp() - Self::ONE;
        ln_m + LN2 * Self::from_f64(f64::from(e))
    }

    /// `self^p` for a nonnegative base.
    pub fn powf(self, p: Self) -> Self {
        if self.hi == 0.0 {
            return if p.hi == 0.0 { Self::ONE } else { Self::ZERO };
        }
        (p * self.ln()).exp()
    }
}

impl From<f64> for DoubleDouble {
    fn from(x: f64) -> Self {
        Self::from_f64(x)
    }
}

impl fmt::Display for DoubleDouble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:e} + {:e}", self.hi, self.lo)
    }
}

impl PartialOrd for DoubleDouble {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match self.hi.partial_cmp(&other.hi) {
            Some(Ordering::Equal) => self.lo.partial_cmp(&other.lo),
            ord => ord,
        }
    }
}

impl Neg for DoubleDouble {
    type Output = Self;
    fn neg(self) -> Self {
        Self {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Add for DoubleDouble {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let (s, e) = two_sum(self.hi, rhs.hi);
        let (t, f) = two_sum(self.lo, rhs.lo);
        let e = e + t;
        let (s, e) = quick_two_sum(s, e);
        let e = e + f;
        let (hi, lo) = quick_two_sum(s, e);
        Self { hi, lo }
    }
}

impl AddAssign for DoubleDouble {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl Sub for DoubleDouble {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl Mul for DoubleDouble {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let (p, e) = two_prod(self.hi, rhs.hi);
        let e = e + (self.hi * rhs.lo + self.lo * rhs.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Self { hi, lo }
    }
}

impl Div for DoubleDouble {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        let q1 = self.hi / rhs.hi;
        let r = self - rhs * Self::from_f64(q1);
        let q2 = r.hi / rhs.hi;
        let r = r - rhs * Self::from_f64(q2);
        let q3 = r.hi / rhs.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Self { hi, lo } + Self::from_f64(q3)
    }
}

impl std::iter::Sum for DoubleDouble {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::ZERO, |acc, x| acc + x)
    }
}

/// Exact binomial coefficient; `None` once it no longer fits in 128 bits.
pub fn binomial(n: u32, k: u32) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) is divisible by (i + 1) after the multiplication.
        acc = acc.checked_mul(u128::from(n - i))? / u128::from(i + 1);
    }
    Some(acc)
}
