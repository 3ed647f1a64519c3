//! Double-double arithmetic.
//!
//! A value is the unevaluated sum `hi + lo` with `|lo| <= ulp(hi)/2`, giving
//! roughly 106 bits of significand. Only the operations the zeta kernel needs
//! are provided: exact sums and products, logarithms of integers and phase
//! reduction modulo 2π.

use std::ops::{Add, Mul, Neg, Sub};

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct DoubleDouble {
    pub hi: f64,
    pub lo: f64,
}

/// 2π to double-double precision.
pub const TWO_PI: DoubleDouble = DoubleDouble {
    hi: 6.283185307179586,
    lo: 2.4492935982947064e-16,
};

/// ln 2 to double-double precision.
pub const LN_2: DoubleDouble = DoubleDouble {
    hi: 0.6931471805599453,
    lo: 2.3190468138462996e-17,
};

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

impl DoubleDouble {
    pub const ZERO: DoubleDouble = DoubleDouble { hi: 0.0, lo: 0.0 };

    #[inline]
    pub const fn from_f64(x: f64) -> Self {
        DoubleDouble { hi: x, lo: 0.0 }
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    #[inline]
    pub fn add_f64(self, b: f64) -> Self {
        let (s, e) = two_sum(self.hi, b);
        let (hi, lo) = quick_two_sum(s, e + self.lo);
        DoubleDouble { hi, lo }
    }

    #[inline]
    pub fn mul_f64(self, b: f64) -> Self {
        let (p, e) = two_prod(self.hi, b);
        let (hi, lo) = quick_two_sum(p, e + self.lo * b);
        DoubleDouble { hi, lo }
    }

    pub fn div(self, b: DoubleDouble) -> Self {
        let q1 = self.hi / b.hi;
        let r = self - b.mul_f64(q1);
        let q2 = r.hi / b.hi;
        let r = r - b.mul_f64(q2);
        let q3 = r.hi / b.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        DoubleDouble { hi, lo }.add_f64(q3)
    }

    /// Natural logarithm of a positive integer below 2^52.
    ///
    /// Writes `n = 2^e m` with `m` in `[1, 2)` and sums the atanh series for
    /// `ln m = 2 atanh((m-1)/(m+1))`, whose ratio is at most 1/9.
    pub fn ln_integer(n: u64) -> Self {
        assert!(n >= 1 && n < (1u64 << 52), "ln_integer argument out of range");
        if n == 1 {
            return Self::ZERO;
        }
        let e = 63 - n.leading_zeros() as i32;
        let m = n as f64 / f64::powi(2.0, e);
        let x = DoubleDouble::from_f64(m - 1.0).div(DoubleDouble::from_f64(m + 1.0));
        let x2 = x * x;
        let mut power = x;
        let mut sum = x;
        let mut j = 1u32;
        loop {
            power = power * x2;
            let term = power.div(DoubleDouble::from_f64((2 * j + 1) as f64));
            sum = sum + term;
            if term.hi.abs() < 1e-34 * sum.hi.abs().max(f64::MIN_POSITIVE) {
                break;
            }
            j += 1;
            if j > 200 {
                break;
            }
        }
        LN_2.mul_f64(e as f64) + sum.mul_f64(2.0)
    }

    /// Reduces an angle to `[-π, π]`, carrying the double-double residue.
    pub fn reduce_two_pi(self) -> Self {
        let q = (self.hi / TWO_PI.hi).round();
        if q == 0.0 {
            return self;
        }
        self - TWO_PI.mul_f64(q)
    }
}

impl Add for DoubleDouble {
    type Output = DoubleDouble;
    #[inline]
    fn add(self, b: DoubleDouble) -> DoubleDouble {
        let (s, e) = two_sum(self.hi, b.hi);
        let (t, f) = two_sum(self.lo, b.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        DoubleDouble { hi, lo }
    }
}

impl Neg for DoubleDouble {
    type Output = DoubleDouble;
    #[inline]
    fn neg(self) -> DoubleDouble {
        DoubleDouble { hi: -self.hi, lo: -self.lo }
    }
}

impl Sub for DoubleDouble {
    type Output = DoubleDouble;
    #[inline]
    fn sub(self, b: DoubleDouble) -> DoubleDouble {
        self + (-b)
    }
}

impl Mul for DoubleDouble {
    type Output = DoubleDouble;
    #[inline]
    fn mul(self, b: DoubleDouble) -> DoubleDouble {
        let (p, e) = two_prod(self.hi, b.hi);
        let e = e + (self.hi * b.lo + self.lo * b.hi);
        let (hi, lo) = quick_two_sum(p, e);
        DoubleDouble { hi, lo }
    }
}

/// Complex accumulator with double-double components.
#[derive(Clone, Copy, Debug, Default)]
pub struct ComplexAccumulator {
    pub re: DoubleDouble,
    pub im: DoubleDouble,
}

impl ComplexAccumulator {
    #[inline]
    pub fn add(&mut self, re: f64, im: f64) {
        self.re = self.re.add_f64(re);
        self.im = self.im.add_f64(im);
    }

    pub fn value(&self) -> (f64, f64) {
        (self.re.to_f64(), self.im.to_f64())
    }
}
