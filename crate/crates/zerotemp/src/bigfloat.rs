//! Minimal arbitrary-precision binary floating point on `BigInt` mantissas.
//!
//! At large beta the transfer matrix carries clusters whose top eigenvalues
//! agree to far below double precision while the eigenvector mixing between
//! them is decided by couplings that are smaller still; no fixed-precision
//! solver can resolve that.  The log-entries beta*phi + psi are exact
//! rationals, so the matrix can be reconstituted to any precision.  This
//! module provides just the operations the high-precision Perron solver
//! needs: add, subtract, multiply, divide, exp of a rational, and lossy
//! conversions out to `f64`.
//!
//! A value is `m * 2^e` with a signed mantissa truncated to a working
//! precision after every operation.  Truncation (round toward zero) is
//! enough: the solver only needs relative errors of order `2^-prec` and
//! certifies its final answer independently.

use crate::potentials::{rat_to_f64, Rat};
use num::bigint::BigInt;
use num::{Signed, ToPrimitive, Zero};

#[derive(Debug, Clone)]
pub struct Bf {
    m: BigInt,
    e: i64,
}

impl Bf {
    pub fn zero() -> Self {
        Bf { m: BigInt::zero(), e: 0 }
    }

    pub fn one() -> Self {
        Bf { m: BigInt::from(1), e: 0 }
    }

    pub fn is_zero(&self) -> bool {
        self.m.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.m.is_positive()
    }

    fn bits(&self) -> u64 {
        self.m.magnitude().bits()
    }

    fn normalize(mut self, prec: u64) -> Self {
        let b = self.bits();
        if b > prec {
            let s = b - prec;
            self.m >>= s;
            self.e += s as i64;
        }
        self
    }

    /// Truncating division by a small positive integer.
    pub fn div_small(mut self, k: u32) -> Bf {
        self.m /= BigInt::from(k);
        self
    }

    /// ln of a positive value.  For arguments within 2^-16 of 1 the leading
    /// digits of ln(1+x) live far below f64 mantissa resolution of the
    /// argument, so the series x - x^2/2 + x^3/3 is evaluated in working
    /// precision; tiny spectral gaps (e.g. rho - 1 ~ 1e-29) survive the
    /// conversion out.
    pub fn ln(&self, prec: u64) -> f64 {
        assert!(self.is_positive(), "ln of a non-positive value");
        let x = self.sub(&Bf::one(), prec);
        if x.is_zero() {
            return 0.0;
        }
        if x.log2() < -16.0 {
            let x2 = x.mul(&x, prec);
            let x3 = x2.mul(&x, prec);
            return x.sub(&x2.div_small(2), prec).add(&x3.div_small(3), prec).to_f64();
        }
        self.log2() * std::f64::consts::LN_2
    }

    /// Exact multiplication by 2^d.
    pub fn shift_exp(&mut self, d: i64) {
        if !self.is_zero() {
            self.e += d;
        }
    }

    /// Highest set bit position of |value|: e + bits(m).
    fn magnitude_exponent(&self) -> i64 {
        self.e + self.bits() as i64
    }

    pub fn mul(&self, other: &Bf, prec: u64) -> Bf {
        if self.is_zero() || other.is_zero() {
            return Bf::zero();
        }
        Bf { m: &self.m * &other.m, e: self.e + other.e }.normalize(prec)
    }

    pub fn add(&self, other: &Bf, prec: u64) -> Bf {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let ha = self.magnitude_exponent();
        let hb = other.magnitude_exponent();
        // the smaller operand is entirely below the truncation point
        if ha > hb + prec as i64 + 8 {
            return self.clone();
        }
        if hb > ha + prec as i64 + 8 {
            return other.clone();
        }
        let e = self.e.min(other.e);
        let m = (&self.m << (self.e - e) as u64) + (&other.m << (other.e - e) as u64);
        Bf { m, e }.normalize(prec)
    }

    pub fn sub(&self, other: &Bf, prec: u64) -> Bf {
        let neg = Bf { m: -other.m.clone(), e: other.e };
        self.add(&neg, prec)
    }

    pub fn div(&self, other: &Bf, prec: u64) -> Bf {
        assert!(!other.is_zero(), "division by zero");
        if self.is_zero() {
            return Bf::zero();
        }
        let shift = prec + 8;
        let m = (&self.m << shift) / &other.m;
        Bf { m, e: self.e - other.e - shift as i64 }.normalize(prec)
    }

    /// `a/b < c/d` for positive values, decided exactly by cross products.
    pub fn ratio_lt(a: &Bf, b: &Bf, c: &Bf, d: &Bf) -> bool {
        // a*d < c*b, compared without truncation
        let (lm, le) = (&a.m * &d.m, a.e + d.e);
        let (rm, re) = (&c.m * &b.m, c.e + b.e);
        let e = le.min(re);
        (lm << (le - e) as u64) < (rm << (re - e) as u64)
    }

    /// log2 of |value| as f64; -inf for zero.  Accurate to ~1 ulp of the
    /// mantissa, i.e. absolute error ~1e-16 in the log.
    pub fn log2(&self) -> f64 {
        if self.is_zero() {
            return f64::NEG_INFINITY;
        }
        let b = self.bits();
        let shift = b.saturating_sub(53);
        let top = (self.m.magnitude() >> shift).to_f64().unwrap();
        top.log2() + shift as f64 + self.e as f64
    }

    /// Round out to f64 (signed), with overflow to +-inf and graceful
    /// underflow through the subnormal range to 0.
    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let b = self.bits();
        let shift = b.saturating_sub(54);
        let top = (self.m.magnitude() >> shift).to_f64().unwrap();
        let exp = self.e + shift as i64;
        let sign = if self.m.is_negative() { -1.0 } else { 1.0 };
        if exp > 1100 {
            return sign * f64::INFINITY;
        }
        if exp < -1180 {
            return 0.0;
        }
        // split the scale so neither factor over/underflows on its own
        let half = (exp / 2) as i32;
        sign * top * 2f64.powi(half) * 2f64.powi(exp as i32 - half)
    }

    /// exp(x) for exact rational x, correct to relative error ~2^-prec.
    /// Argument reduction x = 2^s * z with |z| <= 2^-12, Taylor series for
    /// e^z (about prec/12 terms), then s squarings.
    pub fn exp_rat(x: &Rat, prec: u64) -> Bf {
        if x.is_zero() {
            return Bf::one();
        }
        let wp = prec + 64;
        let xf = rat_to_f64(x).abs();
        let s = if xf * 4096.0 > 1.0 { (xf * 4096.0).log2().ceil() as i64 + 1 } else { 0 };
        // z = x / 2^s as a working-precision float
        let mz = (x.numer() << wp) / x.denom();
        let z = Bf { m: mz, e: -(wp as i64) - s }.normalize(wp);
        let mut acc = Bf::one();
        let mut term = Bf::one();
        let mut j: u64 = 1;
        loop {
            term = term.mul(&z, wp);
            term.m /= BigInt::from(j);
            if term.is_zero() {
                break;
            }
            acc = acc.add(&term, wp);
            if term.magnitude_exponent() < acc.magnitude_exponent() - wp as i64 - 8 {
                break;
            }
            j += 1;
            assert!(j < 16 * wp, "exp series failed to converge");
        }
        for _ in 0..s {
            acc = acc.mul(&acc, wp);
        }
        acc.normalize(prec)
    }
}
