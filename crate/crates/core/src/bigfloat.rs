//! Fixed-point arbitrary-precision reals: value = mant * 2^exp.
//!
//! Just enough numerics for this crate: exact add/sub/compare, rounded
//! mul/div/sqrt, pi via Machin's formula, sinh via Taylor. Precision is
//! passed explicitly to every rounding operation; additions are exact and
//! callers round when accumulating.

use num_bigint::{BigInt, Sign};
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::pi_scalar::{PiLaurent, PiScalar};
use crate::rational::Rational;

#[derive(Clone, Debug)]
pub struct BigFloat {
    mant: BigInt,
    exp: i64,
}

impl BigFloat {
    pub fn zero() -> Self {
        BigFloat {
            mant: BigInt::zero(),
            exp: 0,
        }
    }

    pub fn from_i64(v: i64) -> Self {
        BigFloat {
            mant: BigInt::from(v),
            exp: 0,
        }
    }

    pub fn from_bigint(v: &BigInt) -> Self {
        BigFloat {
            mant: v.clone(),
            exp: 0,
        }
    }

    pub fn from_rational(r: &Rational, prec: u32) -> Self {
        BigFloat::from_bigint(r.numer()).div(&BigFloat::from_bigint(r.denom()), prec)
    }

    /// Nearest representable value; for test tolerances only.
    pub fn from_f64_approx(v: f64, prec: u32) -> Self {
        assert!(v.is_finite());
        let (m, e) = decompose_f64(v);
        BigFloat {
            mant: BigInt::from(m),
            exp: e,
        }
        .round(prec)
    }

    pub fn is_zero(&self) -> bool {
        self.mant.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.mant.is_negative()
    }

    fn mant_bits(&self) -> u64 {
        self.mant.bits()
    }

    /// Round the mantissa to `prec` bits (round half away from zero).
    pub fn round(&self, prec: u32) -> Self {
        let bits = self.mant_bits();
        if bits <= prec as u64 {
            return self.clone();
        }
        let drop = (bits - prec as u64) as i64;
        let half = BigInt::from(1) << (drop - 1) as u64;
        let adj = if self.mant.is_negative() {
            &self.mant - half
        } else {
            &self.mant + half
        };
        BigFloat {
            mant: adj >> drop as u64,
            exp: self.exp + drop,
        }
    }

    pub fn neg(&self) -> Self {
        BigFloat {
            mant: -self.mant.clone(),
            exp: self.exp,
        }
    }

    pub fn abs(&self) -> Self {
        BigFloat {
            mant: self.mant.abs(),
            exp: self.exp,
        }
    }

    /// Exact addition (mantissa may grow; round afterwards if accumulating).
    pub fn add(&self, rhs: &BigFloat) -> Self {
        if self.is_zero() {
            return rhs.clone();
        }
        if rhs.is_zero() {
            return self.clone();
        }
        let exp = self.exp.min(rhs.exp);
        let a = &self.mant << (self.exp - exp) as u64;
        let b = &rhs.mant << (rhs.exp - exp) as u64;
        BigFloat { mant: a + b, exp }
    }

    pub fn sub(&self, rhs: &BigFloat) -> Self {
        self.add(&rhs.neg())
    }

    pub fn mul(&self, rhs: &BigFloat, prec: u32) -> Self {
        BigFloat {
            mant: &self.mant * &rhs.mant,
            exp: self.exp + rhs.exp,
        }
        .round(prec)
    }

    pub fn div(&self, rhs: &BigFloat, prec: u32) -> Self {
        assert!(!rhs.is_zero(), "BigFloat division by zero");
        if self.is_zero() {
            return BigFloat::zero();
        }
        // scale numerator so the quotient keeps prec + guard significant bits
        let scale = prec as i64 + 8 + rhs.mant_bits() as i64 - self.mant_bits() as i64;
        let scale = scale.max(0) as u64;
        let num = &self.mant << scale;
        BigFloat {
            mant: num / &rhs.mant,
            exp: self.exp - rhs.exp - scale as i64,
        }
        .round(prec)
    }

    pub fn recip(&self, prec: u32) -> Self {
        BigFloat::from_i64(1).div(self, prec)
    }

    /// Integer power by repeated squaring. `k >= 0`.
    pub fn powi(&self, k: i64, prec: u32) -> Self {
        assert!(k >= 0, "powi expects a nonnegative exponent");
        let mut result = BigFloat::from_i64(1);
        let mut base = self.clone();
        let mut e = k as u64;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base, prec);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base, prec);
            }
        }
        result
    }

    pub fn sqrt(&self, prec: u32) -> Self {
        assert!(!self.is_negative(), "sqrt of negative BigFloat");
        if self.is_zero() {
            return BigFloat::zero();
        }
        // scale mantissa to ~2*(prec+8) bits with an even exponent
        let mut shift = 2 * (prec as i64 + 8) - self.mant_bits() as i64;
        if (self.exp - shift) % 2 != 0 {
            shift += 1;
        }
        let (m, e) = if shift >= 0 {
            (&self.mant << shift as u64, self.exp - shift)
        } else {
            (&self.mant >> (-shift) as u64, self.exp - shift)
        };
        BigFloat {
            mant: m.sqrt(),
            exp: e / 2,
        }
        .round(prec)
    }

    /// pi by Machin's formula with integer arithmetic.
    pub fn pi(prec: u32) -> Self {
        let s = prec as u64 + 24;
        let pi_scaled = atan_inv_scaled(5, s) * 16 - atan_inv_scaled(239, s) * 4;
        BigFloat {
            mant: pi_scaled,
            exp: -(s as i64),
        }
        .round(prec)
    }

    /// sinh via its Taylor series (intended for |x| up to a few units).
    pub fn sinh(&self, prec: u32) -> Self {
        let work = prec + 32;
        let x2 = self.mul(self, work);
        let mut term = self.clone();
        let mut acc = self.clone();
        let mut k: i64 = 1;
        loop {
            term = term
                .mul(&x2, work)
                .div(&BigFloat::from_i64(2 * k * (2 * k + 1)), work);
            if term.is_zero() {
                break;
            }
            acc = acc.add(&term).round(work);
            // stop once the term can no longer move the rounded result
            if term.abs().magnitude_exp() < acc.magnitude_exp() - (prec as i64 + 16) {
                break;
            }
            k += 1;
        }
        acc.round(prec)
    }

    /// Exponent of the leading bit, i.e. floor(log2 |x|) + 1. Zero -> i64::MIN.
    pub fn magnitude_exp(&self) -> i64 {
        if self.is_zero() {
            return i64::MIN;
        }
        self.exp + self.mant_bits() as i64
    }

    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let bits = self.mant_bits();
        if bits <= 52 {
            return self.mant.to_f64().unwrap() * (self.exp as f64).exp2();
        }
        let drop = bits - 52;
        let m = (&self.mant >> drop).to_f64().unwrap();
        m * ((self.exp + drop as i64) as f64).exp2()
    }
}

fn decompose_f64(v: f64) -> (i64, i64) {
    if v == 0.0 {
        return (0, 0);
    }
    let bits = v.to_bits();
    let sign = if bits >> 63 == 1 { -1i64 } else { 1 };
    let exp_raw = ((bits >> 52) & 0x7ff) as i64;
    let frac = (bits & ((1u64 << 52) - 1)) as i64;
    if exp_raw == 0 {
        (sign * frac, -1074)
    } else {
        (sign * (frac + (1 << 52)), exp_raw - 1075)
    }
}

/// atan(1/k) scaled by 2^s, alternating series with truncation-safe terms.
fn atan_inv_scaled(k: i64, s: u64) -> BigInt {
    let k2 = BigInt::from(k) * BigInt::from(k);
    let mut term = (BigInt::from(1) << s) / BigInt::from(k);
    let mut acc = term.clone();
    let mut j: i64 = 1;
    loop {
        term /= &k2;
        if term.is_zero() {
            break;
        }
        let sub = &term / BigInt::from(2 * j + 1);
        if sub.is_zero() {
            break;
        }
        if j % 2 == 1 {
            acc -= sub;
        } else {
            acc += sub;
        }
        j += 1;
    }
    acc
}

impl PartialEq for BigFloat {
    fn eq(&self, other: &Self) -> bool {
        self.cmp_exact(other) == std::cmp::Ordering::Equal
    }
}
impl Eq for BigFloat {}

impl PartialOrd for BigFloat {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp_exact(other))
    }
}

impl BigFloat {
    fn cmp_exact(&self, other: &Self) -> std::cmp::Ordering {
        use std::cmp::Ordering;
        match (self.mant.sign(), other.mant.sign()) {
            (Sign::Minus, Sign::NoSign | Sign::Plus) => return Ordering::Less,
            (Sign::NoSign, Sign::Plus) => return Ordering::Less,
            (Sign::Plus, Sign::NoSign | Sign::Minus) => return Ordering::Greater,
            (Sign::NoSign, Sign::Minus) => return Ordering::Greater,
            (Sign::NoSign, Sign::NoSign) => return Ordering::Equal,
            _ => {}
        }
        // same nonzero sign: compare leading-bit positions first
        let (ma, mb) = (self.magnitude_exp(), other.magnitude_exp());
        if ma != mb {
            let ord = ma.cmp(&mb);
            return if self.mant.is_negative() { ord.reverse() } else { ord };
        }
        let exp = self.exp.min(other.exp);
        let a = &self.mant << (self.exp - exp) as u64;
        let b = &other.mant << (other.exp - exp) as u64;
        a.cmp(&b)
    }
}

impl std::fmt::Display for BigFloat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:e}", self.to_f64())
    }
}

impl PiScalar {
    /// Numeric value at `prec` bits of working precision (>= 64 required).
    pub fn eval(&self, prec: u32) -> Result<BigFloat> {
        PiLaurent::from(self).eval(prec)
    }
}

impl PiLaurent {
    /// Numeric value at `prec` bits of working precision (>= 64 required).
    pub fn eval(&self, prec: u32) -> Result<BigFloat> {
        if prec < 64 {
            return Err(Error::PrecisionTooLow(prec));
        }
        let work = prec + 16;
        let pi = BigFloat::pi(work);
        let mut acc = BigFloat::zero();
        for (e, c) in self.iter() {
            let p = if *e >= 0 {
                pi.powi(*e, work)
            } else {
                pi.powi(-*e, work).recip(work)
            };
            acc = acc.add(&BigFloat::from_rational(c, work).mul(&p, work)).round(work);
        }
        Ok(acc.round(prec))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    fn close(a: &BigFloat, b: f64, tol: f64) -> bool {
        (a.to_f64() - b).abs() <= tol
    }

    #[test]
    fn pi_value() {
        let pi = BigFloat::pi(256);
        assert!(close(&pi, std::f64::consts::PI, 1e-15));
        // cross-check first 50 digits against a frozen reference
        let reference = "3.14159265358979323846264338327950288419716939937510";
        let digits: f64 = reference.parse().unwrap();
        assert!(close(&pi, digits, 1e-15));
        // high-low consistency: pi(512) rounds to pi(128)
        let hi = BigFloat::pi(512).round(128);
        let lo = BigFloat::pi(128);
        let diff = hi.sub(&lo).abs();
        assert!(diff < BigFloat { mant: BigInt::from(1), exp: -120 });
    }

    #[test]
    fn arithmetic_and_compare() {
        let a = BigFloat::from_rational(&rat(1, 3), 128);
        let b = BigFloat::from_rational(&rat(2, 3), 128);
        let s = a.add(&b);
        assert!(close(&s, 1.0, 1e-30));
        assert!(a < b);
        assert!(b > a);
        assert!(a == a.clone());
        let p = a.mul(&b, 128);
        assert!(close(&p, 2.0 / 9.0, 1e-16));
    }

    #[test]
    fn sqrt_and_powi() {
        let two = BigFloat::from_i64(2);
        let r = two.sqrt(256);
        let sq = r.mul(&r, 256);
        assert!(close(&sq, 2.0, 1e-60));
        assert!(close(&two.powi(10, 128), 1024.0, 1e-9));
        assert!(close(&BigFloat::from_i64(0).powi(0, 64), 1.0, 0.0));
    }

    #[test]
    fn sinh_matches_f64() {
        for x in [0.25f64, 0.5, 1.0, 1.5707963267948966, 2.0, 4.0] {
            let xf = BigFloat::from_f64_approx(x, 200);
            let s = xf.sinh(200);
            assert!(close(&s, x.sinh(), 1e-12), "sinh({x})");
        }
    }

    #[test]
    fn pi_scalar_eval() {
        let v = PiScalar::new(rat(3, 64), 2).eval(128).unwrap();
        assert!(close(&v, 3.0 / 64.0 * std::f64::consts::PI.powi(2), 1e-15));
        let z = PiScalar::zero().eval(64).unwrap();
        assert!(z.is_zero());
        let inv = PiLaurent::term(rat(4, 1), -1).eval(128).unwrap();
        assert!(close(&inv, 4.0 / std::f64::consts::PI, 1e-15));
        assert!(PiScalar::zero().eval(32).is_err());
    }
}
