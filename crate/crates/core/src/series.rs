//! Truncated expansions in inverse powers of the genus, with exact
//! Laurent-in-pi coefficients.
//!
//! A `GSeries` of order s represents `c_0 + c_1/g + ... + c_s/g^s`; products
//! truncate at the smaller order, reciprocals require constant term 1, and
//! `shifted` re-expands `a(g + delta)` as a series in 1/g.

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::pi_scalar::PiLaurent;
use crate::rational::{binomial, Rational};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GSeries {
    coeffs: Vec<PiLaurent>,
}

impl GSeries {
    pub fn new(coeffs: Vec<PiLaurent>) -> Self {
        assert!(!coeffs.is_empty(), "a series has at least its constant term");
        GSeries { coeffs }
    }

    pub fn one(order: usize) -> Self {
        let mut coeffs = vec![PiLaurent::zero(); order + 1];
        coeffs[0] = PiLaurent::one();
        GSeries { coeffs }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, k: usize) -> &PiLaurent {
        &self.coeffs[k]
    }

    pub fn coeffs(&self) -> &[PiLaurent] {
        &self.coeffs
    }

    pub fn truncate(&self, order: usize) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs.truncate(order + 1);
        while coeffs.len() < order + 1 {
            coeffs.push(PiLaurent::zero());
        }
        GSeries { coeffs }
    }

    pub fn add(&self, rhs: &GSeries) -> Self {
        let order = self.order().min(rhs.order());
        let coeffs = (0..=order)
            .map(|k| &self.coeffs[k] + &rhs.coeffs[k])
            .collect();
        GSeries { coeffs }
    }

    pub fn scale(&self, r: &Rational) -> Self {
        GSeries {
            coeffs: self.coeffs.iter().map(|c| c.scale(r)).collect(),
        }
    }

    /// Cauchy product truncated at the smaller order.
    pub fn mul(&self, rhs: &GSeries) -> Self {
        let order = self.order().min(rhs.order());
        let mut coeffs = vec![PiLaurent::zero(); order + 1];
        for (i, a) in self.coeffs.iter().enumerate().take(order + 1) {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate().take(order + 1 - i) {
                coeffs[i + j] = &coeffs[i + j] + &(a * b);
            }
        }
        GSeries { coeffs }
    }

    /// Multiplicative inverse through the same order. The constant term must
    /// be exactly 1 (normalize any prefactor out first).
    pub fn reciprocal(&self) -> Result<GSeries> {
        if self.coeffs[0] != PiLaurent::one() {
            return Err(Error::SeriesNotNormalized);
        }
        let order = self.order();
        let mut out = vec![PiLaurent::zero(); order + 1];
        out[0] = PiLaurent::one();
        for k in 1..=order {
            let mut s = PiLaurent::zero();
            for j in 1..=k {
                s = &s + &(&self.coeffs[j] * &out[k - j]);
            }
            out[k] = -&s;
        }
        Ok(GSeries { coeffs: out })
    }

    /// Re-expand `a(g + delta)` as a series in 1/g, using
    /// `1/(g+delta)^k = sum_i C(k+i-1, i) (-delta)^i / g^{k+i}`.
    pub fn shifted(&self, delta: &Rational) -> Self {
        let order = self.order();
        let mut out = vec![PiLaurent::zero(); order + 1];
        out[0] = self.coeffs[0].clone();
        for (k, ck) in self.coeffs.iter().enumerate().skip(1) {
            if ck.is_zero() {
                continue;
            }
            let mut factor = Rational::one(); // C(k+i-1, i) (-delta)^i
            for i in 0..=(order - k) {
                if i > 0 {
                    factor = Rational::from_integer(binomial((k + i - 1) as u64, i as u64))
                        * (-delta.clone()).pow(i as i32);
                }
                out[k + i] = &out[k + i] + &ck.scale(&factor);
            }
        }
        GSeries { coeffs: out }
    }

    /// Expansion of 1/(a g + b) through the given order.
    pub fn inv_affine(a: &Rational, b: &Rational, order: usize) -> Self {
        assert!(!a.is_zero(), "inv_affine needs a nonzero leading coefficient");
        let mut coeffs = vec![PiLaurent::zero(); order + 1];
        // 1/(a g + b) = (1/(a g)) * 1/(1 + b/(a g)) = sum_i (-b)^i / a^{i+1} g^{-(i+1)}
        let mut num = Rational::one();
        for (i, c) in coeffs.iter_mut().enumerate().skip(1) {
            // i = power of 1/g, i >= 1
            let term = &num / a.pow(i as i32);
            *c = PiLaurent::term(term, 0);
            num *= -b.clone();
        }
        GSeries { coeffs }
    }
}
