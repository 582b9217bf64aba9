//! The pi-graded exact scalar domain.
//!
//! Every bracket and volume is a rational multiple of a single power of pi,
//! and every asymptotic-expansion coefficient is a finite Laurent polynomial
//! in pi with rational coefficients. `PiScalar` and `PiLaurent` are those two
//! closed domains. Nothing in this module evaluates pi numerically; see
//! [`crate::bigfloat`] for that.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::Zero;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::rational::{format_ratio, parse_ratio, Rational};

/// An exact value `q * pi^k`.
///
/// Canonical zero has `pi_exp == 0`. Addition is only defined between equal
/// exponents (or with zero): a mismatch is a grading bug in the caller, not a
/// numeric event, so it panics.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PiScalar {
    coeff: Rational,
    pi_exp: i64,
}

impl PiScalar {
    pub fn new(coeff: Rational, pi_exp: i64) -> Self {
        if coeff.is_zero() {
            PiScalar { coeff, pi_exp: 0 }
        } else {
            PiScalar { coeff, pi_exp }
        }
    }

    pub fn zero() -> Self {
        PiScalar {
            coeff: Rational::zero(),
            pi_exp: 0,
        }
    }

    pub fn from_rational(coeff: Rational) -> Self {
        Self::new(coeff, 0)
    }

    pub fn is_zero(&self) -> bool {
        self.coeff.is_zero()
    }

    pub fn coeff(&self) -> &Rational {
        &self.coeff
    }

    pub fn pi_exp(&self) -> i64 {
        self.pi_exp
    }

    pub fn scale(&self, r: &Rational) -> Self {
        Self::new(&self.coeff * r, self.pi_exp)
    }
}

impl Add for &PiScalar {
    type Output = PiScalar;
    fn add(self, rhs: &PiScalar) -> PiScalar {
        if self.is_zero() {
            return rhs.clone();
        }
        if rhs.is_zero() {
            return self.clone();
        }
        assert_eq!(
            self.pi_exp, rhs.pi_exp,
            "PiScalar addition across gradings: pi^{} + pi^{}",
            self.pi_exp, rhs.pi_exp
        );
        PiScalar::new(&self.coeff + &rhs.coeff, self.pi_exp)
    }
}

impl Sub for &PiScalar {
    type Output = PiScalar;
    fn sub(self, rhs: &PiScalar) -> PiScalar {
        self + &(-rhs)
    }
}

impl Neg for &PiScalar {
    type Output = PiScalar;
    fn neg(self) -> PiScalar {
        PiScalar::new(-self.coeff.clone(), self.pi_exp)
    }
}

impl Mul for &PiScalar {
    type Output = PiScalar;
    fn mul(self, rhs: &PiScalar) -> PiScalar {
        PiScalar::new(&self.coeff * &rhs.coeff, self.pi_exp + rhs.pi_exp)
    }
}

impl fmt::Display for PiScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.pi_exp {
            0 => write!(f, "{}", format_ratio(&self.coeff)),
            e => write!(f, "{}*pi^{}", format_ratio(&self.coeff), e),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct PiScalarWire {
    coefficient: String,
    pi_exponent: i64,
}

impl Serialize for PiScalar {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        PiScalarWire {
            coefficient: format_ratio(&self.coeff),
            pi_exponent: self.pi_exp,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for PiScalar {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let w = PiScalarWire::deserialize(d)?;
        let coeff = parse_ratio(&w.coefficient).map_err(D::Error::custom)?;
        Ok(PiScalar::new(coeff, w.pi_exponent))
    }
}

/// A finite Laurent polynomial in pi with rational coefficients.
///
/// No zero coefficients are stored; the zero polynomial has an empty map.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct PiLaurent {
    terms: BTreeMap<i64, Rational>,
}

impl PiLaurent {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::term(Rational::from_integer(1.into()), 0)
    }

    pub fn term(coeff: Rational, pi_exp: i64) -> Self {
        let mut t = BTreeMap::new();
        if !coeff.is_zero() {
            t.insert(pi_exp, coeff);
        }
        PiLaurent { terms: t }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff_of(&self, pi_exp: i64) -> Rational {
        self.terms.get(&pi_exp).cloned().unwrap_or_else(Rational::zero)
    }

    /// Exponents present, ascending.
    pub fn exponents(&self) -> Vec<i64> {
        self.terms.keys().copied().collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&i64, &Rational)> {
        self.terms.iter()
    }

    pub fn add_term(&mut self, coeff: &Rational, pi_exp: i64) {
        if coeff.is_zero() {
            return;
        }
        let slot = self.terms.entry(pi_exp).or_insert_with(Rational::zero);
        *slot += coeff;
        if slot.is_zero() {
            self.terms.remove(&pi_exp);
        }
    }

    pub fn scale(&self, r: &Rational) -> Self {
        if r.is_zero() {
            return Self::zero();
        }
        PiLaurent {
            terms: self.terms.iter().map(|(e, c)| (*e, c * r)).collect(),
        }
    }

    /// Multiply by pi^k.
    pub fn shift_exp(&self, k: i64) -> Self {
        PiLaurent {
            terms: self.terms.iter().map(|(e, c)| (e + k, c.clone())).collect(),
        }
    }
}

impl From<&PiScalar> for PiLaurent {
    fn from(s: &PiScalar) -> Self {
        PiLaurent::term(s.coeff().clone(), s.pi_exp())
    }
}

impl Add for &PiLaurent {
    type Output = PiLaurent;
    fn add(self, rhs: &PiLaurent) -> PiLaurent {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(c, *e);
        }
        out
    }
}

impl Sub for &PiLaurent {
    type Output = PiLaurent;
    fn sub(self, rhs: &PiLaurent) -> PiLaurent {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(&(-c.clone()), *e);
        }
        out
    }
}

impl Neg for &PiLaurent {
    type Output = PiLaurent;
    fn neg(self) -> PiLaurent {
        PiLaurent {
            terms: self.terms.iter().map(|(e, c)| (*e, -c.clone())).collect(),
        }
    }
}

impl Mul for &PiLaurent {
    type Output = PiLaurent;
    fn mul(self, rhs: &PiLaurent) -> PiLaurent {
        let mut out = PiLaurent::zero();
        for (e1, c1) in &self.terms {
            for (e2, c2) in &rhs.terms {
                out.add_term(&(c1 * c2), e1 + e2);
            }
        }
        out
    }
}

impl fmt::Display for PiLaurent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match e {
                0 => write!(f, "{}", format_ratio(c))?,
                _ => write!(f, "{}*pi^{}", format_ratio(c), e)?,
            }
        }
        Ok(())
    }
}

impl Serialize for PiLaurent {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let v: Vec<PiScalarWire> = self
            .terms
            .iter()
            .map(|(e, c)| PiScalarWire {
                coefficient: format_ratio(c),
                pi_exponent: *e,
            })
            .collect();
        v.serialize(s)
    }
}

impl<'de> Deserialize<'de> for PiLaurent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = Vec::<PiScalarWire>::deserialize(d)?;
        let mut out = PiLaurent::zero();
        for w in v {
            let coeff = parse_ratio(&w.coefficient).map_err(D::Error::custom)?;
            out.add_term(&coeff, w.pi_exponent);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{rat, rat_int};
    use proptest::prelude::*;

    #[test]
    fn canonical_zero() {
        let z = PiScalar::new(Rational::zero(), 7);
        assert_eq!(z.pi_exp(), 0);
        assert!(z.is_zero());
        assert_eq!(z, PiScalar::zero());
    }

    #[test]
    fn add_same_grading() {
        let a = PiScalar::new(rat(1, 2), 2);
        let b = PiScalar::new(rat(1, 3), 2);
        assert_eq!(&a + &b, PiScalar::new(rat(5, 6), 2));
        let z = &a - &a;
        assert!(z.is_zero());
        assert_eq!(z.pi_exp(), 0);
    }

    #[test]
    #[should_panic(expected = "across gradings")]
    fn add_mismatched_grading_panics() {
        let a = PiScalar::new(rat(1, 2), 2);
        let b = PiScalar::new(rat(1, 3), 4);
        let _ = &a + &b;
    }

    #[test]
    fn scalar_json_shape() {
        let a = PiScalar::new(rat(3, 64), 2);
        let j = serde_json::to_string(&a).unwrap();
        assert_eq!(j, r#"{"coefficient":"3/64","pi_exponent":2}"#);
        let back: PiScalar = serde_json::from_str(&j).unwrap();
        assert_eq!(back, a);
    }

    #[test]
    fn laurent_mul_adds_exponents() {
        let mut a = PiLaurent::zero();
        a.add_term(&rat_int(4), -1);
        let b = PiLaurent::term(rat(1, 2), 3);
        let p = &a * &b;
        assert_eq!(p, PiLaurent::term(rat_int(2), 2));
    }

    #[test]
    fn laurent_serialization_sorted() {
        let mut a = PiLaurent::zero();
        a.add_term(&rat_int(1), 2);
        a.add_term(&rat_int(4), -1);
        let j = serde_json::to_string(&a).unwrap();
        assert_eq!(
            j,
            r#"[{"coefficient":"4/1","pi_exponent":-1},{"coefficient":"1/1","pi_exponent":2}]"#
        );
    }

    fn arb_rat() -> impl Strategy<Value = Rational> {
        (-40i64..40, 1i64..20).prop_map(|(n, d)| rat(n, d))
    }

    fn arb_laurent() -> impl Strategy<Value = PiLaurent> {
        proptest::collection::vec((arb_rat(), -4i64..5), 0..5).prop_map(|ts| {
            let mut p = PiLaurent::zero();
            for (c, e) in ts {
                p.add_term(&c, e);
            }
            p
        })
    }

    proptest! {
        #[test]
        fn laurent_ring_distributes(a in arb_laurent(), b in arb_laurent(), c in arb_laurent()) {
            let lhs = &(&a + &b) * &c;
            let rhs = &(&a * &c) + &(&b * &c);
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn laurent_mul_commutes(a in arb_laurent(), b in arb_laurent()) {
            prop_assert_eq!(&a * &b, &b * &a);
        }

        #[test]
        fn laurent_no_stored_zeros(a in arb_laurent(), b in arb_laurent()) {
            let s = &a - &b;
            for (_, c) in s.iter() {
                prop_assert!(!c.is_zero());
            }
        }
    }
}
