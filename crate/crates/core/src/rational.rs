//! Exact rational arithmetic and the small combinatorial helpers used
//! throughout the recursions.
//!
//! `Rational` is arbitrary precision and always stored in lowest terms with a
//! positive denominator (guaranteed by `num-rational`). All arithmetic in the
//! engine is exact; nothing here ever rounds.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

pub type Rational = num_rational::BigRational;

/// Shorthand for small rational constants.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn rat_int(num: i64) -> Rational {
    Rational::from_integer(BigInt::from(num))
}

/// n! as a big integer.
pub fn factorial(n: u64) -> BigInt {
    let mut acc = BigInt::one();
    for k in 2..=n {
        acc *= k;
    }
    acc
}

/// Binomial coefficient C(n, k).
pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for i in 0..k {
        num *= n - i;
        den *= i + 1;
    }
    num / den
}

/// 2^k as a rational, k possibly negative.
pub fn pow2(k: i64) -> Rational {
    let mag = BigInt::one() << k.unsigned_abs();
    if k >= 0 {
        Rational::from_integer(mag)
    } else {
        Rational::new(BigInt::one(), mag)
    }
}

/// Serialize as `num/den` (always with the slash, `0/1` for zero).
pub fn format_ratio(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Parse a reduced `num/den` string. Rejects non-reduced fractions and
/// non-positive denominators so that cache files are canonical.
pub fn parse_ratio(s: &str) -> Result<Rational> {
    let (num, den) = s
        .split_once('/')
        .ok_or_else(|| Error::Invalid(format!("expected num/den, got {s:?}")))?;
    let num: BigInt = num
        .parse()
        .map_err(|_| Error::Invalid(format!("bad numerator {num:?}")))?;
    let den: BigInt = den
        .parse()
        .map_err(|_| Error::Invalid(format!("bad denominator {den:?}")))?;
    if den.sign() != num_bigint::Sign::Plus {
        return Err(Error::Invalid(format!("denominator must be positive in {s:?}")));
    }
    let r = Rational::new(num.clone(), den.clone());
    if r.numer() != &num || r.denom() != &den {
        return Err(Error::Invalid(format!("fraction {s:?} is not reduced")));
    }
    Ok(r)
}

/// Parse a decimal string such as `2`, `0.5` or `-1.25` into an exact rational.
pub fn parse_decimal(s: &str) -> Result<Rational> {
    let t = s.trim();
    if t.is_empty() {
        return Err(Error::Invalid("empty number".into()));
    }
    if let Some((int, frac)) = t.split_once('.') {
        let digits = format!("{int}{frac}");
        let num: BigInt = digits
            .parse()
            .map_err(|_| Error::Invalid(format!("bad decimal {s:?}")))?;
        let den = BigInt::from(10u32).pow(frac.len() as u32);
        Ok(Rational::new(num, den))
    } else {
        let num: BigInt = t
            .parse()
            .map_err(|_| Error::Invalid(format!("bad integer {s:?}")))?;
        Ok(Rational::from_integer(num))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factorial_small() {
        assert_eq!(factorial(0), BigInt::from(1));
        assert_eq!(factorial(5), BigInt::from(120));
        assert_eq!(factorial(10), BigInt::from(3628800));
    }

    #[test]
    fn binomial_values() {
        assert_eq!(binomial(5, 2), BigInt::from(10));
        assert_eq!(binomial(10, 0), BigInt::from(1));
        assert_eq!(binomial(4, 7), BigInt::from(0));
        assert_eq!(binomial(52, 5), BigInt::from(2598960u64));
    }

    #[test]
    fn ratio_round_trip() {
        let r = rat(-22, 8);
        let s = format_ratio(&r);
        assert_eq!(s, "-11/4");
        assert_eq!(parse_ratio(&s).unwrap(), r);
    }

    #[test]
    fn parse_rejects_unreduced() {
        assert!(parse_ratio("2/4").is_err());
        assert!(parse_ratio("1/-2").is_err());
        assert!(parse_ratio("3").is_err());
    }

    #[test]
    fn decimal_parsing() {
        assert_eq!(parse_decimal("0.5").unwrap(), rat(1, 2));
        assert_eq!(parse_decimal("2").unwrap(), rat_int(2));
        assert_eq!(parse_decimal("-1.25").unwrap(), rat(-5, 4));
        assert!(parse_decimal("x").is_err());
    }

    #[test]
    fn pow2_signs() {
        assert_eq!(pow2(3), rat_int(8));
        assert_eq!(pow2(-2), rat(1, 4));
        assert_eq!(pow2(0), rat_int(1));
    }
}
