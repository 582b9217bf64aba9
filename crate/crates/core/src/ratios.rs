//! The ratio sequences whose large-genus expansions the asymptotics modules
//! fit and extrapolate.

use crate::bigfloat::BigFloat;
use crate::bracket::{bracket, volume, BracketKey, MemoStore};
use crate::error::{Error, Result};
use crate::pi_scalar::PiLaurent;
use crate::rational::{factorial, pow2, rat, Rational};

/// Which ratio family to evaluate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RatioKind {
    /// pi/2 (2g-2+n) V_{g,n} / V_{g,n+1}
    AddPoint,
    /// 4 V_{g-1,n+2} / V_{g,n}
    GenusDrop,
    /// 4^{|d|} [tau_d tau_0^{n-|parts|}]_g / V_{g,n}; the given parts are
    /// zero-padded to n entries.
    BracketRatio(Vec<u16>),
    /// 2^n sqrt(g) V_{g,n} / ((2g-3+n)! pi^{2g+n})
    VolumeOverC,
}

/// The exact pi-stripped core of one ratio value: rational coefficient and
/// pi power (VolumeOverC additionally carries sqrt(g) at evaluation time).
fn ratio_exact(kind: &RatioKind, n: u32, g: u32, store: &mut MemoStore) -> Result<(Rational, i64)> {
    match kind {
        RatioKind::AddPoint => {
            let v1 = volume(g, n as usize, store)?;
            let v2 = volume(g, n as usize + 1, store)?;
            let c = v1.coeff() / v2.coeff() * rat(2 * g as i64 - 2 + n as i64, 2);
            Ok((c, 1))
        }
        RatioKind::GenusDrop => {
            let v1 = volume(g - 1, n as usize + 2, store)?;
            let v2 = volume(g, n as usize, store)?;
            Ok((v1.coeff() / v2.coeff() * rat(4, 1), -2))
        }
        RatioKind::BracketRatio(parts) => {
            if parts.len() > n as usize {
                return Err(Error::Invalid(format!(
                    "bracket ratio with {} parts but n = {n}",
                    parts.len()
                )));
            }
            let mut padded = parts.clone();
            padded.resize(n as usize, 0);
            let key = BracketKey::new(g, padded)?;
            let dsum = key.dsum();
            let b = bracket(&key, store)?;
            let v = volume(g, n as usize, store)?;
            Ok((
                b.coeff() / v.coeff() * pow2(2 * dsum as i64),
                -2 * dsum as i64,
            ))
        }
        RatioKind::VolumeOverC => {
            let v = volume(g, n as usize, store)?;
            let c = v.coeff() * pow2(n as i64)
                / Rational::from_integer(factorial((2 * g as i64 - 3 + n as i64) as u64));
            Ok((c, -(n as i64) - 2))
        }
    }
}

/// Numeric ratio values for g in [g_from, g_to], at the given precision.
pub fn ratio_sequence(
    kind: &RatioKind,
    n: u32,
    g_from: u32,
    g_to: u32,
    store: &mut MemoStore,
    prec: u32,
) -> Result<Vec<BigFloat>> {
    if prec < 64 {
        return Err(Error::PrecisionTooLow(prec));
    }
    if g_from < 2 || g_to < g_from {
        return Err(Error::Invalid(format!(
            "ratio sequence needs 2 <= g_from <= g_to, got [{g_from}, {g_to}]"
        )));
    }
    let mut out = Vec::with_capacity((g_to - g_from + 1) as usize);
    for g in g_from..=g_to {
        let (c, pi_exp) = ratio_exact(kind, n, g, store)?;
        let mut v = PiLaurent::term(c, pi_exp).eval(prec)?;
        if matches!(kind, RatioKind::VolumeOverC) {
            v = v.mul(&BigFloat::from_i64(g as i64).sqrt(prec), prec);
        }
        out.push(v);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bracket_ratio_of_zeros_is_one() {
        let mut store = MemoStore::new();
        let seq = ratio_sequence(
            &RatioKind::BracketRatio(vec![0, 0]),
            2,
            2,
            5,
            &mut store,
            128,
        )
        .unwrap();
        for v in seq {
            assert!((v.to_f64() - 1.0).abs() < 1e-30);
        }
    }

    #[test]
    fn add_point_in_band_at_g2() {
        let mut store = MemoStore::new();
        let seq = ratio_sequence(&RatioKind::AddPoint, 0, 2, 2, &mut store, 192).unwrap();
        let v = seq[0].to_f64();
        // pi/2 * 2 * V_{2,0}/V_{2,1} = pi * (3/64)/(9/64) = pi/3
        assert!((v - std::f64::consts::PI / 3.0).abs() < 1e-12);
        let b0 = std::f64::consts::PI / 2.0 - std::f64::consts::PI.powi(3) / 48.0;
        let b1 = (std::f64::consts::PI / 2.0).sinh();
        assert!(v > b0 && v < b1);
    }

    #[test]
    fn genus_drop_approaches_one() {
        let mut store = MemoStore::new();
        let seq = ratio_sequence(&RatioKind::GenusDrop, 2, 4, 10, &mut store, 192).unwrap();
        let last = seq.last().unwrap().to_f64();
        let first = seq[0].to_f64();
        assert!((last - 1.0).abs() < (first - 1.0).abs());
        assert!((last - 1.0).abs() < 0.12); // O(1/g) at g = 10
    }

    #[test]
    fn volume_over_c_positive_and_stabilizing() {
        let mut store = MemoStore::new();
        let seq = ratio_sequence(&RatioKind::VolumeOverC, 1, 3, 10, &mut store, 192).unwrap();
        for v in &seq {
            assert!(!v.is_negative() && !v.is_zero());
        }
        let d1 = (seq[6].to_f64() - seq[5].to_f64()).abs();
        let d0 = (seq[1].to_f64() - seq[0].to_f64()).abs();
        assert!(d1 < d0);
    }

    #[test]
    fn rejects_bad_ranges() {
        let mut store = MemoStore::new();
        assert!(ratio_sequence(&RatioKind::AddPoint, 0, 1, 5, &mut store, 128).is_err());
        assert!(ratio_sequence(&RatioKind::AddPoint, 0, 5, 4, &mut store, 128).is_err());
        assert!(ratio_sequence(&RatioKind::AddPoint, 0, 2, 3, &mut store, 32).is_err());
    }
}
