//! High-precision least-squares fitting of inverse-genus expansions and
//! Richardson extrapolation of the universal volume constant.

use serde::Serialize;

use crate::bigfloat::BigFloat;
use crate::bracket::MemoStore;
use crate::coeffs::volume_norm_d1;
use crate::error::{Error, Result};
use crate::ratios::{ratio_sequence, RatioKind};

/// Result of a least-squares fit of `c_0 + c_1 x + ... + c_s x^s`.
#[derive(Clone, Debug)]
pub struct FitResult {
    pub coefficients: Vec<BigFloat>,
    pub residual: BigFloat,
    /// Pivot-ratio estimate of the normal-equation conditioning.
    pub condition: BigFloat,
    pub g_range: (u32, u32),
}

#[derive(Serialize)]
struct FitResultWire {
    coefficients: Vec<f64>,
    residual: f64,
    condition: f64,
    g_range: [u32; 2],
}

impl FitResult {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(FitResultWire {
            coefficients: self.coefficients.iter().map(|c| c.to_f64()).collect(),
            residual: self.residual.to_f64(),
            condition: self.condition.to_f64(),
            g_range: [self.g_range.0, self.g_range.1],
        })
        .expect("serializable")
    }
}

/// Least-squares polynomial fit through (xs, ys): returns coefficients,
/// residual 2-norm, and a pivot-based condition estimate.
pub fn polyfit(
    xs: &[BigFloat],
    ys: &[BigFloat],
    order: usize,
    prec: u32,
) -> Result<(Vec<BigFloat>, BigFloat, BigFloat)> {
    let m = xs.len();
    let s = order + 1;
    if m < s {
        return Err(Error::FitUnderdetermined {
            points: m,
            order,
        });
    }
    assert_eq!(m, ys.len());
    let work = prec + 64;
    // design matrix rows: [1, x, ..., x^order]
    let rows: Vec<Vec<BigFloat>> = xs
        .iter()
        .map(|x| (0..s).map(|k| x.powi(k as i64, work)).collect())
        .collect();
    // normal equations A^T A c = A^T y
    let mut ata = vec![vec![BigFloat::zero(); s]; s];
    let mut aty = vec![BigFloat::zero(); s];
    for (row, y) in rows.iter().zip(ys) {
        for i in 0..s {
            for j in i..s {
                ata[i][j] = ata[i][j].add(&row[i].mul(&row[j], work)).round(work);
            }
            aty[i] = aty[i].add(&row[i].mul(y, work)).round(work);
        }
    }
    for i in 0..s {
        for j in 0..i {
            ata[i][j] = ata[j][i].clone();
        }
    }
    let (solution, condition) = solve_gauss(ata, aty, work)?;
    // residual
    let mut rss = BigFloat::zero();
    for (row, y) in rows.iter().zip(ys) {
        let mut pred = BigFloat::zero();
        for (c, r) in solution.iter().zip(row) {
            pred = pred.add(&c.mul(r, work)).round(work);
        }
        let e = y.sub(&pred);
        rss = rss.add(&e.mul(&e, work)).round(work);
    }
    Ok((solution, rss.sqrt(prec), condition))
}

fn solve_gauss(
    mut a: Vec<Vec<BigFloat>>,
    mut b: Vec<BigFloat>,
    prec: u32,
) -> Result<(Vec<BigFloat>, BigFloat)> {
    let n = b.len();
    let mut pivots: Vec<BigFloat> = Vec::with_capacity(n);
    for col in 0..n {
        let (best, _) = a
            .iter()
            .enumerate()
            .skip(col)
            .map(|(i, row)| (i, row[col].abs()))
            .max_by(|(_, x), (_, y)| x.partial_cmp(y).unwrap())
            .unwrap();
        a.swap(col, best);
        b.swap(col, best);
        let pivot = a[col][col].clone();
        if pivot.is_zero() {
            return Err(Error::FitSingular);
        }
        pivots.push(pivot.abs());
        for row in col + 1..n {
            let factor = a[row][col].div(&pivot, prec);
            if factor.is_zero() {
                continue;
            }
            for k in col..n {
                let t = factor.mul(&a[col][k], prec);
                a[row][k] = a[row][k].sub(&t).round(prec);
            }
            let t = factor.mul(&b[col], prec);
            b[row] = b[row].sub(&t).round(prec);
        }
    }
    let mut x = vec![BigFloat::zero(); n];
    for col in (0..n).rev() {
        let mut acc = b[col].clone();
        for k in col + 1..n {
            acc = acc.sub(&a[col][k].mul(&x[k], prec)).round(prec);
        }
        x[col] = acc.div(&a[col][col], prec);
    }
    let pmax = pivots.iter().cloned().fold(BigFloat::zero(), |m, p| if p > m { p } else { m });
    let pmin = pivots
        .iter()
        .cloned()
        .reduce(|m, p| if p < m { p } else { m })
        .unwrap();
    Ok((x, pmax.div(&pmin, prec)))
}

/// Fit `values_i = c_0 + c_1/g_i + ... + c_order/g_i^order` at high
/// precision over strictly increasing g values.
pub fn fit_inverse_g_expansion(
    values: &[BigFloat],
    g_values: &[u32],
    order: usize,
    prec: u32,
) -> Result<FitResult> {
    if values.len() != g_values.len() || values.len() < order + 1 {
        return Err(Error::FitUnderdetermined {
            points: values.len(),
            order,
        });
    }
    if g_values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Invalid("g values must be strictly increasing".into()));
    }
    let work = prec + 32;
    let xs: Vec<BigFloat> = g_values
        .iter()
        .map(|&g| BigFloat::from_i64(g as i64).recip(work))
        .collect();
    let (coefficients, residual, condition) = polyfit(&xs, values, order, prec)?;
    Ok(FitResult {
        coefficients,
        residual,
        condition,
        g_range: (g_values[0], *g_values.last().unwrap()),
    })
}

/// One Richardson elimination of the `1/g^p` term along the sequence
/// (indexed by consecutive g starting at g_first + offset).
fn richardson_step(values: &[BigFloat], g_first: u32, p: i64, prec: u32) -> Vec<BigFloat> {
    let mut out = Vec::with_capacity(values.len().saturating_sub(1));
    for (i, pair) in values.windows(2).enumerate() {
        let g = BigFloat::from_i64((g_first + 1 + i as u32) as i64).powi(p, prec);
        let gm = BigFloat::from_i64((g_first + i as u32) as i64).powi(p, prec);
        let num = g.mul(&pair[1], prec).sub(&gm.mul(&pair[0], prec));
        out.push(num.div(&g.sub(&gm), prec));
    }
    out
}

/// Diagnostics of the constant-extraction pipeline.
#[derive(Clone, Debug)]
pub struct ConstantEstimate {
    pub estimate: BigFloat,
    /// Last entry of each Richardson column, column 0 = pre-corrected input.
    pub column_tails: Vec<BigFloat>,
    /// |difference| between the final two entries of the last column.
    pub last_delta: BigFloat,
    /// Agreement (in significant decimal digits) between the last two
    /// successive estimates of the final column.
    pub agreement_digits: f64,
    /// Relative deviation from the conjectured target pi^{-9/2}; this is an
    /// informative diagnostic, the target is conjectural.
    pub deviation_from_conjectured: BigFloat,
    pub g_range: (u32, u32),
}

impl ConstantEstimate {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "estimate": self.estimate.to_f64(),
            "column_tails": self.column_tails.iter().map(|c| c.to_f64()).collect::<Vec<_>>(),
            "last_delta": self.last_delta.to_f64(),
            "agreement_digits": self.agreement_digits,
            "g_range": [self.g_range.0, self.g_range.1],
            "target": "pi^-9/2",
            "deviation": self.deviation_from_conjectured.to_f64(),
        })
    }
}

/// Richardson-extrapolated limit of `2^n sqrt(g) V_{g,n} / ((2g-3+n)! pi^{2g+n})`.
///
/// The exact order-1 coefficient of the normalized sequence is removed first
/// (dividing by `1 + d1/g`), so extrapolation starts at the 1/g^2 term and
/// eliminates powers 2, ..., order + 1.
pub fn estimate_constant_c(
    n: u32,
    g_max: u32,
    richardson_order: usize,
    store: &mut MemoStore,
    prec: u32,
) -> Result<ConstantEstimate> {
    let g_lo = 3.max((g_max / 2).min(g_max.saturating_sub(15)));
    let len = (g_max as i64 - g_lo as i64 + 1).max(0) as usize;
    if g_max < 12 || len < 2 * richardson_order + 4 {
        return Err(Error::RichardsonRange {
            g_max,
            order: richardson_order,
            n,
        });
    }
    let raw = ratio_sequence(&RatioKind::VolumeOverC, n, g_lo, g_max, store, prec)?;
    extrapolate_constant(&raw, n, g_lo, richardson_order, prec)
}

/// The extrapolation core, separated so synthetic sequences can be fed in.
pub fn extrapolate_constant(
    raw: &[BigFloat],
    n: u32,
    g_lo: u32,
    richardson_order: usize,
    prec: u32,
) -> Result<ConstantEstimate> {
    let work = prec + 32;
    let d1 = volume_norm_d1(n).eval(work)?;
    let mut col: Vec<BigFloat> = raw
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let g = BigFloat::from_i64((g_lo + i as u32) as i64);
            let corr = BigFloat::from_i64(1).add(&d1.div(&g, work));
            v.div(&corr, work)
        })
        .collect();
    let mut column_tails = vec![col.last().unwrap().clone()];
    let mut g_first = g_lo;
    for step in 0..richardson_order {
        col = richardson_step(&col, g_first, step as i64 + 2, work);
        g_first += 1;
        column_tails.push(col.last().unwrap().clone());
    }
    if col.len() < 2 {
        return Err(Error::RichardsonRange {
            g_max: g_lo,
            order: richardson_order,
            n,
        });
    }
    let estimate = col.last().unwrap().clone();
    let prev = col[col.len() - 2].clone();
    let last_delta = estimate.sub(&prev).abs();
    let agreement_digits = if last_delta.is_zero() {
        f64::INFINITY
    } else {
        let rel = last_delta.div(&estimate.abs(), work).to_f64();
        -rel.log10()
    };
    // conjectured target pi^{-9/2}
    let pi = BigFloat::pi(work);
    let target = pi.powi(9, work).sqrt(work).recip(work);
    let deviation = estimate.sub(&target).div(&target, work).abs();
    Ok(ConstantEstimate {
        estimate: estimate.round(prec),
        column_tails,
        last_delta,
        agreement_digits,
        deviation_from_conjectured: deviation.round(prec),
        g_range: (g_lo, g_lo + raw.len() as u32 - 1),
    })
}

/// Least-squares fit of a polynomial in n through (n, value) pairs; used to
/// extract leading coefficients of coefficient families across n.
pub fn fit_polynomial_in_n(
    ns: &[u32],
    values: &[BigFloat],
    degree: usize,
    prec: u32,
) -> Result<Vec<BigFloat>> {
    let xs: Vec<BigFloat> = ns.iter().map(|&n| BigFloat::from_i64(n as i64)).collect();
    let (coeffs, _, _) = polyfit(&xs, values, degree, prec)?;
    Ok(coeffs)
}

/// Numeric interpolation check: does the table (at n = 0, 1, ...) agree with
/// a polynomial of the expected degree within tol (relative to the largest
/// value)? Returns the fitted monomial coefficients and the verdict.
pub fn interpolate_in_n_numeric(
    values: &[BigFloat],
    expected_degree: usize,
    tol: f64,
    prec: u32,
) -> Result<(Vec<BigFloat>, bool)> {
    if values.len() < expected_degree + 2 {
        return Err(Error::Invalid(format!(
            "need at least {} points for degree {expected_degree}, got {}",
            expected_degree + 2,
            values.len()
        )));
    }
    let ns: Vec<u32> = (0..values.len() as u32).collect();
    let coeffs = fit_polynomial_in_n(&ns, values, expected_degree, prec)?;
    // check (degree+1)-th finite differences
    let mut row = values.to_vec();
    for _ in 0..=expected_degree {
        row = row.windows(2).map(|w| w[1].sub(&w[0])).collect();
    }
    let scale = values
        .iter()
        .map(|v| v.abs())
        .fold(BigFloat::zero(), |m, v| if v > m { v } else { m });
    let bound = scale.mul(&BigFloat::from_f64_approx(tol, prec), prec);
    let ok = row.iter().all(|d| d.abs() <= bound);
    Ok((coeffs, ok))
}

#[cfg(test)]
mod tests {
    use crate::rational::rat;
    use super::*;
    use crate::pi_scalar::PiScalar;

    fn bf(v: f64) -> BigFloat {
        BigFloat::from_f64_approx(v, 256)
    }

    #[test]
    fn exact_model_recovery() {
        // synthetic 1 + 3/g over g = 10..30, order 2
        let gs: Vec<u32> = (10..=30).collect();
        let vals: Vec<BigFloat> = gs
            .iter()
            .map(|&g| {
                BigFloat::from_i64(1).add(
                    &BigFloat::from_i64(3).div(&BigFloat::from_i64(g as i64), 300),
                )
            })
            .collect();
        let fit = fit_inverse_g_expansion(&vals, &gs, 2, 256).unwrap();
        assert!((fit.coefficients[0].to_f64() - 1.0).abs() < 1e-20);
        assert!((fit.coefficients[1].to_f64() - 3.0).abs() < 1e-20);
        assert!(fit.coefficients[2].to_f64().abs() < 1e-18);
        assert!(fit.residual.to_f64() < 1e-20);
    }

    #[test]
    fn constant_sequence_fits_flat() {
        let gs: Vec<u32> = (5..=20).collect();
        let vals: Vec<BigFloat> = gs.iter().map(|_| bf(2.5)).collect();
        let fit = fit_inverse_g_expansion(&vals, &gs, 3, 256).unwrap();
        assert!((fit.coefficients[0].to_f64() - 2.5).abs() < 1e-18);
        for c in &fit.coefficients[1..] {
            assert!(c.to_f64().abs() < 1e-15);
        }
    }

    #[test]
    fn underdetermined_and_unsorted_rejected() {
        let gs: Vec<u32> = vec![5, 6];
        let vals = vec![bf(1.0), bf(1.0)];
        assert!(matches!(
            fit_inverse_g_expansion(&vals, &gs, 3, 256),
            Err(Error::FitUnderdetermined { .. })
        ));
        let gs = vec![6, 5];
        assert!(fit_inverse_g_expansion(&vals, &gs, 1, 256).is_err());
    }

    #[test]
    fn synthetic_constant_extraction() {
        // C (1 + d1/g + 5/g^2): the pipeline must recover C to 1e-10
        let prec = 320;
        let c_true = PiScalar::new(rat(7, 3), -2).eval(prec).unwrap();
        let d1 = volume_norm_d1(1).eval(prec).unwrap();
        let g_lo = 12u32;
        let raw: Vec<BigFloat> = (g_lo..=40)
            .map(|g| {
                let g = BigFloat::from_i64(g as i64);
                let one = BigFloat::from_i64(1);
                let t = one
                    .add(&d1.div(&g, prec))
                    .add(&BigFloat::from_i64(5).div(&g.mul(&g, prec), prec));
                c_true.mul(&t, prec)
            })
            .collect();
        let est = extrapolate_constant(&raw, 1, g_lo, 2, prec).unwrap();
        let err = est.estimate.sub(&c_true).abs().div(&c_true, prec).to_f64();
        assert!(err < 1e-10, "relative error {err}");
        assert!(est.agreement_digits > 9.0);
    }

    #[test]
    fn range_guard() {
        let mut store = MemoStore::new();
        assert!(matches!(
            estimate_constant_c(0, 12, 5, &mut store, 128),
            Err(Error::RichardsonRange { .. })
        ));
    }

    #[test]
    fn numeric_interpolation_degree() {
        // quadratic table 1 + n + 2n^2
        let vals: Vec<BigFloat> = (0..6)
            .map(|n| bf(1.0 + n as f64 + 2.0 * (n * n) as f64))
            .collect();
        let (coeffs, ok) = interpolate_in_n_numeric(&vals, 2, 1e-12, 256).unwrap();
        assert!(ok);
        assert!((coeffs[2].to_f64() - 2.0).abs() < 1e-15);
        let (_, ok1) = interpolate_in_n_numeric(&vals, 1, 1e-12, 256).unwrap();
        assert!(!ok1);
    }
}
