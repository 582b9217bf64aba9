//! Executable inequality suites at desk scale.
//!
//! Proved inequalities are asserted (a failure means an engine defect);
//! bounds whose constants the source material leaves unspecified are fitted
//! and reported instead. Mixed-grading comparisons run at 256-bit precision
//! with an interval margin of 2^-200; equal-grading comparisons reduce to
//! exact rational ordering.

use std::collections::BTreeMap;

use num_traits::Zero as _;
use serde::Serialize;

use crate::bigfloat::BigFloat;
use crate::bracket::{
    bracket, empty_bracket, evaluate_volume, stable_keys_up_to, volume, BracketKey, MemoStore,
};
use crate::error::{Error, Result};
use crate::pi_scalar::PiLaurent;
use crate::rational::{pow2, rat_int, Rational};
use crate::ratios::{ratio_sequence, RatioKind};

pub const CHECK_PRECISION: u32 = 256;

fn eps() -> BigFloat {
    // 2^-200 interval safety margin
    BigFloat::from_f64_approx(2f64.powi(-200), 64)
}

/// One tested parameter tuple.
#[derive(Clone, Debug, Serialize)]
pub struct CheckInstance {
    pub params: String,
    pub passed: bool,
    /// Slack of the tightest inequality at this tuple (negative = violated).
    pub margin: f64,
}

/// Outcome of one check over a parameter range. Every tested tuple is
/// listed; nothing is collapsed.
#[derive(Clone, Debug, Serialize)]
pub struct CheckReport {
    pub name: String,
    pub parameter_range: String,
    pub instances: Vec<CheckInstance>,
    pub passed: bool,
    pub worst_margin: f64,
    pub fitted_constants: BTreeMap<String, f64>,
}

impl CheckReport {
    fn new(name: &str, range: String) -> Self {
        CheckReport {
            name: name.to_string(),
            parameter_range: range,
            instances: Vec::new(),
            passed: true,
            worst_margin: f64::INFINITY,
            fitted_constants: BTreeMap::new(),
        }
    }

    fn push(&mut self, params: String, passed: bool, margin: f64) {
        self.passed &= passed;
        if margin < self.worst_margin {
            self.worst_margin = margin;
        }
        self.instances.push(CheckInstance {
            params,
            passed,
            margin,
        });
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("serializable")
    }

    /// Plain-text table, one row per instance.
    pub fn text_table(&self) -> String {
        let mut out = format!(
            "check: {}\nrange: {}\nstatus: {}\nworst margin: {:.3e}\n",
            self.name,
            self.parameter_range,
            if self.passed { "PASS" } else { "FAIL" },
            self.worst_margin
        );
        for (k, v) in &self.fitted_constants {
            out.push_str(&format!("fitted {k} = {v:.6e}\n"));
        }
        for inst in &self.instances {
            out.push_str(&format!(
                "  {}  {}  margin={:.3e}\n",
                if inst.passed { "ok  " } else { "FAIL" },
                inst.params,
                inst.margin
            ));
        }
        out
    }
}

fn le_margin(lhs: &BigFloat, rhs: &BigFloat) -> (bool, f64) {
    let diff = rhs.sub(lhs);
    (diff >= eps().neg(), diff.to_f64())
}

fn lt_strict(lhs: &BigFloat, rhs: &BigFloat) -> (bool, f64) {
    let diff = rhs.sub(lhs);
    (diff > eps(), diff.to_f64())
}

fn bracket_value(g: u32, parts: Vec<u16>, store: &mut MemoStore) -> Result<PiLaurent> {
    let key = BracketKey::new(g, parts)?;
    Ok(PiLaurent::from(&bracket(&key, store)?))
}

/// The monotone chain `4^{|d|+1} [tau_{d1+1} ...] <= 4^{|d|} [tau_d] <= V_{g,n}`
/// over every stable key with 2g - 2 + n <= 2 g_max - 2, raising the largest
/// part. Positivity of in-range brackets is asserted exactly on rationals.
pub fn check_monotone_bounds(g_max: u32, store: &mut MemoStore) -> Result<CheckReport> {
    let cmax = 2 * g_max - 2;
    let mut report = CheckReport::new(
        "monotone-bounds",
        format!("stable keys with 2g-2+n <= {cmax}, |d| <= g-1"),
    );
    let prec = CHECK_PRECISION;
    for key in stable_keys_up_to(cmax) {
        if !key.in_range() {
            continue;
        }
        let (g, n, dsum) = (key.genus(), key.n(), key.dsum());
        let mid_val = bracket(&key, store)?;
        if mid_val.coeff() <= &Rational::zero() {
            report.push(format!("{key} positivity"), false, f64::NEG_INFINITY);
            continue;
        }
        let mut raised = key.parts().to_vec();
        raised[0] += 1;
        let left = bracket_value(g, raised, store)?
            .scale(&pow2(2 * dsum as i64 + 2))
            .eval(prec)?;
        let mid = PiLaurent::from(&mid_val)
            .scale(&pow2(2 * dsum as i64))
            .eval(prec)?;
        let right = volume(g, n, store)?.eval(prec)?;
        let (ok1, m1) = le_margin(&left, &mid);
        let (ok2, m2) = le_margin(&mid, &right);
        report.push(format!("{key}"), ok1 && ok2, m1.min(m2));
    }
    Ok(report)
}

/// Strict band `pi/2 - pi^3/48 < pi/2 (2g-2+n) V_{g,n}/V_{g,n+1} < sinh(pi/2)`.
pub fn check_ratio_band(g_max: u32, n_max: u32, store: &mut MemoStore) -> Result<CheckReport> {
    let prec = CHECK_PRECISION;
    let mut report = CheckReport::new("ratio-band", format!("2 <= g <= {g_max}, 0 <= n <= {n_max}"));
    let pi = BigFloat::pi(prec);
    let half_pi = pi.div(&BigFloat::from_i64(2), prec);
    let b0 = half_pi.sub(&pi.powi(3, prec).div(&BigFloat::from_i64(48), prec));
    let b1 = half_pi.sinh(prec);
    for n in 0..=n_max {
        let seq = ratio_sequence(&RatioKind::AddPoint, n, 2, g_max, store, prec)?;
        for (i, v) in seq.iter().enumerate() {
            let g = 2 + i as u32;
            let (ok_lo, m_lo) = lt_strict(&b0, v);
            let (ok_hi, m_hi) = lt_strict(v, &b1);
            report.push(format!("(g={g}, n={n})"), ok_lo && ok_hi, m_lo.min(m_hi));
        }
    }
    Ok(report)
}

/// Genus-drop comparison `4 V_{g-1,n+4} <= V_{g,n+2}`.
pub fn check_genus_drop(g_max: u32, n_max: u32, store: &mut MemoStore) -> Result<CheckReport> {
    let prec = CHECK_PRECISION;
    let mut report = CheckReport::new("genus-drop", format!("2 <= g <= {g_max}, 0 <= n <= {n_max}"));
    for n in 0..=n_max {
        let seq = ratio_sequence(&RatioKind::GenusDrop, n + 2, 2, g_max, store, prec)?;
        for (i, v) in seq.iter().enumerate() {
            let g = 2 + i as u32;
            let (ok, m) = le_margin(v, &BigFloat::from_i64(1));
            report.push(format!("(g={g}, n={n})"), ok, m);
        }
    }
    Ok(report)
}

/// Two-sided sinh comparison for the length dependence of volumes.
///
/// Upper bound `V_{g,n}(2L)/V_{g,n} <= prod sinh(L_i/2)/(L_i/2)` is asserted
/// unconditionally; the lower bound is asserted with the supplied constant
/// and the minimal empirical constant is reported.
pub fn check_sinh_sandwich(
    g: u32,
    n: usize,
    l_grid: &[Rational],
    c_lower: f64,
    store: &mut MemoStore,
) -> Result<CheckReport> {
    let prec = CHECK_PRECISION;
    let mut report = CheckReport::new(
        "sinh-sandwich",
        format!("g={g}, n={n}, grid size {}", l_grid.len()),
    );
    let vol = volume(g, n, store)?.eval(prec)?;
    let c_low = BigFloat::from_f64_approx(c_lower, prec);
    let mut c_min = 0f64;
    let mut stack = vec![Vec::<Rational>::new()];
    while let Some(prefix) = stack.pop() {
        if prefix.len() < n {
            for l in l_grid.iter().rev() {
                let mut next = prefix.clone();
                next.push(l.clone());
                stack.push(next);
            }
            continue;
        }
        let lengths = prefix;
        let doubled: Vec<Rational> = lengths.iter().map(|l| l * rat_int(2)).collect();
        let value = evaluate_volume(g, n, &doubled, prec, store)?;
        let ratio = value.div(&vol, prec);
        let mut product = BigFloat::from_i64(1);
        let mut sumsq = BigFloat::zero();
        for l in &lengths {
            let lf = BigFloat::from_rational(l, prec);
            sumsq = sumsq.add(&lf.mul(&lf, prec));
            if l.is_zero() {
                continue;
            }
            let half = lf.div(&BigFloat::from_i64(2), prec);
            product = product.mul(&half.sinh(prec).div(&half, prec), prec);
        }
        let (ok_up, m_up) = le_margin(&ratio, &product);
        // lower: ratio >= product (1 - c_lower sum L_i^2 / g)
        let corr = BigFloat::from_i64(1).sub(
            &c_low
                .mul(&sumsq, prec)
                .div(&BigFloat::from_i64(g as i64), prec),
        );
        let lower = product.mul(&corr, prec);
        let (ok_lo, m_lo) = le_margin(&lower, &ratio);
        if !sumsq.is_zero() {
            // minimal c making the lower bound hold at this tuple
            let defect = BigFloat::from_i64(1).sub(&ratio.div(&product, prec));
            let c_here = defect
                .mul(&BigFloat::from_i64(g as i64), prec)
                .div(&sumsq, prec)
                .to_f64();
            c_min = c_min.max(c_here);
        }
        let label: Vec<String> = lengths.iter().map(|l| format!("{l}")).collect();
        report.push(
            format!("L=({})", label.join(",")),
            ok_up && ok_lo,
            m_up.min(m_lo),
        );
    }
    report.fitted_constants.insert("c_min".into(), c_min);
    Ok(report)
}

/// Two-sided comparison for the one-step difference of single-index
/// brackets:
///
/// ```text
/// (n-1) [t_k t_0^{n-2}] <= [t_k t_0^{n-1}] - 4 [t_{k+1} t_0^{n-1}]
///                       <= (n+7)/(4^{k-1} pi) V_{g,n-1} + (8k+2)/(4^{k-1} pi) V_{g-1,n+1}
/// ```
pub fn check_prop61(g_max: u32, store: &mut MemoStore) -> Result<CheckReport> {
    if g_max < 3 {
        return Err(Error::Invalid("prop61 sweep needs g_max >= 3".into()));
    }
    let prec = CHECK_PRECISION;
    let mut report = CheckReport::new("difference-bounds", format!("2 <= g <= {g_max}, n <= 5, k <= g-2"));
    for g in 2..=g_max {
        for n in 1..=5usize {
            for k in 0..=(g - 2) as u16 {
                let mut p_mid = vec![k];
                p_mid.extend(std::iter::repeat(0).take(n - 1));
                let mut p_mid_up = vec![k + 1];
                p_mid_up.extend(std::iter::repeat(0).take(n - 1));
                let mid_pl = &bracket_value(g, p_mid, store)?
                    - &bracket_value(g, p_mid_up, store)?.scale(&rat_int(4));
                let mid = mid_pl.eval(prec)?;

                let lhs = if n >= 2 {
                    let mut p = vec![k];
                    p.extend(std::iter::repeat(0).take(n - 2));
                    bracket_value(g, p, store)?
                        .scale(&rat_int(n as i64 - 1))
                        .eval(prec)?
                } else {
                    BigFloat::zero()
                };

                let vn1 = if n >= 2 {
                    volume(g, n - 1, store)?
                } else {
                    empty_bracket(g, store)?
                };
                let vg1 = volume(g - 1, n + 1, store)?;
                let scale1 = rat_int(n as i64 + 7) * pow2(2 - 2 * k as i64);
                let scale2 = rat_int(8 * k as i64 + 2) * pow2(2 - 2 * k as i64);
                let rhs = (&PiLaurent::from(&vn1).scale(&scale1).shift_exp(-1)
                    + &PiLaurent::from(&vg1).scale(&scale2).shift_exp(-1))
                    .eval(prec)?;

                let (ok1, m1) = le_margin(&lhs, &mid);
                let (ok2, m2) = le_margin(&mid, &rhs);
                report.push(format!("(g={g}, n={n}, k={k})"), ok1 && ok2, m1.min(m2));
            }
        }
    }
    Ok(report)
}

/// Locate the onset of monotonicity of the two volume ratio sequences and
/// assert it persists to g_max. Reports the onset indices.
pub fn check_eventual_monotone(n: u32, g_max: u32, store: &mut MemoStore) -> Result<CheckReport> {
    if g_max < 5 {
        return Err(Error::Invalid(
            "eventual-monotonicity scan needs g_max >= 5 (sequence of length >= 3)".into(),
        ));
    }
    let prec = CHECK_PRECISION;
    let mut report = CheckReport::new("eventual-monotone", format!("n={n}, 2 <= g <= {g_max}"));
    let drop_seq = ratio_sequence(&RatioKind::GenusDrop, n, 2, g_max, store, prec)?;
    let add_seq = ratio_sequence(&RatioKind::AddPoint, n, 2, g_max, store, prec)?;

    // onset of increase for the genus-drop ratio
    let mut g0 = 2u32;
    for (i, w) in drop_seq.windows(2).enumerate() {
        if w[1] <= w[0] {
            g0 = 2 + i as u32 + 1;
        }
    }
    // onset of decrease for the add-point ratio
    let mut g1 = 2u32;
    for (i, w) in add_seq.windows(2).enumerate() {
        if w[1] >= w[0] {
            g1 = 2 + i as u32 + 1;
        }
    }
    report
        .fitted_constants
        .insert("g0_genus_drop_increasing_from".into(), g0 as f64);
    report
        .fitted_constants
        .insert("g1_add_point_decreasing_from".into(), g1 as f64);

    // non-vacuity: at least two monotone steps must remain
    let ok0 = g0 + 2 <= g_max;
    let ok1 = g1 + 2 <= g_max;
    report.push(format!("genus-drop monotone tail from g={g0}"), ok0, (g_max - g0.min(g_max)) as f64);
    report.push(format!("add-point monotone tail from g={g1}"), ok1, (g_max - g1.min(g_max)) as f64);
    for (i, w) in drop_seq.windows(2).enumerate() {
        let g = 2 + i as u32;
        if g + 1 >= g0.max(3) {
            let (ok, m) = lt_strict(&w[0], &w[1]);
            report.push(format!("genus-drop rising at g={}", g + 1), ok, m);
        }
    }
    for (i, w) in add_seq.windows(2).enumerate() {
        let g = 2 + i as u32;
        if g + 1 >= g1.max(3) {
            let (ok, m) = lt_strict(&w[1], &w[0]);
            report.push(format!("add-point falling at g={}", g + 1), ok, m);
        }
    }
    Ok(report)
}

/// Normalized volumes along a growing-n path: asserts the deviation from the
/// extrapolated constant is controlled by K n^2/g with fitted K.
pub fn check_growing_n(
    pairs: &[(u32, u32)],
    c_est: &BigFloat,
    store: &mut MemoStore,
) -> Result<CheckReport> {
    let prec = CHECK_PRECISION;
    let mut report = CheckReport::new("growing-n", format!("{} (g, n) pairs", pairs.len()));
    let mut k_fit = 0f64;
    let mut rows = Vec::new();
    for &(g, n) in pairs {
        if 4 * n * n > g {
            return Err(Error::Invalid(format!(
                "growing-n precondition n <= sqrt(g)/2 violated at (g={g}, n={n})"
            )));
        }
        let u = ratio_sequence(&RatioKind::VolumeOverC, n, g, g, store, prec)?
            .pop()
            .unwrap();
        let dev = u.div(c_est, prec).sub(&BigFloat::from_i64(1)).abs().to_f64();
        rows.push((g, n, u.clone(), dev));
        if n >= 1 {
            k_fit = k_fit.max(dev * g as f64 / (n * n) as f64);
        }
    }
    report.fitted_constants.insert("K".into(), k_fit);
    for (g, n, u, dev) in rows {
        let positive = !u.is_negative() && !u.is_zero();
        let bound = if n >= 1 {
            k_fit * (n * n) as f64 / g as f64 + 1e-12
        } else {
            0.05 // n = 0 reduces to plain convergence of the constant
        };
        report.push(
            format!("(g={g}, n={n}) dev={dev:.3e}"),
            positive && dev <= bound,
            bound - dev,
        );
    }
    Ok(report)
}

/// Fitted form of the bracket-defect bound
/// `0 <= 1 - 4^{|d|}[tau_d]/V_{g,n} <= c0 |d|^2 / g`: the left inequality is
/// asserted, the minimal c0 per genus is reported.
pub fn check_bracket_defect_fit(n: usize, g_max: u32, store: &mut MemoStore) -> Result<CheckReport> {
    let prec = CHECK_PRECISION;
    let mut report = CheckReport::new(
        "bracket-defect-fit",
        format!("n={n}, 5 <= g <= {g_max}, all |d| <= g-1"),
    );
    let mut c0_global = 0f64;
    for g in 5..=g_max {
        let vol = volume(g, n, store)?.eval(prec)?;
        let mut c0_g = 0f64;
        let mut worst = f64::INFINITY;
        let mut all_ok = true;
        let mut count = 0usize;
        for key in stable_keys_up_to(2 * g - 2 + n as u32) {
            if key.genus() != g || key.n() != n || !key.in_range() || key.dsum() == 0 {
                continue;
            }
            count += 1;
            let dsum = key.dsum();
            let num = bracket_value(g, key.parts().to_vec(), store)?
                .scale(&pow2(2 * dsum as i64))
                .eval(prec)?;
            let ratio = num.div(&vol, prec);
            let defect = BigFloat::from_i64(1).sub(&ratio);
            let (ok, m) = le_margin(&BigFloat::zero(), &defect);
            all_ok &= ok;
            worst = worst.min(m);
            c0_g = c0_g.max(defect.to_f64() * g as f64 / (dsum * dsum) as f64);
        }
        c0_global = c0_global.max(c0_g);
        report
            .fitted_constants
            .insert(format!("c0[g={g}]"), c0_g);
        report.push(format!("(g={g}) {count} keys, defect >= 0"), all_ok, worst);
    }
    report.fitted_constants.insert("c0".into(), c0_global);
    Ok(report)
}

/// Monitor for split-product sums: reports
/// `g^s * sum_{g1+g2=g, 2gi+ni >= s} V_{g1,n1} V_{g2,n2} / V_{g,n1+n2}`
/// for s in {1, 2}; no assertion beyond finiteness, the implied constant is
/// unspecified.
pub fn check_split_product_monitor(
    n1: usize,
    n2: usize,
    g_max: u32,
    store: &mut MemoStore,
) -> Result<CheckReport> {
    let prec = CHECK_PRECISION;
    let mut report = CheckReport::new(
        "split-product-monitor",
        format!("n1={n1}, n2={n2}, 4 <= g <= {g_max}, s in {{1,2}}"),
    );
    for s in 1u32..=2 {
        let mut max_ratio = 0f64;
        for g in 4..=g_max {
            let mut total = PiLaurent::zero();
            for g1 in 1..g {
                let g2 = g - g1;
                if 2 * g1 + n1 as u32 != 0 && 2 * g1 as i64 + n1 as i64 >= s as i64
                    && 2 * g2 as i64 + n2 as i64 >= s as i64
                    && 2 * g1 as i64 - 2 + n1 as i64 > 0
                    && 2 * g2 as i64 - 2 + n2 as i64 > 0
                {
                    let v1 = volume(g1, n1, store)?;
                    let v2 = volume(g2, n2, store)?;
                    total.add_term(
                        &(v1.coeff() * v2.coeff()),
                        v1.pi_exp() + v2.pi_exp(),
                    );
                }
            }
            if total.is_zero() {
                continue;
            }
            let denom = volume(g, n1 + n2, store)?.eval(prec)?;
            let num = total.eval(prec)?;
            let val = num
                .div(&denom, prec)
                .mul(&BigFloat::from_i64(g as i64).powi(s as i64, prec), prec)
                .to_f64();
            max_ratio = max_ratio.max(val);
            report.push(format!("(s={s}, g={g}) ratio={val:.4}"), val.is_finite(), 0.0);
        }
        report
            .fitted_constants
            .insert(format!("sup_ratio[s={s}]"), max_ratio);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    #[test]
    fn monotone_bounds_small() {
        let mut store = MemoStore::new();
        let r = check_monotone_bounds(3, &mut store).unwrap();
        assert!(r.passed, "{}", r.text_table());
        assert!(!r.instances.is_empty());
        assert!(r.worst_margin >= 0.0);
    }

    #[test]
    fn ratio_band_small() {
        let mut store = MemoStore::new();
        let r = check_ratio_band(5, 3, &mut store).unwrap();
        assert!(r.passed, "{}", r.text_table());
    }

    #[test]
    fn genus_drop_small() {
        let mut store = MemoStore::new();
        let r = check_genus_drop(6, 2, &mut store).unwrap();
        assert!(r.passed, "{}", r.text_table());
    }

    #[test]
    fn sandwich_at_zero_is_equality() {
        let mut store = MemoStore::new();
        let r = check_sinh_sandwich(3, 1, &[Rational::zero()], 4.0, &mut store).unwrap();
        assert!(r.passed);
        // both sides 1: margin ~ 0
        assert!(r.worst_margin.abs() < 1e-40);
    }

    #[test]
    fn sandwich_small_grid() {
        let mut store = MemoStore::new();
        let grid = vec![Rational::zero(), rat(1, 2), rat_int(2)];
        let r = check_sinh_sandwich(4, 1, &grid, 6.0, &mut store).unwrap();
        assert!(r.passed, "{}", r.text_table());
        assert!(r.fitted_constants["c_min"] >= 0.0);
        assert!(r.fitted_constants["c_min"] <= 6.0);
    }

    #[test]
    fn prop61_small() {
        let mut store = MemoStore::new();
        let r = check_prop61(4, &mut store).unwrap();
        assert!(r.passed, "{}", r.text_table());
    }

    #[test]
    fn eventual_monotone_small() {
        let mut store = MemoStore::new();
        let r = check_eventual_monotone(1, 9, &mut store).unwrap();
        assert!(r.passed, "{}", r.text_table());
        assert!(check_eventual_monotone(1, 4, &mut store).is_err());
    }

    #[test]
    fn growing_n_precondition() {
        let mut store = MemoStore::new();
        let c = BigFloat::from_f64_approx(0.0058, 128);
        assert!(check_growing_n(&[(4, 4)], &c, &mut store).is_err());
    }

    #[test]
    fn defect_fit_small() {
        let mut store = MemoStore::new();
        let r = check_bracket_defect_fit(1, 6, &mut store).unwrap();
        assert!(r.passed, "{}", r.text_table());
        assert!(r.fitted_constants["c0"] > 0.0);
        assert!(r.fitted_constants["c0"].is_finite());
    }

    #[test]
    fn split_monitor_reports() {
        let mut store = MemoStore::new();
        let r = check_split_product_monitor(1, 1, 8, &mut store).unwrap();
        assert!(r.passed);
        assert!(r.fitted_constants["sup_ratio[s=1]"].is_finite());
    }

    #[test]
    fn report_serialization() {
        let mut r = CheckReport::new("demo", "none".into());
        r.push("a".into(), true, 1.0);
        r.push("b".into(), false, -0.5);
        assert!(!r.passed);
        let j = r.to_json();
        assert_eq!(j["name"], "demo");
        assert_eq!(j["instances"].as_array().unwrap().len(), 2);
        let t = r.text_table();
        assert!(t.contains("FAIL"));
    }
}
