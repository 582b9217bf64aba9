//! Bernoulli numbers, even zeta values, secant coefficients, and the two
//! families of exact weighted sums that drive the asymptotic expansions.
//!
//! The secant-weighted sums `A(j) = sum_i i^j (a_i/4^i - a_{i-1}/4^{i-1})`
//! are evaluated exactly through an operator calculus on trigonometric
//! polynomials: with `D = (x/2) d/dx` and `F = d/dx (x/2)`,
//!
//! ```text
//! pi * A(j) = Int_0^inf e^{-x/2}/cosh^2(x/2) * [D^j(cosh(x/2)-1) + F^j(sinh(x/2))] dx
//! ```
//!
//! and each monomial integral reduces to even zeta values, `ln 2`, and odd
//! zeta values. The `ln 2` and odd-zeta coefficients must cancel identically;
//! the evaluation asserts that cancellation and aborts if it ever fails
//! instead of silently leaving the rational domain.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::pi_scalar::{PiLaurent, PiScalar};
use crate::rational::{binomial, factorial, pow2, rat, rat_int, Rational};

/// Bernoulli number B_m with the convention B_1 = -1/2.
pub fn bernoulli(m: u64) -> Rational {
    bernoulli_row(m)[m as usize].clone()
}

fn bernoulli_row(m: u64) -> Vec<Rational> {
    let mut b: Vec<Rational> = Vec::with_capacity(m as usize + 1);
    b.push(Rational::one());
    for k in 1..=m {
        // sum_{j=0}^{k} C(k+1, j) B_j = 0
        let mut s = Rational::zero();
        for (j, bj) in b.iter().enumerate() {
            s += Rational::from_integer(binomial(k + 1, j as u64)) * bj;
        }
        b.push(-s / Rational::from_integer((k + 1).into()));
    }
    b
}

/// zeta(2k) as an exact rational multiple of pi^{2k} (Euler's formula).
pub fn zeta_even(k: u64) -> Result<PiScalar> {
    if k == 0 {
        return Err(Error::Invalid("zeta_even(0) is a pole".into()));
    }
    // zeta(2k) = (-1)^{k+1} B_{2k} (2 pi)^{2k} / (2 (2k)!)
    let sign = if k % 2 == 1 { 1 } else { -1 };
    let coeff = bernoulli(2 * k) * pow2(2 * k as i64) * rat(sign, 2)
        / Rational::from_integer(factorial(2 * k));
    Ok(PiScalar::new(coeff, 2 * k as i64))
}

/// Rational coefficients q_n with 1/cos(pi x) = sum q_n pi^{2n} x^{2n},
/// i.e. q_n = E_{2n}/(2n)! for the secant numbers E.
pub fn secant_q_table(n_max: usize) -> Vec<Rational> {
    let mut q = Vec::with_capacity(n_max + 1);
    q.push(Rational::one());
    for n in 1..=n_max {
        // cos * sec = 1: sum_{k<=n} q_k * (-1)^{n-k}/(2(n-k))! = 0 for n >= 1
        let mut s = Rational::zero();
        for (k, qk) in q.iter().enumerate() {
            let j = (n - k) as u64;
            let sign = if j % 2 == 0 { 1 } else { -1 };
            s += qk * rat(sign, 1) / Rational::from_integer(factorial(2 * j));
        }
        q.push(-s);
    }
    q
}

/// Secant coefficient a_n of 1/cos(pi x), with a_{-1} = 0.
pub fn secant_coefficient(n: i64) -> Result<PiScalar> {
    if n < -1 {
        return Err(Error::Invalid(format!("secant coefficient index {n} < -1")));
    }
    if n == -1 {
        return Ok(PiScalar::zero());
    }
    let q = secant_q_table(n as usize);
    Ok(PiScalar::new(q[n as usize].clone(), 2 * n))
}

/// a_n/4^n - a_{n-1}/4^{n-1} as an exact Laurent polynomial in pi.
pub fn secant_delta(n: u64) -> PiLaurent {
    let q = secant_q_table(n as usize);
    let mut out = PiLaurent::term(&q[n as usize] / pow2(2 * n as i64), 2 * n as i64);
    if n >= 1 {
        let prev = &q[n as usize - 1] / pow2(2 * (n as i64 - 1));
        out.add_term(&(-prev), 2 * (n as i64 - 1));
    }
    out
}

/// Linear combination of 1, ln 2, even zetas (already folded into a pi
/// polynomial) and odd zetas. The value of a monomial integral.
#[derive(Clone, Debug, Default)]
struct ZetaCombo {
    poly: PiLaurent,
    ln2: Rational,
    odd_zeta: BTreeMap<u64, Rational>,
}

impl ZetaCombo {
    fn add_scaled(&mut self, other: &ZetaCombo, s: &Rational) {
        self.poly = &self.poly + &other.poly.scale(s);
        self.ln2 += &other.ln2 * s;
        for (k, c) in &other.odd_zeta {
            let slot = self.odd_zeta.entry(*k).or_insert_with(Rational::zero);
            *slot += c * s;
            if slot.is_zero() {
                self.odd_zeta.remove(k);
            }
        }
    }

    fn add_zeta(&mut self, s: u64, c: Rational) {
        if c.is_zero() {
            return;
        }
        if s % 2 == 0 {
            let z = zeta_even(s / 2).expect("even zeta");
            self.poly.add_term(&(&c * z.coeff()), z.pi_exp());
        } else {
            let slot = self.odd_zeta.entry(s).or_insert_with(Rational::zero);
            *slot += c;
            if slot.is_zero() {
                self.odd_zeta.remove(&s);
            }
        }
    }
}

/// Int_0^inf e^{-x/2}/cosh^2(x/2) * cosh(x/2) * (x/2)^l dx
fn integral_cosh(l: u64) -> ZetaCombo {
    let mut z = ZetaCombo::default();
    if l == 0 {
        z.ln2 = rat_int(2);
    } else {
        // l! (2^{1-l} - 2^{1-2l}) zeta(l+1)
        let c = Rational::from_integer(factorial(l)) * (pow2(1 - l as i64) - pow2(1 - 2 * l as i64));
        z.add_zeta(l + 1, c);
    }
    z
}

/// Int_0^inf e^{-x/2}/cosh^2(x/2) * sinh(x/2) * (x/2)^l dx
fn integral_sinh(l: u64) -> ZetaCombo {
    let mut z = ZetaCombo::default();
    match l {
        0 => {
            z.poly.add_term(&rat_int(2), 0);
            z.ln2 = rat_int(-2);
        }
        1 => {
            z.ln2 = rat_int(2);
            let z2 = zeta_even(1).unwrap();
            z.poly.add_term(&(z2.coeff() * rat(-1, 2)), z2.pi_exp());
        }
        _ => {
            let lf = Rational::from_integer(factorial(l));
            z.add_zeta(l, &lf * (pow2(2 - l as i64) - pow2(3 - 2 * l as i64)));
            z.add_zeta(l + 1, &lf * (pow2(1 - 2 * l as i64) - pow2(1 - l as i64)));
        }
    }
    z
}

/// Int_0^inf e^{-x/2}/cosh^2(x/2) dx = pi - 2.
fn integral_const() -> PiLaurent {
    let mut p = PiLaurent::term(rat_int(-2), 0);
    p.add_term(&rat_int(1), 1);
    p
}

/// A finite sum `c + sum_l (x/2)^l (m_l cosh(x/2) + n_l sinh(x/2))`, closed
/// under the operators D = (x/2) d/dx and F = d/dx (x/2) = D + 1/2, each of
/// which raises the degree in x/2 by at most one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrigPoly {
    /// terms[l] = (m_l, n_l)
    terms: Vec<(Rational, Rational)>,
    constant: Rational,
}

impl TrigPoly {
    pub fn cosh_minus_one() -> Self {
        TrigPoly {
            terms: vec![(Rational::one(), Rational::zero())],
            constant: -Rational::one(),
        }
    }

    pub fn sinh() -> Self {
        TrigPoly {
            terms: vec![(Rational::zero(), Rational::one())],
            constant: Rational::zero(),
        }
    }

    pub fn degree(&self) -> usize {
        self.terms.len().saturating_sub(1)
    }

    /// D = (x/2) d/dx. Annihilates the constant.
    pub fn apply_d(&self) -> Self {
        let mut terms = vec![(Rational::zero(), Rational::zero()); self.terms.len() + 1];
        for (l, (m, n)) in self.terms.iter().enumerate() {
            // (x/2)^l part: l/2 * same; derivative of cosh/sinh swaps with 1/2 at l+1
            let half_l = rat(l as i64, 2);
            terms[l].0 += m * &half_l;
            terms[l].1 += n * &half_l;
            terms[l + 1].0 += n * rat(1, 2);
            terms[l + 1].1 += m * rat(1, 2);
        }
        TrigPoly {
            terms,
            constant: Rational::zero(),
        }
        .trimmed()
    }

    /// F = d/dx (x/2) = D + 1/2.
    pub fn apply_f(&self) -> Self {
        let mut out = self.apply_d();
        while out.terms.len() < self.terms.len() {
            out.terms.push((Rational::zero(), Rational::zero()));
        }
        for (l, (m, n)) in self.terms.iter().enumerate() {
            out.terms[l].0 += m * rat(1, 2);
            out.terms[l].1 += n * rat(1, 2);
        }
        out.constant = &self.constant * rat(1, 2);
        out.trimmed()
    }

    fn trimmed(mut self) -> Self {
        while self
            .terms
            .last()
            .is_some_and(|(m, n)| m.is_zero() && n.is_zero())
        {
            self.terms.pop();
        }
        self
    }

    /// Integrate against the weight e^{-x/2}/cosh^2(x/2) on (0, inf).
    fn weighted_integral(&self) -> ZetaCombo {
        let mut acc = ZetaCombo::default();
        for (l, (m, n)) in self.terms.iter().enumerate() {
            acc.add_scaled(&integral_cosh(l as u64), m);
            acc.add_scaled(&integral_sinh(l as u64), n);
        }
        acc.poly = &acc.poly + &integral_const().scale(&self.constant);
        acc
    }
}

/// A(j) = sum_{i>=0} i^j (a_i/4^i - a_{i-1}/4^{i-1}), exactly.
///
/// The result is pi^{-1} times a polynomial in pi^2 of degree floor(j/2).
/// Panics if the ln 2 or odd-zeta cancellation of the operator calculus
/// fails, since that would mean the value has left Q[pi].
pub fn secant_weighted_sum(j: u64) -> PiLaurent {
    let mut cosh_part = TrigPoly::cosh_minus_one();
    let mut sinh_part = TrigPoly::sinh();
    for _ in 0..j {
        cosh_part = cosh_part.apply_d();
        sinh_part = sinh_part.apply_f();
    }
    let mut total = cosh_part.weighted_integral();
    total.add_scaled(&sinh_part.weighted_integral(), &Rational::one());

    assert!(
        total.ln2.is_zero(),
        "ln2 cancellation failed for A({j}): coefficient {}",
        total.ln2
    );
    assert!(
        total.odd_zeta.is_empty(),
        "odd zeta cancellation failed for A({j}): {:?}",
        total.odd_zeta
    );

    let mut out = total.poly.shift_exp(-1);
    if j == 0 {
        // the i = 0 term contributes a_0/4^0 - a_{-1} = 1
        out = &out + &PiLaurent::one();
    }
    out
}

/// sum_{L>=0} (-1)^L (pi/2)^{2L+1} L^k / (2L+1)!, exactly.
///
/// Evaluates x * D^k (sin x / x) at x = pi/2 through a (P sin + Q cos)
/// representation with Laurent-polynomial P, Q; the cosine part vanishes
/// exactly at pi/2.
pub fn sin_weighted_sum(k: u64) -> PiLaurent {
    let mut p = SinCosPoly::sinc();
    for _ in 0..k {
        p = p.apply_d();
    }
    p.eval_sin_part_at_half_pi()
}

/// P(x) sin x + Q(x) cos x with Laurent polynomial coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct SinCosPoly {
    p: BTreeMap<i64, Rational>,
    q: BTreeMap<i64, Rational>,
}

fn laurent_derivative(m: &BTreeMap<i64, Rational>) -> BTreeMap<i64, Rational> {
    m.iter()
        .filter(|(e, _)| **e != 0)
        .map(|(e, c)| (e - 1, c * rat_int(*e)))
        .collect()
}

fn laurent_shift_scale(m: &BTreeMap<i64, Rational>, k: i64, s: Rational) -> BTreeMap<i64, Rational> {
    m.iter().map(|(e, c)| (e + k, c * &s)).collect()
}

fn laurent_add_into(dst: &mut BTreeMap<i64, Rational>, src: BTreeMap<i64, Rational>) {
    for (e, c) in src {
        let slot = dst.entry(e).or_insert_with(Rational::zero);
        *slot += c;
        if slot.is_zero() {
            dst.remove(&e);
        }
    }
}

impl SinCosPoly {
    /// sin x / x
    pub fn sinc() -> Self {
        let mut p = BTreeMap::new();
        p.insert(-1, Rational::one());
        SinCosPoly {
            p,
            q: BTreeMap::new(),
        }
    }

    /// D = (x/2) d/dx: P -> (x/2)(P' - Q), Q -> (x/2)(P + Q').
    pub fn apply_d(&self) -> Self {
        let half = rat(1, 2);
        let mut p_new = laurent_shift_scale(&laurent_derivative(&self.p), 1, half.clone());
        laurent_add_into(&mut p_new, laurent_shift_scale(&self.q, 1, -half.clone()));
        let mut q_new = laurent_shift_scale(&laurent_derivative(&self.q), 1, half.clone());
        laurent_add_into(&mut q_new, laurent_shift_scale(&self.p, 1, half));
        SinCosPoly { p: p_new, q: q_new }
    }

    /// [x * (P sin + Q cos)] at x = pi/2, where the cosine term drops.
    pub fn eval_sin_part_at_half_pi(&self) -> PiLaurent {
        let mut out = PiLaurent::zero();
        for (e, c) in &self.p {
            // x^{e+1} at pi/2: (1/2)^{e+1} pi^{e+1}
            out.add_term(&(c * pow2(-(e + 1))), e + 1);
        }
        out
    }
}

/// Evaluate a_n numerically from its rational coefficient table; used by the
/// monotonicity checks. Returns q_n * (pi_num)^{2n} over the given floats.
pub fn secant_numeric_sequence(n_max: usize, prec: u32) -> Vec<crate::bigfloat::BigFloat> {
    use crate::bigfloat::BigFloat;
    let q = secant_q_table(n_max);
    let pi2 = BigFloat::pi(prec).mul(&BigFloat::pi(prec), prec);
    let mut out = Vec::with_capacity(n_max + 1);
    let mut pi_pow = BigFloat::from_i64(1);
    for qn in q.iter() {
        out.push(BigFloat::from_rational(qn, prec).mul(&pi_pow, prec));
        pi_pow = pi_pow.mul(&pi2, prec);
    }
    out
}
