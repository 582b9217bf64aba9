//! Memoized exact evaluation of super intersection numbers.
//!
//! Values are computed from the single base case `[tau_0]_1 = 1/8` by the
//! super Mirzakhani recursion on the largest index, with two independent
//! recursions kept as cross-checks (`verify_recursion_i`, `verify_recursion_ii`).
//! Every bracket is a rational multiple of `pi^{2g-2-2|d|}`, so the store
//! holds only the rational coefficient; the grading is reattached at the API
//! boundary.
//!
//! Subset sums over marked points are collapsed to multiset choices weighted
//! by binomial coefficients, which is what makes volumes at genus 30+
//! reachable: the labeled sum has `2^{n-1}` terms, the collapsed one has
//! `prod (mult_v + 1)`.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};

use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::bigfloat::BigFloat;
use crate::error::{Error, Result};
use crate::pi_scalar::PiScalar;
use crate::rational::{binomial, factorial, pow2, rat, Rational};
use crate::sums::secant_q_table;

/// Canonical index of a super intersection number: genus plus the multiset
/// of tau-indices, stored sorted descending.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BracketKey {
    genus: u32,
    parts: Vec<u16>,
}

impl BracketKey {
    /// Canonicalizes (sorts descending) and checks stability:
    /// `g >= 1` and `2g - 2 + n > 0`.
    pub fn new(genus: u32, mut parts: Vec<u16>) -> Result<Self> {
        parts.sort_unstable_by(|a, b| b.cmp(a));
        if genus < 1 || genus > u16::MAX as u32 || 2 * genus as i64 - 2 + parts.len() as i64 <= 0 {
            return Err(Error::UnstableKey {
                g: genus,
                n: parts.len(),
            });
        }
        Ok(BracketKey { genus, parts })
    }

    pub fn genus(&self) -> u32 {
        self.genus
    }

    pub fn parts(&self) -> &[u16] {
        &self.parts
    }

    pub fn n(&self) -> usize {
        self.parts.len()
    }

    pub fn dsum(&self) -> u32 {
        self.parts.iter().map(|&p| p as u32).sum()
    }

    /// pi-grading of the bracket value: 2g - 2 - 2|d|.
    pub fn pi_exp(&self) -> i64 {
        2 * self.genus as i64 - 2 - 2 * self.dsum() as i64
    }

    /// Dimension check: brackets with |d| > g - 1 are exactly zero.
    pub fn in_range(&self) -> bool {
        self.dsum() <= self.genus - 1
    }
}

impl std::fmt::Display for BracketKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.parts.iter().map(|p| p.to_string()).collect();
        write!(f, "[g={}; d=({})]", self.genus, parts.join(","))
    }
}

fn encode(genus: u32, parts: &[u16]) -> Vec<u16> {
    let mut v = Vec::with_capacity(parts.len() + 1);
    v.push(genus as u16);
    v.extend_from_slice(parts);
    v
}

pub(crate) fn decode(raw: &[u16]) -> (u32, &[u16]) {
    (raw[0] as u32, &raw[1..])
}

/// Statistics snapshot for a memo store.
#[derive(Clone, Copy, Debug, Default)]
pub struct MemoStats {
    pub entries: usize,
    pub hits: u64,
    pub misses: u64,
    pub max_depth: u64,
}

/// Map from canonical keys to exact rational coefficients.
///
/// Lookups are safe from any number of threads; insertion is serialized
/// through `&mut` and is idempotent: re-inserting a key with a different
/// value is an integrity failure and aborts the run.
#[derive(Default)]
pub struct MemoStore {
    map: HashMap<Vec<u16>, Rational>,
    hits: AtomicU64,
    misses: AtomicU64,
    max_depth: AtomicU64,
}

impl MemoStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn get(&self, genus: u32, parts: &[u16]) -> Option<&Rational> {
        let raw = encode(genus, parts);
        let v = self.map.get(raw.as_slice());
        if v.is_some() {
            self.hits.fetch_add(1, Ordering::Relaxed);
        } else {
            self.misses.fetch_add(1, Ordering::Relaxed);
        }
        v
    }

    pub fn contains(&self, genus: u32, parts: &[u16]) -> bool {
        self.map.contains_key(encode(genus, parts).as_slice())
    }

    pub fn insert(&mut self, genus: u32, parts: &[u16], value: Rational) -> Result<()> {
        let raw = encode(genus, parts);
        if let Some(existing) = self.map.get(raw.as_slice()) {
            if *existing != value {
                return Err(Error::MemoIntegrity {
                    key: format!("g={genus}, d={parts:?}"),
                    stored: existing.to_string(),
                    new: value.to_string(),
                });
            }
            return Ok(());
        }
        self.map.insert(raw, value);
        Ok(())
    }

    fn note_depth(&self, depth: u64) {
        self.max_depth.fetch_max(depth, Ordering::Relaxed);
    }

    pub fn stats(&self) -> MemoStats {
        MemoStats {
            entries: self.map.len(),
            hits: self.hits.load(Ordering::Relaxed),
            misses: self.misses.load(Ordering::Relaxed),
            max_depth: self.max_depth.load(Ordering::Relaxed),
        }
    }

    /// Entries as (genus, parts, coefficient), unsorted.
    pub fn entries(&self) -> impl Iterator<Item = (u32, &[u16], &Rational)> {
        self.map.iter().map(|(raw, v)| {
            let (g, parts) = decode(raw);
            (g, parts, v)
        })
    }
}

/// One term of the recursion, referencing one or two sub-brackets.
trait ValueSource {
    fn value(&mut self, genus: u32, parts: &[u16]) -> Rational;
}

/// The super Mirzakhani recursion on the largest part, producing
/// `sum_j A^j + B + C` through the supplied value source.
///
/// Assumes: `parts` sorted descending, nonempty, in range, not the base key.
fn combine_terms(genus: u32, parts: &[u16], secant: &[Rational], src: &mut dyn ValueSource) -> Rational {
    let n = parts.len();
    let dsum: u32 = parts.iter().map(|&p| p as u32).sum();
    let d0 = (genus - 1 - dsum) as usize;
    let d1 = parts[0] as usize;
    let mut acc = Rational::zero();

    // A^j: merge the largest part with one other part, grouped by value.
    let mut i = 1;
    while i < n {
        let v = parts[i];
        let mut run = 1usize;
        while i + run < n && parts[i + run] == v {
            run += 1;
        }
        // remove one occurrence of v (position i); order stays descending
        let mut rest: Vec<u16> = Vec::with_capacity(n - 1);
        rest.extend_from_slice(&parts[1..i]);
        rest.extend_from_slice(&parts[i + 1..]);
        let weight = rat(run as i64 * (2 * v as i64 + 1), 1);
        let mut a_sum = Rational::zero();
        for (l, ql) in secant.iter().enumerate().take(d0 + 1) {
            let merged = (l + d1 + v as usize) as u16;
            let mut key = Vec::with_capacity(n - 1);
            key.push(merged);
            key.extend_from_slice(&rest);
            a_sum += ql * src.value(genus, &key);
        }
        acc += weight * a_sum;
        i += run;
    }

    // B: split off a genus handle; the pair (k1, k2) ranges over ordered
    // splits of L + d1 - 1.
    if genus >= 2 {
        let rest = &parts[1..];
        let mut b_sum = Rational::zero();
        for (l, ql) in secant.iter().enumerate().take(d0 + 1) {
            let total = l + d1;
            if total == 0 {
                continue; // k1 + k2 = -1: empty
            }
            let mut inner = Rational::zero();
            let mut key: Vec<u16> = Vec::with_capacity(n + 1);
            for k1 in 0..total {
                let k2 = (total - 1 - k1) as u16;
                key.clear();
                key.push(k1 as u16);
                key.push(k2);
                key.extend_from_slice(rest);
                key.sort_unstable_by(|a, b| b.cmp(a));
                inner += src.value(genus - 1, &key);
            }
            b_sum += ql * inner;
        }
        acc += rat(2, 1) * b_sum;
    }

    // C: split into two components over ordered genus splits and multiset
    // subsets of the remaining parts, weighted by binomial multiplicities.
    if genus >= 2 {
        let groups = group_parts(&parts[1..]);
        let mut c_sum = Rational::zero();
        for_each_split(&groups, &mut |sub_i, sub_j, weight| {
            let s_i: u32 = sub_i.iter().map(|&p| p as u32).sum();
            let s_j: u32 = sub_j.iter().map(|&p| p as u32).sum();
            let g1_lo = s_i + 1;
            let g1_hi = genus.saturating_sub(s_j + 1);
            if g1_lo > g1_hi {
                return;
            }
            let mut split_sum = Rational::zero();
            let mut key1: Vec<u16> = Vec::new();
            let mut key2: Vec<u16> = Vec::new();
            for g1 in g1_lo..=g1_hi {
                let g2 = genus - g1;
                let k1_cap = (g1 - 1 - s_i) as usize;
                let k2_cap = (g2 - 1 - s_j) as usize;
                let mut pair_sum = Rational::zero();
                for (l, ql) in secant.iter().enumerate().take(d0 + 1) {
                    let total = l + d1;
                    if total == 0 {
                        continue;
                    }
                    let m2 = total - 1; // k1 + k2 = m2
                    let k1_lo = m2.saturating_sub(k2_cap);
                    let k1_hi = m2.min(k1_cap);
                    if k1_lo > k1_hi {
                        continue;
                    }
                    let mut inner = Rational::zero();
                    for k1 in k1_lo..=k1_hi {
                        let k2 = m2 - k1;
                        build_sorted_with(&mut key1, k1 as u16, sub_i);
                        build_sorted_with(&mut key2, k2 as u16, sub_j);
                        let v1 = src.value(g1, &key1);
                        if v1.is_zero() {
                            continue;
                        }
                        inner += v1 * src.value(g2, &key2);
                    }
                    pair_sum += ql * inner;
                }
                split_sum += pair_sum;
            }
            c_sum += weight * split_sum * rat(2, 1);
        });
        acc += c_sum;
    }

    acc
}

/// Insert `extra` into the descending-sorted slice `tail`, writing into `buf`.
fn build_sorted_with(buf: &mut Vec<u16>, extra: u16, tail: &[u16]) {
    buf.clear();
    let pos = tail.partition_point(|&t| t > extra);
    buf.extend_from_slice(&tail[..pos]);
    buf.push(extra);
    buf.extend_from_slice(&tail[pos..]);
}

/// (value, multiplicity) groups of a descending-sorted slice.
fn group_parts(parts: &[u16]) -> Vec<(u16, u32)> {
    let mut out: Vec<(u16, u32)> = Vec::new();
    for &p in parts {
        match out.last_mut() {
            Some((v, m)) if *v == p => *m += 1,
            _ => out.push((p, 1)),
        }
    }
    out
}

/// Enumerate ordered splits (I, J) of a multiset given as groups, calling
/// `f(I, J, weight)` with `weight = prod_v C(mult_v, taken_v)`.
fn for_each_split(groups: &[(u16, u32)], f: &mut dyn FnMut(&[u16], &[u16], Rational)) {
    let mut sub_i: Vec<u16> = Vec::new();
    let mut sub_j: Vec<u16> = Vec::new();
    fn rec(
        groups: &[(u16, u32)],
        idx: usize,
        sub_i: &mut Vec<u16>,
        sub_j: &mut Vec<u16>,
        weight: Rational,
        f: &mut dyn FnMut(&[u16], &[u16], Rational),
    ) {
        if idx == groups.len() {
            f(sub_i, sub_j, weight);
            return;
        }
        let (v, m) = groups[idx];
        for take in 0..=m {
            let li = sub_i.len();
            let lj = sub_j.len();
            for _ in 0..take {
                sub_i.push(v);
            }
            for _ in 0..(m - take) {
                sub_j.push(v);
            }
            let w = &weight * Rational::from_integer(binomial(m as u64, take as u64));
            rec(groups, idx + 1, sub_i, sub_j, w, f);
            sub_i.truncate(li);
            sub_j.truncate(lj);
        }
    }
    rec(groups, 0, &mut sub_i, &mut sub_j, Rational::one(), f);
}

struct RecursiveSource<'a> {
    store: &'a mut MemoStore,
    secant: &'a [Rational],
    depth: u64,
}

impl ValueSource for RecursiveSource<'_> {
    fn value(&mut self, genus: u32, parts: &[u16]) -> Rational {
        let dsum: u32 = parts.iter().map(|&p| p as u32).sum();
        if dsum > genus - 1 {
            return Rational::zero();
        }
        if genus == 1 && parts == [0] {
            let v = rat(1, 8);
            self.store.insert(1, parts, v.clone()).expect("base case");
            return v;
        }
        if let Some(v) = self.store.get(genus, parts) {
            return v.clone();
        }
        self.depth += 1;
        self.store.note_depth(self.depth);
        let v = combine_terms(genus, parts, self.secant, self);
        self.depth -= 1;
        self.store
            .insert(genus, parts, v.clone())
            .expect("fresh key cannot conflict");
        v
    }
}

/// Read-only source used by the level-synchronous parallel driver: every
/// dependency must already be materialized.
struct FrozenSource<'a> {
    store: &'a MemoStore,
}

impl ValueSource for FrozenSource<'_> {
    fn value(&mut self, genus: u32, parts: &[u16]) -> Rational {
        if parts.iter().map(|&p| p as u32).sum::<u32>() > genus - 1 {
            return Rational::zero();
        }
        if genus == 1 && parts == [0] {
            return rat(1, 8);
        }
        self.store
            .get(genus, parts)
            .unwrap_or_else(|| panic!("level scheduling missed key g={genus}, d={parts:?}"))
            .clone()
    }
}

fn compute_coeff(genus: u32, parts: &[u16], store: &mut MemoStore) -> Rational {
    let secant = secant_q_table(genus as usize);
    let mut src = RecursiveSource {
        store,
        secant: &secant,
        depth: 0,
    };
    src.value(genus, parts)
}

/// Exact super intersection number for a stable key with n >= 1.
pub fn bracket(key: &BracketKey, store: &mut MemoStore) -> Result<PiScalar> {
    if key.n() == 0 {
        return Err(Error::Invalid(
            "bracket with n = 0: use empty_bracket".into(),
        ));
    }
    if !key.in_range() {
        return Ok(PiScalar::zero());
    }
    let coeff = compute_coeff(key.genus, &key.parts, store);
    Ok(PiScalar::new(coeff, key.pi_exp()))
}

/// `[ ]_g` for g >= 2, always derived through the dilaton-type recursion
/// `(2g-2) [ ]_g = sum_L (-1)^L pi^{2L}/(2L+1)! [tau_L]_g`.
pub fn empty_bracket(g: u32, store: &mut MemoStore) -> Result<PiScalar> {
    if g < 2 {
        return Err(Error::EmptyBracketGenus(g));
    }
    if let Some(v) = store.get(g, &[]) {
        return Ok(PiScalar::new(v.clone(), 2 * g as i64 - 2));
    }
    let mut sum = Rational::zero();
    for l in 0..g as u64 {
        let sign = if l % 2 == 0 { 1 } else { -1 };
        let coeff = compute_coeff(g, &[l as u16], store);
        sum += rat(sign, 1) / Rational::from_integer(factorial(2 * l + 1)) * coeff;
    }
    let v = sum / rat(2 * g as i64 - 2, 1);
    store.insert(g, &[], v.clone())?;
    Ok(PiScalar::new(v, 2 * g as i64 - 2))
}

/// V^Theta_{g,n} = [tau_0^n]_g (empty bracket when n = 0).
pub fn volume(g: u32, n: usize, store: &mut MemoStore) -> Result<PiScalar> {
    if n == 0 {
        return empty_bracket(g, store);
    }
    let key = BracketKey::new(g, vec![0; n])?;
    bracket(&key, store)
}

/// Exact check of the genus-reducing recursion:
/// `[t0 t1 prod]_g = [t0^4 prod]_{g-1} + 6 sum [t0^2 prod_I]_{g1} [t0^2 prod_J]_{g2}`.
pub fn verify_recursion_i(g: u32, parts: &[u16], store: &mut MemoStore) -> Result<bool> {
    if g < 2 {
        return Err(Error::Invalid("recursion (I) needs g >= 2".into()));
    }
    let dsum: u32 = parts.iter().map(|&p| p as u32).sum();
    if dsum > g - 1 {
        return Err(Error::Invalid(format!(
            "recursion (I) precondition |d| <= g-1 violated: |d|={dsum}, g={g}"
        )));
    }
    let mut lhs_parts = parts.to_vec();
    lhs_parts.extend_from_slice(&[0, 1]);
    let lhs = bracket(&BracketKey::new(g, lhs_parts)?, store)?;

    let mut first_parts = parts.to_vec();
    first_parts.extend_from_slice(&[0, 0, 0, 0]);
    let first = bracket(&BracketKey::new(g - 1, first_parts)?, store)?;

    let groups = group_parts(&{
        let mut p = parts.to_vec();
        p.sort_unstable_by(|a, b| b.cmp(a));
        p
    });
    let mut pair_sum = Rational::zero();
    let mut err: Option<Error> = None;
    for_each_split(&groups, &mut |sub_i, sub_j, weight| {
        if err.is_some() {
            return;
        }
        for g1 in 1..g {
            let g2 = g - g1;
            let mut p1 = sub_i.to_vec();
            p1.extend_from_slice(&[0, 0]);
            let mut p2 = sub_j.to_vec();
            p2.extend_from_slice(&[0, 0]);
            let k1 = match BracketKey::new(g1, p1) {
                Ok(k) => k,
                Err(e) => {
                    err = Some(e);
                    return;
                }
            };
            let k2 = match BracketKey::new(g2, p2) {
                Ok(k) => k,
                Err(e) => {
                    err = Some(e);
                    return;
                }
            };
            let b1 = match bracket(&k1, store) {
                Ok(b) => b,
                Err(e) => {
                    err = Some(e);
                    return;
                }
            };
            if b1.is_zero() {
                continue;
            }
            let b2 = match bracket(&k2, store) {
                Ok(b) => b,
                Err(e) => {
                    err = Some(e);
                    return;
                }
            };
            pair_sum += &weight * b1.coeff() * b2.coeff();
        }
    });
    if let Some(e) = err {
        return Err(e);
    }

    // grading: every term lives in pi^{2g-4-2|d|}
    let rhs_coeff = first.coeff() + rat(6, 1) * pair_sum;
    Ok(*lhs.coeff() == rhs_coeff)
}

/// Exact check of `(2g-2+n) [prod]_g = sum_L (-1)^L pi^{2L}/(2L+1)! [tau_L prod]_g`.
pub fn verify_recursion_ii(g: u32, parts: &[u16], store: &mut MemoStore) -> Result<bool> {
    let dsum: u32 = parts.iter().map(|&p| p as u32).sum();
    if g < 1 || dsum > g - 1 {
        return Err(Error::Invalid(format!(
            "recursion (II) precondition violated: |d|={dsum}, g={g}"
        )));
    }
    let n = parts.len();
    let lhs = if n == 0 {
        empty_bracket(g, store)?
    } else {
        bracket(&BracketKey::new(g, parts.to_vec())?, store)?
    }
    .scale(&rat(2 * g as i64 - 2 + n as i64, 1));

    let mut sum = Rational::zero();
    for l in 0..g as u64 {
        let mut p = parts.to_vec();
        p.push(l as u16);
        let b = bracket(&BracketKey::new(g, p)?, store)?;
        let sign = if l % 2 == 0 { 1 } else { -1 };
        sum += rat(sign, 1) / Rational::from_integer(factorial(2 * l + 1)) * b.coeff();
    }
    Ok(*lhs.coeff() == sum)
}

/// Stanford-Witten normalization: 2^{1-g-n} V.
pub fn jt_normalize(g: u32, n: usize, v: &PiScalar) -> PiScalar {
    v.scale(&pow2(1 - g as i64 - n as i64))
}

/// Level-synchronous bulk evaluation.
///
/// Enumerates every key that the recursion can reach from the target
/// (genus, n) pairs, ordered by complexity 2g - 2 + n, and computes each
/// level in parallel against the already-complete lower levels. Results are
/// identical to the demand-driven path; this exists so large volume tables
/// use both cores and a warm store.
pub fn materialize(store: &mut MemoStore, targets: &[(u32, usize)], budget: Option<usize>) -> Result<()> {
    if targets.is_empty() {
        return Ok(());
    }
    for &(g, n) in targets {
        if g < 1 || 2 * g as i64 - 2 + n as i64 <= 0 {
            return Err(Error::UnstableKey { g, n });
        }
    }
    if let Some(cap) = budget {
        let count = count_candidate_keys(targets, cap);
        if count > cap {
            return Err(Error::BudgetExceeded {
                reached: count,
                budget: cap,
            });
        }
    }
    let cmax = targets
        .iter()
        .map(|&(g, n)| 2 * g as i64 - 2 + n.max(1) as i64)
        .max()
        .unwrap() as u32;
    let pbound = targets.iter().map(|&(g, n)| g + n.max(1) as u32).max().unwrap();
    let gmax = targets.iter().map(|&(g, _)| g).max().unwrap();
    let secant = secant_q_table(gmax as usize);

    for level in 1..=cmax {
        let mut keys: Vec<Vec<u16>> = Vec::new();
        for_each_key_of_level(level, pbound, &mut |g, parts| {
            if !store.contains(g, parts) {
                keys.push(encode(g, parts));
            }
        });
        if keys.is_empty() {
            continue;
        }
        let results: Vec<Rational> = keys
            .par_iter()
            .map(|raw| {
                let (g, parts) = decode(raw);
                if g == 1 && parts == [0] {
                    return rat(1, 8);
                }
                combine_terms(g, parts, &secant, &mut FrozenSource { store })
            })
            .collect();
        for (raw, v) in keys.iter().zip(results) {
            let (g, parts) = decode(raw);
            store.insert(g, parts, v)?;
        }
    }
    // the n = 0 targets additionally want their empty bracket
    for &(g, n) in targets {
        if n == 0 {
            empty_bracket(g, store)?;
        }
    }
    Ok(())
}

/// Count reachable candidate keys, stopping early once `cap` is passed.
/// This is the budget guard used by the CLI before a large run.
pub fn count_candidate_keys(targets: &[(u32, usize)], cap: usize) -> usize {
    let cmax = targets
        .iter()
        .map(|&(g, n)| 2 * g as i64 - 2 + n.max(1) as i64)
        .max()
        .unwrap_or(0) as u32;
    let pbound = targets
        .iter()
        .map(|&(g, n)| g + n.max(1) as u32)
        .max()
        .unwrap_or(0);
    let mut count = 0usize;
    for level in 1..=cmax {
        for_each_key_of_level(level, pbound, &mut |_, _| count += 1);
        if count > cap {
            return count;
        }
    }
    count
}

/// All stable in-range keys with n >= 1 and 2g - 2 + n <= cmax, in
/// deterministic order (complexity, then genus, then parts).
pub fn stable_keys_up_to(cmax: u32) -> Vec<BracketKey> {
    let mut out = Vec::new();
    for level in 1..=cmax {
        for_each_key_of_level(level, u32::MAX, &mut |g, parts| {
            out.push(BracketKey {
                genus: g,
                parts: parts.to_vec(),
            });
        });
    }
    out
}

/// All keys with 2g - 2 + n = level, n >= 1, |d| <= g - 1, g + n <= pbound,
/// parts descending.
fn for_each_key_of_level(level: u32, pbound: u32, f: &mut dyn FnMut(u32, &[u16])) {
    let mut g = 1u32;
    loop {
        let n = level as i64 + 2 - 2 * g as i64;
        if n < 1 {
            break;
        }
        let n = n as usize;
        if g + n as u32 <= pbound {
            let mut buf: Vec<u16> = Vec::with_capacity(n);
            for_each_partition(n, (g - 1) as usize, (g - 1) as usize, &mut buf, &mut |parts| {
                f(g, parts)
            });
        }
        g += 1;
    }
}

/// Descending vectors of `slots` parts, each <= max_part, sum <= budget.
fn for_each_partition(
    slots: usize,
    max_part: usize,
    budget: usize,
    buf: &mut Vec<u16>,
    f: &mut dyn FnMut(&[u16]),
) {
    if slots == 0 {
        f(buf);
        return;
    }
    let hi = max_part.min(budget);
    for p in (0..=hi).rev() {
        buf.push(p as u16);
        for_each_partition(slots - 1, p, budget - p, buf, f);
        buf.pop();
    }
}

/// The coefficients of V^Theta_{g,n}(L_1, ..., L_n) in plain (undoubled)
/// boundary lengths: the monomial `prod L_i^{2 d_i}` carries
/// `[tau_d]_g * 4^{-|d|} / prod (2 d_i + 1)!`, stored once per sorted
/// exponent vector.
#[derive(Clone, Debug)]
pub struct VolumePolynomial {
    genus: u32,
    n: usize,
    coeffs: Vec<(Vec<u16>, PiScalar)>,
}

impl VolumePolynomial {
    pub fn genus(&self) -> u32 {
        self.genus
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Sorted exponent vectors with their per-assignment coefficients.
    pub fn terms(&self) -> &[(Vec<u16>, PiScalar)] {
        &self.coeffs
    }

    pub fn coefficient(&self, exponents: &[u16]) -> PiScalar {
        let mut key = exponents.to_vec();
        key.sort_unstable_by(|a, b| b.cmp(a));
        self.coeffs
            .iter()
            .find(|(k, _)| *k == key)
            .map(|(_, c)| c.clone())
            .unwrap_or_else(PiScalar::zero)
    }

    pub fn constant_term(&self) -> PiScalar {
        self.coefficient(&vec![0; self.n])
    }

    /// Numeric evaluation at nonnegative boundary lengths.
    pub fn eval(&self, lengths: &[Rational], prec: u32) -> Result<BigFloat> {
        if lengths.len() != self.n {
            return Err(Error::LengthCount {
                expected: self.n,
                actual: lengths.len(),
            });
        }
        if lengths.iter().any(|l| l < &Rational::zero()) {
            return Err(Error::NegativeLength);
        }
        let work = prec + 16;
        // powers[i][k] = L_i^{2k}
        let dmax = (self.genus - 1) as usize;
        let powers: Vec<Vec<BigFloat>> = lengths
            .iter()
            .map(|l| {
                let lf = BigFloat::from_rational(l, work);
                let l2 = lf.mul(&lf, work);
                let mut row = vec![BigFloat::from_i64(1)];
                for _ in 0..dmax {
                    row.push(row.last().unwrap().mul(&l2, work));
                }
                row
            })
            .collect();
        let mut acc = BigFloat::zero();
        for (exps, coeff) in &self.coeffs {
            let mut mono_sum = BigFloat::zero();
            for_each_distinct_permutation(exps, &mut |perm| {
                let mut m = BigFloat::from_i64(1);
                for (i, &e) in perm.iter().enumerate() {
                    if e > 0 {
                        m = m.mul(&powers[i][e as usize], work);
                    }
                }
                mono_sum = mono_sum.add(&m).round(work);
            });
            acc = acc.add(&coeff.eval(work)?.mul(&mono_sum, work)).round(work);
        }
        Ok(acc.round(prec))
    }
}

/// Distinct permutations of a multiset, lexicographic over the given sort.
fn for_each_distinct_permutation(sorted_desc: &[u16], f: &mut dyn FnMut(&[u16])) {
    let mut v = sorted_desc.to_vec();
    v.sort_unstable();
    loop {
        f(&v);
        // next lexicographic permutation
        let n = v.len();
        let mut i = n.wrapping_sub(1);
        while i > 0 && v[i - 1] >= v[i] {
            i -= 1;
        }
        if i == 0 {
            return;
        }
        let mut j = n - 1;
        while v[j] <= v[i - 1] {
            j -= 1;
        }
        v.swap(i - 1, j);
        v[i..].reverse();
    }
}

/// Expand V^Theta_{g,n} as a polynomial in the boundary lengths.
pub fn volume_polynomial(g: u32, n: usize, store: &mut MemoStore) -> Result<VolumePolynomial> {
    if n == 0 {
        return Err(Error::Invalid("volume polynomial needs n >= 1".into()));
    }
    let _ = BracketKey::new(g, vec![0; n])?;
    let mut coeffs = Vec::new();
    let mut buf: Vec<u16> = Vec::new();
    let mut keys: Vec<Vec<u16>> = Vec::new();
    for_each_partition(n, (g - 1) as usize, (g - 1) as usize, &mut buf, &mut |parts| {
        keys.push(parts.to_vec())
    });
    for parts in keys {
        let key = BracketKey::new(g, parts.clone())?;
        let b = bracket(&key, store)?;
        if b.is_zero() {
            continue;
        }
        let dsum = key.dsum();
        let mut denom = Rational::one();
        for &d in &parts {
            denom *= Rational::from_integer(factorial(2 * d as u64 + 1));
        }
        let c = b.scale(&(pow2(-2 * dsum as i64) / denom));
        coeffs.push((parts, c));
    }
    Ok(VolumePolynomial { genus: g, n, coeffs })
}

/// Numeric V^Theta_{g,n}(L_1, ..., L_n).
pub fn evaluate_volume(
    g: u32,
    n: usize,
    lengths: &[Rational],
    prec: u32,
    store: &mut MemoStore,
) -> Result<BigFloat> {
    if prec < 64 {
        return Err(Error::PrecisionTooLow(prec));
    }
    if n == 0 {
        return empty_bracket(g, store)?.eval(prec);
    }
    volume_polynomial(g, n, store)?.eval(lengths, prec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat_int;
    use proptest::prelude::*;

    fn key(g: u32, parts: &[u16]) -> BracketKey {
        BracketKey::new(g, parts.to_vec()).unwrap()
    }

    #[test]
    fn canonicalization_and_stability() {
        let k = key(2, &[0, 3, 1]);
        assert_eq!(k.parts(), &[3, 1, 0]);
        assert_eq!(k.pi_exp(), 2 * 2 - 2 - 2 * 4);
        assert!(BracketKey::new(0, vec![0]).is_err());
        assert!(BracketKey::new(1, vec![]).is_err());
        assert!(BracketKey::new(2, vec![]).is_ok());
    }

    #[test]
    fn base_and_small_values() {
        let mut store = MemoStore::new();
        let b = |g: u32, parts: &[u16], store: &mut MemoStore| {
            bracket(&key(g, parts), store).unwrap()
        };
        assert_eq!(b(1, &[0], &mut store), PiScalar::new(rat(1, 8), 0));
        assert_eq!(b(1, &[0, 0], &mut store), PiScalar::new(rat(1, 8), 0));
        assert_eq!(b(1, &[0, 0, 0], &mut store), PiScalar::new(rat(1, 4), 0));
        assert_eq!(b(2, &[0], &mut store), PiScalar::new(rat(9, 64), 2));
        assert_eq!(b(2, &[1], &mut store), PiScalar::new(rat(9, 32), 0));
        assert_eq!(b(2, &[1, 0], &mut store), PiScalar::new(rat(27, 32), 0));
        assert_eq!(b(2, &[0, 0], &mut store), PiScalar::new(rat(9, 16), 2));
        // dimension overflow is exactly zero
        assert_eq!(b(2, &[1, 1, 1], &mut store), PiScalar::zero());
    }

    #[test]
    fn empty_bracket_end_to_end() {
        let mut store = MemoStore::new();
        assert_eq!(
            empty_bracket(2, &mut store).unwrap(),
            PiScalar::new(rat(3, 64), 2)
        );
        assert_eq!(
            empty_bracket(3, &mut store).unwrap(),
            PiScalar::new(rat(111, 512), 4)
        );
        let g4 = empty_bracket(4, &mut store).unwrap();
        assert_eq!(g4.pi_exp(), 6);
        assert!(g4.coeff() > &Rational::zero());
        assert!(empty_bracket(1, &mut store).is_err());
    }

    #[test]
    fn bracket_rejects_n_zero() {
        let mut store = MemoStore::new();
        assert!(bracket(&key(2, &[]), &mut store).is_err());
    }

    #[test]
    fn recursion_cross_checks_small() {
        let mut store = MemoStore::new();
        for g in 1..=4u32 {
            for n in 0..=2usize {
                if 2 * g as i64 - 2 + n as i64 <= 0 {
                    continue;
                }
                let mut buf = Vec::new();
                let mut all: Vec<Vec<u16>> = Vec::new();
                for_each_partition(n, (g - 1) as usize, (g - 1) as usize, &mut buf, &mut |p| {
                    all.push(p.to_vec())
                });
                for parts in all {
                    assert!(
                        verify_recursion_ii(g, &parts, &mut store).unwrap(),
                        "II failed at g={g}, d={parts:?}"
                    );
                    if g >= 2 {
                        assert!(
                            verify_recursion_i(g, &parts, &mut store).unwrap(),
                            "I failed at g={g}, d={parts:?}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn materialize_matches_recursive() {
        let mut bulk = MemoStore::new();
        materialize(&mut bulk, &[(6, 2)], None).unwrap();
        let mut demand = MemoStore::new();
        for (g, parts, v) in bulk.entries() {
            if parts.is_empty() {
                continue;
            }
            let b = bracket(&key(g, parts), &mut demand).unwrap();
            assert_eq!(b.coeff(), v, "mismatch at g={g} d={parts:?}");
        }
        assert!(bulk.len() >= demand.len());
    }

    #[test]
    fn budget_guard_trips() {
        let err = materialize(&mut MemoStore::new(), &[(12, 1)], Some(10)).unwrap_err();
        assert!(matches!(err, Error::BudgetExceeded { .. }));
    }

    #[test]
    fn volume_polynomial_structure() {
        let mut store = MemoStore::new();
        // g=1: only d=(0), constant 1/8
        let p = volume_polynomial(1, 1, &mut store).unwrap();
        assert_eq!(p.terms().len(), 1);
        assert_eq!(p.constant_term(), PiScalar::new(rat(1, 8), 0));
        // g=2, n=1: exactly d=(0) and d=(1); L^2 coefficient = [tau_1]_2 / (4 * 3!)
        let p = volume_polynomial(2, 1, &mut store).unwrap();
        assert_eq!(p.terms().len(), 2);
        assert_eq!(
            p.coefficient(&[1]),
            PiScalar::new(rat(9, 32) / rat(24, 1), 0)
        );
        // evaluating at L = 0 recovers the volume
        let v = p.eval(&[Rational::zero()], 128).unwrap();
        let exact = volume(2, 1, &mut store).unwrap().eval(128).unwrap();
        assert_eq!(v.to_f64(), exact.to_f64());
    }

    #[test]
    fn evaluate_volume_monotone_in_lengths() {
        let mut store = MemoStore::new();
        let mut prev = BigFloat::zero();
        for l in [0i64, 1, 2, 4] {
            let v = evaluate_volume(3, 1, &[rat_int(l)], 128, &mut store).unwrap();
            assert!(v > prev);
            prev = v;
        }
        assert!(evaluate_volume(3, 1, &[rat(-1, 2)], 128, &mut store).is_err());
        assert!(evaluate_volume(3, 1, &[], 128, &mut store).is_err());
    }

    #[test]
    fn jt_normalization() {
        assert_eq!(
            jt_normalize(1, 1, &PiScalar::new(rat(1, 8), 0)),
            PiScalar::new(rat(1, 16), 0)
        );
        assert_eq!(
            jt_normalize(2, 0, &PiScalar::new(rat(3, 64), 2)),
            PiScalar::new(rat(3, 128), 2)
        );
        assert!(jt_normalize(3, 2, &PiScalar::zero()).is_zero());
    }

    #[test]
    fn store_integrity_and_stats() {
        let mut store = MemoStore::new();
        store.insert(2, &[1], rat(9, 32)).unwrap();
        store.insert(2, &[1], rat(9, 32)).unwrap(); // idempotent
        let err = store.insert(2, &[1], rat(1, 3)).unwrap_err();
        assert!(matches!(err, Error::MemoIntegrity { .. }));
        let _ = store.get(2, &[1]);
        let _ = store.get(2, &[7]);
        let s = store.stats();
        assert_eq!(s.entries, 1);
        assert_eq!(s.hits, 1);
        assert_eq!(s.misses, 1);
    }

    proptest! {
        // symmetry: the bracket does not depend on the order of the parts
        #[test]
        fn bracket_symmetric_under_permutation(
            g in 2u32..5,
            mut parts in proptest::collection::vec(0u16..3, 1..4),
            seed in 0u64..1000,
        ) {
            let mut store = MemoStore::new();
            let a = bracket(&BracketKey::new(g, parts.clone()).unwrap(), &mut store).unwrap();
            // pseudo-shuffle
            let n = parts.len();
            for i in 0..n {
                let j = (seed as usize + i * 7) % n;
                parts.swap(i, j);
            }
            let b = bracket(&BracketKey::new(g, parts).unwrap(), &mut store).unwrap();
            prop_assert_eq!(a, b);
        }

        // grading: pi_exp = 2g - 2 - 2|d| for every computed bracket
        #[test]
        fn bracket_grading(g in 1u32..5, parts in proptest::collection::vec(0u16..3, 1..4)) {
            let mut store = MemoStore::new();
            let k = BracketKey::new(g, parts).unwrap();
            let b = bracket(&k, &mut store).unwrap();
            if !b.is_zero() {
                prop_assert_eq!(b.pi_exp(), k.pi_exp());
                prop_assert!(b.coeff() > &Rational::zero());
            }
        }
    }
}
