//! Real and p-adic solubility, local densities, and prime profiles.
//!
//! The central question: does `a_1 x_1^k + ... + a_s x_s^k = 0` have a
//! nonzero solution in every completion of the rationals? Over the reals
//! this is a sign condition. Over the p-adics it reduces to a finite check:
//! with `l(p) = max_j v_p(a_j)` and `nu(p) = v_p(k)`, a primitive solution
//! modulo `p^gamma` for `gamma = l(p) + nu(p) + 2` lifts to a p-adic
//! solution, and no lower level can certify insolubility. [`padic_soluble`]
//! decides that level exactly, with a witness.
//!
//! Congruence solution counts `M(p^l)` feed the local density
//! `chi_p ~ p^{l(1-s)} M(p^l)`, kept as an exact rational so identities
//! against the q-expansion in [`crate::singular`] can be tested exactly.

use crate::arith::{self, is_prime, mod_pow, p_adic_valuation, primes_up_to};
use crate::forms::DiagonalForm;
use crate::{Error, Result};
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::One;
use std::collections::BTreeMap;

/// Default node budget for the p-adic depth-first search.
pub const DEFAULT_NODE_BUDGET: u64 = 1_000_000;

/// Default operation budget for congruence counting (inner-loop multiplies).
pub const DEFAULT_COUNT_BUDGET: u64 = 2_000_000_000;

/// Largest rigorous small-prime cutoff we will enumerate.
pub const RIGOROUS_CUTOFF_LIMIT: u64 = 100_000;

// ---------------------------------------------------------------------------
// Levels and real solubility
// ---------------------------------------------------------------------------

/// The lifting level `gamma = l(p) + nu(p) + 2`.
///
/// `l(p)` is the largest power of `p` dividing a coefficient and `nu(p)`
/// the power of `p` in `k`. A primitive solution modulo `p^gamma` lifts to
/// the p-adics; insolubility at `gamma` refutes p-adic solubility.
pub fn gamma_level(form: &DiagonalForm, p: u64) -> Result<u32> {
    if !is_prime(p) {
        return Err(Error::domain(format!("{p} is not prime")));
    }
    let l = form
        .coeffs()
        .iter()
        .map(|&a| p_adic_valuation(a as i128, p))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .max()
        .unwrap_or(0);
    let nu = p_adic_valuation(form.k() as i128, p)?;
    Ok(l + nu + 2)
}

/// Solubility over the reals: automatic for odd `k`, a sign condition for even `k`.
pub fn real_soluble(form: &DiagonalForm) -> bool {
    form.k() % 2 == 1 || form.has_mixed_signs()
}

// ---------------------------------------------------------------------------
// Congruence counting
// ---------------------------------------------------------------------------

fn checked_prime_power(p: u64, l: u32) -> Result<u64> {
    p.checked_pow(l)
        .ok_or_else(|| Error::resource(format!("{p}^{l} does not fit in 64 bits")))
}

/// Histogram of `a * x^k mod q` over `x in 0..q`.
fn power_histogram(a: i64, k: u32, q: u64) -> Vec<u64> {
    let mut hist = vec![0u64; q as usize];
    let a_mod = (a as i128).rem_euclid(q as i128) as u128;
    for x in 0..q {
        let v = (a_mod * mod_pow(x, k as u64, q) as u128 % q as u128) as usize;
        hist[v] += 1;
    }
    hist
}

/// `M(p^l)`: the number of residue vectors `x mod p^l` with
/// `a_1 x_1^k + ... + a_s x_s^k ≡ 0 (mod p^l)`; `M(1) = 1`.
pub fn count_congruence_solutions(form: &DiagonalForm, p: u64, l: u32) -> Result<u128> {
    count_congruence_solutions_with_budget(form, p, l, DEFAULT_COUNT_BUDGET)
}

/// [`count_congruence_solutions`] with an explicit operation budget.
///
/// The count convolves per-coordinate value histograms over `Z/p^l`, so the
/// cost is `s * p^{2l}` multiplies rather than the naive `p^{l s}` scan.
pub fn count_congruence_solutions_with_budget(
    form: &DiagonalForm,
    p: u64,
    l: u32,
    budget: u64,
) -> Result<u128> {
    if !is_prime(p) {
        return Err(Error::domain(format!("{p} is not prime")));
    }
    if l == 0 {
        return Ok(1);
    }
    let q = checked_prime_power(p, l)?;
    let cost = (form.s() as u128) * (q as u128) * (q as u128);
    if cost > budget as u128 {
        return Err(Error::resource(format!(
            "congruence count at modulus {p}^{l} needs ~{cost} operations, budget is {budget}"
        )));
    }
    let qs = q as usize;
    let mut cur: Vec<u128> = power_histogram(form.coeffs()[0], form.k(), q)
        .into_iter()
        .map(u128::from)
        .collect();
    for &a in &form.coeffs()[1..] {
        let hist = power_histogram(a, form.k(), q);
        let mut next = vec![0u128; qs];
        for (u, &c) in cur.iter().enumerate() {
            if c == 0 {
                continue;
            }
            for (v, &h) in hist.iter().enumerate() {
                if h == 0 {
                    continue;
                }
                let mut t = u + v;
                if t >= qs {
                    t -= qs;
                }
                let add = c
                    .checked_mul(h as u128)
                    .ok_or_else(|| Error::resource("congruence count overflowed u128"))?;
                next[t] = next[t]
                    .checked_add(add)
                    .ok_or_else(|| Error::resource("congruence count overflowed u128"))?;
            }
        }
        cur = next;
    }
    Ok(cur[0])
}

/// Number of *primitive* solutions mod `p^l` (not all coordinates divisible
/// by `p`); `l >= 1`.
///
/// Imprimitive solutions are `p * y` with `f(y) ≡ 0 mod p^{l-k}`, so their
/// count follows from `M` at a lower level and the primitive count is an
/// exact difference. This is the enumeration-free oracle the search-based
/// decision is tested against.
pub fn count_primitive_congruence_solutions(
    form: &DiagonalForm,
    p: u64,
    l: u32,
    budget: u64,
) -> Result<u128> {
    if l == 0 {
        return Err(Error::domain("primitivity needs level l >= 1"));
    }
    let total = count_congruence_solutions_with_budget(form, p, l, budget)?;
    let s = form.s() as u32;
    let k = form.k();
    let imprimitive = if l <= k {
        (p as u128)
            .checked_pow(s * (l - 1))
            .ok_or_else(|| Error::resource("imprimitive count overflowed u128"))?
    } else {
        let inner = count_congruence_solutions_with_budget(form, p, l - k, budget)?;
        (p as u128)
            .checked_pow(s * (k - 1))
            .and_then(|f| f.checked_mul(inner))
            .ok_or_else(|| Error::resource("imprimitive count overflowed u128"))?
    };
    Ok(total - imprimitive)
}

/// Finite-level local density `p^{l(1-s)} M(p^l)`, exact.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChiEstimate {
    pub p: u64,
    pub level: u32,
    pub count: u128,
    s: u32,
}

impl ChiEstimate {
    /// The value as an exact rational `M / p^{l(s-1)}`.
    pub fn exact(&self) -> BigRational {
        let num = BigInt::from(self.count);
        let den = BigInt::from(self.p).pow(self.level * (self.s - 1));
        BigRational::new(num, den)
    }

    /// The value in floating point (may underflow to 0 for huge levels).
    pub fn value(&self) -> f64 {
        if self.count == 0 {
            return 0.0;
        }
        let ln = (self.count as f64).ln()
            - f64::from(self.level * (self.s - 1)) * (self.p as f64).ln();
        ln.exp()
    }
}

/// Density approximation `chi_p` at finite level `l >= 1`.
///
/// Exact in the limit `l -> infinity`; at finite level it is the natural
/// truncation, and the one the q-expansion identity is tested against.
pub fn chi_p_estimate(form: &DiagonalForm, p: u64, l: u32) -> Result<ChiEstimate> {
    chi_p_estimate_with_budget(form, p, l, DEFAULT_COUNT_BUDGET)
}

/// [`chi_p_estimate`] with an explicit operation budget.
pub fn chi_p_estimate_with_budget(
    form: &DiagonalForm,
    p: u64,
    l: u32,
    budget: u64,
) -> Result<ChiEstimate> {
    if l == 0 {
        return Err(Error::domain("chi estimate needs level l >= 1"));
    }
    let count = count_congruence_solutions_with_budget(form, p, l, budget)?;
    Ok(ChiEstimate {
        p,
        level: l,
        count,
        s: form.s() as u32,
    })
}

// ---------------------------------------------------------------------------
// The p-adic decision
// ---------------------------------------------------------------------------

/// Verdict of a p-adic decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PadicStatus {
    Soluble,
    Insoluble,
    Unknown,
}

impl PadicStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            PadicStatus::Soluble => "soluble",
            PadicStatus::Insoluble => "insoluble",
            PadicStatus::Unknown => "unknown",
        }
    }
}

/// Outcome of [`padic_soluble`]: status, level, optional witness, node count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PadicDecision {
    pub p: u64,
    /// Level the decision ran at (`gamma_level` unless overridden).
    pub level: u32,
    pub status: PadicStatus,
    /// For soluble: a primitive residue vector mod `p^level` with
    /// `f(witness) ≡ 0 (mod p^level)`.
    pub witness: Option<Vec<u64>>,
    /// Search nodes visited (0 when a direct construction succeeded).
    pub nodes: u64,
    /// Present for unknown outcomes: what gave out.
    pub reason: Option<String>,
}

/// Decide existence of a primitive solution mod `p^gamma`.
///
/// Soluble and insoluble verdicts are exact; a blown node budget yields
/// `Unknown` rather than an error. Primitive solubility at `gamma` is
/// equivalent to p-adic solubility, which is what the verdict means.
pub fn padic_soluble(form: &DiagonalForm, p: u64, node_budget: u64) -> Result<PadicDecision> {
    let gamma = gamma_level(form, p)?;
    padic_soluble_at_level(form, p, gamma, node_budget)
}

/// [`padic_soluble`] at an explicit level (used for lifting-stability tests).
pub fn padic_soluble_at_level(
    form: &DiagonalForm,
    p: u64,
    level: u32,
    node_budget: u64,
) -> Result<PadicDecision> {
    if !is_prime(p) {
        return Err(Error::domain(format!("{p} is not prime")));
    }
    if level == 0 {
        return Err(Error::domain("decision level must be >= 1"));
    }
    checked_prime_power(p, level)?;
    let unit_prime = form.k() as u64 % p != 0
        && form.coeffs().iter().all(|&a| a.unsigned_abs() % p != 0);
    if unit_prime {
        unit_prime_decision(form, p, level)
    } else {
        digit_dfs_decision(form, p, level, node_budget)
    }
}

/// Modular inverse for prime modulus.
fn inv_mod_p(a: u64, p: u64) -> u64 {
    mod_pow(a, p - 2, p)
}

/// `f(y) mod q` without leaving u64/u128, for residue vectors `y`.
fn eval_mod(form: &DiagonalForm, y: &[u64], q: u64) -> u64 {
    let mut acc: u128 = 0;
    for (&a, &yj) in form.coeffs().iter().zip(y) {
        let a_mod = (a as i128).rem_euclid(q as i128) as u128;
        acc = (acc + a_mod * mod_pow(yj % q, form.k() as u64, q) as u128) % q as u128;
    }
    acc as u64
}

/// Extend a level-1 root along one unit coordinate up to `level`.
///
/// `pivot` must have `y[pivot]` and `k * a_pivot` both coprime to `p`; the
/// single-digit update at each level is then uniquely determined.
fn hensel_chain(
    form: &DiagonalForm,
    p: u64,
    level: u32,
    mut y: Vec<u64>,
    pivot: usize,
) -> Vec<u64> {
    let k = form.k() as u64;
    let w = {
        let a = form.coeffs()[pivot].rem_euclid(p as i64) as u128;
        let d = mod_pow(y[pivot] % p, k - 1, p) as u128;
        ((k as u128 % p as u128) * a % p as u128 * d % p as u128) as u64
    };
    debug_assert!(w % p != 0);
    let w_inv = inv_mod_p(w, p);
    for m in 1..level {
        let q_next = p.pow(m + 1);
        let val = eval_mod(form, &y, q_next);
        let t = val / p.pow(m); // exact: val ≡ 0 mod p^m by construction
        if t != 0 {
            let digit = (p - (t as u128 * w_inv as u128 % p as u128) as u64) % p;
            y[pivot] += p.pow(m) * digit;
        }
    }
    y
}

/// Decision for primes dividing neither `k` nor any coefficient.
///
/// A nonzero root mod `p` with a unit coordinate is automatically
/// nonsingular, so one root decides everything. The root search scans the
/// pattern `(x, 1, c, 0, ..., 0)` with a k-th power preimage table; if the
/// scan is inconclusive the exact histogram count settles existence and a
/// table walk extracts a root.
fn unit_prime_decision(form: &DiagonalForm, p: u64, level: u32) -> Result<PadicDecision> {
    let s = form.s();
    let k = form.k() as u64;
    let a = form.coeffs();
    let done = |status, witness, nodes| {
        Ok(PadicDecision {
            p,
            level,
            status,
            witness,
            nodes,
            reason: None,
        })
    };
    if s == 1 {
        // a x^k ≡ 0 with a a unit forces x ≡ 0: no primitive solution.
        return done(PadicStatus::Insoluble, None, 0);
    }
    // Smallest preimage under x -> x^k for each attained residue.
    let mut root = vec![None::<u64>; p as usize];
    for x in 0..p {
        let t = mod_pow(x, k, p) as usize;
        if root[t].is_none() {
            root[t] = Some(x);
        }
    }
    let a0_inv = inv_mod_p(a[0].rem_euclid(p as i64) as u64, p);
    let lift = |mut y: Vec<u64>, pivot: usize| {
        y = hensel_chain(form, p, level, y, pivot);
        done(PadicStatus::Soluble, Some(y), 0)
    };
    if s == 2 {
        // Any nonzero root has both coordinates units; scale x_2 to 1.
        let target =
            (p as u128 - (a[1].rem_euclid(p as i64) as u128)) % p as u128 * a0_inv as u128
                % p as u128;
        return match root[target as usize] {
            Some(r) if r != 0 => {
                let mut y = vec![0; s];
                y[0] = r;
                y[1] = 1;
                lift(y, 0)
            }
            _ => done(PadicStatus::Insoluble, None, 0),
        };
    }
    // Pattern scan: x_2 = 1, x_3 = c, the rest zero; solve for x_1.
    let a1 = a[1].rem_euclid(p as i64) as u128;
    let a2 = a[2].rem_euclid(p as i64) as u128;
    for c in 0..p {
        let shift = (a1 + a2 * mod_pow(c, k, p) as u128) % p as u128;
        let target = ((p as u128 - shift) % p as u128 * a0_inv as u128 % p as u128) as usize;
        let mut y = vec![0; s];
        y[1] = 1;
        y[2] = c;
        if target == 0 {
            return lift(y, 1);
        }
        if let Some(r) = root[target] {
            debug_assert!(r != 0);
            y[0] = r;
            return lift(y, 0);
        }
    }
    // The scan covers only one slice; settle existence exactly.
    let m = count_congruence_solutions_with_budget(form, p, 1, DEFAULT_COUNT_BUDGET)?;
    if m <= 1 {
        return done(PadicStatus::Insoluble, None, 0);
    }
    let y = extract_root_mod_p(form, p).expect("count promised a nonzero root");
    let pivot = y.iter().position(|&d| d != 0).expect("root is nonzero");
    lift(y, pivot)
}

/// Deterministic nonzero root of `f ≡ 0 (mod p)` via suffix count tables.
fn extract_root_mod_p(form: &DiagonalForm, p: u64) -> Option<Vec<u64>> {
    let s = form.s();
    let ps = p as usize;
    let hists: Vec<Vec<u64>> = form
        .coeffs()
        .iter()
        .map(|&a| power_histogram(a, form.k(), p))
        .collect();
    // suffix[j][v] = number of (x_j..x_{s-1}) with partial sum ≡ v.
    let mut suffix = vec![vec![0u128; ps]; s + 1];
    suffix[s][0] = 1;
    for j in (0..s).rev() {
        for v in 0..ps {
            let mut acc: u128 = 0;
            for (w, &h) in hists[j].iter().enumerate() {
                if h != 0 {
                    let mut t = v + w;
                    if t >= ps {
                        t -= ps;
                    }
                    acc += h as u128 * suffix[j + 1][t];
                }
            }
            suffix[j][v] = acc;
        }
    }
    // suffix[j][v] counts completions given a running prefix sum of v, so
    // the walk tracks the partial sum directly.
    let term = |j: usize, x: u64| -> usize {
        (form.coeffs()[j].rem_euclid(p as i64) as u128 * mod_pow(x, form.k() as u64, p) as u128
            % p as u128) as usize
    };
    // First coordinate that can open with a nonzero digit; zeros before it.
    for j0 in 0..s {
        for x in 1..p {
            let mut running = term(j0, x);
            if suffix[j0 + 1][running] == 0 {
                continue;
            }
            let mut y = vec![0u64; s];
            y[j0] = x;
            for j in j0 + 1..s {
                for d in 0..p {
                    let t = (running + term(j, d)) % ps;
                    if suffix[j + 1][t] > 0 {
                        y[j] = d;
                        running = t;
                        break;
                    }
                }
            }
            debug_assert_eq!(eval_mod(form, &y, p), 0);
            return Some(y);
        }
    }
    None
}

enum SearchOutcome {
    Found(Vec<u64>),
    Exhausted,
    OutOfBudget,
}

/// Digit-wise depth-first decision for primes dividing `k` or a coefficient.
///
/// Level-1 roots are enumerated by backtracking (one active coordinate is
/// completed from a residue table). Roots with a nonsingular coordinate
/// lift deterministically; fully singular roots branch over all next-digit
/// vectors, pruned by the congruence residue at each level. Only primitive
/// states (nonzero mod p) are ever visited, which is what keeps refutations
/// small. The node budget converts blow-ups into `Unknown`.
fn digit_dfs_decision(
    form: &DiagonalForm,
    p: u64,
    level: u32,
    node_budget: u64,
) -> Result<PadicDecision> {
    let s = form.s();
    let k = form.k() as u64;
    let a = form.coeffs();
    // Enumeration order: active coordinate (unit coefficient) last, so the
    // final digit comes from a table lookup instead of a scan.
    let last_active = (0..s).rev().find(|&j| a[j].unsigned_abs() % p != 0);
    let order: Vec<usize> = match last_active {
        Some(la) => (0..s).filter(|&j| j != la).chain([la]).collect(),
        None => (0..s).collect(),
    };
    // bucket[v] = digits x of the completing coordinate with c x^k ≡ v.
    let bucket: Option<Vec<Vec<u64>>> = last_active.map(|la| {
        let mut b = vec![Vec::new(); p as usize];
        let c = a[la].rem_euclid(p as i64) as u128;
        for x in 0..p {
            let v = (c * mod_pow(x, k, p) as u128 % p as u128) as usize;
            b[v].push(x);
        }
        b
    });

    let mut nodes: u64 = 0;
    let mut digits = vec![0u64; s];
    let outcome = roots_dfs(
        form,
        p,
        level,
        node_budget,
        &order,
        bucket.as_ref(),
        0,
        0,
        &mut digits,
        &mut nodes,
    )?;
    let (status, witness, reason) = match outcome {
        SearchOutcome::Found(w) => (PadicStatus::Soluble, Some(w), None),
        SearchOutcome::Exhausted => (PadicStatus::Insoluble, None, None),
        SearchOutcome::OutOfBudget => (
            PadicStatus::Unknown,
            None,
            Some(format!("node budget of {node_budget} exhausted")),
        ),
    };
    Ok(PadicDecision {
        p,
        level,
        status,
        witness,
        nodes,
        reason,
    })
}

#[allow(clippy::too_many_arguments)]
fn roots_dfs(
    form: &DiagonalForm,
    p: u64,
    level: u32,
    budget: u64,
    order: &[usize],
    bucket: Option<&Vec<Vec<u64>>>,
    pos: usize,
    partial: u64,
    digits: &mut Vec<u64>,
    nodes: &mut u64,
) -> Result<SearchOutcome> {
    let s = form.s();
    let k = form.k() as u64;
    *nodes += 1;
    if *nodes > budget {
        return Ok(SearchOutcome::OutOfBudget);
    }
    if pos == s - 1 {
        let j = order[pos];
        let candidates: Vec<u64> = match bucket {
            Some(b) => b[(p - partial) as usize % p as usize].clone(),
            // No unit coefficient at all: the congruence mod p is vacuous.
            None => {
                debug_assert_eq!(partial, 0);
                (0..p).collect()
            }
        };
        for x in candidates {
            digits[j] = x;
            if digits.iter().all(|&d| d == 0) {
                continue; // primitive roots only
            }
            match process_root(form, p, level, budget, digits, nodes)? {
                SearchOutcome::Exhausted => {}
                other => return Ok(other),
            }
        }
        digits[order[pos]] = 0;
        return Ok(SearchOutcome::Exhausted);
    }
    let j = order[pos];
    let c = form.coeffs()[j].rem_euclid(p as i64) as u128;
    // At unit coefficients try nonzero digits first: a root with a nonzero
    // digit against a unit coefficient keeps the per-level digit congruence
    // solvable all the way down, so these roots extend without backtracking.
    let digit_at = |i: u64| if c != 0 { (i + 1) % p } else { i };
    for i in 0..p {
        let x = digit_at(i);
        digits[j] = x;
        let contrib = (c * mod_pow(x, k, p) as u128 % p as u128) as u64;
        let next = (partial + contrib) % p;
        match roots_dfs(
            form, p, level, budget, order, bucket, pos + 1, next, digits, nodes,
        )? {
            SearchOutcome::Exhausted => {}
            other => return Ok(other),
        }
    }
    digits[j] = 0;
    Ok(SearchOutcome::Exhausted)
}

/// Handle one primitive level-1 root: lift through a nonsingular coordinate
/// if one exists, otherwise recurse digit-wise over singular extensions.
fn process_root(
    form: &DiagonalForm,
    p: u64,
    level: u32,
    budget: u64,
    digits: &[u64],
    nodes: &mut u64,
) -> Result<SearchOutcome> {
    if level == 1 {
        return Ok(SearchOutcome::Found(digits.to_vec()));
    }
    let k = form.k() as u64;
    let pivot = (0..form.s()).find(|&j| {
        let w = (k as u128 % p as u128)
            * (form.coeffs()[j].rem_euclid(p as i64) as u128)
            % p as u128
            * mod_pow(digits[j], k - 1, p) as u128
            % p as u128;
        w != 0
    });
    if let Some(j) = pivot {
        return Ok(SearchOutcome::Found(hensel_chain(
            form,
            p,
            level,
            digits.to_vec(),
            j,
        )));
    }
    extend_singular(form, p, level, budget, digits.to_vec(), 1, nodes)
}

/// Extend an all-singular state `y` (valid mod `p^m`) one level at a time.
///
/// In the singular case adding `p^m z` shifts `f` by a sum of independent
/// per-coordinate contributions, each divisible by `p^{m+1}`. A state
/// either dies on the residue test at `p^{m+1}`, or its children surviving
/// the *next* residue test are exactly the solutions of a one-digit
/// congruence mod p, which completion-count tables enumerate directly —
/// no scan over all `p^s` digit vectors.
fn extend_singular(
    form: &DiagonalForm,
    p: u64,
    level: u32,
    budget: u64,
    y: Vec<u64>,
    m: u32,
    nodes: &mut u64,
) -> Result<SearchOutcome> {
    if m == level {
        return Ok(SearchOutcome::Found(y));
    }
    let q_next = p.pow(m + 1);
    if eval_mod(form, &y, q_next) != 0 {
        return Ok(SearchOutcome::Exhausted);
    }
    if m + 1 == level {
        return Ok(SearchOutcome::Found(y)); // y itself works mod p^{m+1}
    }
    let s = form.s();
    let k = form.k() as u64;
    let step = p.pow(m);
    let q2 = p.pow(m + 2);
    // shift[j][z] = a_j ((y_j + p^m z)^k - y_j^k) / p^{m+1} mod p: the
    // per-coordinate contribution to the residue one level further down.
    let mut shift = vec![vec![0u64; p as usize]; s];
    for j in 0..s {
        let a_mod = (form.coeffs()[j] as i128).rem_euclid(q2 as i128) as u128;
        let base = (a_mod * mod_pow(y[j] % q2, k, q2) as u128 % q2 as u128) as u64;
        for z in 0..p {
            let lifted =
                (a_mod * mod_pow((y[j] + step * z) % q2, k, q2) as u128 % q2 as u128) as u64;
            let diff = (q2 + lifted - base) % q2;
            debug_assert_eq!(diff % (step * p), 0);
            shift[j][z as usize] = diff / (step * p) % p;
        }
    }
    let target = {
        let r = eval_mod(form, &y, q2);
        debug_assert_eq!(r % (step * p), 0);
        (p - r / (step * p) % p) % p
    };
    // completions[j][v] = number of digit tuples (z_j..z_{s-1}) whose shifts
    // sum with v to the target mod p.
    let ps = p as usize;
    let mut completions = vec![vec![0u128; ps]; s + 1];
    completions[s][target as usize] = 1;
    for j in (0..s).rev() {
        for v in 0..ps {
            let mut acc: u128 = 0;
            for z in 0..ps {
                let t = (v + shift[j][z] as usize) % ps;
                acc += completions[j + 1][t];
            }
            completions[j][v] = acc;
        }
    }
    if completions[0][0] == 0 {
        return Ok(SearchOutcome::Exhausted);
    }
    let mut z = vec![0u64; s];
    viable_children_dfs(
        form,
        p,
        level,
        budget,
        &y,
        m,
        &shift,
        &completions,
        0,
        0,
        &mut z,
        nodes,
    )
}

/// Enumerate the viable digit vectors `z` lexicographically and recurse
/// into `extend_singular` for each child `y + p^m z`.
#[allow(clippy::too_many_arguments)]
fn viable_children_dfs(
    form: &DiagonalForm,
    p: u64,
    level: u32,
    budget: u64,
    y: &[u64],
    m: u32,
    shift: &[Vec<u64>],
    completions: &[Vec<u128>],
    pos: usize,
    running: u64,
    z: &mut Vec<u64>,
    nodes: &mut u64,
) -> Result<SearchOutcome> {
    let s = form.s();
    if pos == s {
        *nodes += 1;
        if *nodes > budget {
            return Ok(SearchOutcome::OutOfBudget);
        }
        let step = p.pow(m);
        let child: Vec<u64> = y.iter().zip(z.iter()).map(|(&yi, &zi)| yi + step * zi).collect();
        return extend_singular(form, p, level, budget, child, m + 1, nodes);
    }
    for d in 0..p {
        let next = (running + shift[pos][d as usize]) % p;
        if completions[pos + 1][next as usize] == 0 {
            continue;
        }
        z[pos] = d;
        match viable_children_dfs(
            form,
            p,
            level,
            budget,
            y,
            m,
            shift,
            completions,
            pos + 1,
            next,
            z,
            nodes,
        )? {
            SearchOutcome::Exhausted => {}
            other => return Ok(other),
        }
    }
    z[pos] = 0;
    Ok(SearchOutcome::Exhausted)
}

// ---------------------------------------------------------------------------
// Prime profiles
// ---------------------------------------------------------------------------

/// How the prime list is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrimeSelection {
    /// Cutoff `C = ceil(k^{(s+k+2)/2})` from the explicit proof constant:
    /// beyond it the density bound forces `chi_p > 0`.
    Rigorous,
    /// A fixed cap (default `max(k^4, 1000)`); unsound in principle and
    /// labeled as such in every output.
    Heuristic,
}

impl PrimeSelection {
    pub fn as_str(&self) -> &'static str {
        match self {
            PrimeSelection::Rigorous => "rigorous",
            PrimeSelection::Heuristic => "heuristic",
        }
    }
}

/// The prime-side profile of a form: shared primes, cutoff, and products.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimeProfile {
    pub mode: PrimeSelection,
    /// Small-prime cutoff `C`.
    pub cutoff: u64,
    /// Primes dividing at least two coefficients.
    pub shared_primes: Vec<u64>,
    /// `shared_primes ∪ {p <= cutoff}`, sorted.
    pub profile_primes: Vec<u64>,
    /// `p -> l(p) = max_j v_p(a_j)` over the profile primes.
    pub l_map: BTreeMap<u64, u32>,
    /// Product of the profile primes.
    pub product: BigUint,
    /// Product of `p^{l(p)}` over the profile primes.
    pub product_dagger: BigUint,
    /// Product of the primes `<= cutoff`.
    pub product_small: BigUint,
    /// Product of shared primes exceeding the cutoff.
    pub product_shared_large: BigUint,
}

/// Build the prime profile and the list of primes to test.
///
/// The test list is `{p <= C} ∪ {p | a_1 ... a_s}`: any prime outside it
/// divides no coefficient and is large enough that the density bound
/// `|chi_p - 1| <= k^{s+k+2} p^{-2} < 1` rules out an obstruction. In
/// heuristic mode the cutoff is `cap` (default `max(k^4, 1000)`) and no
/// such guarantee holds.
pub fn local_prime_set(
    form: &DiagonalForm,
    mode: PrimeSelection,
    cap: Option<u64>,
) -> Result<(PrimeProfile, Vec<u64>)> {
    let k = form.k();
    let s = form.s() as u32;
    let cutoff = match mode {
        PrimeSelection::Rigorous => {
            let e = s + k + 2;
            let c = rigorous_cutoff(u128::from(k), e).ok_or_else(|| {
                Error::resource(format!(
                    "rigorous cutoff k^({e}/2) overflows; use heuristic mode"
                ))
            })?;
            if c > RIGOROUS_CUTOFF_LIMIT {
                return Err(Error::resource(format!(
                    "rigorous cutoff C = {c} exceeds the enumeration limit \
                     {RIGOROUS_CUTOFF_LIMIT}; use heuristic mode"
                )));
            }
            c
        }
        PrimeSelection::Heuristic => cap.unwrap_or_else(|| {
            let k4 = u64::from(k).saturating_pow(4);
            k4.max(1000)
        }),
    };
    let small_primes = primes_up_to(cutoff)?;
    // Count, per prime, how many coefficients it divides.
    let mut divides: BTreeMap<u64, u32> = BTreeMap::new();
    for &a in form.coeffs() {
        for (prime, _) in arith::factorize(a.unsigned_abs())? {
            *divides.entry(prime).or_insert(0) += 1;
        }
    }
    let shared_primes: Vec<u64> = divides
        .iter()
        .filter(|&(_, &n)| n >= 2)
        .map(|(&p, _)| p)
        .collect();
    let mut profile_primes: Vec<u64> = small_primes.clone();
    for &p in &shared_primes {
        if p > cutoff {
            profile_primes.push(p);
        }
    }
    profile_primes.sort_unstable();
    let l_map: BTreeMap<u64, u32> = profile_primes
        .iter()
        .map(|&p| {
            let l = form
                .coeffs()
                .iter()
                .map(|&a| p_adic_valuation(a as i128, p).unwrap_or(0))
                .max()
                .unwrap_or(0);
            (p, l)
        })
        .collect();
    let product: BigUint = profile_primes.iter().map(|&p| BigUint::from(p)).product();
    let product_dagger: BigUint = l_map
        .iter()
        .map(|(&p, &l)| BigUint::from(p).pow(l))
        .product();
    let product_small: BigUint = small_primes.iter().map(|&p| BigUint::from(p)).product();
    let product_shared_large: BigUint = shared_primes
        .iter()
        .filter(|&&p| p > cutoff)
        .map(|&p| BigUint::from(p))
        .product();
    let mut test_list: Vec<u64> = small_primes;
    for &p in divides.keys() {
        if p > cutoff {
            test_list.push(p);
        }
    }
    test_list.sort_unstable();
    Ok((
        PrimeProfile {
            mode,
            cutoff,
            shared_primes,
            profile_primes,
            l_map,
            product,
            product_dagger,
            product_small,
            product_shared_large,
        },
        test_list,
    ))
}

/// `ceil(k^{e/2})` computed exactly in integers; `None` on overflow.
fn rigorous_cutoff(k: u128, e: u32) -> Option<u64> {
    if e % 2 == 0 {
        let c = k.checked_pow(e / 2)?;
        u64::try_from(c).ok()
    } else {
        let v = k.checked_pow(e)?;
        let r = isqrt_u128(v);
        let c = if r * r == v { r } else { r + 1 };
        u64::try_from(c).ok()
    }
}

fn isqrt_u128(v: u128) -> u128 {
    if v < 2 {
        return v;
    }
    let mut x = 1u128 << (v.ilog2() / 2 + 1);
    loop {
        let y = (x + v / x) / 2;
        if y >= x {
            return x;
        }
        x = y;
    }
}

// ---------------------------------------------------------------------------
// Local reports
// ---------------------------------------------------------------------------

/// Per-prime verdict inside a [`LocalReport`].
#[derive(Debug, Clone, PartialEq)]
pub struct PrimeVerdict {
    pub p: u64,
    pub gamma: u32,
    pub status: PadicStatus,
    pub witness: Option<Vec<u64>>,
    pub chi: Option<ChiEstimate>,
}

/// What blocks local solubility, when something does.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Obstruction {
    RealPlace,
    Prime(u64),
}

/// Overall local verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OverallVerdict {
    LocallySoluble,
    LocallyInsoluble(Obstruction),
    Undetermined,
}

/// Combined real and p-adic report over a prime list.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalReport {
    pub real_soluble: bool,
    /// Verdicts in increasing prime order.
    pub prime_verdicts: Vec<PrimeVerdict>,
    pub mode: PrimeSelection,
    pub overall: OverallVerdict,
}

/// Options for [`local_report`].
#[derive(Debug, Clone)]
pub struct LocalOptions {
    pub mode: PrimeSelection,
    /// Heuristic-mode prime cap (see [`local_prime_set`]).
    pub cap: Option<u64>,
    pub node_budget: u64,
    /// Attach finite-level chi values where the count stays within
    /// `chi_budget` operations; `None` skips them entirely.
    pub chi_level: Option<u32>,
    pub chi_budget: u64,
}

impl Default for LocalOptions {
    fn default() -> Self {
        LocalOptions {
            mode: PrimeSelection::Rigorous,
            cap: None,
            node_budget: DEFAULT_NODE_BUDGET,
            chi_level: None,
            chi_budget: 50_000_000,
        }
    }
}

/// Real solubility plus a p-adic verdict at every prime of the test list.
///
/// The smallest failing prime (or the real place) is the reported
/// obstruction; any unknown verdict makes the overall result undetermined.
pub fn local_report(form: &DiagonalForm, opts: &LocalOptions) -> Result<LocalReport> {
    let (_, primes) = local_prime_set(form, opts.mode, opts.cap)?;
    let real = real_soluble(form);
    let mut verdicts = Vec::with_capacity(primes.len());
    for &p in &primes {
        let decision = padic_soluble(form, p, opts.node_budget)?;
        let chi = match opts.chi_level {
            Some(l) => chi_p_estimate_with_budget(form, p, l, opts.chi_budget).ok(),
            None => None,
        };
        verdicts.push(PrimeVerdict {
            p,
            gamma: decision.level,
            status: decision.status,
            witness: decision.witness,
            chi,
        });
    }
    let overall = if !real {
        OverallVerdict::LocallyInsoluble(Obstruction::RealPlace)
    } else if let Some(v) = verdicts
        .iter()
        .find(|v| v.status == PadicStatus::Insoluble)
    {
        OverallVerdict::LocallyInsoluble(Obstruction::Prime(v.p))
    } else if verdicts.iter().any(|v| v.status == PadicStatus::Unknown) {
        OverallVerdict::Undetermined
    } else {
        OverallVerdict::LocallySoluble
    };
    Ok(LocalReport {
        real_soluble: real,
        prime_verdicts: verdicts,
        mode: opts.mode,
        overall,
    })
}

// ---------------------------------------------------------------------------
// Series lower-bound certificate
// ---------------------------------------------------------------------------

/// Result of [`series_lower_certificate`].
#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    /// `1/2 * prod p^{(1-s) gamma(p)}` over the profile primes, when local
    /// solubility at those primes is established.
    pub value: Option<BigRational>,
    /// `log10` of the value, for display.
    pub log10: Option<f64>,
    /// Why the value is absent, or a caveat for heuristic profiles.
    pub note: Option<String>,
}

/// Lower bound on the singular series, conditional on local solubility.
///
/// When every profile prime has a soluble verdict in `report`, the series
/// is at least `1/2 * prod_{p in profile} p^{(1-s) gamma(p)}`; that exact
/// rational is returned. Otherwise the value is absent and the note says
/// what is missing.
pub fn series_lower_certificate(
    form: &DiagonalForm,
    profile: &PrimeProfile,
    report: &LocalReport,
) -> Result<Certificate> {
    let mut missing = Vec::new();
    for &p in &profile.profile_primes {
        let ok = report
            .prime_verdicts
            .iter()
            .any(|v| v.p == p && v.status == PadicStatus::Soluble);
        if !ok {
            missing.push(p);
        }
    }
    if !missing.is_empty() {
        return Ok(Certificate {
            value: None,
            log10: None,
            note: Some(format!(
                "local solubility not established at profile primes {missing:?}"
            )),
        });
    }
    let s = form.s() as u32;
    let mut den = BigUint::from(2u32);
    let mut log10 = -std::f64::consts::LOG10_2;
    for &p in &profile.profile_primes {
        let h = gamma_level(form, p)?;
        den *= BigUint::from(p).pow((s - 1) * h);
        log10 -= f64::from((s - 1) * h) * (p as f64).log10();
    }
    let value = BigRational::new(BigInt::one(), BigInt::from(den));
    let note = match profile.mode {
        PrimeSelection::Heuristic => Some(
            "profile built with a heuristic prime cap; primes beyond the cap unverified"
                .to_string(),
        ),
        PrimeSelection::Rigorous => None,
    };
    Ok(Certificate {
        value: Some(value),
        log10: Some(log10),
        note,
    })
}

// ---------------------------------------------------------------------------
// JSON views (used by the CLI and the run store)
// ---------------------------------------------------------------------------

impl ChiEstimate {
    pub fn to_json(&self) -> serde_json::Value {
        let r = self.exact();
        serde_json::json!({
            "p": self.p,
            "level": self.level,
            "numerator": r.numer().to_string(),
            "denominator": r.denom().to_string(),
            "value": self.value(),
        })
    }
}

impl PrimeProfile {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "mode": self.mode.as_str(),
            "cutoff": self.cutoff,
            "shared_primes": self.shared_primes,
            "profile_primes": self.profile_primes,
            "l_map": self.l_map.iter().map(|(p, l)| (p.to_string(), *l)).collect::<BTreeMap<_, _>>(),
            "product": self.product.to_string(),
            "product_dagger": self.product_dagger.to_string(),
            "product_small": self.product_small.to_string(),
            "product_shared_large": self.product_shared_large.to_string(),
        })
    }
}

impl LocalReport {
    pub fn to_json(&self) -> serde_json::Value {
        let overall = match self.overall {
            OverallVerdict::LocallySoluble => serde_json::json!({"verdict": "locally_soluble"}),
            OverallVerdict::LocallyInsoluble(Obstruction::RealPlace) => {
                serde_json::json!({"verdict": "locally_insoluble", "obstruction": "real"})
            }
            OverallVerdict::LocallyInsoluble(Obstruction::Prime(p)) => {
                serde_json::json!({"verdict": "locally_insoluble", "obstruction": p})
            }
            OverallVerdict::Undetermined => serde_json::json!({"verdict": "undetermined"}),
        };
        serde_json::json!({
            "real_soluble": self.real_soluble,
            "mode": self.mode.as_str(),
            "overall": overall,
            "primes": self.prime_verdicts.iter().map(|v| serde_json::json!({
                "p": v.p,
                "gamma": v.gamma,
                "status": v.status.as_str(),
                "witness": v.witness,
                "chi": v.chi.as_ref().map(|c| c.to_json()),
            })).collect::<Vec<_>>(),
        })
    }
}

impl Certificate {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "value": self.value.as_ref().map(|v| serde_json::json!({
                "numerator": v.numer().to_string(),
                "denominator": v.denom().to_string(),
            })),
            "log10": self.log10,
            "note": self.note,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::SeededStream;
    use rand::Rng;

    fn form(k: u32, coeffs: &[i64]) -> DiagonalForm {
        DiagonalForm::new(k, coeffs.to_vec()).unwrap()
    }

    #[test]
    fn gamma_frozen_values() {
        assert_eq!(gamma_level(&form(3, &[1, 1, 1, 1]), 2).unwrap(), 2);
        assert_eq!(gamma_level(&form(3, &[9, 1, 1, 1]), 3).unwrap(), 5);
        assert_eq!(gamma_level(&form(4, &[1, 1, -1]), 2).unwrap(), 4);
        assert!(gamma_level(&form(3, &[1, 1]), 4).is_err());
    }

    #[test]
    fn real_solubility_cases() {
        assert!(real_soluble(&form(3, &[5, 5, 5])));
        assert!(!real_soluble(&form(4, &[1, 2, 3])));
        assert!(real_soluble(&form(4, &[1, -1])));
    }

    #[test]
    fn congruence_count_frozen_values() {
        let f = form(3, &[1, 1, 1, 1]);
        assert_eq!(count_congruence_solutions(&f, 2, 1).unwrap(), 8);
        assert_eq!(count_congruence_solutions(&f, 2, 0).unwrap(), 1);
        assert_eq!(count_congruence_solutions(&f, 5, 0).unwrap(), 1);
    }

    #[test]
    fn congruence_count_matches_brute_force() {
        let mut rng = SeededStream::new(3, 1).rng();
        for _ in 0..40 {
            let k = rng.random_range(2..=4u32);
            let s = rng.random_range(1..=3usize);
            let coeffs: Vec<i64> = (0..s)
                .map(|_| {
                    let c = rng.random_range(1..=9i64);
                    if rng.random_bool(0.5) {
                        -c
                    } else {
                        c
                    }
                })
                .collect();
            let f = form(k, &coeffs);
            let p = *[2u64, 3, 5].get(rng.random_range(0..3)).unwrap();
            let l = rng.random_range(0..=2u32);
            let q = p.pow(l);
            // Oracle: enumerate all q^s residue vectors.
            let mut expected = 0u128;
            let total = q.pow(s as u32);
            for idx in 0..total {
                let mut rest = idx;
                let mut x = vec![0u64; s];
                for xi in x.iter_mut() {
                    *xi = rest % q;
                    rest /= q;
                }
                if l == 0 || eval_mod(&f, &x, q) == 0 {
                    expected += 1;
                }
            }
            assert_eq!(
                count_congruence_solutions(&f, p, l).unwrap(),
                expected,
                "k={k} coeffs={coeffs:?} p={p} l={l}"
            );
        }
    }

    #[test]
    fn primitive_count_small_case() {
        // Mod 2: 8 solutions, 1 of them the zero vector.
        let f = form(3, &[1, 1, 1, 1]);
        assert_eq!(
            count_primitive_congruence_solutions(&f, 2, 1, DEFAULT_COUNT_BUDGET).unwrap(),
            7
        );
    }

    #[test]
    fn chi_frozen_value_is_one() {
        let f = form(3, &[1, 1, 1, 1]);
        let chi = chi_p_estimate(&f, 2, 1).unwrap();
        assert_eq!(chi.exact(), BigRational::one());
        assert!((chi.value() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn chi_of_insoluble_form_decays_exactly() {
        // Locally insoluble at 7; all solutions are imprimitive, so the
        // density at levels gamma and gamma+1 is exactly 1/7 and 1/49.
        let f = form(3, &[1, -2, 7, -14]);
        let chi3 = chi_p_estimate(&f, 7, 3).unwrap().exact();
        let chi4 = chi_p_estimate(&f, 7, 4).unwrap().exact();
        assert_eq!(chi3, BigRational::new(BigInt::one(), BigInt::from(7)));
        assert_eq!(chi4, BigRational::new(BigInt::one(), BigInt::from(49)));
    }

    #[test]
    fn chi_near_one_for_unit_primes() {
        // |chi - 1| <= k^{s+k+2} p^{-2}, nontrivial once p^2 > k^{s+k+2}.
        let f = form(3, &[1, 2, 3, -4, 5]);
        let c = 3f64.powi(5 + 3 + 2);
        for p in [251u64, 257, 263] {
            let chi = chi_p_estimate(&f, p, 1).unwrap().value();
            assert!(
                (chi - 1.0).abs() <= c / (p as f64).powi(2),
                "p={p} chi={chi}"
            );
        }
    }

    #[test]
    fn padic_frozen_values() {
        let d = padic_soluble(&form(3, &[1, 1, 1, 1]), 2, DEFAULT_NODE_BUDGET).unwrap();
        assert_eq!(d.status, PadicStatus::Soluble);
        assert_eq!(d.level, 2);
        let w = d.witness.unwrap();
        assert_eq!(eval_mod(&form(3, &[1, 1, 1, 1]), &w, 4), 0);
        assert!(w.iter().any(|&x| x % 2 == 1));

        let d = padic_soluble(&form(3, &[1, -2, 7, -14]), 7, DEFAULT_NODE_BUDGET).unwrap();
        assert_eq!(d.status, PadicStatus::Insoluble);
        assert_eq!(d.level, 3);

        let d = padic_soluble(&form(3, &[1, 1, 1, 1, 1]), 11, DEFAULT_NODE_BUDGET).unwrap();
        assert_eq!(d.status, PadicStatus::Soluble);
    }

    #[test]
    fn witnesses_are_sound() {
        let mut rng = SeededStream::new(5, 2).rng();
        let mut soluble_seen = 0;
        for _ in 0..300 {
            let k = rng.random_range(2..=4u32);
            let s = rng.random_range(2..=4usize);
            let coeffs: Vec<i64> = (0..s)
                .map(|_| {
                    let c = rng.random_range(1..=10i64);
                    if rng.random_bool(0.5) {
                        -c
                    } else {
                        c
                    }
                })
                .collect();
            let f = form(k, &coeffs);
            for p in [2u64, 3, 5, 7] {
                let d = padic_soluble(&f, p, DEFAULT_NODE_BUDGET).unwrap();
                if let Some(w) = &d.witness {
                    soluble_seen += 1;
                    let q = p.pow(d.level);
                    assert_eq!(eval_mod(&f, w, q), 0, "f={f} p={p}");
                    assert!(w.iter().any(|&x| x % p != 0), "imprimitive witness");
                    assert!(w.iter().all(|&x| x < q), "witness out of range");
                }
            }
        }
        assert!(soluble_seen > 100);
    }

    #[test]
    fn decision_matches_primitive_count_oracle() {
        // Counting route (histogram convolution) is independent of the DFS.
        let mut rng = SeededStream::new(8, 4).rng();
        for _ in 0..150 {
            let k = rng.random_range(2..=4u32);
            let s = rng.random_range(2..=4usize);
            let coeffs: Vec<i64> = (0..s)
                .map(|_| {
                    let c = rng.random_range(1..=10i64);
                    if rng.random_bool(0.5) {
                        -c
                    } else {
                        c
                    }
                })
                .collect();
            let f = form(k, &coeffs);
            for p in [2u64, 3] {
                let d = padic_soluble(&f, p, 100_000_000).unwrap();
                assert_ne!(d.status, PadicStatus::Unknown);
                let prim =
                    count_primitive_congruence_solutions(&f, p, d.level, DEFAULT_COUNT_BUDGET)
                        .unwrap();
                assert_eq!(
                    d.status == PadicStatus::Soluble,
                    prim > 0,
                    "f={f} p={p} level={}",
                    d.level
                );
            }
        }
    }

    #[test]
    fn lifting_is_level_stable() {
        let mut rng = SeededStream::new(21, 0).rng();
        for _ in 0..60 {
            let s = rng.random_range(2..=4usize);
            let coeffs: Vec<i64> = (0..s)
                .map(|_| {
                    let c = rng.random_range(1..=10i64);
                    if rng.random_bool(0.5) {
                        -c
                    } else {
                        c
                    }
                })
                .collect();
            let f = form(3, &coeffs);
            for p in [2u64, 3, 5, 7] {
                let gamma = gamma_level(&f, p).unwrap();
                let at = padic_soluble_at_level(&f, p, gamma, 100_000_000).unwrap();
                let above = padic_soluble_at_level(&f, p, gamma + 1, 100_000_000).unwrap();
                assert_eq!(at.status, above.status, "f={f} p={p}");
            }
        }
    }

    #[test]
    fn unit_prime_fallback_scan_is_rigorous() {
        // k=12, p=13: units have x^12 = 1, so the pattern scan can exhaust
        // without finding anything; the count fallback must then decide.
        let f = form(12, &[1, 2, 1]);
        let d = padic_soluble(&f, 13, DEFAULT_NODE_BUDGET).unwrap();
        assert_eq!(d.status, PadicStatus::Insoluble);
        // Same situation but soluble: 1 + 1 - 2 = 0 over twelfth powers of units.
        let g = form(12, &[1, 1, -2]);
        let d = padic_soluble(&g, 13, DEFAULT_NODE_BUDGET).unwrap();
        assert_eq!(d.status, PadicStatus::Soluble);
    }

    #[test]
    fn prime_set_frozen_cutoff() {
        let f = form(3, &[1; 11]);
        let (profile, list) = local_prime_set(&f, PrimeSelection::Rigorous, None).unwrap();
        assert_eq!(profile.cutoff, 6561);
        assert!(list.contains(&6553)); // a prime just under the cutoff
        assert!(!list.iter().any(|&p| p > 6561));
    }

    #[test]
    fn prime_profile_frozen_example() {
        let f = form(3, &[4, 6, 5]);
        let (profile, list) =
            local_prime_set(&f, PrimeSelection::Heuristic, Some(3)).unwrap();
        assert_eq!(profile.shared_primes, vec![2]);
        assert_eq!(profile.profile_primes, vec![2, 3]);
        assert_eq!(profile.product, BigUint::from(6u32));
        assert_eq!(profile.product_dagger, BigUint::from(12u32));
        assert_eq!(profile.product_small, BigUint::from(6u32));
        assert_eq!(profile.product_shared_large, BigUint::one());
        assert_eq!(profile.l_map[&2], 2);
        assert_eq!(profile.l_map[&3], 1);
        // 5 divides a coefficient, so the test list includes it.
        assert_eq!(list, vec![2, 3, 5]);
    }

    #[test]
    fn profile_product_identity_holds() {
        let mut rng = SeededStream::new(30, 0).rng();
        for _ in 0..40 {
            let s = rng.random_range(2..=5usize);
            let coeffs: Vec<i64> = (0..s).map(|_| rng.random_range(1..=60i64)).collect();
            let f = form(3, &coeffs);
            let (profile, list) =
                local_prime_set(&f, PrimeSelection::Heuristic, Some(10)).unwrap();
            assert_eq!(
                profile.product,
                &profile.product_small * &profile.product_shared_large
            );
            for &p in &profile.shared_primes {
                assert!(list.contains(&p));
            }
        }
    }

    #[test]
    fn report_finds_the_seven_adic_obstruction() {
        let f = form(3, &[1, -2, 7, -14]);
        let report = local_report(&f, &LocalOptions::default()).unwrap();
        assert!(report.real_soluble);
        assert_eq!(
            report.overall,
            OverallVerdict::LocallyInsoluble(Obstruction::Prime(7))
        );
        // Verdicts are ordered by prime.
        let ps: Vec<u64> = report.prime_verdicts.iter().map(|v| v.p).collect();
        let mut sorted = ps.clone();
        sorted.sort_unstable();
        assert_eq!(ps, sorted);
    }

    #[test]
    fn report_finds_the_real_obstruction() {
        let f = form(4, &[1, 2, 3]);
        let report = local_report(&f, &LocalOptions::default()).unwrap();
        assert_eq!(
            report.overall,
            OverallVerdict::LocallyInsoluble(Obstruction::RealPlace)
        );
    }

    #[test]
    fn many_variables_are_locally_soluble() {
        // With s = 10 > k^2 = 9, every form is p-adically soluble everywhere.
        let mut rng = SeededStream::new(44, 0).rng();
        for _ in 0..3 {
            let coeffs: Vec<i64> = (0..10)
                .map(|_| {
                    let c = rng.random_range(1..=50i64);
                    if rng.random_bool(0.5) {
                        -c
                    } else {
                        c
                    }
                })
                .collect();
            let f = form(3, &coeffs);
            let report = local_report(&f, &LocalOptions::default()).unwrap();
            assert_eq!(report.overall, OverallVerdict::LocallySoluble, "f={f}");
        }
    }

    #[test]
    fn certificate_frozen_toy_value() {
        let f = form(3, &[1, 1, 1, -1]);
        let opts = LocalOptions {
            mode: PrimeSelection::Heuristic,
            cap: Some(3),
            ..LocalOptions::default()
        };
        let (profile, _) = local_prime_set(&f, PrimeSelection::Heuristic, Some(3)).unwrap();
        let report = local_report(&f, &opts).unwrap();
        let cert = series_lower_certificate(&f, &profile, &report).unwrap();
        // 1/2 * 2^{-6} * 3^{-9} = 1/2519424 ~ 3.97e-7.
        let expected = BigRational::new(BigInt::one(), BigInt::from(2519424u64));
        assert_eq!(cert.value.unwrap(), expected);
        assert!((cert.log10.unwrap() - (3.97e-7f64).log10()).abs() < 0.01);
    }

    #[test]
    fn certificate_absent_for_insoluble_forms() {
        let f = form(3, &[1, -2, 7, -14]);
        let (profile, _) = local_prime_set(&f, PrimeSelection::Rigorous, None).unwrap();
        let report = local_report(&f, &LocalOptions::default()).unwrap();
        let cert = series_lower_certificate(&f, &profile, &report).unwrap();
        assert!(cert.value.is_none());
        assert!(cert.note.unwrap().contains("7"));
    }
}
