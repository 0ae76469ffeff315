//! Exact solution counting and search.
//!
//! Everything here returns exact integers — no sampling, no floats. The
//! solution counter runs meet-in-the-middle against a naive full scan kept
//! as a public oracle; the pair counters `xi`/`upsilon`/`p` follow the
//! coefficient-lattice route and are cross-checked against independent
//! enumeration strategies in the tests.

use crate::forms::DiagonalForm;
use crate::lattice::coefficient_lattice;
use crate::{Error, Result};
use std::collections::HashMap;

/// Default cap on meet-in-the-middle table entries (and, conservatively,
/// on the streamed half as well).
pub const DEFAULT_TABLE_CAP: u64 = 10_000_000;

/// Default cap on candidate points per lattice box enumeration inside
/// `xi_count` (larger than the general-purpose lattice default because a
/// single Ξ evaluation legitimately visits big boxes).
pub const XI_BOX_CAP: u64 = 200_000_000;

/// Which vectors count as solutions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CountMode {
    /// Every coordinate nonzero: `1 ≤ |x_j| ≤ B`.
    AllCoordsNonzero,
    /// The vector is nonzero but zero coordinates are allowed: `0 < |x| ≤ B`.
    VectorNonzero,
}

impl CountMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            CountMode::AllCoordsNonzero => "all_coords_nonzero",
            CountMode::VectorNonzero => "vector_nonzero",
        }
    }
}

/// Outcome of an iterative-deepening smallest-solution search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchOutcome {
    /// Witness vector and its sup-norm, when a shell contained a solution.
    pub found: Option<(Vec<i64>, u64)>,
    /// Largest sup-norm bound fully verified: every shell up to and
    /// including this one was searched (the witness shell, when found).
    pub exhausted_up_to: u64,
}

impl SearchOutcome {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "found": self.found.as_ref().map(|(w, norm)| serde_json::json!({
                "witness": w,
                "norm": norm,
            })),
            "exhausted_up_to": self.exhausted_up_to,
        })
    }
}

/// The per-coordinate value range for a mode: descending, so streamed
/// enumerations visit lexicographically greatest tuples first.
fn coordinate_values(bound: u64, mode: CountMode) -> Vec<i64> {
    let b = bound as i64;
    match mode {
        CountMode::AllCoordsNonzero => (1..=b).rev().chain((-b..=-1).rev()).collect(),
        CountMode::VectorNonzero => (-b..=b).rev().collect(),
    }
}

/// `a_j * v^k` for every admissible coordinate value `v`, with overflow
/// checked once here so the enumeration loops stay panic-free.
fn value_table(coeff: i64, k: u32, values: &[i64]) -> Result<Vec<(i64, i128)>> {
    values
        .iter()
        .map(|&v| {
            let pow = (v as i128).checked_pow(k).ok_or_else(|| {
                Error::resource(format!("{v}^{k} overflows the exact integer width"))
            })?;
            let term = (coeff as i128)
                .checked_mul(pow)
                .ok_or_else(|| Error::resource("coefficient times power overflows"))?;
            Ok((v, term))
        })
        .collect()
}

fn checked_pow_u64(base: u64, exp: u32, what: &str) -> Result<u64> {
    base.checked_pow(exp)
        .ok_or_else(|| Error::resource(format!("{what} overflows a 64-bit budget check")))
}

/// Exact number of solutions of `form = 0` in the box `|x_j| ≤ B` under
/// the mode's convention, by meet-in-the-middle over the two coordinate
/// halves.
pub fn count_solutions(form: &DiagonalForm, bound: u64, mode: CountMode) -> Result<u64> {
    count_solutions_with_cap(form, bound, mode, DEFAULT_TABLE_CAP)
}

pub fn count_solutions_with_cap(
    form: &DiagonalForm,
    bound: u64,
    mode: CountMode,
    cap: u64,
) -> Result<u64> {
    if bound < 1 {
        return Err(Error::domain("solution box bound must be at least 1"));
    }
    let s = form.s();
    let per_coord = match mode {
        CountMode::AllCoordsNonzero => 2 * bound,
        CountMode::VectorNonzero => 2 * bound + 1,
    };
    let stream_half = s.div_ceil(2);
    let estimated = checked_pow_u64(per_coord, stream_half as u32, "meet-in-the-middle table")?;
    if estimated > cap {
        return Err(Error::resource(format!(
            "meet-in-the-middle needs an estimated table of {estimated} entries \
             (cap {cap}); shrink B or s"
        )));
    }
    let values = coordinate_values(bound, mode);
    let tables: Vec<Vec<(i64, i128)>> = form
        .coeffs()
        .iter()
        .map(|&a| value_table(a, form.k(), &values))
        .collect::<Result<_>>()?;
    // Table over the trailing (smaller) half, streamed leading half.
    let (lead, trail) = tables.split_at(stream_half);
    let mut trail_sums: HashMap<i128, u64> = HashMap::new();
    collect_half_sums(trail, 0, 0, &mut |sum| {
        *trail_sums.entry(sum).or_insert(0) += 1;
    });
    // The total is bounded by (streamed half) x (largest bucket), well
    // inside u128; convert back down at the end.
    let mut total: u128 = 0;
    collect_half_sums(lead, 0, 0, &mut |sum| {
        if let Some(&n) = trail_sums.get(&-sum) {
            total += n as u128;
        }
    });
    if mode == CountMode::VectorNonzero {
        total -= 1; // the all-zero vector always pairs with itself
    }
    u64::try_from(total).map_err(|_| Error::resource("solution count overflows u64"))
}

/// Depth-first accumulation of `Σ a_j x_j^k` over one coordinate half,
/// visiting values in the tables' (descending) order.
fn collect_half_sums(
    tables: &[Vec<(i64, i128)>],
    level: usize,
    acc: i128,
    sink: &mut impl FnMut(i128),
) {
    if level == tables.len() {
        sink(acc);
        return;
    }
    for &(_, term) in &tables[level] {
        // Partial sums of i128-checked terms cannot overflow in practice
        // (each term passed the width check; s ≤ 64 keeps the sum far from
        // the i128 edge), but saturate defensively anyway.
        collect_half_sums(tables, level + 1, acc.saturating_add(term), sink);
    }
}

/// Naive full-box enumeration: the independent oracle for the
/// meet-in-the-middle counter. Same contract, exponential cost.
pub fn count_solutions_naive(form: &DiagonalForm, bound: u64, mode: CountMode) -> Result<u64> {
    if bound < 1 {
        return Err(Error::domain("solution box bound must be at least 1"));
    }
    let per_coord = match mode {
        CountMode::AllCoordsNonzero => 2 * bound,
        CountMode::VectorNonzero => 2 * bound + 1,
    };
    let work = checked_pow_u64(per_coord, form.s() as u32, "naive enumeration")?;
    if work > DEFAULT_TABLE_CAP {
        return Err(Error::resource(format!(
            "naive enumeration would scan {work} tuples (cap {DEFAULT_TABLE_CAP})"
        )));
    }
    let values = coordinate_values(bound, mode);
    let tables: Vec<Vec<(i64, i128)>> = form
        .coeffs()
        .iter()
        .map(|&a| value_table(a, form.k(), &values))
        .collect::<Result<_>>()?;
    let mut total = 0u64;
    collect_half_sums(&tables, 0, 0, &mut |sum| {
        if sum == 0 {
            total += 1;
        }
    });
    if mode == CountMode::VectorNonzero {
        total -= 1;
    }
    Ok(total)
}

/// Iterative-deepening search for a nonzero solution of smallest sup-norm.
///
/// Shells `m = 1, 2, ..., b_max` are checked with the meet-in-the-middle
/// table; the first nonempty shell yields a witness. Tuples are visited in
/// descending coordinate order, so the reported witness is deterministic:
/// the lexicographically greatest solution in its shell.
pub fn smallest_solution(form: &DiagonalForm, b_max: u64) -> Result<SearchOutcome> {
    smallest_solution_with_cap(form, b_max, DEFAULT_TABLE_CAP)
}

pub fn smallest_solution_with_cap(
    form: &DiagonalForm,
    b_max: u64,
    cap: u64,
) -> Result<SearchOutcome> {
    if b_max < 1 {
        return Err(Error::domain("search ceiling must be at least 1"));
    }
    let s = form.s();
    let stream_half = s.div_ceil(2);
    for m in 1..=b_max {
        let estimated = checked_pow_u64(2 * m + 1, stream_half as u32, "shell table")?;
        if estimated > cap {
            return Err(Error::resource(format!(
                "shell {m} needs an estimated table of {estimated} entries (cap {cap}); \
                 shells up to {} were completed with no solution found",
                m - 1
            )));
        }
        if let Some(witness) = shell_witness(form, m)? {
            let norm = witness.iter().map(|&x| x.unsigned_abs()).max().unwrap_or(0);
            debug_assert_eq!(norm, m, "first nonempty shell must own the witness");
            return Ok(SearchOutcome {
                found: Some((witness, norm)),
                exhausted_up_to: m,
            });
        }
    }
    Ok(SearchOutcome {
        found: None,
        exhausted_up_to: b_max,
    })
}

/// First (descending-lex) nonzero solution in the box `|x_j| ≤ m`, or None.
///
/// Shells below `m` are known empty when this is called from the deepening
/// loop, so any hit has sup-norm exactly `m`.
fn shell_witness(form: &DiagonalForm, m: u64) -> Result<Option<Vec<i64>>> {
    let s = form.s();
    let values = coordinate_values(m, CountMode::VectorNonzero);
    let tables: Vec<Vec<(i64, i128)>> = form
        .coeffs()
        .iter()
        .map(|&a| value_table(a, form.k(), &values))
        .collect::<Result<_>>()?;
    let stream_half = s.div_ceil(2);
    let (lead, trail) = tables.split_at(stream_half);
    // For each attainable trailing sum: the first trailing tuple in
    // descending order, plus the first *nonzero* one (needed only when the
    // leading half is all zero, so the witness stays a nonzero vector).
    struct Exemplar {
        first: Vec<i64>,
        first_nonzero: Option<Vec<i64>>,
    }
    let mut exemplars: HashMap<i128, Exemplar> = HashMap::new();
    let mut tuple = vec![0i64; trail.len()];
    collect_half_tuples(trail, 0, 0, &mut tuple, &mut |sum, t| {
        let nonzero = t.iter().any(|&x| x != 0);
        let entry = exemplars.entry(sum).or_insert_with(|| Exemplar {
            first: t.to_vec(),
            first_nonzero: None,
        });
        if nonzero && entry.first_nonzero.is_none() {
            entry.first_nonzero = Some(t.to_vec());
        }
    });
    let mut witness: Option<Vec<i64>> = None;
    let mut tuple = vec![0i64; lead.len()];
    collect_half_tuples(lead, 0, 0, &mut tuple, &mut |sum, t| {
        if witness.is_some() {
            return;
        }
        if let Some(ex) = exemplars.get(&-sum) {
            let lead_nonzero = t.iter().any(|&x| x != 0);
            let trail_part = if lead_nonzero {
                Some(&ex.first)
            } else {
                ex.first_nonzero.as_ref()
            };
            if let Some(trail_part) = trail_part {
                let mut w = t.to_vec();
                w.extend_from_slice(trail_part);
                witness = Some(w);
            }
        }
    });
    Ok(witness)
}

/// Like [`collect_half_sums`] but hands the sink the tuple as well.
/// No early termination: the descending order makes the first match the
/// lexicographically greatest, and callers simply ignore later calls.
fn collect_half_tuples(
    tables: &[Vec<(i64, i128)>],
    level: usize,
    acc: i128,
    tuple: &mut Vec<i64>,
    sink: &mut impl FnMut(i128, &[i64]),
) {
    if level == tables.len() {
        sink(acc, tuple);
        return;
    }
    for &(v, term) in &tables[level] {
        tuple[level] = v;
        collect_half_tuples(tables, level + 1, acc.saturating_add(term), tuple, sink);
    }
}

// ---------------------------------------------------------------------------
// Pair counters over coefficient boxes
// ---------------------------------------------------------------------------

/// Ξ(A, B): the number of pairs `(a, x)` with every `a_j` nonzero in
/// `[-A, A]`, `x ≠ 0` in `[-B, B]^s`, and `Σ a_j x_j^k = 0`.
///
/// Per x, the admissible `a` form the coefficient lattice of `x`; the
/// all-coordinates-nonzero constraint is resolved by inclusion–exclusion
/// over the coordinates forced to zero. Classes of x equivalent under
/// permutations and sign flips of coordinates share one lattice count.
pub fn xi_count(k: u32, s: u32, a_bound: u64, b_bound: u64) -> Result<u64> {
    if s == 0 {
        return Err(Error::domain("dimension s must be at least 1"));
    }
    if a_bound == 0 || b_bound == 0 {
        return Err(Error::domain("coefficient and solution boxes need A, B >= 1"));
    }
    if k == 0 {
        return Err(Error::domain("degree k must be at least 1"));
    }
    // Enumerate |x|-classes: multisets of absolute values in [0, B]^s.
    // Each class stands for s! / (multiplicities) permutations times
    // 2^{#nonzero coords} sign choices, all with the same lattice count.
    let mut class: Vec<u64> = vec![0; s as usize];
    let mut total: u64 = 0;
    let mut cache: HashMap<Vec<u64>, u64> = HashMap::new();
    xi_class_dfs(
        k,
        s,
        a_bound,
        b_bound,
        0,
        0,
        &mut class,
        &mut cache,
        &mut total,
    )?;
    Ok(total)
}

#[allow(clippy::too_many_arguments)]
fn xi_class_dfs(
    k: u32,
    s: u32,
    a_bound: u64,
    b_bound: u64,
    level: usize,
    min_value: u64,
    class: &mut Vec<u64>,
    cache: &mut HashMap<Vec<u64>, u64>,
    total: &mut u64,
) -> Result<()> {
    if level == s as usize {
        if class.iter().all(|&v| v == 0) {
            return Ok(()); // x = 0 excluded
        }
        let per_class = match cache.get(class.as_slice()) {
            Some(&n) => n,
            None => {
                let n = nonzero_coefficient_solutions(k, class, a_bound)?;
                cache.insert(class.clone(), n);
                n
            }
        };
        if per_class == 0 {
            return Ok(());
        }
        // Multiplicity of this nondecreasing |x|-class: distinct
        // permutations times 2 for the sign of each nonzero coordinate.
        let mut perms: u64 = 1;
        for i in 1..=s as u64 {
            perms = perms
                .checked_mul(i)
                .ok_or_else(|| Error::resource("class multiplicity overflows"))?;
        }
        let mut run = 1u64;
        for i in 1..class.len() {
            if class[i] == class[i - 1] {
                run += 1;
                perms /= run;
            } else {
                run = 1;
            }
        }
        let signs = 1u64 << class.iter().filter(|&&v| v != 0).count();
        let contribution = per_class
            .checked_mul(perms)
            .and_then(|v| v.checked_mul(signs))
            .ok_or_else(|| Error::resource("pair count overflows u64"))?;
        *total = total
            .checked_add(contribution)
            .ok_or_else(|| Error::resource("pair count overflows u64"))?;
        return Ok(());
    }
    for v in min_value..=b_bound {
        class[level] = v;
        xi_class_dfs(k, s, a_bound, b_bound, level + 1, v, class, cache, total)?;
    }
    class[level] = 0;
    Ok(())
}

/// Division-free factorial-run bookkeeping above relies on the class being
/// nondecreasing; this helper counts `a` with all coordinates nonzero in
/// `[-A, A]` and `Σ a_j x_j^k = 0` for a representative x of the class.
fn nonzero_coefficient_solutions(k: u32, x_abs: &[u64], a_bound: u64) -> Result<u64> {
    let zero_coords = x_abs.iter().filter(|&&v| v == 0).count();
    let nonzero: Vec<i64> = x_abs
        .iter()
        .filter(|&&v| v != 0)
        .map(|&v| {
            i64::try_from(v).map_err(|_| Error::resource("coordinate exceeds i64"))
        })
        .collect::<Result<_>>()?;
    // Coordinates with x_j = 0 put no constraint on a_j: each contributes
    // a free factor of 2A nonzero choices.
    let mut free_factor = 1u64;
    for _ in 0..zero_coords {
        free_factor = free_factor
            .checked_mul(2 * a_bound)
            .ok_or_else(|| Error::resource("free-coordinate factor overflows"))?;
    }
    if nonzero.is_empty() {
        return Ok(0); // callers exclude x = 0 before getting here
    }
    let n = nonzero.len();
    // Inclusion–exclusion over the subset of constrained coordinates whose
    // a_j is forced to zero; each term is a lattice box count. The signed
    // partial sums may dip negative mid-way, so accumulate in i128.
    let mut constrained: i128 = 0;
    for mask in 0u32..(1 << n) {
        let kept: Vec<i64> = (0..n)
            .filter(|&j| mask & (1 << j) == 0)
            .map(|j| nonzero[j])
            .collect();
        let term = if kept.is_empty() {
            1 // only a = 0 on the constrained block
        } else {
            let lattice = coefficient_lattice(&kept, k)?;
            let points = lattice.enumerate_box(a_bound as i128, XI_BOX_CAP)?;
            points.len() as i128
        };
        if mask.count_ones() % 2 == 1 {
            constrained -= term;
        } else {
            constrained += term;
        }
    }
    let constrained = u64::try_from(constrained)
        .map_err(|_| Error::numerical("inclusion-exclusion produced a negative count"))?;
    constrained
        .checked_mul(free_factor)
        .ok_or_else(|| Error::resource("pair count overflows u64"))
}

/// Υ_t(A, B): pairs of solutions sharing one coefficient vector —
/// `Σ_a ϱ_a(B)^2` over all `a` with nonzero coordinates in `[-A, A]`,
/// where ϱ counts solutions with every `1 ≤ |x_j| ≤ B`.
pub fn upsilon_count(k: u32, t: u32, a_bound: u64, b_bound: u64) -> Result<u64> {
    if t == 0 {
        return Err(Error::domain("block count t must be at least 1"));
    }
    let s = 2 * t;
    let vectors = checked_pow_u64(2 * a_bound, s, "coefficient enumeration")?;
    if vectors > 10_000_000 {
        return Err(Error::resource(format!(
            "enumerating {vectors} coefficient vectors exceeds the budget"
        )));
    }
    let mut coeffs = vec![0i64; s as usize];
    let mut total = 0u64;
    upsilon_dfs(k, a_bound, b_bound, 0, &mut coeffs, &mut total)?;
    Ok(total)
}

fn upsilon_dfs(
    k: u32,
    a_bound: u64,
    b_bound: u64,
    level: usize,
    coeffs: &mut Vec<i64>,
    total: &mut u64,
) -> Result<()> {
    if level == coeffs.len() {
        let form = DiagonalForm::new(k, coeffs.clone())?;
        let count = count_solutions(&form, b_bound, CountMode::AllCoordsNonzero)?;
        let square = count
            .checked_mul(count)
            .ok_or_else(|| Error::resource("squared count overflows u64"))?;
        *total = total
            .checked_add(square)
            .ok_or_else(|| Error::resource("upsilon count overflows u64"))?;
        return Ok(());
    }
    let a = a_bound as i64;
    for v in (1..=a).chain(-a..=-1) {
        coeffs[level] = v;
        upsilon_dfs(k, a_bound, b_bound, level + 1, coeffs, total)?;
    }
    Ok(())
}

/// P(A, B): the number of coefficient vectors (nonzero coordinates in
/// `[-A, A]`) whose form has a nonzero solution with sup-norm ≤ B.
pub fn p_count(k: u32, s: u32, a_bound: u64, b_bound: u64) -> Result<u64> {
    if s == 0 {
        return Err(Error::domain("dimension s must be at least 1"));
    }
    let vectors = checked_pow_u64(2 * a_bound, s, "coefficient enumeration")?;
    if vectors > 10_000_000 {
        return Err(Error::resource(format!(
            "enumerating {vectors} coefficient vectors exceeds the budget"
        )));
    }
    let mut coeffs = vec![0i64; s as usize];
    let mut total = 0u64;
    p_dfs(k, a_bound, b_bound, 0, &mut coeffs, &mut total)?;
    Ok(total)
}

fn p_dfs(
    k: u32,
    a_bound: u64,
    b_bound: u64,
    level: usize,
    coeffs: &mut Vec<i64>,
    total: &mut u64,
) -> Result<()> {
    if level == coeffs.len() {
        let form = DiagonalForm::new(k, coeffs.clone())?;
        if count_solutions(&form, b_bound, CountMode::VectorNonzero)? > 0 {
            *total += 1;
        }
        return Ok(());
    }
    let a = a_bound as i64;
    for v in (1..=a).chain(-a..=-1) {
        coeffs[level] = v;
        p_dfs(k, a_bound, b_bound, level + 1, coeffs, total)?;
    }
    Ok(())
}

/// Pairs `(u, v)` with `|u|, |v| ≤ B` (zeros included) and
/// `u^k ≡ v^k (mod d)`: bucket the residues once, then sum the squared
/// bucket sizes.
pub fn congruent_power_pairs(b_bound: u64, d: u64, k: u32) -> Result<u64> {
    if d == 0 {
        return Err(Error::domain("modulus d must be at least 1"));
    }
    if d > 100_000_000 {
        return Err(Error::resource("residue table for d > 1e8 exceeds the budget"));
    }
    if b_bound > 1_000_000_000 {
        return Err(Error::resource("scanning |u| <= B for B > 1e9 exceeds the budget"));
    }
    let mut histogram: HashMap<u64, u64> = HashMap::new();
    for u in -(b_bound as i64)..=(b_bound as i64) {
        let residue = crate::arith::mod_pow_signed(u, k as u64, d);
        *histogram.entry(residue).or_insert(0) += 1;
    }
    let mut total = 0u64;
    for &n in histogram.values() {
        total = total
            .checked_add(n.checked_mul(n).ok_or_else(|| {
                Error::resource("pair count overflows u64")
            })?)
            .ok_or_else(|| Error::resource("pair count overflows u64"))?;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::SeededStream;
    use crate::forms::{adversarial_ab, adversarial_pq};
    use rand::Rng;

    fn form(k: u32, coeffs: &[i64]) -> DiagonalForm {
        DiagonalForm::new(k, coeffs.to_vec()).unwrap()
    }

    fn random_form(rng: &mut impl Rng, k: u32, s: usize, height: i64) -> DiagonalForm {
        let coeffs: Vec<i64> = (0..s)
            .map(|_| {
                let c = rng.random_range(1..=height);
                if rng.random_bool(0.5) {
                    -c
                } else {
                    c
                }
            })
            .collect();
        form(k, &coeffs)
    }

    #[test]
    fn count_frozen_pairs() {
        // x1^3 = x2^3 forces x1 = x2; six nonzero choices in |x| <= 3.
        assert_eq!(
            count_solutions(&form(3, &[1, -1]), 3, CountMode::AllCoordsNonzero).unwrap(),
            6
        );
        // x1^3 = -x2^3 similarly.
        assert_eq!(
            count_solutions(&form(3, &[1, 1]), 3, CountMode::AllCoordsNonzero).unwrap(),
            6
        );
        // x1^3 = -2 x2^3 has no rational point at all.
        for mode in [CountMode::AllCoordsNonzero, CountMode::VectorNonzero] {
            assert_eq!(count_solutions(&form(3, &[1, 2]), 5, mode).unwrap(), 0);
        }
    }

    #[test]
    fn count_rejects_out_of_budget_boxes() {
        let f = form(3, &[1, -1, 1, -1, 1, -1, 1, -1, 1, -1]);
        let err = count_solutions(&f, 100, CountMode::VectorNonzero).unwrap_err();
        match err {
            Error::Resource(msg) => assert!(msg.contains("table")),
            other => panic!("expected resource error, got {other:?}"),
        }
        assert!(count_solutions(&f, 0, CountMode::VectorNonzero).is_err());
    }

    #[test]
    fn mitm_matches_naive_enumeration() {
        let mut rng = SeededStream::new(81, 0).rng();
        for _ in 0..30 {
            let k = rng.random_range(2..=4u32);
            let s = rng.random_range(2..=4usize);
            let b = rng.random_range(1..=5u64);
            let f = random_form(&mut rng, k, s, 6);
            for mode in [CountMode::AllCoordsNonzero, CountMode::VectorNonzero] {
                let fast = count_solutions(&f, b, mode).unwrap();
                let slow = count_solutions_naive(&f, b, mode).unwrap();
                assert_eq!(fast, slow, "f={f} B={b} mode={}", mode.as_str());
            }
        }
    }

    #[test]
    fn counts_are_even_and_permutation_invariant() {
        let mut rng = SeededStream::new(82, 0).rng();
        for _ in 0..20 {
            let f = random_form(&mut rng, 3, 3, 5);
            let count = count_solutions(&f, 4, CountMode::VectorNonzero).unwrap();
            assert_eq!(count % 2, 0, "solutions pair x with -x; f={f}");
            let mut permuted = f.coeffs().to_vec();
            permuted.reverse();
            let g = form(3, &permuted);
            assert_eq!(
                count,
                count_solutions(&g, 4, CountMode::VectorNonzero).unwrap()
            );
        }
    }

    #[test]
    fn smallest_solution_frozen_witnesses() {
        // x1^4 + x2^4 = 17 (x3^4 + x4^4): nothing at norm 1, and the
        // descending scan reaches (2,1,1,0) first at norm 2.
        let f = adversarial_ab(4, 2, 1, 17).unwrap();
        let outcome = smallest_solution(&f, 4).unwrap();
        let (witness, norm) = outcome.found.unwrap();
        assert_eq!(norm, 2);
        assert_eq!(witness, vec![2, 1, 1, 0]);
        // The 7-adic obstruction keeps every box up to 6 empty.
        let g = adversarial_pq(3, 2, 7).unwrap();
        let outcome = smallest_solution(&g, 6).unwrap();
        assert!(outcome.found.is_none());
        assert_eq!(outcome.exhausted_up_to, 6);
        // A form with unit solutions is settled in the first shell.
        let h = form(3, &[1, -1, 1, -1]);
        let outcome = smallest_solution(&h, 3).unwrap();
        let (witness, norm) = outcome.found.unwrap();
        assert_eq!(norm, 1);
        assert_eq!(f_eval(&h, &witness), 0);
    }

    fn f_eval(f: &DiagonalForm, x: &[i64]) -> i128 {
        f.evaluate(x).unwrap()
    }

    #[test]
    fn smallest_solution_witnesses_are_minimal() {
        let mut rng = SeededStream::new(83, 0).rng();
        let mut found_some = 0;
        for _ in 0..40 {
            let f = random_form(&mut rng, 3, 4, 8);
            let outcome = smallest_solution(&f, 4).unwrap();
            if let Some((witness, norm)) = outcome.found {
                found_some += 1;
                assert_eq!(f_eval(&f, &witness), 0);
                assert!(witness.iter().any(|&x| x != 0));
                assert_eq!(
                    witness.iter().map(|&x| x.unsigned_abs()).max().unwrap(),
                    norm
                );
                if norm > 1 {
                    assert_eq!(
                        count_solutions(&f, norm - 1, CountMode::VectorNonzero).unwrap(),
                        0,
                        "a smaller shell still contains solutions for {f}"
                    );
                }
            }
        }
        assert!(found_some > 10, "sample too degenerate: {found_some}");
    }

    #[test]
    fn xi_frozen_small_value() {
        // k=3, s=2, A=2, B=1: only x with both coordinates nonzero admit
        // nonzero coefficient pairs; 4 sign patterns of x, each with 4
        // coefficient solutions a1 = -(x1/x2)^3 a2 in the box.
        assert_eq!(xi_count(3, 2, 2, 1).unwrap(), 16);
        assert!(xi_count(3, 2, 2, 0).is_err());
    }

    /// Independent oracle for Ξ: per x, count admissible coefficient
    /// vectors by dynamic programming over the partial sums `Σ a_j x_j^k`
    /// (a sliding-window convolution per coordinate) — no lattice code.
    fn xi_stride_oracle(k: u32, s: u32, a_bound: u64, b_bound: u64) -> u64 {
        let b = b_bound as i64;
        let mut total = 0u64;
        let mut x = vec![0i64; s as usize];
        fn rec(x: &mut Vec<i64>, level: usize, b: i64, k: u32, a_bound: u64, total: &mut u64) {
            if level == x.len() {
                if x.iter().all(|&v| v == 0) {
                    return;
                }
                *total += coefficient_vectors_dp(x, k, a_bound);
                return;
            }
            for v in -b..=b {
                x[level] = v;
                rec(x, level + 1, b, k, a_bound, total);
            }
        }
        rec(&mut x, 0, b, k, a_bound, &mut total);
        total
    }

    /// #{a : all a_j nonzero in [-A, A], Σ a_j x_j^k = 0} by value-space DP.
    fn coefficient_vectors_dp(x: &[i64], k: u32, a_bound: u64) -> u64 {
        let a = a_bound as i64;
        let coeffs: Vec<i128> = x.iter().map(|&v| (v as i128).pow(k)).collect();
        let reach: i128 = coeffs.iter().map(|c| c.abs() * a as i128).sum();
        let size = (2 * reach + 1) as usize;
        let offset = reach;
        let mut dist = vec![0u64; size];
        dist[offset as usize] = 1;
        for &c in &coeffs {
            let mut next = vec![0u64; size];
            for (i, &n) in dist.iter().enumerate() {
                if n == 0 {
                    continue;
                }
                let base = i as i128 - offset;
                for aj in 1..=a as i128 {
                    for signed in [aj, -aj] {
                        let v = base + signed * c;
                        if v.abs() <= reach {
                            next[(v + offset) as usize] += n;
                        }
                    }
                }
            }
            dist = next;
        }
        dist[offset as usize]
    }

    #[test]
    fn xi_matches_the_dp_oracle() {
        for (k, s, a, b) in [(3u32, 2u32, 2u64, 1u64), (3, 2, 3, 2), (3, 3, 2, 1), (2, 3, 3, 1), (3, 3, 4, 2)] {
            assert_eq!(
                xi_count(k, s, a, b).unwrap(),
                xi_stride_oracle(k, s, a, b),
                "k={k} s={s} A={a} B={b}"
            );
        }
    }

    #[test]
    fn upsilon_frozen_and_monotone() {
        // t=1, A=1, B=1: each of the four coefficient pairs has exactly
        // two all-nonzero solutions, so Σ ϱ² = 4·4 = 16.
        assert_eq!(upsilon_count(3, 1, 1, 1).unwrap(), 16);
        assert!(upsilon_count(3, 1, 1, 1).unwrap() <= upsilon_count(3, 1, 2, 1).unwrap());
        assert!(upsilon_count(3, 1, 1, 1).unwrap() <= upsilon_count(3, 1, 1, 2).unwrap());
    }

    #[test]
    fn upsilon_matches_triple_loop_brute_force() {
        // Independent oracle: enumerate (a, x, y) outright and count the
        // pairs of simultaneous solutions.
        let (k, t, a_bound, b_bound) = (3u32, 2u32, 2u64, 2u64);
        let s = (2 * t) as usize;
        let a = a_bound as i64;
        let mut brute = 0u64;
        let mut coeffs = vec![0i64; s];
        fn coeff_rec(
            coeffs: &mut Vec<i64>,
            level: usize,
            a: i64,
            k: u32,
            b_bound: u64,
            brute: &mut u64,
        ) {
            if level == coeffs.len() {
                let f = DiagonalForm::new(k, coeffs.clone()).unwrap();
                let mut roots = 0u64;
                let b = b_bound as i64;
                let mut x = vec![0i64; coeffs.len()];
                fn x_rec(f: &DiagonalForm, x: &mut Vec<i64>, level: usize, b: i64, roots: &mut u64) {
                    if level == x.len() {
                        if f.evaluate(x).unwrap() == 0 {
                            *roots += 1;
                        }
                        return;
                    }
                    for v in (1..=b).chain(-b..=-1) {
                        x[level] = v;
                        x_rec(f, x, level + 1, b, roots);
                    }
                }
                x_rec(&f, &mut x, 0, b, &mut roots);
                *brute += roots * roots;
                return;
            }
            for v in (1..=a).chain(-a..=-1) {
                coeffs[level] = v;
                coeff_rec(coeffs, level + 1, a, k, b_bound, brute);
            }
        }
        coeff_rec(&mut coeffs, 0, a, k, b_bound, &mut brute);
        assert_eq!(upsilon_count(k, t, a_bound, b_bound).unwrap(), brute);
    }

    #[test]
    fn p_count_frozen_and_dominated_by_xi() {
        // k=3, s=2, A=2, B=1: exactly the vectors (a, ±a).
        assert_eq!(p_count(3, 2, 2, 1).unwrap(), 8);
        for (k, s, a, b) in [(3u32, 2u32, 2u64, 1u64), (3, 2, 3, 2), (3, 3, 2, 1)] {
            assert!(p_count(k, s, a, b).unwrap() <= xi_count(k, s, a, b).unwrap());
        }
        assert!(p_count(3, 2, 2, 1).unwrap() <= p_count(3, 2, 2, 2).unwrap());
    }

    #[test]
    fn power_pair_counts() {
        // d = 1: every pair is congruent.
        assert_eq!(congruent_power_pairs(7, 1, 3).unwrap(), 15 * 15);
        // B=1, d=2, k=3: parity classes give 4 odd-odd pairs plus (0,0).
        assert_eq!(congruent_power_pairs(1, 2, 3).unwrap(), 5);
        // Brute-force cross-check on a small grid.
        for (b, d, k) in [(4u64, 3u64, 2u32), (5, 7, 3), (6, 4, 4), (3, 9, 5)] {
            let mut brute = 0u64;
            for u in -(b as i64)..=(b as i64) {
                for v in -(b as i64)..=(b as i64) {
                    let pu = (u as i128).pow(k).rem_euclid(d as i128);
                    let pv = (v as i128).pow(k).rem_euclid(d as i128);
                    if pu == pv {
                        brute += 1;
                    }
                }
            }
            assert_eq!(congruent_power_pairs(b, d, k).unwrap(), brute, "B={b} d={d} k={k}");
        }
    }

    #[test]
    fn adversarial_witnesses_respect_divisibility() {
        // Every solution of x1^4 + x2^4 = 17(x3^4 + x4^4) up to norm 6 has
        // 17 dividing the first block.
        let f = adversarial_ab(4, 2, 1, 17).unwrap();
        let mut checked = 0;
        for x1 in -6i64..=6 {
            for x2 in -6i64..=6 {
                for x3 in -6i64..=6 {
                    for x4 in -6i64..=6 {
                        let x = [x1, x2, x3, x4];
                        if x.iter().all(|&v| v == 0) {
                            continue;
                        }
                        if f.evaluate(&x).unwrap() == 0 {
                            checked += 1;
                            assert_eq!((x1.pow(4) + x2.pow(4)) % 17, 0, "x={x:?}");
                        }
                    }
                }
            }
        }
        assert!(checked > 0, "the box up to 6 should contain solutions");
    }
}
