//! Exact integer lattices: discriminants, duals, and box enumeration.
//!
//! A [`Lattice`] is a sublattice of `Z^n` given by a linearly independent
//! integer basis. Everything here is exact `i128` arithmetic; overflow
//! surfaces as a resource error rather than a wrong answer.
//!
//! Two quantities drive the rest of the crate:
//!
//! - the squared discriminant, computed from the Gram determinant, with an
//!   independent sum-of-squared-maximal-minors route kept as a self-check;
//! - the gcd of the maximal minors of a basis matrix, which ties a lattice
//!   to its annihilator: `disc2(dual) * minor_gcd^2 = disc2`.
//!
//! The dual here is the integer annihilator `{x : x . y = 0 for all y}`,
//! not the classical rational dual.

use crate::arith::{checked_add_i128, checked_mul_i128, checked_pow_i128, checked_sub_i128};
use crate::{Error, Result};

/// Default cap on the number of candidate points a box enumeration may visit.
pub const DEFAULT_BOX_CAP: u64 = 10_000_000;

/// A sublattice of `Z^n` with a linearly independent basis.
///
/// The basis is stored in canonical (Hermite normal) form: row echelon with
/// positive pivots and entries above each pivot reduced into `[0, pivot)`.
/// Two `Lattice` values are equal as sets exactly when their stored bases
/// are equal componentwise.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lattice {
    ambient_dim: usize,
    basis: Vec<Vec<i128>>,
}

impl Lattice {
    /// Build a lattice from basis vectors inside `Z^ambient_dim`.
    ///
    /// The vectors must be linearly independent (checked exactly via the
    /// Gram determinant); an empty list yields the zero lattice.
    pub fn from_basis(ambient_dim: usize, vectors: Vec<Vec<i128>>) -> Result<Lattice> {
        if ambient_dim == 0 {
            return Err(Error::domain("ambient dimension must be positive"));
        }
        if vectors.len() > ambient_dim {
            return Err(Error::domain(format!(
                "{} basis vectors cannot be independent in dimension {ambient_dim}",
                vectors.len()
            )));
        }
        for v in &vectors {
            if v.len() != ambient_dim {
                return Err(Error::domain(format!(
                    "basis vector has length {}, expected {ambient_dim}",
                    v.len()
                )));
            }
        }
        let gram = gram_matrix(&vectors)?;
        if det_bareiss(gram)? == 0 {
            return Err(Error::domain("basis vectors are linearly dependent"));
        }
        Ok(Lattice {
            ambient_dim,
            basis: hnf_rows(vectors, ambient_dim)?,
        })
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    /// Canonical basis rows (Hermite normal form).
    pub fn basis(&self) -> &[Vec<i128>] {
        &self.basis
    }

    /// Squared discriminant via the Gram determinant.
    ///
    /// Equals the sum of the squared maximal minors of the basis matrix;
    /// [`Lattice::discriminant_squared_by_minors`] recomputes it that way
    /// as an independent self-check. The zero lattice has discriminant 1.
    pub fn discriminant_squared(&self) -> Result<i128> {
        det_bareiss(gram_matrix(&self.basis)?)
    }

    /// Squared discriminant via the sum of squared maximal minors.
    pub fn discriminant_squared_by_minors(&self) -> Result<i128> {
        let r = self.rank();
        if r == 0 {
            return Ok(1);
        }
        let mut total: i128 = 0;
        for cols in subsets(self.ambient_dim, r) {
            let sub: Vec<Vec<i128>> = self
                .basis
                .iter()
                .map(|row| cols.iter().map(|&c| row[c]).collect())
                .collect();
            let d = det_bareiss(sub)?;
            total = checked_add_i128(total, checked_mul_i128(d, d)?)?;
        }
        Ok(total)
    }

    /// Gcd of the absolute values of all maximal minors (1 for rank 0).
    pub fn minor_gcd(&self) -> Result<i128> {
        let r = self.rank();
        if r == 0 {
            return Ok(1);
        }
        let mut g: i128 = 0;
        for cols in subsets(self.ambient_dim, r) {
            let sub: Vec<Vec<i128>> = self
                .basis
                .iter()
                .map(|row| cols.iter().map(|&c| row[c]).collect())
                .collect();
            g = num_integer::gcd(g, det_bareiss(sub)?.abs());
        }
        // Independent rows guarantee at least one nonzero minor.
        debug_assert!(g > 0);
        Ok(g)
    }

    /// The annihilator lattice `{x in Z^n : x . y = 0 for every y here}`.
    pub fn dual_lattice(&self) -> Result<Lattice> {
        let kernel = integer_kernel(&self.basis, self.ambient_dim)?;
        Ok(Lattice {
            ambient_dim: self.ambient_dim,
            basis: hnf_rows(kernel, self.ambient_dim)?,
        })
    }

    /// Does the lattice contain `point`? Exact, via pivot substitution.
    pub fn contains(&self, point: &[i128]) -> Result<bool> {
        if point.len() != self.ambient_dim {
            return Err(Error::domain("point dimension mismatch"));
        }
        let mut residue: Vec<i128> = point.to_vec();
        for row in &self.basis {
            let j = pivot_col(row);
            if residue[j] % row[j] != 0 {
                return Ok(false);
            }
            let t = residue[j] / row[j];
            for c in 0..self.ambient_dim {
                residue[c] = checked_sub_i128(residue[c], checked_mul_i128(t, row[c])?)?;
            }
        }
        Ok(residue.iter().all(|&x| x == 0))
    }

    /// All lattice points with sup-norm `<= bound`, sorted lexicographically.
    ///
    /// Walks bounded integer combinations of the canonical basis (each pivot
    /// coordinate confines its coefficient to an interval) and filters by
    /// the full sup-norm. Visiting more than `cap` candidates is a resource
    /// error; [`DEFAULT_BOX_CAP`] is the intended default.
    pub fn enumerate_box(&self, bound: i128, cap: u64) -> Result<Vec<Vec<i128>>> {
        if bound < 0 {
            return Err(Error::domain("box bound must be nonnegative"));
        }
        let n = self.ambient_dim;
        let mut out: Vec<Vec<i128>> = Vec::new();
        let mut visited: u64 = 0;
        let mut partial = vec![0i128; n];
        self.box_dfs(0, bound, cap, &mut visited, &mut partial, &mut out)?;
        out.sort();
        Ok(out)
    }

    fn box_dfs(
        &self,
        level: usize,
        bound: i128,
        cap: u64,
        visited: &mut u64,
        partial: &mut Vec<i128>,
        out: &mut Vec<Vec<i128>>,
    ) -> Result<()> {
        if level == self.rank() {
            *visited += 1;
            if *visited > cap {
                return Err(Error::resource(format!(
                    "box enumeration exceeded the cap of {cap} candidate points"
                )));
            }
            if partial.iter().all(|&x| x.abs() <= bound) {
                out.push(partial.clone());
            }
            return Ok(());
        }
        let row = &self.basis[level];
        let j = pivot_col(row);
        let h = row[j]; // positive by canonical form
        let p = partial[j];
        // |p + t*h| <= bound  =>  t in [ceil((-bound-p)/h), floor((bound-p)/h)]
        let lo = div_ceil(-bound - p, h);
        let hi = div_floor(bound - p, h);
        for t in lo..=hi {
            for c in 0..self.ambient_dim {
                partial[c] = checked_add_i128(partial[c], checked_mul_i128(t, row[c])?)?;
            }
            self.box_dfs(level + 1, bound, cap, visited, partial, out)?;
            for c in 0..self.ambient_dim {
                partial[c] -= t * row[c];
            }
        }
        Ok(())
    }
}

/// Annihilator of the single row `(x_1^k, ..., x_s^k)`.
///
/// This is the lattice of coefficient vectors `a` with
/// `a_1 x_1^k + ... + a_s x_s^k = 0`; `x` must be nonzero.
pub fn coefficient_lattice(x: &[i64], k: u32) -> Result<Lattice> {
    if x.is_empty() {
        return Err(Error::domain("need at least one coordinate"));
    }
    if x.iter().all(|&v| v == 0) {
        return Err(Error::domain("coefficient lattice of the zero vector is undefined"));
    }
    if k == 0 {
        return Err(Error::domain("exponent k must be positive"));
    }
    let powers: Vec<i128> = x
        .iter()
        .map(|&v| checked_pow_i128(v as i128, k))
        .collect::<Result<_>>()?;
    Lattice::from_basis(x.len(), vec![powers])?.dual_lattice()
}

// ---------------------------------------------------------------------------
// Exact linear algebra helpers
// ---------------------------------------------------------------------------

fn pivot_col(row: &[i128]) -> usize {
    row.iter()
        .position(|&x| x != 0)
        .expect("canonical basis rows are nonzero")
}

fn div_floor(a: i128, b: i128) -> i128 {
    num_integer::Integer::div_floor(&a, &b)
}

fn div_ceil(a: i128, b: i128) -> i128 {
    num_integer::Integer::div_ceil(&a, &b)
}

fn gram_matrix(rows: &[Vec<i128>]) -> Result<Vec<Vec<i128>>> {
    let r = rows.len();
    let mut g = vec![vec![0i128; r]; r];
    for i in 0..r {
        for j in i..r {
            let mut acc: i128 = 0;
            for t in 0..rows[i].len() {
                acc = checked_add_i128(acc, checked_mul_i128(rows[i][t], rows[j][t])?)?;
            }
            g[i][j] = acc;
            g[j][i] = acc;
        }
    }
    Ok(g)
}

/// Exact determinant by Bareiss fraction-free elimination.
fn det_bareiss(mut m: Vec<Vec<i128>>) -> Result<i128> {
    let n = m.len();
    if n == 0 {
        return Ok(1);
    }
    let mut sign = 1i128;
    let mut prev = 1i128;
    for i in 0..n - 1 {
        if m[i][i] == 0 {
            match (i + 1..n).find(|&r| m[r][i] != 0) {
                Some(r) => {
                    m.swap(i, r);
                    sign = -sign;
                }
                None => return Ok(0),
            }
        }
        for r in i + 1..n {
            for c in i + 1..n {
                let num = checked_sub_i128(
                    checked_mul_i128(m[r][c], m[i][i])?,
                    checked_mul_i128(m[r][i], m[i][c])?,
                )?;
                m[r][c] = num / prev; // exact division in Bareiss elimination
            }
            m[r][i] = 0;
        }
        prev = m[i][i];
    }
    Ok(sign * m[n - 1][n - 1])
}

/// Row-style Hermite normal form: echelon, positive pivots, entries above
/// each pivot reduced into `[0, pivot)`. Unimodular row operations only, so
/// the row lattice is preserved; the result is the canonical basis.
fn hnf_rows(mut rows: Vec<Vec<i128>>, n: usize) -> Result<Vec<Vec<i128>>> {
    let mut pivot_row = 0;
    for col in 0..n {
        // Euclid-reduce entries of this column below pivot_row to a single gcd.
        loop {
            let mut best: Option<usize> = None;
            for r in pivot_row..rows.len() {
                if rows[r][col] != 0
                    && best.is_none_or(|b| rows[r][col].abs() < rows[b][col].abs())
                {
                    best = Some(r);
                }
            }
            let Some(b) = best else { break };
            rows.swap(pivot_row, b);
            let mut done = true;
            let head = rows[pivot_row][col];
            for r in pivot_row + 1..rows.len() {
                if rows[r][col] != 0 {
                    let q = div_floor(rows[r][col], head);
                    row_submul(&mut rows, r, pivot_row, q)?;
                    if rows[r][col] != 0 {
                        done = false;
                    }
                }
            }
            if done {
                break;
            }
        }
        if pivot_row < rows.len() && rows[pivot_row][col] != 0 {
            if rows[pivot_row][col] < 0 {
                for c in 0..n {
                    rows[pivot_row][c] = -rows[pivot_row][c];
                }
            }
            let head = rows[pivot_row][col];
            for r in 0..pivot_row {
                let q = div_floor(rows[r][col], head);
                if q != 0 {
                    row_submul(&mut rows, r, pivot_row, q)?;
                }
            }
            pivot_row += 1;
        }
    }
    rows.truncate(pivot_row);
    Ok(rows)
}

fn row_submul(rows: &mut [Vec<i128>], r: usize, src: usize, q: i128) -> Result<()> {
    for c in 0..rows[r].len() {
        rows[r][c] = checked_sub_i128(rows[r][c], checked_mul_i128(q, rows[src][c])?)?;
    }
    Ok(())
}

/// Basis of `{x in Z^n : rows . x = 0}` via column elimination with a
/// tracked unimodular transform.
fn integer_kernel(rows: &[Vec<i128>], n: usize) -> Result<Vec<Vec<i128>>> {
    let r = rows.len();
    // a = rows as an r x n matrix; u = identity n x n acting on columns.
    let mut a: Vec<Vec<i128>> = rows.to_vec();
    let mut u: Vec<Vec<i128>> = (0..n)
        .map(|i| (0..n).map(|j| i128::from(i == j)).collect())
        .collect();
    let mut cur = 0usize; // next column to fix
    for i in 0..r {
        // Euclid-reduce row i across columns cur..n down to one nonzero entry.
        loop {
            let mut best: Option<usize> = None;
            for j in cur..n {
                if a[i][j] != 0 && best.is_none_or(|b| a[i][j].abs() < a[i][b].abs()) {
                    best = Some(j);
                }
            }
            let Some(b) = best else { break };
            col_swap(&mut a, &mut u, cur, b);
            let mut done = true;
            let head = a[i][cur];
            for j in cur + 1..n {
                if a[i][j] != 0 {
                    let q = div_floor(a[i][j], head);
                    col_submul(&mut a, &mut u, j, cur, q)?;
                    if a[i][j] != 0 {
                        done = false;
                    }
                }
            }
            if done {
                break;
            }
        }
        if cur < n && a[i][cur] != 0 {
            cur += 1;
        }
    }
    // Columns cur..n of u now map to zero under every row.
    let mut kernel = Vec::with_capacity(n - cur);
    for j in cur..n {
        kernel.push((0..n).map(|i| u[i][j]).collect());
    }
    Ok(kernel)
}

fn col_swap(a: &mut [Vec<i128>], u: &mut [Vec<i128>], j1: usize, j2: usize) {
    if j1 == j2 {
        return;
    }
    for row in a.iter_mut() {
        row.swap(j1, j2);
    }
    for row in u.iter_mut() {
        row.swap(j1, j2);
    }
}

fn col_submul(a: &mut [Vec<i128>], u: &mut [Vec<i128>], j: usize, src: usize, q: i128) -> Result<()> {
    for row in a.iter_mut() {
        row[j] = checked_sub_i128(row[j], checked_mul_i128(q, row[src])?)?;
    }
    for row in u.iter_mut() {
        row[j] = checked_sub_i128(row[j], checked_mul_i128(q, row[src])?)?;
    }
    Ok(())
}

/// All size-`r` subsets of `0..n` in lexicographic order.
fn subsets(n: usize, r: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..r).collect();
    if r > n {
        return out;
    }
    loop {
        out.push(cur.clone());
        // Advance the combination.
        let mut i = r;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] != i + n - r {
                break;
            }
        }
        if cur[i] == i + n - r {
            return out;
        }
        cur[i] += 1;
        for j in i + 1..r {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn lat(n: usize, rows: &[&[i128]]) -> Lattice {
        Lattice::from_basis(n, rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    #[test]
    fn discriminant_frozen_values() {
        let l = lat(2, &[&[2, 4]]);
        assert_eq!(l.discriminant_squared().unwrap(), 20);
        assert_eq!(l.discriminant_squared_by_minors().unwrap(), 20);
        assert_eq!(l.minor_gcd().unwrap(), 2);

        let m = lat(2, &[&[2, 0], &[0, 3]]);
        assert_eq!(m.discriminant_squared().unwrap(), 36);
        assert_eq!(m.minor_gcd().unwrap(), 6);
    }

    #[test]
    fn dual_frozen_value() {
        let l = lat(2, &[&[2, 4]]);
        let d = l.dual_lattice().unwrap();
        assert_eq!(d.basis(), &[vec![2, -1]]);
        assert_eq!(d.discriminant_squared().unwrap(), 5);
    }

    #[test]
    fn coefficient_lattice_frozen_value() {
        let l = coefficient_lattice(&[1, 2], 3).unwrap();
        assert_eq!(l.discriminant_squared().unwrap(), 65);
        // Kernel of (1, 8): generated by (8, -1), canonicalized.
        assert_eq!(l.rank(), 1);
        assert!(l.contains(&[8, -1]).unwrap());
    }

    #[test]
    fn coefficient_lattice_rejects_zero_vector() {
        assert!(coefficient_lattice(&[0, 0], 3).is_err());
        assert!(coefficient_lattice(&[], 3).is_err());
    }

    #[test]
    fn duality_identity_on_examples() {
        // disc2(dual) * minor_gcd^2 = disc2, exactly.
        for rows in [
            vec![vec![2i128, 4]],
            vec![vec![3, 6, 9]],
            vec![vec![1, 2, 3], vec![0, 5, 7]],
            vec![vec![2, 0, 0], vec![0, 3, 0]],
        ] {
            let n = rows[0].len();
            let l = Lattice::from_basis(n, rows).unwrap();
            let dual = l.dual_lattice().unwrap();
            let lhs = dual.discriminant_squared().unwrap() * l.minor_gcd().unwrap().pow(2);
            assert_eq!(lhs, l.discriminant_squared().unwrap());
        }
    }

    #[test]
    fn full_rank_dual_is_zero_lattice() {
        let l = lat(2, &[&[2, 0], &[0, 3]]);
        let d = l.dual_lattice().unwrap();
        assert_eq!(d.rank(), 0);
        assert_eq!(d.discriminant_squared().unwrap(), 1);
        assert_eq!(d.enumerate_box(5, 100).unwrap(), vec![vec![0, 0]]);
    }

    #[test]
    fn dependent_basis_is_rejected() {
        assert!(Lattice::from_basis(2, vec![vec![1, 2], vec![2, 4]]).is_err());
        assert!(Lattice::from_basis(2, vec![vec![1, 0], vec![0, 1], vec![1, 1]]).is_err());
    }

    #[test]
    fn rank_one_box_count_formula() {
        // Points of span{v} in the box are t*v with |t| <= A / sup_norm(v).
        let l = lat(2, &[&[2, -1]]);
        for a in 0..10i128 {
            let pts = l.enumerate_box(a, 1000).unwrap();
            assert_eq!(pts.len() as i128, 2 * (a / 2) + 1, "bound {a}");
        }
    }

    #[test]
    fn box_enumeration_matches_brute_force() {
        let mut rng = crate::arith::SeededStream::new(7, 0).rng();
        for _ in 0..50 {
            let n = rng.random_range(1..=3usize);
            let r = rng.random_range(1..=n);
            let rows: Vec<Vec<i128>> = (0..r)
                .map(|_| (0..n).map(|_| rng.random_range(-4i128..=4)).collect())
                .collect();
            let Ok(l) = Lattice::from_basis(n, rows) else {
                continue;
            };
            let bound = rng.random_range(0..=6i128);
            let pts = l.enumerate_box(bound, 1_000_000).unwrap();
            // Oracle: scan the whole integer box and test membership.
            let mut expected = Vec::new();
            let mut x = vec![-bound; n];
            'scan: loop {
                if l.contains(&x).unwrap() {
                    expected.push(x.clone());
                }
                for i in (0..n).rev() {
                    if x[i] < bound {
                        x[i] += 1;
                        for v in x.iter_mut().skip(i + 1) {
                            *v = -bound;
                        }
                        continue 'scan;
                    }
                }
                break;
            }
            expected.sort();
            assert_eq!(pts, expected);
        }
    }

    #[test]
    fn box_cap_is_enforced() {
        let l = lat(1, &[&[1]]);
        assert!(matches!(
            l.enumerate_box(1000, 10),
            Err(Error::Resource(_))
        ));
    }

    #[test]
    fn hnf_is_invariant_under_unimodular_change() {
        let mut rng = crate::arith::SeededStream::new(11, 0).rng();
        for _ in 0..200 {
            let n = rng.random_range(1..=4usize);
            let r = rng.random_range(1..=n);
            let rows: Vec<Vec<i128>> = (0..r)
                .map(|_| (0..n).map(|_| rng.random_range(-9i128..=9)).collect())
                .collect();
            let Ok(l) = Lattice::from_basis(n, rows.clone()) else {
                continue;
            };
            // Random unimodular row operations: swaps, negations, shears.
            let mut t = rows;
            for _ in 0..12 {
                match rng.random_range(0..3) {
                    0 => {
                        let i = rng.random_range(0..r);
                        let j = rng.random_range(0..r);
                        t.swap(i, j);
                    }
                    1 => {
                        let i = rng.random_range(0..r);
                        t[i].iter_mut().for_each(|x| *x = -*x);
                    }
                    _ => {
                        let i = rng.random_range(0..r);
                        let j = rng.random_range(0..r);
                        if i != j {
                            let c = rng.random_range(-3i128..=3);
                            for col in 0..n {
                                t[i][col] += c * t[j][col];
                            }
                        }
                    }
                }
            }
            let l2 = Lattice::from_basis(n, t).unwrap();
            assert_eq!(l.basis(), l2.basis());
            assert_eq!(
                l.discriminant_squared().unwrap(),
                l2.discriminant_squared().unwrap()
            );
            assert_eq!(l.minor_gcd().unwrap(), l2.minor_gcd().unwrap());
        }
    }

    #[test]
    fn gram_and_minor_routes_agree_randomly() {
        let mut rng = crate::arith::SeededStream::new(13, 0).rng();
        for _ in 0..300 {
            let n = rng.random_range(1..=5usize);
            let r = rng.random_range(1..=n);
            let rows: Vec<Vec<i128>> = (0..r)
                .map(|_| (0..n).map(|_| rng.random_range(-9i128..=9)).collect())
                .collect();
            if let Ok(l) = Lattice::from_basis(n, rows) {
                assert_eq!(
                    l.discriminant_squared().unwrap(),
                    l.discriminant_squared_by_minors().unwrap()
                );
            }
        }
    }

    #[test]
    fn dual_vectors_annihilate_the_original() {
        let mut rng = crate::arith::SeededStream::new(17, 0).rng();
        for _ in 0..100 {
            let n = rng.random_range(1..=5usize);
            let r = rng.random_range(1..=n);
            let rows: Vec<Vec<i128>> = (0..r)
                .map(|_| (0..n).map(|_| rng.random_range(-9i128..=9)).collect())
                .collect();
            let Ok(l) = Lattice::from_basis(n, rows) else {
                continue;
            };
            let dual = l.dual_lattice().unwrap();
            assert_eq!(dual.rank(), n - l.rank());
            for d in dual.basis() {
                for b in l.basis() {
                    let dot: i128 = d.iter().zip(b).map(|(x, y)| x * y).sum();
                    assert_eq!(dot, 0);
                }
            }
            // Lemma-style exact identity.
            let lhs = dual.discriminant_squared().unwrap() * l.minor_gcd().unwrap().pow(2);
            assert_eq!(lhs, l.discriminant_squared().unwrap());
        }
    }
}
