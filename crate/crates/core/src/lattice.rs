//! Maximal K-lattices over Z^n: primitive vectors, canonical bases, volumes,
//! saturation.
//!
//! A maximal K-lattice is a sublattice of Z^n that is saturated (not properly
//! contained in another lattice of the same dimension) and whose vectors of
//! l1-norm at most K have full rank. All normal-form arithmetic is exact over
//! `i64` with checked operations; only volumes are floating point.
//!
//! The canonical basis of a lattice is the row Hermite normal form of any
//! generating matrix: echelon shape, positive pivots, entries above a pivot
//! reduced into `[0, pivot)`. Two bases generate the same lattice iff their
//! canonical forms coincide.

use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

use crate::error::{CoreError, Result};

/// Default cap on exhaustive candidate enumeration.
pub const DEFAULT_ENUM_BUDGET: u128 = 20_000_000;

/// A sublattice of Z^n in canonical (Hermite-normal-form) shape.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Lattice {
    pub dim: usize,
    /// Canonical basis rows.
    pub basis: Vec<Vec<i64>>,
    /// Euclidean volume of the basis parallelepiped, `sqrt(det B B^T)`.
    pub volume: f64,
    /// The cutoff K under which the lattice was generated, when known.
    pub k_bound: Option<u32>,
}

impl Lattice {
    pub fn ambient_dim(&self) -> usize {
        self.basis[0].len()
    }

    /// Exact membership test for an integer vector.
    pub fn contains(&self, v: &[i64]) -> Result<bool> {
        if v.len() != self.ambient_dim() {
            return Err(CoreError::DimensionMismatch { expected: self.ambient_dim(), got: v.len() });
        }
        let mut w: Vec<i64> = v.to_vec();
        for row in &self.basis {
            let p = pivot_index(row).expect("canonical rows are nonzero");
            if w[..p].iter().any(|&x| x != 0) {
                return Ok(false);
            }
            if w[p] % row[p] != 0 {
                return Ok(false);
            }
            let q = w[p] / row[p];
            row_sub_mul(&mut w, row, q)?;
        }
        Ok(w.iter().all(|&x| x == 0))
    }
}

impl<'de> Deserialize<'de> for Lattice {
    fn deserialize<D>(deserializer: D) -> std::result::Result<Self, D::Error>
    where
        D: serde::Deserializer<'de>,
    {
        #[derive(Deserialize)]
        struct Raw {
            basis: Vec<Vec<i64>>,
            k_bound: Option<u32>,
        }
        let raw = Raw::deserialize(deserializer)?;
        let mut lat = canonical_lattice(&raw.basis).map_err(serde::de::Error::custom)?;
        lat.k_bound = raw.k_bound;
        Ok(lat)
    }
}

fn pivot_index(row: &[i64]) -> Option<usize> {
    row.iter().position(|&x| x != 0)
}

fn row_sub_mul(dst: &mut [i64], src: &[i64], q: i64) -> Result<()> {
    for (d, &s) in dst.iter_mut().zip(src) {
        *d = q
            .checked_mul(s)
            .and_then(|qs| d.checked_sub(qs))
            .ok_or(CoreError::IntegerOverflow)?;
    }
    Ok(())
}

fn div_floor(a: i64, b: i64) -> i64 {
    let q = a / b;
    if (a % b != 0) && ((a < 0) != (b < 0)) {
        q - 1
    } else {
        q
    }
}

/// Row Hermite normal form. Returns the nonzero echelon rows (positive
/// pivots, entries above each pivot in `[0, pivot)`); the result is the
/// unique canonical basis of the row span.
pub fn hermite_normal_form(rows: &[Vec<i64>]) -> Result<Vec<Vec<i64>>> {
    if rows.is_empty() {
        return Ok(Vec::new());
    }
    let n = rows[0].len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(CoreError::InvalidArgument("ragged integer matrix".into()));
    }
    let mut m: Vec<Vec<i64>> = rows.to_vec();
    let nrows = m.len();
    let mut pivot_row = 0;
    for col in 0..n {
        if pivot_row == nrows {
            break;
        }
        // Euclidean reduction in this column among rows >= pivot_row.
        loop {
            let mut best: Option<usize> = None;
            for r in pivot_row..nrows {
                if m[r][col] != 0 {
                    best = match best {
                        Some(b) if m[b][col].abs() <= m[r][col].abs() => Some(b),
                        _ => Some(r),
                    };
                }
            }
            let Some(b) = best else { break };
            m.swap(pivot_row, b);
            let mut done = true;
            for r in pivot_row + 1..nrows {
                if m[r][col] != 0 {
                    let q = div_floor(m[r][col], m[pivot_row][col]);
                    let (head, tail) = m.split_at_mut(r);
                    row_sub_mul(&mut tail[0], &head[pivot_row], q)?;
                    if m[r][col] != 0 {
                        done = false;
                    }
                }
            }
            if done {
                break;
            }
        }
        if m[pivot_row][col] == 0 {
            continue;
        }
        if m[pivot_row][col] < 0 {
            for x in m[pivot_row].iter_mut() {
                *x = x.checked_neg().ok_or(CoreError::IntegerOverflow)?;
            }
        }
        for r in 0..pivot_row {
            let q = div_floor(m[r][col], m[pivot_row][col]);
            if q != 0 {
                let (head, tail) = m.split_at_mut(pivot_row);
                row_sub_mul(&mut head[r], &tail[0], q)?;
            }
        }
        pivot_row += 1;
    }
    m.truncate(pivot_row);
    Ok(m)
}

/// Basis of the integer kernel `{x in Z^n : B x = 0}` via unimodular column
/// reduction of `[B; I]`.
pub fn integer_kernel(rows: &[Vec<i64>], n: usize) -> Result<Vec<Vec<i64>>> {
    let j = rows.len();
    // Columns of the working matrix: top j entries = B column image,
    // bottom n entries = the Z^n coordinate.
    let mut cols: Vec<(Vec<i64>, Vec<i64>)> = (0..n)
        .map(|c| {
            let top: Vec<i64> = rows.iter().map(|r| r[c]).collect();
            let mut bot = vec![0i64; n];
            bot[c] = 1;
            (top, bot)
        })
        .collect();
    let mut pivot_col = 0;
    for row in 0..j {
        loop {
            let mut best: Option<usize> = None;
            for c in pivot_col..n {
                if cols[c].0[row] != 0 {
                    best = match best {
                        Some(b) if cols[b].0[row].abs() <= cols[c].0[row].abs() => Some(b),
                        _ => Some(c),
                    };
                }
            }
            let Some(b) = best else { break };
            cols.swap(pivot_col, b);
            let mut done = true;
            for c in pivot_col + 1..n {
                if cols[c].0[row] != 0 {
                    let q = div_floor(cols[c].0[row], cols[pivot_col].0[row]);
                    let (head, tail) = cols.split_at_mut(c);
                    row_sub_mul(&mut tail[0].0, &head[pivot_col].0, q)?;
                    row_sub_mul(&mut tail[0].1, &head[pivot_col].1, q)?;
                    if cols[c].0[row] != 0 {
                        done = false;
                    }
                }
            }
            if done {
                break;
            }
        }
        if pivot_col < n && cols[pivot_col].0[row] != 0 {
            pivot_col += 1;
        }
    }
    Ok(cols[pivot_col..].iter().map(|(_, bot)| bot.clone()).collect())
}

/// Rank over Q of an integer matrix (exact, via HNF).
pub fn integer_rank(rows: &[Vec<i64>]) -> Result<usize> {
    Ok(hermite_normal_form(rows)?.len())
}

/// Euclidean volume of the parallelepiped spanned by the basis rows,
/// `sqrt(det B B^T)` with the Gram determinant computed exactly.
pub fn lattice_volume(basis: &[Vec<i64>]) -> Result<f64> {
    let j = basis.len();
    if j == 0 {
        return Err(CoreError::InvalidArgument("empty basis".into()));
    }
    let mut gram = vec![vec![0i128; j]; j];
    for a in 0..j {
        for b in 0..j {
            let mut s: i128 = 0;
            for c in 0..basis[a].len() {
                s = s
                    .checked_add((basis[a][c] as i128) * (basis[b][c] as i128))
                    .ok_or(CoreError::IntegerOverflow)?;
            }
            gram[a][b] = s;
        }
    }
    let det = bareiss_determinant(gram)?;
    if det <= 0 {
        return Err(CoreError::RankDeficient { rank: 0, expected: j });
    }
    Ok((det as f64).sqrt())
}

/// Fraction-free determinant (Bareiss).
fn bareiss_determinant(mut a: Vec<Vec<i128>>) -> Result<i128> {
    let n = a.len();
    let mut sign: i128 = 1;
    let mut prev: i128 = 1;
    for k in 0..n {
        if a[k][k] == 0 {
            let swap = (k + 1..n).find(|&r| a[r][k] != 0);
            match swap {
                Some(r) => {
                    a.swap(k, r);
                    sign = -sign;
                }
                None => return Ok(0),
            }
        }
        for i in k + 1..n {
            for jj in k + 1..n {
                let num = a[i][jj]
                    .checked_mul(a[k][k])
                    .and_then(|x| x.checked_sub(a[i][k].checked_mul(a[k][jj])?))
                    .ok_or(CoreError::IntegerOverflow)?;
                a[i][jj] = num / prev;
            }
            a[i][k] = 0;
        }
        prev = a[k][k];
    }
    Ok(sign * a[n - 1][n - 1])
}

/// Canonicalizes a full-rank integer basis into a [`Lattice`] without
/// saturating it.
pub fn canonical_lattice(basis: &[Vec<i64>]) -> Result<Lattice> {
    let j = basis.len();
    let canonical = hermite_normal_form(basis)?;
    if canonical.len() != j {
        return Err(CoreError::RankDeficient { rank: canonical.len(), expected: j });
    }
    let volume = lattice_volume(&canonical)?;
    Ok(Lattice { dim: j, basis: canonical, volume, k_bound: None })
}

/// The unique maximal lattice in the rational span of `basis`: all integer
/// points of the span, obtained as the kernel of the kernel.
pub fn saturate(basis: &[Vec<i64>]) -> Result<Lattice> {
    let j = basis.len();
    if j == 0 {
        return Err(CoreError::InvalidArgument("empty basis".into()));
    }
    let n = basis[0].len();
    if integer_rank(basis)? != j {
        return Err(CoreError::RankDeficient { rank: integer_rank(basis)?, expected: j });
    }
    let ker = integer_kernel(basis, n)?;
    let sat = integer_kernel(&ker, n)?;
    debug_assert_eq!(sat.len(), j);
    canonical_lattice(&sat)
}

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Enumerates all nonzero integer vectors with l1-norm at most `k`,
/// checking the candidate count against `budget` first.
pub fn vectors_within_l1(n: usize, k: u32, budget: u128) -> Result<Vec<Vec<i64>>> {
    let count = (2u128 * k as u128 + 1).checked_pow(n as u32).ok_or(CoreError::IntegerOverflow)?;
    if count > budget {
        return Err(CoreError::BudgetExceeded { count, budget });
    }
    let mut out = Vec::new();
    let mut current = vec![0i64; n];
    fn rec(n: usize, k: i64, idx: usize, used: i64, current: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if idx == n {
            if current.iter().any(|&x| x != 0) {
                out.push(current.clone());
            }
            return;
        }
        let rem = k - used;
        for x in -rem..=rem {
            current[idx] = x;
            rec(n, k, idx + 1, used + x.abs(), current, out);
        }
        current[idx] = 0;
    }
    rec(n, k as i64, 0, 0, &mut current, &mut out);
    Ok(out)
}

/// Primitive (gcd 1), sign-normalized (first nonzero positive) vectors of
/// l1-norm at most `k`. Each generates a distinct maximal 1-dimensional
/// K-lattice.
pub fn primitive_vectors(n: usize, k: u32, budget: u128) -> Result<Vec<Vec<i64>>> {
    let mut out = vectors_within_l1(n, k, budget)?;
    out.retain(|v| {
        let first = v.iter().find(|&&x| x != 0).copied().unwrap();
        first > 0 && v.iter().fold(0i64, |g, &x| gcd(g, x)) == 1
    });
    Ok(out)
}

/// True iff `lat` is saturated and its vectors of l1-norm at most `k` have
/// full rank (so the lattice is generated at resonance order `k`).
pub fn is_maximal_k_lattice(lat: &Lattice, k: u32, budget: u128) -> Result<bool> {
    let sat = saturate(&lat.basis)?;
    if sat.basis != lat.basis {
        return Ok(false);
    }
    let mut members: Vec<Vec<i64>> = Vec::new();
    for v in vectors_within_l1(lat.ambient_dim(), k, budget)? {
        if lat.contains(&v)? {
            members.push(v);
            if integer_rank(&members)? == lat.dim {
                return Ok(true);
            }
        }
    }
    Ok(false)
}

/// All distinct maximal K-lattices of dimension `j` in Z^n, by exhaustive
/// enumeration: saturations of rank-j subsets of primitive K-bounded
/// vectors, deduplicated by canonical basis.
pub fn enumerate_maximal_lattices(n: usize, k: u32, j: usize, budget: u128) -> Result<Vec<Lattice>> {
    if j == 0 || j >= n {
        return Err(CoreError::InvalidArgument(format!(
            "lattice dimension must satisfy 1 <= j <= n-1, got j={j}, n={n}"
        )));
    }
    if k == 0 {
        return Err(CoreError::InvalidArgument("cutoff K must be >= 1".into()));
    }
    let prims = primitive_vectors(n, k, budget)?;
    if j == 1 {
        return prims
            .iter()
            .map(|p| {
                let mut lat = canonical_lattice(std::slice::from_ref(p))?;
                lat.k_bound = Some(k);
                Ok(lat)
            })
            .collect();
    }
    let subset_count = binomial(prims.len() as u128, j as u32);
    if subset_count > budget {
        return Err(CoreError::BudgetExceeded { count: subset_count, budget });
    }
    let mut seen: BTreeSet<Vec<Vec<i64>>> = BTreeSet::new();
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..j).collect();
    loop {
        let rows: Vec<Vec<i64>> = idx.iter().map(|&i| prims[i].clone()).collect();
        if integer_rank(&rows)? == j {
            let mut lat = saturate(&rows)?;
            if seen.insert(lat.basis.clone()) {
                lat.k_bound = Some(k);
                if is_maximal_k_lattice(&lat, k, budget)? {
                    out.push(lat);
                }
            }
        }
        // next j-combination of prims indices
        let mut pos = j;
        loop {
            if pos == 0 {
                return Ok(out);
            }
            pos -= 1;
            if idx[pos] + 1 <= prims.len() - (j - pos) {
                idx[pos] += 1;
                for p in pos + 1..j {
                    idx[p] = idx[p - 1] + 1;
                }
                break;
            }
        }
    }
}

fn binomial(n: u128, k: u32) -> u128 {
    let mut result: u128 = 1;
    for i in 0..k as u128 {
        if n <= i {
            return 0;
        }
        result = result.saturating_mul(n - i) / (i + 1);
    }
    result
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const BUDGET: u128 = DEFAULT_ENUM_BUDGET;

    fn rows(data: &[&[i64]]) -> Vec<Vec<i64>> {
        data.iter().map(|r| r.to_vec()).collect()
    }

    #[test]
    fn volume_examples() {
        assert_eq!(lattice_volume(&rows(&[&[1, 0, 0]])).unwrap(), 1.0);
        assert!((lattice_volume(&rows(&[&[1, 1, 0]])).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(lattice_volume(&rows(&[&[1, 1, 0], &[1, -1, 0]])).unwrap(), 2.0);
    }

    #[test]
    fn volume_rejects_rank_deficient() {
        assert!(lattice_volume(&rows(&[&[1, 1, 0], &[2, 2, 0]])).is_err());
    }

    #[test]
    fn saturate_examples() {
        let lat = saturate(&rows(&[&[2, 0, 0]])).unwrap();
        assert_eq!(lat.basis, rows(&[&[1, 0, 0]]));
        assert_eq!(lat.volume, 1.0);

        let lat = saturate(&rows(&[&[1, 1, 0], &[1, -1, 0]])).unwrap();
        assert_eq!(lat.basis, rows(&[&[1, 0, 0], &[0, 1, 0]]));
        assert_eq!(lat.volume, 1.0);

        let lat = saturate(&rows(&[&[1, 0, 0]])).unwrap();
        assert_eq!(lat.basis, rows(&[&[1, 0, 0]]));
    }

    #[test]
    fn saturate_is_idempotent() {
        let lat = saturate(&rows(&[&[2, 4, 6], &[0, 10, 5]])).unwrap();
        let again = saturate(&lat.basis).unwrap();
        assert_eq!(lat.basis, again.basis);
    }

    #[test]
    fn enumeration_counts() {
        assert_eq!(enumerate_maximal_lattices(3, 1, 1, BUDGET).unwrap().len(), 3);
        assert_eq!(enumerate_maximal_lattices(3, 2, 1, BUDGET).unwrap().len(), 9);
        assert_eq!(enumerate_maximal_lattices(3, 1, 2, BUDGET).unwrap().len(), 3);
    }

    #[test]
    fn enumerated_lattices_satisfy_volume_bound_and_maximality() {
        for (k, j) in [(1u32, 1usize), (2, 1), (3, 1), (1, 2), (2, 2), (3, 2)] {
            let lats = enumerate_maximal_lattices(3, k, j, BUDGET).unwrap();
            let mut seen = BTreeSet::new();
            for lat in &lats {
                assert!(lat.volume >= 1.0 - 1e-12);
                assert!(lat.volume <= (k as f64).powi(j as i32) + 1e-9, "K={k} j={j}");
                assert!(is_maximal_k_lattice(lat, k, BUDGET).unwrap());
                assert!(seen.insert(lat.basis.clone()), "duplicate in enumeration");
            }
        }
    }

    #[test]
    fn maximality_examples() {
        let axis = canonical_lattice(&rows(&[&[1, 0, 0]])).unwrap();
        assert!(is_maximal_k_lattice(&axis, 1, BUDGET).unwrap());

        let doubled = Lattice {
            dim: 1,
            basis: rows(&[&[2, 0, 0]]),
            volume: 2.0,
            k_bound: None,
        };
        assert!(!is_maximal_k_lattice(&doubled, 3, BUDGET).unwrap());

        let diag = saturate(&rows(&[&[1, 1, 1]])).unwrap();
        assert!(!is_maximal_k_lattice(&diag, 2, BUDGET).unwrap());
        assert!(is_maximal_k_lattice(&diag, 3, BUDGET).unwrap());
    }

    #[test]
    fn budget_guard_fires() {
        let err = enumerate_maximal_lattices(3, 4, 1, 10).unwrap_err();
        assert!(matches!(err, CoreError::BudgetExceeded { .. }));
    }

    #[test]
    fn membership() {
        let lat = saturate(&rows(&[&[1, 1, 0], &[0, 2, 1]])).unwrap();
        assert!(lat.contains(&[1, 1, 0]).unwrap());
        assert!(lat.contains(&[0, 2, 1]).unwrap());
        assert!(lat.contains(&[1, 3, 1]).unwrap());
        assert!(!lat.contains(&[0, 0, 1]).unwrap() || lat.dim == 3);
    }

    /// Random unimodular transforms of a basis canonicalize identically.
    #[test]
    fn canonical_basis_is_basis_independent() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let base = rows(&[&[1, 2, 0, -1], &[0, 3, 1, 2]]);
        let reference = canonical_lattice(&base).unwrap();
        for _ in 0..1000 {
            let mut b = base.clone();
            // random elementary row operations keep the row span
            for _ in 0..6 {
                let i = rng.gen_range(0..2);
                let j = 1 - i;
                let c: i64 = rng.gen_range(-3..=3);
                for col in 0..4 {
                    b[i][col] += c * b[j][col];
                }
                if rng.gen_bool(0.3) {
                    for col in 0..4 {
                        b[i][col] = -b[i][col];
                    }
                }
            }
            let lat = canonical_lattice(&b).unwrap();
            assert_eq!(lat.basis, reference.basis);
            assert!((lat.volume - reference.volume).abs() < 1e-9);
        }
    }

    #[test]
    fn serde_roundtrip() {
        let lat = saturate(&rows(&[&[1, 1, 0], &[1, -1, 0]])).unwrap();
        let json = serde_json::to_string(&lat).unwrap();
        let back: Lattice = serde_json::from_str(&json).unwrap();
        assert_eq!(lat, back);
    }

    proptest! {
        /// Saturation is idempotent and divides the volume by an integer
        /// index.
        #[test]
        fn saturation_properties(entries in proptest::collection::vec(-5i64..=5, 6)) {
            let b = vec![entries[0..3].to_vec(), entries[3..6].to_vec()];
            if integer_rank(&b).unwrap() == 2 {
                let vol_in = lattice_volume(&b).unwrap();
                let sat = saturate(&b).unwrap();
                let again = saturate(&sat.basis).unwrap();
                prop_assert_eq!(&sat.basis, &again.basis);
                let index = vol_in / sat.volume;
                prop_assert!(index >= 1.0 - 1e-9);
                prop_assert!((index - index.round()).abs() < 1e-6, "index {} not integral", index);
                // every original generator is a member
                prop_assert!(sat.contains(&b[0]).unwrap());
                prop_assert!(sat.contains(&b[1]).unwrap());
            }
        }
    }
}
