//! Multi-index arithmetic and enumeration.
//!
//! A multi-index is a `d`-tuple `α = (α₁, …, α_d)` of non-negative integers.
//! It addresses a component of a symmetric tensor (a cumulant `κ_α`, a
//! Hermite number `h_α(0)`) or a mixed partial derivative `∂^α`. The degree
//! is `|α| = Σ αᵢ`, the multi-factorial is `α! = α₁!…α_d!`, and
//! `|α|!/α!` counts the ordered index tuples `(i₁,…,i_r)` with
//! `e_{i₁}+⋯+e_{i_r} = α`.
//!
//! All counts use checked 64-bit arithmetic; degrees up to 12 (the largest
//! rank the expansion needs) are far from overflow.

use crate::{Error, Result};

/// A `d`-tuple of non-negative integers.
///
/// Value type with structural equality and the derived lexicographic order,
/// so it can key a `BTreeMap` and give deterministic iteration.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MultiIndex {
    entries: Vec<u32>,
}

impl std::fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(")?;
        for (i, e) in self.entries.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

fn factorial_u64(n: u64) -> Result<u64> {
    let mut acc: u64 = 1;
    for k in 2..=n {
        acc = acc.checked_mul(k).ok_or(Error::Overflow)?;
    }
    Ok(acc)
}

impl MultiIndex {
    /// Build from explicit entries. `entries` must be non-empty.
    pub fn new(entries: impl Into<Vec<u32>>) -> Self {
        let entries = entries.into();
        assert!(!entries.is_empty(), "multi-index needs dimension >= 1");
        MultiIndex { entries }
    }

    /// The zero multi-index of length `dim`.
    pub fn zero(dim: usize) -> Self {
        assert!(dim >= 1);
        MultiIndex {
            entries: vec![0; dim],
        }
    }

    /// The standard basis index `e_i` (0-based `i`).
    pub fn unit(dim: usize, i: usize) -> Self {
        assert!(i < dim, "unit index {i} out of range for dimension {dim}");
        let mut entries = vec![0; dim];
        entries[i] = 1;
        MultiIndex { entries }
    }

    /// `e_{i₁} + ⋯ + e_{i_r}` for a tuple of 0-based indices.
    pub fn from_indices(dim: usize, indices: &[usize]) -> Result<Self> {
        let mut entries = vec![0u32; dim];
        for &i in indices {
            if i >= dim {
                return Err(Error::IndexOutOfRange { index: i, dim });
            }
            entries[i] += 1;
        }
        Ok(MultiIndex { entries })
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[u32] {
        &self.entries
    }

    pub fn entry(&self, i: usize) -> u32 {
        self.entries[i]
    }

    /// The degree `|α| = Σ αᵢ`.
    pub fn degree(&self) -> u32 {
        self.entries.iter().sum()
    }

    /// `α! = α₁! … α_d!` in checked integer arithmetic.
    pub fn factorial(&self) -> Result<u64> {
        let mut acc: u64 = 1;
        for &e in &self.entries {
            acc = acc
                .checked_mul(factorial_u64(e as u64)?)
                .ok_or(Error::Overflow)?;
        }
        Ok(acc)
    }

    /// The multinomial coefficient `|α|!/α!`: the number of ordered tuples
    /// `(i₁,…,i_r)` with `e_{i₁}+⋯+e_{i_r} = α`.
    pub fn multiplicity(&self) -> Result<u64> {
        let num = factorial_u64(self.degree() as u64)?;
        // exact division: α! divides |α|!
        Ok(num / self.factorial()?)
    }

    /// Componentwise sum.
    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        assert_eq!(self.dim(), other.dim());
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a + b)
            .collect();
        MultiIndex { entries }
    }

    /// Componentwise difference, `None` if any entry would go negative.
    pub fn checked_sub(&self, other: &MultiIndex) -> Option<MultiIndex> {
        assert_eq!(self.dim(), other.dim());
        let mut entries = Vec::with_capacity(self.dim());
        for (a, b) in self.entries.iter().zip(&other.entries) {
            entries.push(a.checked_sub(*b)?);
        }
        Some(MultiIndex { entries })
    }

    /// A canonical ordered index tuple representing `α` (0-based indices,
    /// non-decreasing).
    pub fn representative(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.degree() as usize);
        for (i, &e) in self.entries.iter().enumerate() {
            out.extend(std::iter::repeat(i).take(e as usize));
        }
        out
    }

    /// All multi-indices of length `dim` and degree exactly `degree`,
    /// in descending lexicographic order (first coordinate decreasing), e.g.
    /// `(2,0), (1,1), (0,2)`. The order is fixed and stable across runs;
    /// the count is `C(dim + degree - 1, degree)`.
    pub fn enumerate(dim: usize, degree: u32) -> Vec<MultiIndex> {
        assert!(dim >= 1);
        let mut out = Vec::new();
        let mut scratch = vec![0u32; dim];
        fn rec(scratch: &mut [u32], pos: usize, left: u32, out: &mut Vec<MultiIndex>) {
            if pos + 1 == scratch.len() {
                scratch[pos] = left;
                out.push(MultiIndex {
                    entries: scratch.to_vec(),
                });
                return;
            }
            for k in (0..=left).rev() {
                scratch[pos] = k;
                rec(scratch, pos + 1, left - k, out);
            }
        }
        rec(&mut scratch, 0, degree, &mut out);
        out
    }

    /// Decompositions of an even-degree `α` into `k = |α|/2` degree-2
    /// multi-indices, reported as unordered multisets together with the
    /// number of ordered `k`-tuples each multiset stands for.
    ///
    /// Summing `ordered_count × Π f(βʲ)` over the returned decompositions
    /// reproduces the sum over ordered `k`-tuples `β¹,…,β^k` with
    /// `Σ βʲ = α`.
    ///
    /// # Panics
    ///
    /// Odd `|α|` is a contract violation and panics.
    pub fn pair_decompositions(&self) -> Vec<PairDecomposition> {
        let deg = self.degree();
        assert!(deg % 2 == 0, "pair decomposition needs even degree, got {deg}");
        let k = (deg / 2) as usize;
        let mut out = Vec::new();
        if k == 0 {
            out.push(PairDecomposition {
                parts: Vec::new(),
                ordered_count: 1,
            });
            return out;
        }
        let pairs = MultiIndex::enumerate(self.dim(), 2);
        let mut chosen: Vec<usize> = Vec::with_capacity(k);

        fn rec(
            pairs: &[MultiIndex],
            start: usize,
            remaining: &MultiIndex,
            slots_left: usize,
            chosen: &mut Vec<usize>,
            out: &mut Vec<PairDecomposition>,
        ) {
            if slots_left == 0 {
                if remaining.degree() == 0 {
                    let parts: Vec<MultiIndex> =
                        chosen.iter().map(|&i| pairs[i].clone()).collect();
                    out.push(PairDecomposition {
                        ordered_count: ordered_count(chosen),
                        parts,
                    });
                }
                return;
            }
            for i in start..pairs.len() {
                if let Some(rest) = remaining.checked_sub(&pairs[i]) {
                    chosen.push(i);
                    rec(pairs, i, &rest, slots_left - 1, chosen, out);
                    chosen.pop();
                }
            }
        }

        // chosen holds non-decreasing positions into `pairs`, so each
        // multiset appears exactly once; the ordered count is the
        // permutation count k!/Π m_j! of the multiset.
        fn ordered_count(chosen: &[usize]) -> u64 {
            let k = chosen.len() as u64;
            let mut count = factorial_u64(k).expect("k <= 6");
            let mut run = 1u64;
            for w in chosen.windows(2) {
                if w[0] == w[1] {
                    run += 1;
                } else {
                    count /= factorial_u64(run).expect("small");
                    run = 1;
                }
            }
            count /= factorial_u64(run).expect("small");
            count
        }

        rec(&pairs, 0, self, k, &mut chosen, &mut out);
        out
    }
}

/// One unordered multiset `{β¹,…,β^k}` of degree-2 multi-indices with
/// `Σ βʲ = α`, plus the number of ordered `k`-tuples it represents.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairDecomposition {
    pub parts: Vec<MultiIndex>,
    pub ordered_count: u64,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mi(entries: &[u32]) -> MultiIndex {
        MultiIndex::new(entries.to_vec())
    }

    #[test]
    fn degree_examples() {
        assert_eq!(mi(&[0, 0, 0]).degree(), 0);
        assert_eq!(mi(&[3, 0, 3]).degree(), 6);
        assert_eq!(mi(&[1, 1, 1, 1]).degree(), 4);
    }

    #[test]
    fn factorial_examples() {
        assert_eq!(mi(&[0, 0]).factorial().unwrap(), 1);
        assert_eq!(mi(&[3, 2]).factorial().unwrap(), 12);
        assert_eq!(mi(&[6, 0, 0]).factorial().unwrap(), 720);
    }

    #[test]
    fn factorial_overflow_is_reported() {
        assert!(mi(&[25]).factorial().is_err());
    }

    #[test]
    fn multiplicity_examples() {
        assert_eq!(mi(&[2, 0]).multiplicity().unwrap(), 1);
        assert_eq!(mi(&[1, 1]).multiplicity().unwrap(), 2);
        // orderings of the multiset {1,1,2,2,3,3}, counted by brute force
        let brute = {
            let mut count = 0u64;
            let items = [0usize, 0, 1, 1, 2, 2];
            let mut perm = items;
            perm.sort();
            let mut seen = std::collections::HashSet::new();
            permute(&mut perm, 0, &mut |p| {
                if seen.insert(p.to_vec()) {
                    count += 1;
                }
            });
            fn permute(arr: &mut [usize; 6], k: usize, f: &mut impl FnMut(&[usize])) {
                if k == arr.len() {
                    f(arr);
                    return;
                }
                for i in k..arr.len() {
                    arr.swap(k, i);
                    permute(arr, k + 1, f);
                    arr.swap(k, i);
                }
            }
            count
        };
        assert_eq!(brute, 90);
        assert_eq!(mi(&[2, 2, 2]).multiplicity().unwrap(), brute);
    }

    #[test]
    fn enumerate_examples() {
        let e = MultiIndex::enumerate(2, 2);
        assert_eq!(e, vec![mi(&[2, 0]), mi(&[1, 1]), mi(&[0, 2])]);

        let e = MultiIndex::enumerate(1, 5);
        assert_eq!(e, vec![mi(&[5])]);

        let e = MultiIndex::enumerate(3, 2);
        assert_eq!(e.len(), 6); // C(4,2)
        // each exactly once, all of the right degree
        let set: std::collections::HashSet<_> = e.iter().cloned().collect();
        assert_eq!(set.len(), e.len());
        assert!(e.iter().all(|a| a.degree() == 2 && a.dim() == 3));
    }

    #[test]
    fn enumerate_count_is_stars_and_bars() {
        fn binom(n: u64, k: u64) -> u64 {
            let mut acc = 1u64;
            for i in 0..k {
                acc = acc * (n - i) / (i + 1);
            }
            acc
        }
        for d in 1..=5usize {
            for r in 0..=6u32 {
                let e = MultiIndex::enumerate(d, r);
                assert_eq!(e.len() as u64, binom((d as u64) + (r as u64) - 1, r as u64));
            }
        }
    }

    #[test]
    fn multiplicities_partition_ordered_tuples() {
        for d in 1..=6usize {
            for r in 0..=6u32 {
                let total: u64 = MultiIndex::enumerate(d, r)
                    .iter()
                    .map(|a| a.multiplicity().unwrap())
                    .sum();
                assert_eq!(total, (d as u64).pow(r), "d={d} r={r}");
            }
        }
    }

    #[test]
    fn multinomial_recurrence() {
        // Σ_{i: βᵢ≥1} multiplicity(β − eᵢ) = multiplicity(β)
        for d in 1..=4usize {
            for k in 0..=5u32 {
                for beta in MultiIndex::enumerate(d, k + 1) {
                    let mut sum = 0u64;
                    for i in 0..d {
                        if beta.entry(i) >= 1 {
                            let sub = beta.checked_sub(&MultiIndex::unit(d, i)).unwrap();
                            sum += sub.multiplicity().unwrap();
                        }
                    }
                    assert_eq!(sum, beta.multiplicity().unwrap(), "beta={beta:?}");
                }
            }
        }
    }

    #[test]
    fn pair_decompositions_examples() {
        let d = mi(&[2, 0]).pair_decompositions();
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].parts, vec![mi(&[2, 0])]);
        assert_eq!(d[0].ordered_count, 1);

        let d = mi(&[2, 2]).pair_decompositions();
        assert_eq!(d.len(), 2);
        // brute force over ordered 2-tuples of degree-2 indices
        let pairs = MultiIndex::enumerate(2, 2);
        let mut ordered = 0u64;
        for a in &pairs {
            for b in &pairs {
                if a.add(b) == mi(&[2, 2]) {
                    ordered += 1;
                }
            }
        }
        assert_eq!(ordered, 3);
        assert_eq!(d.iter().map(|x| x.ordered_count).sum::<u64>(), ordered);
        for dec in &d {
            if dec.parts == vec![mi(&[1, 1]), mi(&[1, 1])] {
                assert_eq!(dec.ordered_count, 1);
            } else {
                assert_eq!(dec.ordered_count, 2);
            }
        }

        let d = mi(&[4, 0]).pair_decompositions();
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].parts, vec![mi(&[2, 0]), mi(&[2, 0])]);
        assert_eq!(d[0].ordered_count, 1);
    }

    /// Count perfect matchings of `2k` labelled points by brute force.
    fn matchings(n: usize) -> u64 {
        if n == 0 {
            return 1;
        }
        // match point 0 with each of the others, recurse
        fn rec(free: &[usize]) -> u64 {
            if free.is_empty() {
                return 1;
            }
            let first = free[0];
            let mut total = 0;
            for j in 1..free.len() {
                let second = free[j];
                let rest: Vec<usize> = free
                    .iter()
                    .copied()
                    .filter(|&x| x != first && x != second)
                    .collect();
                total += rec(&rest);
            }
            total
        }
        rec(&(0..n).collect::<Vec<_>>())
    }

    #[test]
    fn pairings_count_matches_double_factorial() {
        // in d=1, Σ ordered_count × α!/(k! Π βʲ!) over decompositions of
        // (2k) equals the number of perfect matchings of 2k points
        for k in 1..=6u32 {
            let alpha = mi(&[2 * k]);
            let mut total = 0u64;
            for dec in alpha.pair_decompositions() {
                let mut denom = 1u64;
                for p in &dec.parts {
                    denom *= p.factorial().unwrap();
                }
                let kfact = mi(&[k]).factorial().unwrap();
                total +=
                    dec.ordered_count * alpha.factorial().unwrap() / (kfact * denom);
            }
            assert_eq!(total, matchings(2 * k as usize), "k={k}");
        }
    }

    #[test]
    #[should_panic(expected = "even degree")]
    fn pair_decompositions_rejects_odd_degree() {
        mi(&[1, 2]).pair_decompositions();
    }

    #[test]
    fn representative_and_from_indices_roundtrip() {
        let a = mi(&[2, 0, 1]);
        let rep = a.representative();
        assert_eq!(rep, vec![0, 0, 2]);
        assert_eq!(MultiIndex::from_indices(3, &rep).unwrap(), a);
        assert!(MultiIndex::from_indices(3, &[3]).is_err());
    }

    #[test]
    fn ordering_is_total_and_stable() {
        let mut v = MultiIndex::enumerate(3, 3);
        let orig = v.clone();
        v.sort();
        v.reverse();
        // descending-lex enumeration equals reverse-sorted order
        assert_eq!(v, orig);
    }
}
