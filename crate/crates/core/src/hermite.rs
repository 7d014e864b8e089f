//! Un-normalized Hermite numbers `h_α(0)` for a general inverse metric.
//!
//! For even `|α| = 2k`,
//!
//! ```text
//! h_α(0) = ((−1)^k α!/k!) Σ  κ̃_{β¹} … κ̃_{β^k} / (β¹! … β^k!)
//! ```
//!
//! summed over ordered `k`-tuples of degree-2 multi-indices with
//! `β¹+⋯+β^k = α`, where `κ̃_{e_a+e_b} = g^{ab}`; odd degrees give exactly
//! zero. The implementation sums over unordered pair-multiset
//! decompositions weighted by their ordered-tuple counts, which cuts the
//! work by up to `k!` while reproducing the ordered sum.
//!
//! The explicit three-pairing (rank 4) and fifteen-pairing (rank 6) sums
//! are kept as independent oracles against the pairing formula.

use std::cell::RefCell;
use std::collections::HashMap;

use crate::multiindex::MultiIndex;
use crate::tensors::Metric;
use crate::{Error, Real, Result};

/// Largest `|α|` supported: rank 12 covers the quartic-in-κ₃ term of the
/// second-order expansion coefficient.
pub const MAX_HERMITE_RANK: usize = 12;

fn compute<T: Real>(alpha: &MultiIndex, metric: &Metric<T>) -> Result<T> {
    if alpha.dim() != metric.dim() {
        return Err(Error::DimensionMismatch {
            expected: metric.dim(),
            got: alpha.dim(),
        });
    }
    let rank = alpha.degree() as usize;
    if rank > MAX_HERMITE_RANK {
        return Err(Error::RankTooLarge {
            rank,
            max: MAX_HERMITE_RANK,
        });
    }
    if rank % 2 == 1 {
        return Ok(T::zero());
    }
    let k = (rank / 2) as u64;
    let mut sum = T::zero();
    for dec in alpha.pair_decompositions() {
        let mut term = T::from_u64(dec.ordered_count).unwrap();
        for beta in &dec.parts {
            let rep = beta.representative();
            term = term * metric.inv(rep[0], rep[1])
                / T::from_u64(beta.factorial().map_err(|_| Error::Overflow)?).unwrap();
        }
        sum = sum + term;
    }
    let mut kfact = T::one();
    for j in 2..=k {
        kfact = kfact * T::from_u64(j).unwrap();
    }
    let sign = if k % 2 == 0 { T::one() } else { -T::one() };
    let afact = T::from_u64(alpha.factorial().map_err(|_| Error::Overflow)?).unwrap();
    Ok(sign * afact / kfact * sum)
}

/// `h_α(0)` for the inverse of `metric`; one-shot, no memoization.
pub fn hermite_number<T: Real>(alpha: &MultiIndex, metric: &Metric<T>) -> Result<T> {
    compute(alpha, metric)
}

/// Memoizing evaluator for the Hermite numbers of one fixed metric.
///
/// The cache is keyed by multi-index alone — the metric is pinned by the
/// borrow, so identity (not value hashing) scopes the memo. Confine a table
/// to one evaluation thread; building one per expansion evaluation is cheap.
pub struct HermiteTable<'a, T> {
    metric: &'a Metric<T>,
    cache: RefCell<HashMap<MultiIndex, T>>,
}

impl<'a, T: Real> HermiteTable<'a, T> {
    pub fn new(metric: &'a Metric<T>) -> Self {
        HermiteTable {
            metric,
            cache: RefCell::new(HashMap::new()),
        }
    }

    pub fn metric(&self) -> &Metric<T> {
        self.metric
    }

    /// Memoized `h_α(0)`.
    pub fn value(&self, alpha: &MultiIndex) -> Result<T> {
        if let Some(v) = self.cache.borrow().get(alpha) {
            return Ok(*v);
        }
        let v = compute(alpha, self.metric)?;
        self.cache.borrow_mut().insert(alpha.clone(), v);
        Ok(v)
    }
}

fn check_indices<T: Real>(indices: &[usize], metric: &Metric<T>) -> Result<()> {
    for &i in indices {
        if i >= metric.dim() {
            return Err(Error::IndexOutOfRange {
                index: i,
                dim: metric.dim(),
            });
        }
    }
    Ok(())
}

/// Rank-4 Hermite number by the explicit three-pairing sum
/// `g^{i₁i₂}g^{i₃i₄} + g^{i₁i₃}g^{i₂i₄} + g^{i₁i₄}g^{i₂i₃}` (0-based
/// indices). Oracle for [`hermite_number`].
pub fn hermite_rank4_explicit<T: Real>(indices: [usize; 4], metric: &Metric<T>) -> Result<T> {
    check_indices(&indices, metric)?;
    let [i1, i2, i3, i4] = indices;
    let g = |a: usize, b: usize| metric.inv(a, b);
    Ok(g(i1, i2) * g(i3, i4) + g(i1, i3) * g(i2, i4) + g(i1, i4) * g(i2, i3))
}

/// Rank-6 Hermite number by the explicit fifteen-pairing sum with its
/// leading minus (0-based indices). Oracle for [`hermite_number`].
pub fn hermite_rank6_explicit<T: Real>(indices: [usize; 6], metric: &Metric<T>) -> Result<T> {
    check_indices(&indices, metric)?;
    let [i1, i2, i3, i4, i5, i6] = indices;
    let g = |a: usize, b: usize| metric.inv(a, b);
    Ok(-(g(i1, i2) * g(i3, i4) * g(i5, i6)
        + g(i1, i3) * g(i2, i4) * g(i5, i6)
        + g(i1, i4) * g(i2, i3) * g(i5, i6)
        + g(i1, i2) * g(i3, i5) * g(i4, i6)
        + g(i1, i3) * g(i2, i5) * g(i4, i6)
        + g(i1, i5) * g(i2, i3) * g(i4, i6)
        + g(i1, i2) * g(i3, i6) * g(i4, i5)
        + g(i1, i3) * g(i2, i6) * g(i4, i5)
        + g(i1, i6) * g(i2, i3) * g(i4, i5)
        + g(i1, i4) * g(i2, i5) * g(i3, i6)
        + g(i1, i5) * g(i2, i4) * g(i3, i6)
        + g(i1, i4) * g(i2, i6) * g(i3, i5)
        + g(i1, i6) * g(i2, i4) * g(i3, i5)
        + g(i1, i5) * g(i2, i6) * g(i3, i4)
        + g(i1, i6) * g(i2, i5) * g(i3, i4)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mi(entries: &[u32]) -> MultiIndex {
        MultiIndex::new(entries.to_vec())
    }

    fn identity(d: usize) -> Metric<f64> {
        let mut m = vec![0.0; d * d];
        for i in 0..d {
            m[i * d + i] = 1.0;
        }
        Metric::new(d, m).unwrap()
    }

    #[test]
    fn rank2_is_negative_inverse_metric() {
        let g = Metric::new(2, vec![1.4f64, 0.3, 0.3, 0.9]).unwrap();
        let h = hermite_number(&mi(&[1, 1]), &g).unwrap();
        assert!((h + g.inv(0, 1)).abs() < 1e-14);
        let h = hermite_number(&mi(&[2, 0]), &g).unwrap();
        assert!((h + g.inv(0, 0)).abs() < 1e-14);
    }

    #[test]
    fn scalar_examples() {
        let g = identity(1);
        assert_eq!(hermite_number(&mi(&[4]), &g).unwrap(), 3.0);
        assert_eq!(hermite_number(&mi(&[6]), &g).unwrap(), -15.0);
    }

    #[test]
    fn odd_degree_is_exactly_zero() {
        let g = Metric::new(2, vec![2.0, 0.5, 0.5, 1.0]).unwrap();
        for alpha in MultiIndex::enumerate(2, 3) {
            assert_eq!(hermite_number(&alpha, &g).unwrap(), 0.0);
        }
        assert_eq!(hermite_number(&mi(&[5, 2]), &g).unwrap(), 0.0);
    }

    #[test]
    fn scalar_closed_form() {
        // h_{(2k)}(0) = (−1)^k (2k−1)!! (g¹¹)^k
        let g11 = 1.7f64;
        let g = Metric::new(1, vec![1.0 / g11]).unwrap();
        let mut dfact = 1.0; // (2k−1)!!
        for k in 1..=6u32 {
            dfact *= (2 * k - 1) as f64;
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            let expect = sign * dfact * g11.powi(k as i32);
            let got = hermite_number(&mi(&[2 * k]), &g).unwrap();
            assert!(
                (got - expect).abs() < 1e-12 * expect.abs(),
                "k={k}: {got} vs {expect}"
            );
        }
    }

    #[test]
    fn explicit_rank4_examples() {
        let g = identity(2);
        assert_eq!(hermite_rank4_explicit([0, 0, 1, 1], &g).unwrap(), 1.0);
        assert_eq!(hermite_rank4_explicit([0, 0, 0, 0], &g).unwrap(), 3.0);

        // metric whose inverse is [[2,1],[1,2]]
        let g = Metric::new(2, vec![2.0f64 / 3.0, -1.0 / 3.0, -1.0 / 3.0, 2.0 / 3.0]).unwrap();
        assert!((g.inv(0, 0) - 2.0).abs() < 1e-12);
        assert!((g.inv(0, 1) - 1.0).abs() < 1e-12);
        let got = hermite_rank4_explicit([0, 0, 1, 1], &g).unwrap();
        assert!((got - 6.0).abs() < 1e-12);
    }

    #[test]
    fn explicit_rank6_examples() {
        let g = identity(2);
        assert_eq!(
            hermite_rank6_explicit([0, 0, 0, 0, 0, 0], &g).unwrap(),
            -15.0
        );
        assert_eq!(
            hermite_rank6_explicit([0, 0, 0, 0, 0, 1], &g).unwrap(),
            0.0
        );
        let c = 0.6f64;
        let g = Metric::new(1, vec![1.0 / c]).unwrap();
        let got = hermite_rank6_explicit([0; 6], &g).unwrap();
        assert!((got + 15.0 * c * c * c).abs() < 1e-13);
    }

    #[test]
    fn pairing_formula_matches_explicit_sums() {
        let metrics = [
            identity(2),
            Metric::new(2, vec![1.9, -0.4, -0.4, 0.8]).unwrap(),
            Metric::new(3, vec![2.0, 0.3, 0.1, 0.3, 1.5, -0.2, 0.1, -0.2, 1.0]).unwrap(),
        ];
        for g in &metrics {
            let d = g.dim();
            let table = HermiteTable::new(g);
            let mut idx4 = [0usize; 4];
            loop {
                let alpha = MultiIndex::from_indices(d, &idx4).unwrap();
                let a = table.value(&alpha).unwrap();
                let b = hermite_rank4_explicit(idx4, g).unwrap();
                assert!((a - b).abs() <= 1e-10 * b.abs().max(1.0), "{idx4:?}");
                if !advance(&mut idx4, d) {
                    break;
                }
            }
            let mut idx6 = [0usize; 6];
            loop {
                let alpha = MultiIndex::from_indices(d, &idx6).unwrap();
                let a = table.value(&alpha).unwrap();
                let b = hermite_rank6_explicit(idx6, g).unwrap();
                assert!((a - b).abs() <= 1e-10 * b.abs().max(1.0), "{idx6:?}");
                if !advance(&mut idx6, d) {
                    break;
                }
            }
        }

        fn advance(idx: &mut [usize], d: usize) -> bool {
            let mut k = idx.len();
            loop {
                if k == 0 {
                    return false;
                }
                k -= 1;
                idx[k] += 1;
                if idx[k] < d {
                    return true;
                }
                idx[k] = 0;
            }
        }
    }

    #[test]
    fn rank_cap_and_dim_guard() {
        let g = identity(2);
        assert!(matches!(
            hermite_number(&mi(&[8, 6]), &g),
            Err(Error::RankTooLarge { .. })
        ));
        assert!(matches!(
            hermite_number(&mi(&[2]), &g),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(hermite_rank4_explicit([0, 0, 2, 0], &g).is_err());
    }

    #[test]
    fn table_memoizes() {
        let g = identity(3);
        let table = HermiteTable::new(&g);
        let a = table.value(&mi(&[2, 2, 2])).unwrap();
        let b = table.value(&mi(&[2, 2, 2])).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, hermite_number(&mi(&[2, 2, 2]), &g).unwrap());
    }
}
