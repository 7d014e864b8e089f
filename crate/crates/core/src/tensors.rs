//! Sparse symmetric tensors and the Fisher metric.
//!
//! A [`SymTensor`] stores a rank-`r` symmetric tensor over dimension `d` as
//! a map from degree-`r` multi-indices to values: the component addressed by
//! an ordered tuple `(i₁,…,i_r)` is read through `e_{i₁}+⋯+e_{i_r}`, so
//! permutation invariance holds identically and missing keys read as zero.
//! Cumulant tensors of simple families are mostly zero off a few patterns,
//! which is why the storage is sparse.
//!
//! [`Metric`] holds a symmetric positive definite matrix together with its
//! inverse and `√det`, validated at construction by a Cholesky
//! factorization.
//!
//! [`contract`] evaluates fully paired contractions of one or two symmetric
//! tensors against powers of the inverse metric. The production path sums
//! over multi-indices with multiplicity weights; [`contract_naive`] is the
//! ordered-tuple reference kept for small dimensions (it is exponential in
//! the total rank).

use std::collections::BTreeMap;

use crate::multiindex::MultiIndex;
use crate::{Error, Real, Result};

/// Rank-`r` symmetric tensor over dimension `d`, stored by multi-index.
#[derive(Clone, Debug)]
pub struct SymTensor<T> {
    dim: usize,
    rank: usize,
    values: BTreeMap<MultiIndex, T>,
}

impl<T: Real> SymTensor<T> {
    pub fn new(dim: usize, rank: usize) -> Self {
        assert!(dim >= 1);
        SymTensor {
            dim,
            rank,
            values: BTreeMap::new(),
        }
    }

    /// Dense construction: evaluates `f` on every degree-`rank` multi-index,
    /// storing non-zero results.
    pub fn from_fn(dim: usize, rank: usize, mut f: impl FnMut(&MultiIndex) -> T) -> Self {
        let mut t = SymTensor::new(dim, rank);
        for alpha in MultiIndex::enumerate(dim, rank as u32) {
            let v = f(&alpha);
            if v != T::zero() {
                t.values.insert(alpha, v);
            }
        }
        t
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Insert or overwrite one component.
    pub fn set(&mut self, alpha: MultiIndex, value: T) -> Result<()> {
        if alpha.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: alpha.dim(),
            });
        }
        if alpha.degree() as usize != self.rank {
            return Err(Error::RankMismatch {
                expected: self.rank,
                got: alpha.degree() as usize,
            });
        }
        if value == T::zero() {
            self.values.remove(&alpha);
        } else {
            self.values.insert(alpha, value);
        }
        Ok(())
    }

    /// Component by multi-index; missing keys are zero.
    ///
    /// # Panics
    ///
    /// Panics if `alpha` has the wrong length or degree.
    pub fn value(&self, alpha: &MultiIndex) -> T {
        assert_eq!(alpha.dim(), self.dim, "multi-index length mismatch");
        assert_eq!(alpha.degree() as usize, self.rank, "multi-index degree mismatch");
        self.values.get(alpha).copied().unwrap_or_else(T::zero)
    }

    /// Component by an ordered tuple of 0-based indices; order-independent.
    pub fn component(&self, indices: &[usize]) -> Result<T> {
        if indices.len() != self.rank {
            return Err(Error::RankMismatch {
                expected: self.rank,
                got: indices.len(),
            });
        }
        let alpha = MultiIndex::from_indices(self.dim, indices)?;
        Ok(self.values.get(&alpha).copied().unwrap_or_else(T::zero))
    }

    /// Non-zero entries in deterministic (multi-index) order.
    pub fn entries(&self) -> impl Iterator<Item = (&MultiIndex, T)> {
        self.values.iter().map(|(k, v)| (k, *v))
    }

    pub fn is_zero(&self) -> bool {
        self.values.is_empty()
    }
}

/// Fisher information matrix with its inverse and `√det`, SPD-validated.
#[derive(Clone, Debug)]
pub struct Metric<T> {
    dim: usize,
    matrix: Vec<T>,
    inverse: Vec<T>,
    sqrt_det: T,
}

impl<T: Real> Metric<T> {
    /// Build from a row-major `dim × dim` symmetric matrix.
    ///
    /// Fails unless the matrix is symmetric and positive definite: the
    /// Cholesky pivots must all be positive with
    /// `min pivot > 1e-12 × max pivot`, and the computed inverse must
    /// round-trip to the identity within `1e-10` relative Frobenius norm.
    /// A failure signals a degenerate Fisher metric, i.e. a
    /// non-identifiable parameter point.
    pub fn new(dim: usize, matrix: Vec<T>) -> Result<Self> {
        assert!(dim >= 1);
        assert_eq!(matrix.len(), dim * dim, "matrix shape mismatch");
        let sym_tol = T::from_f64(1e-12)
            .unwrap()
            .max(T::epsilon() * T::from_f64(100.0).unwrap());
        let mut scale = T::zero();
        for v in &matrix {
            scale = scale.max(v.abs());
        }
        for i in 0..dim {
            for j in (i + 1)..dim {
                if (matrix[i * dim + j] - matrix[j * dim + i]).abs() > sym_tol * scale {
                    return Err(Error::InvalidParameter(
                        "metric matrix is not symmetric".into(),
                    ));
                }
            }
        }

        // Cholesky G = L Lᵀ, pivots are the squared diagonal entries
        let mut l = vec![T::zero(); dim * dim];
        let mut pivot_min = T::infinity();
        let mut pivot_max = T::zero();
        for j in 0..dim {
            let mut pivot = matrix[j * dim + j];
            for k in 0..j {
                pivot = pivot - l[j * dim + k] * l[j * dim + k];
            }
            pivot_max = pivot_max.max(pivot);
            pivot_min = pivot_min.min(pivot);
            if pivot <= T::zero()
                || pivot <= T::from_f64(1e-12).unwrap() * pivot_max
            {
                let ratio = (pivot / pivot_max).to_f64().unwrap_or(f64::NAN);
                return Err(Error::NotPositiveDefinite { pivot_ratio: ratio });
            }
            let diag = pivot.sqrt();
            l[j * dim + j] = diag;
            for i in (j + 1)..dim {
                let mut s = matrix[i * dim + j];
                for k in 0..j {
                    s = s - l[i * dim + k] * l[j * dim + k];
                }
                l[i * dim + j] = s / diag;
            }
        }
        if pivot_min <= T::from_f64(1e-12).unwrap() * pivot_max {
            let ratio = (pivot_min / pivot_max).to_f64().unwrap_or(f64::NAN);
            return Err(Error::NotPositiveDefinite { pivot_ratio: ratio });
        }

        let mut sqrt_det = T::one();
        for j in 0..dim {
            sqrt_det = sqrt_det * l[j * dim + j];
        }

        // inverse via L Lᵀ X = I, column by column
        let mut inverse = vec![T::zero(); dim * dim];
        let mut col = vec![T::zero(); dim];
        for c in 0..dim {
            for i in 0..dim {
                let mut s = if i == c { T::one() } else { T::zero() };
                for k in 0..i {
                    s = s - l[i * dim + k] * col[k];
                }
                col[i] = s / l[i * dim + i];
            }
            for i in (0..dim).rev() {
                let mut s = col[i];
                for k in (i + 1)..dim {
                    s = s - l[k * dim + i] * col[k];
                }
                col[i] = s / l[i * dim + i];
            }
            for i in 0..dim {
                inverse[i * dim + c] = col[i];
            }
        }

        // round-trip check: ‖G G⁻¹ − I‖_F ≤ 1e-10 √d
        let mut frob = T::zero();
        for i in 0..dim {
            for j in 0..dim {
                let mut s = T::zero();
                for k in 0..dim {
                    s = s + matrix[i * dim + k] * inverse[k * dim + j];
                }
                let target = if i == j { T::one() } else { T::zero() };
                frob = frob + (s - target) * (s - target);
            }
        }
        let tol = T::from_f64(1e-10)
            .unwrap()
            .max(T::epsilon() * T::from_f64(1e3).unwrap());
        if frob.sqrt() > tol * T::from_usize(dim).unwrap().sqrt() {
            return Err(Error::NotPositiveDefinite {
                pivot_ratio: (pivot_min / pivot_max).to_f64().unwrap_or(f64::NAN),
            });
        }

        Ok(Metric {
            dim,
            matrix,
            inverse,
            sqrt_det,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `g_{ij}` (0-based).
    pub fn mat(&self, i: usize, j: usize) -> T {
        self.matrix[i * self.dim + j]
    }

    /// `g^{ij}` (0-based).
    pub fn inv(&self, i: usize, j: usize) -> T {
        self.inverse[i * self.dim + j]
    }

    pub fn sqrt_det(&self) -> T {
        self.sqrt_det
    }

    /// The metric as a rank-2 symmetric tensor (for contraction patterns
    /// that take `g` itself as an operand).
    pub fn to_tensor(&self) -> SymTensor<T> {
        SymTensor::from_fn(self.dim, 2, |alpha| {
            let rep = alpha.representative();
            self.mat(rep[0], rep[1])
        })
    }

    /// The inverse metric as a rank-2 symmetric tensor.
    pub fn inverse_tensor(&self) -> SymTensor<T> {
        SymTensor::from_fn(self.dim, 2, |alpha| {
            let rep = alpha.representative();
            self.inv(rep[0], rep[1])
        })
    }
}

/// A full pairwise contraction pattern over the concatenated slots of one
/// or two tensors: slots `0..r1` belong to the first operand and
/// `r1..r1+r2` to the second. Every slot must appear in exactly one pair;
/// each pair is contracted against one inverse-metric factor `g^{··}`.
#[derive(Clone, Debug)]
pub struct Pairing {
    pairs: Vec<(usize, usize)>,
}

impl Pairing {
    pub fn new(pairs: impl Into<Vec<(usize, usize)>>) -> Self {
        Pairing { pairs: pairs.into() }
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    fn validate(&self, r1: usize, r2: usize) -> Result<()> {
        let total = r1 + r2;
        if self.pairs.len() * 2 != total {
            return Err(Error::RankMismatch {
                expected: total,
                got: self.pairs.len() * 2,
            });
        }
        let mut seen = vec![false; total];
        for &(a, b) in &self.pairs {
            for s in [a, b] {
                if s >= total {
                    return Err(Error::IndexOutOfRange { index: s, dim: total });
                }
                if seen[s] {
                    return Err(Error::InvalidParameter(format!(
                        "slot {s} appears twice in contraction pattern"
                    )));
                }
                seen[s] = true;
            }
        }
        Ok(())
    }
}

/// All distinct permutations of a small sorted tuple.
fn distinct_permutations(rep: &[usize]) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = rep.to_vec();
    cur.sort_unstable();
    loop {
        out.push(cur.clone());
        // next_permutation
        let n = cur.len();
        if n < 2 {
            break;
        }
        let mut i = n - 1;
        while i > 0 && cur[i - 1] >= cur[i] {
            i -= 1;
        }
        if i == 0 {
            break;
        }
        let mut j = n - 1;
        while cur[j] <= cur[i - 1] {
            j -= 1;
        }
        cur.swap(i - 1, j);
        cur[i..].reverse();
    }
    out
}

/// Fully contracted scalar `Σ t1 ⊗ t2 ⊗ Π g^{··}` for a pairing pattern.
///
/// Production path: pairs internal to one operand range over degree-2
/// multi-indices weighted by their multiplicity, and pairs that bridge the
/// two operands range over a pair of degree-`c` multi-indices with a
/// permutation-sum weight, so the work scales with multi-index counts
/// rather than `d^rank`.
pub fn contract<T: Real>(
    metric: &Metric<T>,
    t1: &SymTensor<T>,
    t2: Option<&SymTensor<T>>,
    pairing: &Pairing,
) -> Result<T> {
    let d = metric.dim();
    if t1.dim() != d || t2.is_some_and(|t| t.dim() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: if t1.dim() != d {
                t1.dim()
            } else {
                t2.unwrap().dim()
            },
        });
    }
    let r1 = t1.rank();
    let r2 = t2.map_or(0, |t| t.rank());
    pairing.validate(r1, r2)?;

    let mut within1 = 0usize;
    let mut within2 = 0usize;
    let mut cross = 0usize;
    for &(a, b) in pairing.pairs() {
        match (a < r1, b < r1) {
            (true, true) => within1 += 1,
            (false, false) => within2 += 1,
            _ => cross += 1,
        }
    }

    // degree-2 choices for internal pairs: (index, multiplicity × g^{ab})
    let deg2: Vec<(MultiIndex, T)> = MultiIndex::enumerate(d, 2)
        .into_iter()
        .map(|beta| {
            let rep = beta.representative();
            let w = T::from_u64(beta.multiplicity().unwrap()).unwrap()
                * metric.inv(rep[0], rep[1]);
            (beta, w)
        })
        .collect();

    // cross block: W(α', β') = mult(α') Σ_{distinct perms P of rep(β')} Π g^{A_k P_k}
    let cross_alphas = MultiIndex::enumerate(d, cross as u32);
    let mut cross_weights: Vec<Vec<T>> = Vec::with_capacity(cross_alphas.len());
    for a in &cross_alphas {
        let rep_a = a.representative();
        let mult_a = T::from_u64(a.multiplicity().unwrap()).unwrap();
        let mut row = Vec::with_capacity(cross_alphas.len());
        for b in &cross_alphas {
            let mut w = T::zero();
            for perm in distinct_permutations(&b.representative()) {
                let mut prod = T::one();
                for (x, y) in rep_a.iter().zip(&perm) {
                    prod = prod * metric.inv(*x, *y);
                }
                w = w + prod;
            }
            row.push(mult_a * w);
        }
        cross_weights.push(row);
    }

    // recurse over internal-pair choices for t1, then t2, then sum the
    // cross block
    struct Ctx<'a, T> {
        within1: usize,
        within2: usize,
        deg2: &'a [(MultiIndex, T)],
        cross_alphas: &'a [MultiIndex],
        cross_weights: &'a [Vec<T>],
        t1: &'a SymTensor<T>,
        t2: Option<&'a SymTensor<T>>,
    }

    fn rec<T: Real>(
        ctx: &Ctx<'_, T>,
        level: usize,
        alpha: MultiIndex,
        beta: MultiIndex,
        weight: T,
        total: &mut T,
    ) {
        if level < ctx.within1 {
            for (b, w) in ctx.deg2 {
                rec(ctx, level + 1, alpha.add(b), beta.clone(), weight * *w, total);
            }
            return;
        }
        if level < ctx.within1 + ctx.within2 {
            for (b, w) in ctx.deg2 {
                rec(ctx, level + 1, alpha.clone(), beta.add(b), weight * *w, total);
            }
            return;
        }
        for (ia, ca) in ctx.cross_alphas.iter().enumerate() {
            let v1 = ctx.t1.value(&alpha.add(ca));
            if v1 == T::zero() {
                continue;
            }
            for (ib, cb) in ctx.cross_alphas.iter().enumerate() {
                let v2 = match ctx.t2 {
                    Some(t) => t.value(&beta.add(cb)),
                    None => T::one(),
                };
                if v2 == T::zero() {
                    continue;
                }
                *total = *total + weight * ctx.cross_weights[ia][ib] * v1 * v2;
            }
        }
    }

    let ctx = Ctx {
        within1,
        within2,
        deg2: &deg2,
        cross_alphas: &cross_alphas,
        cross_weights: &cross_weights,
        t1,
        t2,
    };
    let mut total = T::zero();
    rec(
        &ctx,
        0,
        MultiIndex::zero(d),
        MultiIndex::zero(d),
        T::one(),
        &mut total,
    );
    Ok(total)
}

/// Ordered-tuple reference contraction: loops over all `d^(r1+r2)` index
/// assignments. Test oracle for [`contract`]; infeasible beyond small
/// dimension and rank.
pub fn contract_naive<T: Real>(
    metric: &Metric<T>,
    t1: &SymTensor<T>,
    t2: Option<&SymTensor<T>>,
    pairing: &Pairing,
) -> Result<T> {
    let d = metric.dim();
    let r1 = t1.rank();
    let r2 = t2.map_or(0, |t| t.rank());
    pairing.validate(r1, r2)?;
    let total_slots = r1 + r2;

    let mut idx = vec![0usize; total_slots];
    let mut total = T::zero();
    loop {
        let mut term = T::one();
        for &(a, b) in pairing.pairs() {
            term = term * metric.inv(idx[a], idx[b]);
        }
        term = term * t1.component(&idx[..r1])?;
        if let Some(t) = t2 {
            term = term * t.component(&idx[r1..])?;
        }
        total = total + term;

        // odometer
        let mut k = total_slots;
        loop {
            if k == 0 {
                return Ok(total);
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < d {
                break;
            }
            idx[k] = 0;
        }
    }
}
