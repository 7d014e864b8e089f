//! The correction terms `F₀, F₁, F₂` of the complexity expansion, and the
//! Amari-Chentsov tensors.
//!
//! `F₀ = 1`. The production path evaluates `F₁` and `F₂` as multi-index
//! sums of cumulants against Hermite numbers,
//!
//! ```text
//! F₁ = Σ_{|α|=4} κ_α h_α / α!  +  Σ_{|α|=|β|=3} κ_α κ_β h_{α+β} / (2 α! β!)
//! ```
//!
//! with the analogous five-term sum for `F₂` (Hermite ranks up to 12).
//! Two independent routes cross-check it: [`f1_via_contractions`] evaluates
//! the equivalent ordered-tensor form (three cumulant contractions against
//! inverse-metric powers with coefficients 1/8, 1/8, 1/12), and
//! [`f1_invariant`] evaluates the parameterization-invariant form built
//! from Amari-Chentsov tensors. All three must agree in the natural
//! parameterization.

use crate::family::ExpFamily;
use crate::hermite::HermiteTable;
use crate::multiindex::MultiIndex;
use crate::tensors::{contract, Pairing, SymTensor};
use crate::{Error, Real, Result};

/// The expansion terms `F₀..F_s` at one parameter point.
#[derive(Clone, Debug)]
pub struct ExpansionTerms<T> {
    pub theta: Vec<T>,
    /// `f[i]` is `F_i(θ)`; `f[0] = 1` always.
    pub f: Vec<T>,
}

impl<T: Real> ExpansionTerms<T> {
    /// Highest order computed.
    pub fn order(&self) -> usize {
        self.f.len() - 1
    }
}

/// Coefficients of the expanded logarithm
/// `log ∫ (1 + F̄₁/n + F̄₂/n²) dπ = log vol + c₁ n⁻¹ + c₂ n⁻² + O(n⁻³)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogExpansion<T> {
    /// Coefficient of `n⁻¹`: the Jeffreys-weighted mean of `F₁`.
    pub c1: T,
    /// Coefficient of `n⁻²`: `F̄₂ − F̄₁²/2`.
    pub c2: T,
}

/// Expand `log(1 + z)` to second order over the mean correction terms:
/// `c₁ = F̄₁`, `c₂ = F̄₂ − F̄₁²/2`.
pub fn log_expansion<T: Real>(mean_f1: T, mean_f2: T) -> LogExpansion<T> {
    LogExpansion {
        c1: mean_f1,
        c2: mean_f2 - mean_f1 * mean_f1 / T::from_f64(2.0).unwrap(),
    }
}

fn weighted_entries<T: Real>(t: &SymTensor<T>) -> Vec<(MultiIndex, T)> {
    t.entries()
        .map(|(alpha, v)| {
            let w = T::from_u64(alpha.factorial().expect("rank <= 12")).unwrap();
            (alpha.clone(), v / w)
        })
        .collect()
}

/// First-order correction `F₁(θ)` by the multi-index sum.
pub fn f1<T: Real>(family: &ExpFamily<T>, theta: &[T]) -> Result<T> {
    let cum = family.cumulants(theta, 4)?;
    let metric = family.fisher_metric(theta)?;
    let table = HermiteTable::new(&metric);
    let k3 = weighted_entries(&cum[2]);
    let k4 = weighted_entries(&cum[3]);

    let mut total = T::zero();
    for (alpha, w) in &k4 {
        total = total + *w * table.value(alpha)?;
    }
    let half = T::from_f64(0.5).unwrap();
    for (alpha, wa) in &k3 {
        for (beta, wb) in &k3 {
            total = total + half * *wa * *wb * table.value(&alpha.add(beta))?;
        }
    }
    Ok(total)
}

/// `F₁(θ)` by the ordered-tensor route: the three cumulant contractions
/// against inverse-metric powers. Must agree with [`f1`]; kept as an
/// independent cross-check.
pub fn f1_via_contractions<T: Real>(family: &ExpFamily<T>, theta: &[T]) -> Result<T> {
    let cum = family.cumulants(theta, 4)?;
    let metric = family.fisher_metric(theta)?;
    let k3 = &cum[2];
    let k4 = &cum[3];

    let c1 = contract(&metric, k4, None, &Pairing::new([(0, 1), (2, 3)]))?;
    let c2 = contract(&metric, k3, Some(k3), &Pairing::new([(0, 1), (2, 3), (4, 5)]))?;
    let c3 = contract(&metric, k3, Some(k3), &Pairing::new([(0, 3), (1, 4), (2, 5)]))?;

    let eighth = T::from_f64(0.125).unwrap();
    let twelfth = T::one() / T::from_f64(12.0).unwrap();
    Ok(eighth * c1 - eighth * c2 - twelfth * c3)
}

/// Second-order correction `F₂(θ)`: the five-term multi-index sum with
/// Hermite ranks up to 12.
pub fn f2<T: Real>(family: &ExpFamily<T>, theta: &[T]) -> Result<T> {
    let cum = family.cumulants(theta, 6)?;
    let metric = family.fisher_metric(theta)?;
    let table = HermiteTable::new(&metric);
    let k3 = weighted_entries(&cum[2]);
    let k4 = weighted_entries(&cum[3]);
    let k5 = weighted_entries(&cum[4]);
    let k6 = weighted_entries(&cum[5]);

    let half = T::from_f64(0.5).unwrap();
    let mut total = T::zero();

    // Σ_{|α|=6} κ_α h_α / α!
    for (alpha, w) in &k6 {
        total = total + *w * table.value(alpha)?;
    }
    // Σ_{|α|=3, |β|=5} κ_α κ_β h_{α+β} / (α! β!)
    for (alpha, wa) in &k3 {
        for (beta, wb) in &k5 {
            total = total + *wa * *wb * table.value(&alpha.add(beta))?;
        }
    }
    // (1/2) Σ_{|α|=|β|=4}
    for (alpha, wa) in &k4 {
        for (beta, wb) in &k4 {
            total = total + half * *wa * *wb * table.value(&alpha.add(beta))?;
        }
    }
    // (1/2) Σ_{|α|=|β|=3, |γ|=4}
    for (alpha, wa) in &k3 {
        for (beta, wb) in &k3 {
            let ab = alpha.add(beta);
            for (gamma, wc) in &k4 {
                total = total + half * *wa * *wb * *wc * table.value(&ab.add(gamma))?;
            }
        }
    }
    // (1/24) Σ over four degree-3 indices
    let weight_1_24 = T::one() / T::from_f64(24.0).unwrap();
    for (alpha, wa) in &k3 {
        for (beta, wb) in &k3 {
            let ab = alpha.add(beta);
            let wab = *wa * *wb;
            for (gamma, wc) in &k3 {
                let abc = ab.add(gamma);
                let wabc = wab * *wc;
                for (delta, wd) in &k3 {
                    total =
                        total + weight_1_24 * wabc * *wd * table.value(&abc.add(delta))?;
                }
            }
        }
    }
    Ok(total)
}

/// `F₀..F_s` at one point (`s ≤ 2`). Entries are checked finite.
pub fn expansion_terms<T: Real>(
    family: &ExpFamily<T>,
    theta: &[T],
    s: usize,
) -> Result<ExpansionTerms<T>> {
    if s > 2 {
        return Err(Error::InvalidParameter(format!(
            "expansion order {s} unsupported (max 2)"
        )));
    }
    let mut f = vec![T::one()];
    if s >= 1 {
        f.push(f1(family, theta)?);
    }
    if s >= 2 {
        f.push(f2(family, theta)?);
    }
    if f.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter(
            "non-finite expansion term".into(),
        ));
    }
    Ok(ExpansionTerms {
        theta: theta.to_vec(),
        f,
    })
}

/// The rank-`r` Amari-Chentsov tensor in the natural parameterization,
/// `r ≤ 4`, from the recurrence
/// `T⁽ʳ⁾ = ∂ T⁽ʳ⁻¹⁾ + Σ_j g_{i_j i_r} T⁽ʳ⁻²⁾` seeded with `T⁽¹⁾ = 0` and
/// `T⁽²⁾ = g`. Through rank 4 the differentiated tensor is itself a pure
/// `ψ`-derivative tensor, so `∂ T⁽ʳ⁻¹⁾` is the family's exact order-`r`
/// derivative; this is why the recurrence stops at 4 here.
pub fn amari_chentsov<T: Real>(
    family: &ExpFamily<T>,
    theta: &[T],
    r: usize,
) -> Result<SymTensor<T>> {
    if r == 0 || r > 4 {
        return Err(Error::UnsupportedAcRank { rank: r });
    }
    family.check_point(theta)?;
    let d = family.dim();
    if r == 1 {
        return Ok(SymTensor::new(d, 1));
    }
    let metric = family.fisher_metric(theta)?;
    if r == 2 {
        return Ok(metric.to_tensor());
    }
    // pull the needed derivative orders up front so order errors surface
    let cum = family.cumulants(theta, r)?;
    let mut prev2 = SymTensor::new(d, 1); // T⁽¹⁾
    let mut prev1 = metric.to_tensor(); // T⁽²⁾
    for rank in 3..=r {
        let next = SymTensor::from_fn(d, rank, |alpha| {
            let rep = alpha.representative();
            // ∂_{i_r} of a pure ψ-derivative tensor is ∂^α ψ
            let mut v = cum[rank - 1].value(alpha);
            let last = rep[rank - 1];
            for j in 0..rank - 1 {
                let mut rest: Vec<usize> = Vec::with_capacity(rank - 2);
                for (k, &idx) in rep.iter().enumerate().take(rank - 1) {
                    if k != j {
                        rest.push(idx);
                    }
                }
                let t_prev = prev2
                    .component(&rest)
                    .expect("indices validated by construction");
                v = v + metric.mat(rep[j], last) * t_prev;
            }
            v
        });
        prev2 = prev1;
        prev1 = next;
    }
    Ok(prev1)
}

/// `F₁(θ)` by the parameterization-invariant Amari-Chentsov form:
/// the same three contractions applied to `T⁽⁴⁾` and `T⁽³⁾` minus the
/// constant `(d² + 2d)/8` that absorbs the metric/inverse-metric traces.
/// Must equal [`f1`] in the natural parameterization.
pub fn f1_invariant<T: Real>(family: &ExpFamily<T>, theta: &[T]) -> Result<T> {
    let metric = family.fisher_metric(theta)?;
    let t3 = amari_chentsov(family, theta, 3)?;
    let t4 = amari_chentsov(family, theta, 4)?;

    let c1 = contract(&metric, &t4, None, &Pairing::new([(0, 1), (2, 3)]))?;
    let c2 = contract(&metric, &t3, Some(&t3), &Pairing::new([(0, 1), (2, 3), (4, 5)]))?;
    let c3 = contract(&metric, &t3, Some(&t3), &Pairing::new([(0, 3), (1, 4), (2, 5)]))?;

    let d = T::from_usize(family.dim()).unwrap();
    let eighth = T::from_f64(0.125).unwrap();
    let twelfth = T::one() / T::from_f64(12.0).unwrap();
    Ok(eighth * c1 - eighth * c2 - twelfth * c3 - (d * d + d + d) * eighth)
}

/// Closed form of the spherical-normal first-order correction,
/// `(1 − 3d²)/(12(d−1))`; the machinery must reproduce it.
pub fn spherical_f1_closed_form<T: Real>(dim: usize) -> T {
    let d = dim as f64;
    T::from_f64((1.0 - 3.0 * d * d) / (12.0 * (d - 1.0))).unwrap()
}
