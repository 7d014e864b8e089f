//! Natural exponential families through exact log-partition derivatives.
//!
//! A family is described by its dimension, a natural-parameter domain
//! predicate, and a provider for the mixed partial derivatives `∂^α ψ` of
//! the log-partition function. Cumulant tensors are exactly those
//! derivatives, and the Fisher information metric is the `ψ`-Hessian, so
//! everything downstream derives from the one derivative provider.
//!
//! Derivatives are supplied analytically per builtin family; there is no
//! finite-difference fallback in the production path (finite differences
//! beyond order 4 are numerically unreliable — they exist only in the test
//! suite as an independent oracle). Domain violations are hard errors,
//! never clamped: `ψ` is infinite outside the natural parameter space.

use std::sync::Arc;

use rand::{Rng, RngCore};
use serde::Deserialize;

use crate::multiindex::MultiIndex;
use crate::tensors::{Metric, SymTensor};
use crate::{Error, Real, Result};

/// Whether Cramér's condition is known to hold for the family.
///
/// The catalog families are continuous (or have continuous minimal
/// sufficient statistics), so the condition holds for them; it cannot be
/// verified computationally for user-supplied polynomial families.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CramerStatus {
    Holds,
    Unknown,
}

impl std::fmt::Display for CramerStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CramerStatus::Holds => write!(f, "true"),
            CramerStatus::Unknown => write!(f, "unknown"),
        }
    }
}

type PsiDeriv<T> = Arc<dyn Fn(&[T], &MultiIndex) -> T + Send + Sync>;
type DomainPred<T> = Arc<dyn Fn(&[T]) -> bool + Send + Sync>;
type Sampler<T> = Arc<dyn Fn(&[T], &mut dyn RngCore) -> Vec<T> + Send + Sync>;

/// An exponential family in its natural parameterization.
#[derive(Clone)]
pub struct ExpFamily<T> {
    name: String,
    dim: usize,
    max_order: usize,
    cramer: CramerStatus,
    psi_deriv: PsiDeriv<T>,
    in_domain: DomainPred<T>,
    sampler: Option<Sampler<T>>,
}

impl<T> std::fmt::Debug for ExpFamily<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ExpFamily")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("max_order", &self.max_order)
            .finish()
    }
}

/// Highest derivative order any family is allowed to advertise; matches the
/// crate-wide rank cap.
pub const MAX_DERIV_ORDER: usize = 12;

impl<T: Real> ExpFamily<T> {
    /// Assemble a family from raw parts. The derivative closure must be pure
    /// and return `∂^α ψ(θ)` for in-domain `θ` and `|α| ≤ max_order`.
    pub fn new(
        name: impl Into<String>,
        dim: usize,
        max_order: usize,
        cramer: CramerStatus,
        psi_deriv: PsiDeriv<T>,
        in_domain: DomainPred<T>,
        sampler: Option<Sampler<T>>,
    ) -> Self {
        assert!(dim >= 1);
        assert!(max_order <= MAX_DERIV_ORDER);
        ExpFamily {
            name: name.into(),
            dim,
            max_order,
            cramer,
            psi_deriv,
            in_domain,
            sampler,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    pub fn cramer(&self) -> CramerStatus {
        self.cramer
    }

    pub fn has_sampler(&self) -> bool {
        self.sampler.is_some()
    }

    /// Validate a parameter point: right length and inside the domain.
    pub fn check_point(&self, theta: &[T]) -> Result<()> {
        if theta.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: theta.len(),
            });
        }
        if !(self.in_domain)(theta) {
            return Err(Error::OutOfDomain {
                family: self.name.clone(),
            });
        }
        Ok(())
    }

    /// `∂^α ψ(θ)`, validated.
    pub fn psi_deriv(&self, theta: &[T], alpha: &MultiIndex) -> Result<T> {
        self.check_point(theta)?;
        if alpha.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: alpha.dim(),
            });
        }
        let order = alpha.degree() as usize;
        if order > self.max_order {
            return Err(Error::OrderUnavailable {
                family: self.name.clone(),
                order,
                max_order: self.max_order,
            });
        }
        Ok((self.psi_deriv)(theta, alpha))
    }

    /// Cumulant tensors of ranks `1..=max_r`: the rank-`r` tensor has
    /// components `∂^α ψ(θ)` for `|α| = r`, and the rank-2 tensor is the
    /// Fisher metric matrix.
    pub fn cumulants(&self, theta: &[T], max_r: usize) -> Result<Vec<SymTensor<T>>> {
        self.check_point(theta)?;
        if max_r > self.max_order {
            return Err(Error::OrderUnavailable {
                family: self.name.clone(),
                order: max_r,
                max_order: self.max_order,
            });
        }
        let mut out = Vec::with_capacity(max_r);
        for r in 1..=max_r {
            out.push(SymTensor::from_fn(self.dim, r, |alpha| {
                (self.psi_deriv)(theta, alpha)
            }));
        }
        Ok(out)
    }

    /// The Fisher information metric: the `ψ`-Hessian, SPD-validated.
    pub fn fisher_metric(&self, theta: &[T]) -> Result<Metric<T>> {
        self.check_point(theta)?;
        let d = self.dim;
        let mut m = vec![T::zero(); d * d];
        for i in 0..d {
            for j in i..d {
                let alpha = MultiIndex::unit(d, i).add(&MultiIndex::unit(d, j));
                let v = (self.psi_deriv)(theta, &alpha);
                m[i * d + j] = v;
                m[j * d + i] = v;
            }
        }
        Metric::new(d, m)
    }

    /// One draw of the sufficient statistic under the distribution at `theta`.
    pub fn sample(&self, theta: &[T], rng: &mut dyn RngCore) -> Result<Vec<T>> {
        self.check_point(theta)?;
        match &self.sampler {
            Some(s) => Ok(s(theta, rng)),
            None => Err(Error::NoSampler(self.name.clone())),
        }
    }

    // ------------------------------------------------------------------
    // builtin catalog
    // ------------------------------------------------------------------

    /// Exponential distributions: `Θ = {θ < 0}`, `ψ(θ) = −log(−θ)`,
    /// rate `−θ`. All derivative orders are closed-form:
    /// `∂^m ψ = (−1)^m (m−1)! θ^{−m}`.
    pub fn exponential_1d() -> Self {
        let psi: PsiDeriv<T> = Arc::new(|theta: &[T], alpha: &MultiIndex| {
            let t = theta[0];
            let m = alpha.degree();
            if m == 0 {
                return -(-t).ln();
            }
            let mut fact = T::one();
            for k in 2..m {
                fact = fact * T::from_u32(k).unwrap();
            }
            let sign = if m % 2 == 0 { T::one() } else { -T::one() };
            sign * fact * t.powi(-(m as i32))
        });
        let dom: DomainPred<T> = Arc::new(|theta: &[T]| theta[0] < T::zero());
        let sampler: Sampler<T> = Arc::new(|theta: &[T], rng: &mut dyn RngCore| {
            let rate = -theta[0].to_f64().unwrap();
            let u: f64 = rng.random();
            vec![T::from_f64(-(1.0 - u).ln() / rate).unwrap()]
        });
        ExpFamily::new(
            "exp1d",
            1,
            MAX_DERIV_ORDER,
            CramerStatus::Holds,
            psi,
            dom,
            Some(sampler),
        )
    }

    /// Spherical normal observations with known variance `σ²`, natural
    /// parameter `θ = μ/σ²`: `ψ(θ) = σ²‖θ‖²/2` is quadratic, so every
    /// cumulant of order ≥ 3 vanishes.
    pub fn normal_known_var(dim: usize, sigma: f64) -> Result<Self> {
        if dim < 1 {
            return Err(Error::InvalidParameter("dimension must be >= 1".into()));
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "sigma must be positive and finite, got {sigma}"
            )));
        }
        let var = sigma * sigma;
        let psi: PsiDeriv<T> = Arc::new(move |theta: &[T], alpha: &MultiIndex| {
            let v = T::from_f64(var).unwrap();
            match alpha.degree() {
                0 => {
                    let half = T::from_f64(0.5).unwrap();
                    let norm2 = theta.iter().map(|&t| t * t).sum::<T>();
                    v * norm2 * half
                }
                1 => {
                    let i = alpha.representative()[0];
                    v * theta[i]
                }
                2 => {
                    let rep = alpha.representative();
                    if rep[0] == rep[1] {
                        v
                    } else {
                        T::zero()
                    }
                }
                _ => T::zero(),
            }
        });
        let dom: DomainPred<T> = Arc::new(|_: &[T]| true);
        let sampler: Sampler<T> = Arc::new(move |theta: &[T], rng: &mut dyn RngCore| {
            theta
                .iter()
                .map(|&t| {
                    let mean = var * t.to_f64().unwrap();
                    T::from_f64(mean + sigma * standard_normal(rng)).unwrap()
                })
                .collect()
        });
        Ok(ExpFamily::new(
            format!("normal-kv(d={dim},sigma={sigma})"),
            dim,
            MAX_DERIV_ORDER,
            CramerStatus::Holds,
            psi,
            dom,
            Some(sampler),
        ))
    }

    /// `(d−1)`-dimensional spherical normal data with unknown variance,
    /// sufficient statistic `x = (y, ‖y‖²)`:
    /// `ψ(θ) = ((1−d)/2) log(−2 θ_d) − (θ₁²+⋯+θ_{d−1}²)/(4 θ_d)` on
    /// `θ_d < 0`.
    ///
    /// The Fisher metric is the `ψ`-Hessian; its inverse satisfies
    /// `g^{dd} = 2θ_d²/(d−1)`, `g^{id} = 2θᵢθ_d/(d−1)` and
    /// `g^{ij} = 2θᵢθⱼ/(d−1) − 2θ_d δᵢⱼ` for `i, j < d` (block inversion of
    /// the Hessian; equal to the covariance of the sufficient statistic).
    pub fn spherical_normal_unknown_var(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidParameter(
                "spherical-normal family needs dimension >= 2".into(),
            ));
        }
        let last = dim - 1;
        let psi: PsiDeriv<T> = Arc::new(move |theta: &[T], alpha: &MultiIndex| {
            let td = theta[last];
            let m = alpha.entry(last);
            let p: u32 = (0..last).map(|i| alpha.entry(i)).sum();
            let half = T::from_f64(0.5).unwrap();
            let quarter = T::from_f64(0.25).unwrap();
            // c = (1−d)/2, S = Σ_{i<d} θᵢ²
            let c = T::from_f64((1.0 - dim as f64) / 2.0).unwrap();
            let s: T = (0..last).map(|i| theta[i] * theta[i]).sum();
            let sign = |k: u32| if k % 2 == 0 { T::one() } else { -T::one() };
            let fact = |k: u32| {
                let mut f = T::one();
                for j in 2..=k {
                    f = f * T::from_u32(j).unwrap();
                }
                f
            };
            match p {
                0 => {
                    if m == 0 {
                        c * (-(td + td)).ln() - s * quarter / td
                    } else {
                        // ∂^m of c·log(−2θ_d) − (S/4)/θ_d
                        c * sign(m - 1) * fact(m - 1) * td.powi(-(m as i32))
                            - s * quarter * sign(m) * fact(m) * td.powi(-(m as i32 + 1))
                    }
                }
                1 => {
                    let i = (0..last).find(|&i| alpha.entry(i) == 1).unwrap();
                    -theta[i] * half * sign(m) * fact(m) * td.powi(-(m as i32 + 1))
                }
                2 => {
                    if (0..last).any(|i| alpha.entry(i) == 2) {
                        -half * sign(m) * fact(m) * td.powi(-(m as i32 + 1))
                    } else {
                        T::zero() // two distinct first-block directions
                    }
                }
                _ => T::zero(),
            }
        });
        let dom: DomainPred<T> = Arc::new(move |theta: &[T]| theta[last] < T::zero());
        let sampler: Sampler<T> = Arc::new(move |theta: &[T], rng: &mut dyn RngCore| {
            let td = theta[last].to_f64().unwrap();
            let var = -1.0 / (2.0 * td);
            let sd = var.sqrt();
            let mut out = Vec::with_capacity(theta.len());
            let mut norm2 = 0.0;
            for t in theta.iter().take(last) {
                let mean = t.to_f64().unwrap() * var;
                let y = mean + sd * standard_normal(rng);
                norm2 += y * y;
                out.push(T::from_f64(y).unwrap());
            }
            out.push(T::from_f64(norm2).unwrap());
            out
        });
        Ok(ExpFamily::new(
            format!("spherical(d={dim})"),
            dim,
            MAX_DERIV_ORDER,
            CramerStatus::Holds,
            psi,
            dom,
            Some(sampler),
        ))
    }

    /// A user-supplied polynomial log-partition
    /// `ψ(θ) = Σ c_β θ^β`, with derivatives from exact falling-factorial
    /// coefficient shifts. The domain is all of `ℝ^d` or an optional box.
    /// Cramér's condition is not verifiable for these, so they carry
    /// [`CramerStatus::Unknown`] and no sampler.
    pub fn poly_partition(
        dim: usize,
        terms: Vec<(MultiIndex, T)>,
        domain_box: Option<Vec<(T, T)>>,
    ) -> Result<Self> {
        if dim < 1 {
            return Err(Error::InvalidParameter("dimension must be >= 1".into()));
        }
        let mut merged: std::collections::BTreeMap<MultiIndex, T> = Default::default();
        for (beta, c) in terms {
            if beta.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: beta.dim(),
                });
            }
            if !c.is_finite() {
                return Err(Error::InvalidParameter("non-finite coefficient".into()));
            }
            let slot = merged.entry(beta).or_insert_with(T::zero);
            *slot = *slot + c;
        }
        if let Some(b) = &domain_box {
            if b.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: b.len(),
                });
            }
            for &(lo, hi) in b {
                if lo.is_nan() || hi.is_nan() || lo >= hi {
                    return Err(Error::InvalidParameter(
                        "domain box needs lo < hi in every coordinate".into(),
                    ));
                }
            }
        }
        let terms: Vec<(MultiIndex, T)> = merged.into_iter().collect();
        let psi: PsiDeriv<T> = Arc::new(move |theta: &[T], alpha: &MultiIndex| {
            let mut total = T::zero();
            'terms: for (beta, c) in &terms {
                let mut coeff = *c;
                let mut mono = T::one();
                for (i, &t) in theta.iter().enumerate() {
                    let b = beta.entry(i);
                    let a = alpha.entry(i);
                    if b < a {
                        continue 'terms;
                    }
                    // falling factorial b (b−1) … (b−a+1)
                    for k in 0..a {
                        coeff = coeff * T::from_u32(b - k).unwrap();
                    }
                    mono = mono * t.powi((b - a) as i32);
                }
                total = total + coeff * mono;
            }
            total
        });
        let dom: DomainPred<T> = match domain_box {
            None => Arc::new(|_: &[T]| true),
            Some(b) => Arc::new(move |theta: &[T]| {
                theta
                    .iter()
                    .zip(&b)
                    .all(|(&t, &(lo, hi))| t >= lo && t <= hi)
            }),
        };
        Ok(ExpFamily::new(
            "poly",
            dim,
            MAX_DERIV_ORDER,
            CramerStatus::Unknown,
            psi,
            dom,
            None,
        ))
    }

    /// Load a polynomial family from its JSON description:
    ///
    /// ```json
    /// {"dim": 2,
    ///  "terms": [{"alpha": [2, 0], "coef": 0.5}, {"alpha": [0, 2], "coef": 0.5}],
    ///  "box": [[-1.0, 1.0], [-1.0, 1.0]]}
    /// ```
    ///
    /// `box` is optional; without it the domain is all of `ℝ^d`.
    pub fn poly_partition_from_json(doc: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct TermDoc {
            alpha: Vec<u32>,
            coef: f64,
        }
        #[derive(Deserialize)]
        struct PolyDoc {
            dim: usize,
            terms: Vec<TermDoc>,
            #[serde(default, rename = "box")]
            domain_box: Option<Vec<[f64; 2]>>,
        }
        let doc: PolyDoc =
            serde_json::from_str(doc).map_err(|e| Error::BadFamilySpec(e.to_string()))?;
        if doc.dim < 1 {
            return Err(Error::BadFamilySpec("dim must be >= 1".into()));
        }
        let mut terms = Vec::with_capacity(doc.terms.len());
        for t in doc.terms {
            if t.alpha.len() != doc.dim {
                return Err(Error::BadFamilySpec(format!(
                    "term alpha has length {}, expected {}",
                    t.alpha.len(),
                    doc.dim
                )));
            }
            terms.push((
                MultiIndex::new(t.alpha),
                T::from_f64(t.coef).ok_or_else(|| {
                    Error::BadFamilySpec("coefficient not representable".into())
                })?,
            ));
        }
        let domain_box = doc.domain_box.map(|b| {
            b.into_iter()
                .map(|[lo, hi]| (T::from_f64(lo).unwrap(), T::from_f64(hi).unwrap()))
                .collect()
        });
        ExpFamily::poly_partition(doc.dim, terms, domain_box)
    }
}

/// One standard-normal draw by Box–Muller.
fn standard_normal(rng: &mut dyn RngCore) -> f64 {
    let u1: f64 = rng.random();
    let u2: f64 = rng.random();
    (-2.0 * (1.0 - u1).ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}
