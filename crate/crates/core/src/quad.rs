//! Gauss–Legendre quadrature on intervals and tensor-product boxes.
//!
//! Nodes and weights come from Newton iteration on the Legendre recurrence
//! (the classic `gauleg` scheme); an n-point rule integrates polynomials of
//! degree `2n − 1` exactly and converges spectrally for the smooth
//! integrands this crate meets.

use crate::Real;

/// Nodes and weights of the n-point Gauss–Legendre rule on `[-1, 1]`.
///
/// Nodes are returned in increasing order; weights sum to 2.
pub fn gauss_legendre<T: Real>(n: usize) -> (Vec<T>, Vec<T>) {
    assert!(n >= 1, "quadrature rule needs at least one node");
    let mut nodes = vec![T::zero(); n];
    let mut weights = vec![T::zero(); n];
    let eps = T::epsilon() * T::from_f64(4.0).unwrap();
    let m = n.div_ceil(2);
    for i in 0..m {
        // Chebyshev-like initial guess for the i-th root
        let guess = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut x = T::from_f64(guess).unwrap();
        let mut dp;
        loop {
            // Legendre recurrence: (k+1) P_{k+1} = (2k+1) x P_k − k P_{k−1}
            let mut p0 = T::one();
            let mut p1 = T::zero();
            for k in 0..n {
                let kf = T::from_usize(k).unwrap();
                let p2 = p1;
                p1 = p0;
                p0 = ((T::from_usize(2 * k + 1).unwrap()) * x * p1 - kf * p2)
                    / (kf + T::one());
            }
            // derivative from P_n and P_{n−1}
            dp = T::from_usize(n).unwrap() * (x * p0 - p1) / (x * x - T::one());
            let dx = p0 / dp;
            x = x - dx;
            if dx.abs() <= eps {
                break;
            }
        }
        let w = T::from_f64(2.0).unwrap() / ((T::one() - x * x) * dp * dp);
        nodes[i] = -x;
        weights[i] = w;
        nodes[n - 1 - i] = x;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Affine image of the `[-1, 1]` rule on `[lo, hi]`.
pub fn gauss_legendre_on<T: Real>(n: usize, lo: T, hi: T) -> (Vec<T>, Vec<T>) {
    let (xs, ws) = gauss_legendre::<T>(n);
    let half = T::from_f64(0.5).unwrap();
    let mid = (lo + hi) * half;
    let scale = (hi - lo) * half;
    (
        xs.into_iter().map(|x| mid + scale * x).collect(),
        ws.into_iter().map(|w| w * scale).collect(),
    )
}

/// Iterator over the nodes of a tensor-product rule on a box, yielding
/// `(point, weight)` pairs. The per-dimension rules are supplied as
/// `(nodes, weights)` slices.
pub struct TensorGrid<'a, T> {
    dims: &'a [(Vec<T>, Vec<T>)],
    counter: Vec<usize>,
    done: bool,
}

impl<'a, T: Real> TensorGrid<'a, T> {
    pub fn new(dims: &'a [(Vec<T>, Vec<T>)]) -> Self {
        let done = dims.iter().any(|(n, _)| n.is_empty());
        TensorGrid {
            dims,
            counter: vec![0; dims.len()],
            done,
        }
    }
}

impl<T: Real> Iterator for TensorGrid<'_, T> {
    type Item = (Vec<T>, T);

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        let mut point = Vec::with_capacity(self.dims.len());
        let mut weight = T::one();
        for (k, (nodes, weights)) in self.dims.iter().enumerate() {
            let i = self.counter[k];
            point.push(nodes[i]);
            weight = weight * weights[i];
        }
        // odometer increment
        let mut k = self.dims.len();
        loop {
            if k == 0 {
                self.done = true;
                break;
            }
            k -= 1;
            self.counter[k] += 1;
            if self.counter[k] < self.dims[k].0.len() {
                break;
            }
            self.counter[k] = 0;
        }
        Some((point, weight))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_interval_length() {
        for n in [1, 2, 5, 16, 32, 64] {
            let (_, ws) = gauss_legendre::<f64>(n);
            let sum: f64 = ws.iter().sum();
            assert!((sum - 2.0).abs() < 1e-13, "n={n} sum={sum}");
        }
    }

    #[test]
    fn exact_for_polynomials() {
        // ∫_{-1}^{1} x^k dx = 0 (odd) or 2/(k+1) (even), exact up to 2n-1
        for n in [2usize, 4, 8, 16] {
            let (xs, ws) = gauss_legendre::<f64>(n);
            for k in 0..(2 * n) {
                let got: f64 = xs
                    .iter()
                    .zip(&ws)
                    .map(|(x, w)| w * x.powi(k as i32))
                    .sum();
                let expect = if k % 2 == 1 { 0.0 } else { 2.0 / (k as f64 + 1.0) };
                assert!((got - expect).abs() < 1e-12, "n={n} k={k}");
            }
        }
    }

    #[test]
    fn mapped_rule_integrates_reciprocal() {
        // ∫_1^e dx/x = 1
        let (xs, ws) = gauss_legendre_on::<f64>(32, 1.0, std::f64::consts::E);
        let got: f64 = xs.iter().zip(&ws).map(|(x, w)| w / x).sum();
        assert!((got - 1.0).abs() < 1e-14);
    }

    #[test]
    fn tensor_grid_volume() {
        let rule_x = gauss_legendre_on::<f64>(8, 0.0, 2.0);
        let rule_y = gauss_legendre_on::<f64>(8, -1.0, 1.0);
        let dims = [rule_x, rule_y];
        let total: f64 = TensorGrid::new(&dims).map(|(_, w)| w).sum();
        assert!((total - 4.0).abs() < 1e-13);
        let count = TensorGrid::new(&dims).count();
        assert_eq!(count, 64);
    }
}
