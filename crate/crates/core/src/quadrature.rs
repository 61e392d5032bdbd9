//! Gauss–Hermite quadrature for Gaussian ensemble averages.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::DMatrix;

/// Largest rule we build.
pub const MAX_NODES: usize = 512;

/// Nodes and weights for ∫ e^{−x²} f(x) dx ≈ Σ w_i f(x_i).
#[derive(Debug, Clone)]
pub struct GaussHermite {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussHermite {
    /// Builds an `n`-point rule. Nodes come from the eigenvalues of the
    /// Jacobi matrix and are polished by Newton steps on the orthonormal
    /// recurrence, which also gives the weights. `n` is clamped to
    /// `1..=MAX_NODES`.
    pub fn new(n: usize) -> Self {
        let n = n.clamp(1, MAX_NODES);
        let jacobi = DMatrix::from_fn(n, n, |i, j| {
            if i.abs_diff(j) == 1 {
                (i.max(j) as f64 / 2.0).sqrt()
            } else {
                0.0
            }
        });
        let mut roots: Vec<f64> = jacobi.symmetric_eigenvalues().iter().copied().collect();
        roots.sort_by(|a, b| b.total_cmp(a));
        let pim4 = PI.powf(-0.25);
        let scale = (2.0 * n as f64).sqrt();
        let mut x = vec![0.0; n];
        let mut w = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            let mut z = roots[i];
            for _ in 0..3 {
                let (p1, p2) = hermite_pair(z, n, pim4);
                if p2 == 0.0 {
                    break;
                }
                z -= p1 / (scale * p2);
            }
            if n % 2 == 1 && i == n / 2 {
                z = 0.0;
            }
            let pp = scale * hermite_pair(z, n, pim4).1;
            x[i] = z;
            x[n - 1 - i] = -z;
            w[i] = 2.0 / (pp * pp);
            w[n - 1 - i] = w[i];
        }
        Self { nodes: x, weights: w }
    }

    /// Cached rule of size `n`.
    pub fn cached(n: usize) -> Arc<Self> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<GaussHermite>>>> = OnceLock::new();
        let n = n.clamp(1, MAX_NODES);
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().expect("quadrature cache poisoned");
        guard.entry(n).or_insert_with(|| Arc::new(Self::new(n))).clone()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// E[f(X)] for X ~ N(mean, sigma²).
    pub fn gaussian_mean(&self, mean: f64, sigma: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        let scale = std::f64::consts::SQRT_2 * sigma;
        let s: f64 = self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(mean + scale * x))
            .sum();
        s / PI.sqrt()
    }
}

/// Returns (p_n(z), p_{n−1}(z)) of the orthonormal Hermite recurrence.
fn hermite_pair(z: f64, n: usize, pim4: f64) -> (f64, f64) {
    let mut p1 = pim4;
    let mut p2 = 0.0;
    for j in 1..=n {
        let p3 = p2;
        p2 = p1;
        let jf = j as f64;
        p1 = z * (2.0 / jf).sqrt() * p2 - ((jf - 1.0) / jf).sqrt() * p3;
    }
    (p1, p2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_sqrt_pi() {
        for n in [1, 2, 5, 64, 200, MAX_NODES] {
            let gh = GaussHermite::new(n);
            let s: f64 = gh.weights.iter().sum();
            assert!((s - PI.sqrt()).abs() < 1e-10, "n={n} sum={s}");
        }
    }

    #[test]
    fn gaussian_moments() {
        let gh = GaussHermite::new(64);
        let m2 = gh.gaussian_mean(0.0, 3.0, |x| x * x);
        let m4 = gh.gaussian_mean(0.0, 3.0, |x| x.powi(4));
        assert!((m2 - 9.0).abs() < 1e-10);
        assert!((m4 - 3.0 * 81.0).abs() < 1e-8);
        // E[cos(kX)] = exp(−k²σ²/2)
        let c = gh.gaussian_mean(0.0, 1.0, |x| (2.0 * x).cos());
        assert!((c - (-2.0f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn nodes_are_sorted_and_symmetric() {
        let gh = GaussHermite::new(101);
        for w in gh.nodes.windows(2) {
            assert!(w[0] > w[1]);
        }
        assert!(gh.nodes[50].abs() < 1e-14);
    }
}
