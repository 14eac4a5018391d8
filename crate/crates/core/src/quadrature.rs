//! Gauss–Legendre rules and the product rule on spheres.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{GeometryError, Result};
use crate::linalg::Vec3;

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`,
/// nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_n
        let mut x = ((i as f64 + 0.75) / (n as f64 + 0.5) * PI).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

// P_n(x) and P_n'(x) by the three-term recurrence
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Gauss–Legendre in `cos θ` times the uniform rule in azimuth.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SphereRule {
    pub n_theta: usize,
    pub n_phi: usize,
}

impl Default for SphereRule {
    fn default() -> Self {
        Self {
            n_theta: 32,
            n_phi: 64,
        }
    }
}

impl SphereRule {
    pub fn new(n_theta: usize, n_phi: usize) -> Self {
        Self { n_theta, n_phi }
    }

    pub fn doubled(&self) -> Self {
        Self::new(2 * self.n_theta, 2 * self.n_phi)
    }

    pub fn len(&self) -> usize {
        self.n_theta * self.n_phi
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Unit directions with solid-angle weights summing to `4π`.
    pub fn nodes(&self) -> Vec<(Vec3, f64)> {
        let (zs, ws) = gauss_legendre(self.n_theta);
        let dphi = 2.0 * PI / self.n_phi as f64;
        let mut out = Vec::with_capacity(self.len());
        for (z, w) in zs.iter().zip(&ws) {
            let s = (1.0 - z * z).sqrt();
            for k in 0..self.n_phi {
                let phi = (k as f64 + 0.5) * dphi;
                out.push(([s * phi.cos(), s * phi.sin(), *z], w * dphi));
            }
        }
        out
    }

    /// Coordinate-measure average of `f` over the sphere of radius `r`.
    pub fn average<F: FnMut(Vec3) -> Result<f64>>(&self, r: f64, mut f: F) -> Result<f64> {
        let mut acc = 0.0;
        for (n, w) in self.nodes() {
            acc += w * f([r * n[0], r * n[1], r * n[2]])?;
        }
        Ok(acc / (4.0 * PI))
    }
}

/// Gauss–Legendre rule mapped to `[a, b]`.
pub fn interval_rule(a: f64, b: f64, n: usize) -> Vec<(f64, f64)> {
    let (xs, ws) = gauss_legendre(n);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    xs.iter()
        .zip(&ws)
        .map(|(x, w)| (mid + half * x, half * w))
        .collect()
}

/// Node budget guard shared by the volume integrals.
pub fn check_budget(requested: usize, budget: usize) -> Result<()> {
    if requested > budget {
        Err(GeometryError::QuadratureBudget { requested, budget })
    } else {
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn legendre_rule_is_exact_for_polynomials() {
        for n in [1, 2, 5, 8, 31, 64] {
            let (x, w) = gauss_legendre(n);
            assert_relative_eq!(w.iter().sum::<f64>(), 2.0, epsilon = 1e-13);
            let deg = 2 * n - 1;
            let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32 - 1)).sum();
            let exact = if (deg - 1) % 2 == 0 { 2.0 / deg as f64 } else { 0.0 };
            assert_relative_eq!(q, exact, epsilon = 1e-13);
            assert!(x.windows(2).all(|p| p[0] < p[1]));
        }
    }

    #[test]
    fn sphere_rule_integrates_harmonics() {
        let rule = SphereRule::default();
        let nodes = rule.nodes();
        let area: f64 = nodes.iter().map(|(_, w)| w).sum();
        assert_relative_eq!(area, 4.0 * PI, epsilon = 1e-12);
        // ∫ n_z² dΩ = 4π/3, ∫ n_x n_y dΩ = 0
        let z2: f64 = nodes.iter().map(|(n, w)| w * n[2] * n[2]).sum();
        let xy: f64 = nodes.iter().map(|(n, w)| w * n[0] * n[1]).sum();
        assert_relative_eq!(z2, 4.0 * PI / 3.0, epsilon = 1e-12);
        assert!(xy.abs() < 1e-13);
    }

    #[test]
    fn budget_guard() {
        assert!(check_budget(10, 10).is_ok());
        assert!(matches!(
            check_budget(11, 10),
            Err(GeometryError::QuadratureBudget { requested: 11, budget: 10 })
        ));
    }
}
