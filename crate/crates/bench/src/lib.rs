//! Shared fixtures for the criterion benches.

use staticgeo_core::{MetricField, Point3, PotentialField};

/// Points on a fixed spiral through the exterior region `r ∈ [2, 40]`.
pub fn spiral_points(n: usize) -> Vec<Point3> {
    (0..n)
        .map(|k| {
            let t = k as f64 / n.max(1) as f64;
            let r = 2.0 + 38.0 * t;
            let (theta, phi) = (0.3 + 2.5 * t, 17.0 * t);
            Point3::new(r * theta.sin() * phi.cos(), r * theta.sin() * phi.sin(), r * theta.cos())
        })
        .collect()
}

pub fn schwarzschild_pair(m: f64) -> (MetricField, PotentialField) {
    (MetricField::schwarzschild(m), PotentialField::schwarzschild_n(m))
}

/// The zero-set graph test surface `y₁ + ln r = 0`.
pub fn log_graph_potential() -> PotentialField {
    PotentialField::custom("x1 + ln(r)").expect("valid expression")
}
