//! Invariants that must hold for every admissible input.

use proptest::prelude::*;
use staticgeo_core::curvature::{curvature_at, max_abs_diff4, reconstruct_riemann_from_ricci, Backend};
use staticgeo_core::geodesic_growth::{growth_bound_check, transport_with_coefficient, GrowthBound, GrowthSample};
use staticgeo_core::global_identities::{flow_classify, FlowBudget};
use staticgeo_core::ode::OdeOptions;
use staticgeo_core::pointwise_identities::{ricci_eigenframe, DEFAULT_EIG_TOL};
use staticgeo_core::static_potentials::static_residual;
use staticgeo_core::{linalg, rotate_chart, Mat3, MetricField, Point3, PotentialField};

fn rodrigues(axis: [f64; 3], angle: f64) -> Mat3 {
    let n = linalg::norm(&axis);
    let k = axis.map(|v| v / n);
    let (s, c) = angle.sin_cos();
    std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            let cross = match (i, j) {
                (0, 1) => -k[2],
                (0, 2) => k[1],
                (1, 0) => k[2],
                (1, 2) => -k[0],
                (2, 0) => -k[1],
                (2, 1) => k[0],
                _ => 0.0,
            };
            let id = if i == j { 1.0 } else { 0.0 };
            c * id + s * cross + (1.0 - c) * k[i] * k[j]
        })
    })
}

fn direction() -> impl Strategy<Value = [f64; 3]> {
    [-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64].prop_filter("non-degenerate", |v| linalg::norm(v) > 0.2)
}

fn exterior_point(r_lo: f64, r_hi: f64) -> impl Strategy<Value = Point3> {
    (direction(), r_lo..r_hi).prop_map(|(d, r)| {
        let n = linalg::norm(&d);
        Point3::new(r * d[0] / n, r * d[1] / n, r * d[2] / n)
    })
}

fn metrics() -> impl Strategy<Value = MetricField> {
    prop_oneof![
        (0.5..3.0f64).prop_map(MetricField::schwarzschild),
        (0.5..2.0f64, -2.0..2.0f64).prop_map(|(m, e)| MetricField::anisotropic(m, e)),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn curvature_scalars_are_chart_independent(
        metric in metrics(),
        p in exterior_point(4.0, 40.0),
        axis in direction(),
        angle in 0.0..std::f64::consts::TAU,
    ) {
        let rot = rodrigues(axis, angle);
        let turned = rotate_chart(&metric, &rot).unwrap();
        let q = Point3::from(linalg::mat_vec(&rot, &p.coords()));
        let a = curvature_at(&metric, &p, Backend::DualNumber).unwrap();
        let b = curvature_at(&turned, &q, Backend::DualNumber).unwrap();
        let scale = a.ricci_norm_sq().sqrt();
        prop_assert!((a.scalar - b.scalar).abs() < 1e-9 * (1.0 + scale));
        prop_assert!((a.ricci_norm_sq().sqrt() - b.ricci_norm_sq().sqrt()).abs() < 1e-9 * scale);
    }

    #[test]
    fn ricci_is_symmetric_and_traces_to_scalar(metric in metrics(), p in exterior_point(3.0, 50.0)) {
        let b = curvature_at(&metric, &p, Backend::DualNumber).unwrap();
        let scale = b.ricci_norm_sq().sqrt();
        for i in 0..3 {
            for j in 0..3 {
                prop_assert!((b.ricci[i][j] - b.ricci[j][i]).abs() <= 1e-14 * scale);
            }
        }
        let frame = ricci_eigenframe(&metric, &p, DEFAULT_EIG_TOL).unwrap();
        let trace: f64 = frame.eigenvalues.iter().sum();
        prop_assert!((trace - b.scalar).abs() < 1e-10 * scale);
        prop_assert!(frame.eigenvalues[0] <= frame.eigenvalues[1] && frame.eigenvalues[1] <= frame.eigenvalues[2]);
    }

    #[test]
    fn riemann_is_determined_by_ricci(metric in metrics(), p in exterior_point(3.0, 50.0)) {
        let b = curvature_at(&metric, &p, Backend::DualNumber).unwrap();
        let rec = reconstruct_riemann_from_ricci(&b.ricci, b.scalar, &b.metric).unwrap();
        prop_assert!(max_abs_diff4(&rec, &b.riemann) < 1e-7);
    }

    #[test]
    fn affine_potentials_are_static_on_flat_space(
        a0 in -5.0..5.0f64,
        a in [-5.0..5.0f64, -5.0..5.0f64, -5.0..5.0f64],
        p in exterior_point(0.1, 100.0),
    ) {
        let r = static_residual(&PotentialField::affine(a0, a), &MetricField::euclidean(), &p).unwrap();
        prop_assert!(r.combined_norm < 1e-12);
    }

    #[test]
    fn lapse_is_static(m in 0.5..3.0f64, p in exterior_point(2.0, 60.0)) {
        let r = static_residual(&PotentialField::schwarzschild_n(m), &MetricField::schwarzschild(m), &p).unwrap();
        prop_assert!(r.combined_norm < 1e-7);
    }

    #[test]
    fn admissible_data_stays_below_the_bound(
        eps in 0.05..2.0f64,
        share in 0.0..1.0f64,
        signs in (any::<bool>(), any::<bool>()),
    ) {
        let bound = GrowthBound::new(eps, 1.0, 1.0).unwrap();
        let f0 = if signs.0 { share } else { -share };
        let d0 = if signs.1 { 1.0 - share } else { share - 1.0 };
        let h = |t: f64| eps / (t * t);
        let sol = transport_with_coefficient(h, 1.0, 1e3, f0, d0, &OdeOptions::with_tolerances(1e-12, 1e-12)).unwrap();
        let samples: Vec<GrowthSample> =
            sol.iter().map(|&(t, f, d)| GrowthSample { t, f, f_deriv: d, h: h(t) }).collect();
        let v = growth_bound_check(&samples, &bound).unwrap();
        prop_assert_eq!(v.violations, 0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn potential_increases_along_its_gradient_flow(m in 0.5..2.0f64, p in exterior_point(1.5, 10.0)) {
        let tr = flow_classify(
            &PotentialField::schwarzschild_n(m),
            &MetricField::schwarzschild(m),
            &p,
            &FlowBudget::default(),
        )
        .unwrap();
        prop_assert_eq!(tr.monotonicity_violations, 0);
        prop_assert!(tr.samples.windows(2).all(|w| w[1].f >= w[0].f));
    }
}

#[test]
fn quarter_turn_permutes_anisotropic_perturbation() {
    let metric = MetricField::anisotropic(1.0, 1.0);
    let rot = rodrigues([0.0, 0.0, 1.0], std::f64::consts::FRAC_PI_2);
    let turned = rotate_chart(&metric, &rot).unwrap();
    for x in [[5.0, 1.0, 2.0], [-3.0, 7.0, 0.5], [10.0, -4.0, -6.0]] {
        let p = Point3::new(x[0], x[1], x[2]);
        let q = Point3::new(-x[1], x[0], x[2]);
        // g'(Rx) = R g(x) Rᵀ, so the (0,0) and (1,1) entries trade places.
        let (g, h) = (metric.eval(&p).unwrap(), turned.eval(&q).unwrap());
        assert!((g[0][0] - h[1][1]).abs() < 1e-14 && (g[1][1] - h[0][0]).abs() < 1e-14);
        assert!((g[0][1] + h[0][1]).abs() < 1e-14);
        let a = curvature_at(&metric, &p, Backend::DualNumber).unwrap();
        let b = curvature_at(&turned, &q, Backend::DualNumber).unwrap();
        assert!((a.scalar - b.scalar).abs() < 1e-9);
        assert!((a.ricci_norm_sq() - b.ricci_norm_sq()).abs() < 1e-9 * a.ricci_norm_sq());
    }
}

#[test]
fn perturbed_ricci_decays_faster_than_two_plus_tau() {
    let metric = MetricField::anisotropic(1.0, 1.0);
    let dir = [0.3, 0.8, -0.5];
    let n = linalg::norm(&dir);
    let radii: Vec<f64> = (0..8).map(|k| 20.0 * 10f64.powf(k as f64 / 7.0)).collect();
    let (xs, ys): (Vec<f64>, Vec<f64>) = radii
        .iter()
        .map(|&r| {
            let p = Point3::new(r * dir[0] / n, r * dir[1] / n, r * dir[2] / n);
            let b = curvature_at(&metric, &p, Backend::DualNumber).unwrap();
            (r.ln(), b.ricci_norm_sq().sqrt().ln())
        })
        .unzip();
    let k = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / k, ys.iter().sum::<f64>() / k);
    let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
        / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
    assert!(slope <= -2.0 - metric.tau + 0.3, "slope {slope}");
}
