//! Published values and qualitative claims for the Euclidean and
//! Schwarzschild examples, at the tolerances they are quoted with.

use std::f64::consts::PI;

use approx::assert_relative_eq;
use staticgeo_core::curvature::{curvature_at, Backend};
use staticgeo_core::geodesic_growth::{growth_bound_check, integrate_geodesic, GeodesicState, GrowthBound, GrowthSample};
use staticgeo_core::global_identities::{
    anisotropy_limit, conformal_double_scalar, fit_mass_expansion, flow_classify, flux_profile, huisken_yau_residual,
    FlowBudget, FlowClass, FlowLimit, MassFitOptions,
};
use staticgeo_core::ode::OdeOptions;
use staticgeo_core::pointwise_identities::{ricci_eigenframe, tod_identity_residuals, Distinctness, DEFAULT_EIG_TOL};
use staticgeo_core::quadrature::SphereRule;
use staticgeo_core::static_potentials::{
    bochner_residual, covariant_hessian, fit_linear_part, static_residual, LinearFitOptions,
};
use staticgeo_core::zero_set_geometry::{
    extract_bounded_component, extract_zero_graph, gauss_bonnet_limit, zero_set_laws, GraphGrid, SphereMeshSpec,
};
use staticgeo_core::{GeometryError, MetricField, Point3, PotentialField};

#[test]
fn schwarzschild_is_scalar_flat() {
    let b = curvature_at(&MetricField::schwarzschild(2.0), &Point3::new(6.0, 8.0, 0.0), Backend::DualNumber).unwrap();
    assert!(b.scalar.abs() < 1e-8);
}

#[test]
fn schwarzschild_ricci_to_leading_order() {
    let m = 2.0;
    for r in [10.0, 100.0, 1000.0] {
        let p = Point3::new(r, 0.0, 0.0);
        let metric = MetricField::schwarzschild(m);
        let phi = 1.0 + m / (2.0 * r);
        let lead = m / r.powi(3) * phi.powi(-2);
        // Coordinate components carry the φ⁻² factor exactly.
        let ric = curvature_at(&metric, &p, Backend::DualNumber).unwrap().ricci;
        assert_relative_eq!(ric[0][0], -2.0 * lead, max_relative = 1e-12);
        assert_relative_eq!(ric[1][1], lead, max_relative = 1e-12);
        // Eigenvalues relative to g pick up φ⁻⁴ = 1 − 2m/r + …
        let frame = ricci_eigenframe(&metric, &p, DEFAULT_EIG_TOL).unwrap();
        for (got, want) in frame.eigenvalues.iter().zip([-2.0 * lead, lead, lead]) {
            assert!((got / want - 1.0).abs() < 2.0 * m / r, "r={r}: {got} vs {want}");
        }
        let Distinctness::TwoEqual { simple, .. } = frame.distinctness else {
            panic!("expected a double eigenvalue, got {:?}", frame.distinctness);
        };
        let e = frame.frame[simple];
        let radial = e[0].abs() / (e[0] * e[0] + e[1] * e[1] + e[2] * e[2]).sqrt();
        assert_relative_eq!(radial, 1.0, epsilon = 1e-9);
    }
}

#[test]
fn lapse_hessian_equals_lapse_times_ricci() {
    let metric = MetricField::schwarzschild(2.0);
    let n = PotentialField::schwarzschild_n(2.0);
    let p = Point3::new(10.0, 0.0, 0.0);
    let hess = covariant_hessian(&n, &metric, &p).unwrap();
    let ric = curvature_at(&metric, &p, Backend::DualNumber).unwrap().ricci;
    let nv = n.eval(&p);
    for i in 0..3 {
        for j in 0..3 {
            assert!((hess[i][j] - nv * ric[i][j]).abs() < 1e-7);
        }
    }
}

#[test]
fn affine_potentials_on_flat_space_are_exact() {
    let f = PotentialField::affine(0.7, [1.0, -2.0, 0.5]);
    for p in [Point3::new(1.0, 2.0, 3.0), Point3::new(-40.0, 0.1, 7.0)] {
        assert!(static_residual(&f, &MetricField::euclidean(), &p).unwrap().combined_norm < 1e-12);
    }
}

#[test]
fn bochner_identity_on_the_lapse() {
    let r = bochner_residual(
        &PotentialField::schwarzschild_n(2.0),
        &MetricField::schwarzschild(2.0),
        &Point3::new(8.0, 3.0, 1.0),
    )
    .unwrap();
    assert!(r.abs() < 1e-6, "{r}");
    let bad = bochner_residual(
        &PotentialField::custom("x1^2").unwrap(),
        &MetricField::euclidean(),
        &Point3::new(1.0, 0.0, 0.0),
    );
    assert!(matches!(bad, Err(GeometryError::NotStatic { .. })));
}

#[test]
fn bounded_lapse_has_no_linear_part() {
    let fit = fit_linear_part(
        &PotentialField::schwarzschild_n(2.0),
        &MetricField::schwarzschild(2.0),
        &[50.0, 100.0, 200.0],
        &LinearFitOptions::default(),
    )
    .unwrap();
    assert!(fit.linear.iter().all(|a| a.abs() < 1e-3), "{:?}", fit.linear);
}

#[test]
fn tod_identities_on_the_lapse() {
    let r = tod_identity_residuals(
        &PotentialField::schwarzschild_n(2.0),
        &MetricField::schwarzschild(2.0),
        &Point3::new(7.0, 2.0, 1.0),
    )
    .unwrap();
    assert!(r.iter().all(|v| v.abs() < 1e-5), "{r:?}");
}

#[test]
fn radial_geodesic_transports_the_lapse() {
    let metric = MetricField::schwarzschild(1.0);
    let n = PotentialField::schwarzschild_n(1.0);
    let start =
        GeodesicState::unit_with_potential(&metric, &n, &Point3::new(5.0, 0.0, 0.0), [1.0, 0.0, 0.0], 0.0).unwrap();
    let tr = integrate_geodesic(&metric, &start, 20.0, &OdeOptions::with_tolerances(1e-12, 1e-12)).unwrap();
    for s in &tr.states {
        assert!(s.position[1].abs() < 1e-12 && s.position[2].abs() < 1e-12);
        let here = n.eval(&Point3::new(s.position[0], s.position[1], s.position[2]));
        assert!((s.f_val - here).abs() < 1e-6);
    }
}

#[test]
fn lapse_grows_at_most_linearly_along_a_tangential_geodesic() {
    let metric = MetricField::schwarzschild(1.0);
    let n = PotentialField::schwarzschild_n(1.0);
    let r0 = 10.0;
    let start =
        GeodesicState::unit_with_potential(&metric, &n, &Point3::new(r0, 0.0, 0.0), [0.0, 1.0, 0.0], r0).unwrap();
    let tr = integrate_geodesic(&metric, &start, 1e3, &OdeOptions::with_tolerances(1e-12, 1e-12)).unwrap();
    let eps = 1.1 * tr.states.iter().map(|s| s.t * s.t * s.h_val.abs()).fold(0.0, f64::max);
    let a_data = start.f_val.abs() + start.f_deriv.abs();
    let bound = GrowthBound::new(eps, r0, a_data).unwrap();
    let samples: Vec<GrowthSample> = tr
        .states
        .iter()
        .map(|s| GrowthSample { t: s.t, f: s.f_val, f_deriv: s.f_deriv, h: s.h_val })
        .collect();
    assert!(growth_bound_check(&samples, &bound).unwrap().holds);
}

#[test]
fn horizon_laws() {
    for m in [1.0, 2.0] {
        let spec = SphereMeshSpec {
            center: [0.0; 3],
            rho_min: 0.1 * m,
            rho_max: 2.0 * m,
            n_lat: 10,
            n_lon: 20,
        };
        let n = PotentialField::schwarzschild_n(m);
        let metric = MetricField::schwarzschild_full(m);
        let comp = extract_bounded_component(&n, &metric, &spec).unwrap();
        let rep = zero_set_laws(&n, &metric, &comp).unwrap();
        assert!((rep.grad_norm_mean - 1.0 / (4.0 * m)).abs() < 1e-6);
        assert!(rep.k_vs_minus_r33 < 1e-5 && rep.k_vs_2r11 < 1e-5);
        assert_eq!(comp.euler_char, Some(2));
    }
}

#[test]
fn perturbed_graph_gauss_bonnet_limit() {
    let radii = [50.0, 100.0, 200.0];
    let f = PotentialField::custom("x1 + ln(r)").unwrap();
    let g = extract_zero_graph(
        &f,
        &MetricField::anisotropic(1.0, 1.0),
        (10.0, 400.0),
        &GraphGrid::new(radii.to_vec(), 64).unwrap(),
    )
    .unwrap();
    let gb = gauss_bonnet_limit(&g, &radii).unwrap();
    assert!((gb.limit - 2.0 * PI).abs() < 0.01 * 2.0 * PI);
}

#[test]
fn graph_height_growth_below_one_minus_tau() {
    let tau = 0.75;
    let metric = MetricField::generic_from_strs(
        &["1 + r^(-0.75)", "0", "0", "1 + r^(-0.75)", "0", "1 + r^(-0.75)"],
        tau,
    )
    .unwrap();
    let f = PotentialField::custom("x1 + 3*r^(-0.75)").unwrap();
    let grid = GraphGrid::geometric((20.0, 400.0), 6, 16).unwrap();
    let g = extract_zero_graph(&f, &metric, (20.0, 400.0), &grid).unwrap();
    assert!(g.q_growth_exponent() <= 1.0 - tau + 0.1, "{}", g.q_growth_exponent());
}

#[test]
fn mass_of_the_lapse() {
    let fit = fit_mass_expansion(
        &PotentialField::schwarzschild_n(2.0),
        &MetricField::schwarzschild(2.0),
        (50.0, 400.0),
        &MassFitOptions::default(),
    )
    .unwrap();
    assert!((fit.mass_m - 2.0).abs() < 0.02);
}

#[test]
fn ricci_model_at_moderate_radius() {
    let metric = MetricField::schwarzschild(2.0);
    let p = Point3::new(30.0, 0.0, 0.0);
    let res = huisken_yau_residual(&metric, &p).unwrap();
    let ric = curvature_at(&metric, &p, Backend::finite_difference()).unwrap().ricci;
    let scale = ric.iter().flatten().map(|v| v * v).sum::<f64>().sqrt();
    assert!(res < 1e-4 * scale);
}

#[test]
fn anisotropy_tends_to_three_m_with_cubic_weight() {
    let f = PotentialField::custom("x1 + ln(r)").unwrap();
    for m in [2.0, -1.0] {
        let metric = MetricField::schwarzschild(m);
        let g = extract_zero_graph(&f, &metric, (10.0, 2000.0), &GraphGrid::new(vec![50.0], 16).unwrap()).unwrap();
        let rep = anisotropy_limit(&metric, &g, &[100.0, 200.0, 400.0, 800.0], 3.0).unwrap();
        assert!((rep.limit - 3.0 * m).abs() < 0.05 * (3.0 * m).abs(), "m={m}: {}", rep.limit);
    }
}

#[test]
fn conformal_doubles_are_scalar_flat() {
    let n = PotentialField::schwarzschild_n(1.0);
    let metric = MetricField::schwarzschild(1.0);
    for sign in [1.0, -1.0] {
        let r = conformal_double_scalar(&n, &metric, sign, &Point3::new(5.0, 1.0, 0.0)).unwrap();
        assert!(r.abs() < 1e-6);
    }
}

#[test]
fn outer_flux_vanishes_at_infinity() {
    let prof = flux_profile(
        &PotentialField::schwarzschild_n(1.0),
        &MetricField::schwarzschild(1.0),
        &[20.0, 40.0, 80.0, 160.0],
        &SphereRule::new(8, 16),
    )
    .unwrap();
    // r² · |Ric| · |∇f| ~ r² · r⁻³ · r⁻² = r⁻³.
    assert!(prof.decay_exponent < -2.5, "{}", prof.decay_exponent);
}

#[test]
fn exterior_flow_escapes_with_limit_one() {
    let tr = flow_classify(
        &PotentialField::schwarzschild_n(1.0),
        &MetricField::schwarzschild(1.0),
        &Point3::new(3.0, 0.0, 0.0),
        &FlowBudget::default(),
    )
    .unwrap();
    let FlowClass::EscapeToEnd(FlowLimit::Finite(b)) = tr.classification else {
        panic!("{:?}", tr.classification);
    };
    assert!((b - 1.0).abs() < 1e-3);
    assert!(tr.samples.windows(2).all(|w| w[1].f > w[0].f));
    assert!(tr.samples.last().unwrap().grad_norm < 1e-4);
}

#[test]
fn horizon_flow_crosses_zero_upward() {
    let m = 2.0;
    let tr = flow_classify(
        &PotentialField::schwarzschild_n(m),
        &MetricField::schwarzschild_full(m),
        &Point3::new(0.0, m / 2.0, 0.0),
        &FlowBudget::default(),
    )
    .unwrap();
    let first = &tr.samples[0];
    assert!(first.f.abs() < 1e-14);
    assert_relative_eq!(first.grad_norm, 1.0 / (4.0 * m), max_relative = 1e-10);
    assert!(tr.samples[1].f > 0.0 && tr.samples[1].point.r() > m / 2.0);
}
