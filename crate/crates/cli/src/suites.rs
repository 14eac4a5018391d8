//! The suite registry. Each suite resolves its parameters up front (drawing
//! any random points from the seed) and returns an ordered list of
//! independent checks, so sequential and parallel runs agree exactly.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use staticgeo_core::curvature::{curvature_at, max_abs_diff4, reconstruct_riemann_from_ricci, Backend};
use staticgeo_core::geodesic_growth::{growth_bound_check, transport_with_coefficient, GrowthBound, GrowthSample};
use staticgeo_core::global_identities::{
    anisotropy_limit, conformal_double_scalar, fit_mass_expansion, flow_classify, flux_profile, huisken_yau_decay,
    integral_identity_check, zero_set_bookkeeping, BookkeepingTerm, FlowBudget, FlowClass, FlowLimit,
    MassFitOptions, QuadratureSpec, HY_ROUNDOFF_FLOOR,
};
use staticgeo_core::ode::OdeOptions;
use staticgeo_core::pointwise_identities::tod_identity_residuals;
use staticgeo_core::static_potentials::{require_static, static_residual_from, DEFAULT_STATIC_TOL};
use staticgeo_core::zero_set_geometry::{
    extract_bounded_component, extract_zero_graph, gauss_bonnet_limit, zero_set_laws, GraphGrid, SphereMeshSpec,
    ZeroSetLawReport,
};
use staticgeo_core::{linalg, GeometryError, MetricFamily, MetricField, Point3, PotentialField, SphereRule};

use crate::config::{Resolver, Source};
use crate::report::{Norm, Outcome, Table};
use crate::CliError;

type Geo<T> = Result<T, GeometryError>;

/// Target of a check.
#[derive(Clone, Copy, Debug)]
pub struct Expect {
    pub expected: f64,
    pub tolerance: f64,
    pub norm: Norm,
}

impl Expect {
    pub fn abs(expected: f64, tolerance: f64) -> Self {
        Self {
            expected,
            tolerance,
            norm: Norm::Absolute,
        }
    }

    pub fn rel(expected: f64, tolerance: f64) -> Self {
        Self {
            expected,
            tolerance,
            norm: Norm::Relative,
        }
    }

    pub fn of(self, computed: f64) -> Outcome {
        Outcome::new(computed, self.expected, self.tolerance, self.norm)
    }
}

pub struct Check {
    pub name: String,
    expect: Expect,
    run: Box<dyn Fn(Expect) -> Geo<Outcome> + Send + Sync>,
}

impl Check {
    pub fn run(&self) -> Outcome {
        (self.run)(self.expect).unwrap_or_else(|e| {
            Outcome::error(
                format!("{}: {e}", e.kind()),
                self.expect.expected,
                self.expect.tolerance,
                self.expect.norm,
            )
        })
    }
}

fn check<F>(name: impl Into<String>, expect: Expect, f: F) -> Check
where
    F: Fn(Expect) -> Geo<Outcome> + Send + Sync + 'static,
{
    Check {
        name: name.into(),
        expect,
        run: Box::new(f),
    }
}

pub struct Suite {
    pub name: &'static str,
    pub summary: &'static str,
    build: fn(&Resolver, u64) -> Result<Vec<Check>, CliError>,
}

impl Suite {
    pub fn build(&self, config: &Resolver, seed: u64) -> Result<Vec<Check>, CliError> {
        (self.build)(config, seed)
    }
}

pub const SUITES: &[Suite] = &[
    Suite {
        name: "euclidean_affine",
        summary: "flat curvature engine and exactness of affine potentials",
        build: euclidean_affine,
    },
    Suite {
        name: "schwarzschild_static",
        summary: "scalar-flatness, backend agreement, static residual and Riemann reconstruction",
        build: schwarzschild_static,
    },
    Suite {
        name: "tod_identities",
        summary: "eigenframe identities for a static potential",
        build: tod_identities,
    },
    Suite {
        name: "growth_bound",
        summary: "comparison bound for f'' = eps t^-2 f",
        build: growth_bound,
    },
    Suite {
        name: "zero_set_gauss_bonnet",
        summary: "horizon zero-set laws and the Gauss-Bonnet limit on a zero-set graph",
        build: zero_set_gauss_bonnet,
    },
    Suite {
        name: "mass_fit",
        summary: "mass from the 1/r expansion of a bounded potential",
        build: mass_fit,
    },
    Suite {
        name: "huisken_yau",
        summary: "decay of the Ricci residual against the Schwarzschild model",
        build: huisken_yau,
    },
    Suite {
        name: "anisotropy_limit",
        summary: "weighted Ricci anisotropy along a zero-set graph",
        build: anisotropy,
    },
    Suite {
        name: "integral_identities",
        summary: "divergence identity for f|Ric|^2 and the zero-set bookkeeping",
        build: integral_identities,
    },
    Suite {
        name: "conformal_double",
        summary: "scalar curvature of (1 +- f)^4 g",
        build: conformal_double,
    },
    Suite {
        name: "flow_classify",
        summary: "gradient-flow classification from exterior points",
        build: flow_suite,
    },
];

pub fn find(name: &str) -> Option<&'static Suite> {
    SUITES.iter().find(|s| s.name == name)
}

// ---------------------------------------------------------------------------
// Shared parameter handling

fn metric(r: &Resolver, default: &str) -> Result<MetricField, CliError> {
    let spec = r.string("metric", default)?;
    MetricField::from_spec(&spec).map_err(|e| CliError::Config(format!("metric: {e}")))
}

fn potential(r: &Resolver, default: &str) -> Result<PotentialField, CliError> {
    let spec = r.string("potential", default)?;
    PotentialField::from_spec(&spec).map_err(|e| CliError::Config(format!("potential: {e}")))
}

fn radius_range(r: &Resolver, lo: f64, hi: f64) -> Result<(f64, f64), CliError> {
    let lo = r.positive("r_min", lo)?;
    let hi = r.f64("r_max", hi)?;
    if hi > lo {
        Ok((lo, hi))
    } else {
        Err(CliError::Config(format!("r_max ({hi}) must exceed r_min ({lo})")))
    }
}

/// Exterior default inner radius for a family with mass `m`.
fn inner_radius(metric: &MetricField) -> f64 {
    metric.mass().abs().max(1.0)
}

fn random_points(rng: &mut ChaCha8Rng, n: usize, (lo, hi): (f64, f64)) -> Vec<Point3> {
    (0..n)
        .map(|_| loop {
            let v: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
            let len = linalg::norm(&v);
            if (0.1..=1.0).contains(&len) {
                let r = rng.gen_range(lo..hi);
                break Point3::from(v.map(|c| r * c / len));
            }
        })
        .collect()
}

fn max_over<F: Fn(&Point3) -> Geo<f64>>(points: &[Point3], f: F) -> Geo<f64> {
    points.iter().try_fold(0.0f64, |m, p| Ok(m.max(f(p)?)))
}

fn backend_gap(metric: &MetricField, p: &Point3) -> Geo<f64> {
    let d = curvature_at(metric, p, Backend::DualNumber)?;
    let f = curvature_at(metric, p, Backend::finite_difference())?;
    let mut gap = max_abs_diff4(&d.riemann, &f.riemann);
    for i in 0..3 {
        for j in 0..3 {
            gap = gap.max((d.ricci[i][j] - f.ricci[i][j]).abs());
            for k in 0..3 {
                gap = gap.max((d.gamma[i][j][k] - f.gamma[i][j][k]).abs());
            }
        }
    }
    Ok(gap.max((d.scalar - f.scalar).abs()))
}

fn curvature_checks(metric: &MetricField, points: &[Point3], scalar_tol: f64, backend_tol: f64) -> Vec<Check> {
    let (m1, p1) = (metric.clone(), points.to_vec());
    let (m2, p2) = (metric.clone(), points.to_vec());
    vec![
        check("scalar_curvature", Expect::abs(0.0, scalar_tol), move |e| {
            Ok(e.of(max_over(&p1, |p| Ok(curvature_at(&m1, p, Backend::DualNumber)?.scalar.abs()))?))
        }),
        check("backend_agreement", Expect::abs(0.0, backend_tol), move |e| {
            Ok(e.of(max_over(&p2, |p| backend_gap(&m2, p))?))
        }),
    ]
}

fn schwarzschild_mass(metric: &MetricField) -> Option<f64> {
    match metric.family {
        MetricFamily::Schwarzschild { m, .. } => Some(m),
        _ => None,
    }
}

// ---------------------------------------------------------------------------
// Suites

fn euclidean_affine(r: &Resolver, seed: u64) -> Result<Vec<Check>, CliError> {
    let n = r.usize("n_points", 100)?;
    let range = radius_range(r, 0.5, 50.0)?;
    let tol = r.f64("tolerance", 1e-12)?;
    let scalar_tol = r.f64("scalar_tolerance", 1e-8)?;
    let backend_tol = r.f64("backend_tolerance", 1e-6)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points = random_points(&mut rng, n, range);
    let affine: Vec<PotentialField> = (0..n)
        .map(|_| PotentialField::affine(rng.gen_range(-5.0..5.0), std::array::from_fn(|_| rng.gen_range(-5.0..5.0))))
        .collect();
    let flat = MetricField::euclidean();
    let mut checks = curvature_checks(&flat, &points, scalar_tol, backend_tol);
    checks.push(check("affine_static_residual", Expect::abs(0.0, tol), move |e| {
        let mut worst = 0.0f64;
        for (f, p) in affine.iter().zip(&points) {
            let b = curvature_at(&flat, p, Backend::DualNumber)?;
            worst = worst.max(static_residual_from(f, &b, p).combined_norm);
        }
        Ok(e.of(worst))
    }));
    Ok(checks)
}

fn schwarzschild_static(r: &Resolver, seed: u64) -> Result<Vec<Check>, CliError> {
    let g = metric(r, "schwarzschild(2)")?;
    let f = potential(r, "schwarzschild_N(2)")?;
    let n = r.usize("n_points", 100)?;
    let range = radius_range(r, inner_radius(&g), 40.0)?;
    let tol = r.f64("tolerance", 1e-7)?;
    let scalar_tol = r.f64("scalar_tolerance", 1e-8)?;
    let backend_tol = r.f64("backend_tolerance", 1e-6)?;
    let rec_tol = r.f64("reconstruction_tolerance", 1e-7)?;
    let points = random_points(&mut ChaCha8Rng::seed_from_u64(seed), n, range);
    let mut checks = curvature_checks(&g, &points, scalar_tol, backend_tol);
    let (g1, p1) = (g.clone(), points.clone());
    checks.push(check("static_residual", Expect::abs(0.0, tol), move |e| {
        let mut worst = 0.0f64;
        let mut first_error = None;
        for p in &p1 {
            let b = curvature_at(&g1, p, Backend::DualNumber)?;
            match require_static(&f, &b, p, DEFAULT_STATIC_TOL) {
                Ok(res) => worst = worst.max(res.combined_norm),
                Err(err) => {
                    worst = worst.max(static_residual_from(&f, &b, p).combined_norm);
                    first_error.get_or_insert(format!("{}: {err}", err.kind()));
                }
            }
        }
        let out = e.of(worst);
        Ok(match first_error {
            Some(m) => out.with_message(m),
            None => out,
        })
    }));
    checks.push(check("riemann_reconstruction", Expect::abs(0.0, rec_tol), move |e| {
        Ok(e.of(max_over(&points, |p| {
            let b = curvature_at(&g, p, Backend::DualNumber)?;
            Ok(max_abs_diff4(&reconstruct_riemann_from_ricci(&b.ricci, b.scalar, &b.metric)?, &b.riemann))
        })?))
    }));
    Ok(checks)
}

fn tod_identities(r: &Resolver, seed: u64) -> Result<Vec<Check>, CliError> {
    let g = metric(r, "schwarzschild(2)")?;
    let f = potential(r, "schwarzschild_N(2)")?;
    let n = r.usize("n_points", 50)?;
    let range = radius_range(r, inner_radius(&g), 30.0)?;
    let tol = r.f64("tolerance", 1e-5)?;
    let points = random_points(&mut ChaCha8Rng::seed_from_u64(seed), n, range);
    Ok(vec![check("tod_residual", Expect::abs(0.0, tol), move |e| {
        Ok(e.of(max_over(&points, |p| {
            Ok(tod_identity_residuals(&f, &g, p)?.iter().fold(0.0f64, |m, v| m.max(v.abs())))
        })?))
    })])
}

fn growth_bound(r: &Resolver, _seed: u64) -> Result<Vec<Check>, CliError> {
    let eps = r.positive("epsilon", 0.5)?;
    let r0 = r.positive("r0", 1.0)?;
    let t_end = r.f64("t_end", 1e4)?;
    let a_data = r.positive("a_data", 1.0)?;
    let tol = r.f64("tolerance", 1e-8)?;
    if t_end <= r0 {
        return Err(CliError::Config(format!("t_end ({t_end}) must exceed r0 ({r0})")));
    }
    let bound = GrowthBound::new(eps, r0, a_data).map_err(|e| CliError::Config(e.to_string()))?;
    let h = move |t: f64| eps / (t * t);
    let opts = OdeOptions::with_tolerances(1e-14, 1e-13);
    let alpha = 0.5 * (1.0 + (1.0 + 4.0 * eps).sqrt());
    Ok(vec![
        check("alpha", Expect::abs(alpha, 1e-14), move |e| Ok(e.of(bound.alpha))),
        check("comparison_violations", Expect::abs(0.0, 0.0), move |e| {
            // Admissible data on the boundary |f| + |f'| = a.
            let mut violations = 0usize;
            for share in [0.0, 0.25, 0.5, 0.75, 1.0] {
                for (sf, sd) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0)] {
                    let f0 = sf * share * a_data;
                    let d0 = sd * (1.0 - share) * a_data;
                    let sol = transport_with_coefficient(h, r0, t_end, f0, d0, &opts)?;
                    let samples: Vec<GrowthSample> =
                        sol.iter().map(|&(t, f, d)| GrowthSample { t, f, f_deriv: d, h: h(t) }).collect();
                    violations += growth_bound_check(&samples, &bound)?.violations;
                }
            }
            Ok(e.of(violations as f64))
        }),
        check("extremal_reproduces_w", Expect::abs(0.0, tol), move |e| {
            let sol = transport_with_coefficient(h, r0, t_end, bound.w(r0), bound.w_deriv(r0), &opts)?;
            let mut table = Table::new("growth_extremal", &["t", "f", "w"]);
            let mut worst = 0.0f64;
            for &(t, f, _) in &sol {
                worst = worst.max(((f - bound.w(t)) / bound.w(t)).abs());
                table = table.row(vec![t, f, bound.w(t)]);
            }
            Ok(e.of(worst).with_table(table))
        }),
    ])
}

fn zero_set_gauss_bonnet(r: &Resolver, _seed: u64) -> Result<Vec<Check>, CliError> {
    let g = metric(r, "schwarzschild(2)")?;
    let f = potential(r, "x1 + ln(r)")?;
    let radii = r.list("radii", &[50.0, 100.0, 200.0])?;
    let n_theta = r.usize("n_theta", 64)?;
    let annulus = r.range("annulus", [10.0, 400.0])?;
    let tol = r.f64("tolerance", 0.01)?;
    let exp_tol = r.f64("exponent_tolerance", 0.3)?;
    let masses = r.list("horizon_masses", &[1.0, 2.0])?;
    let h_tol = r.f64("horizon_tolerance", 1e-4)?;
    let grid = GraphGrid::new(radii.clone(), n_theta).map_err(|e| CliError::Config(format!("radii: {e}")))?;
    let tau = g.tau;

    let mut checks = Vec::new();
    for m in masses {
        if m <= 0.0 {
            return Err(CliError::Config(format!("horizon mass must be positive, got {m}")));
        }
        let laws = move || horizon_laws(m);
        checks.push(check(
            format!("horizon_grad_norm_m{m}"),
            Expect::rel(1.0 / (4.0 * m), h_tol),
            move |e| Ok(e.of(laws()?.0.grad_norm_mean)),
        ));
        checks.push(check(format!("horizon_grad_spread_m{m}"), Expect::abs(0.0, h_tol), move |e| {
            Ok(e.of(laws()?.0.grad_norm_spread))
        }));
        checks.push(check(format!("horizon_gauss_law_m{m}"), Expect::abs(0.0, h_tol), move |e| {
            let rep = laws()?.0;
            Ok(e.of(rep.k_vs_2r11.max(rep.k_vs_minus_r33)))
        }));
        checks.push(check(format!("horizon_euler_characteristic_m{m}"), Expect::abs(2.0, 0.0), move |e| {
            Ok(e.of(laws()?.1.map_or(f64::NAN, |c| c as f64)))
        }));
    }

    let gb = move || -> Geo<_> {
        let surface = extract_zero_graph(&f, &g, annulus, &grid)?;
        let rep = gauss_bonnet_limit(&surface, &radii)?;
        let mut table = Table::new("gauss_bonnet", &["R", "kappa_integral"]);
        for (r, k) in rep.radii.iter().zip(&rep.integrals) {
            table = table.row(vec![*r, *k]);
        }
        Ok((rep, table))
    };
    let gb2 = gb.clone();
    checks.push(check("gauss_bonnet_limit", Expect::rel(2.0 * PI, tol), move |e| {
        let (rep, table) = gb()?;
        Ok(e.of(rep.limit).with_table(table))
    }));
    checks.push(check("kappa_decay_exponent", Expect::abs(-tau, exp_tol), move |e| {
        Ok(e.of(gb2()?.0.kappa_decay_exponent))
    }));
    Ok(checks)
}

fn horizon_laws(m: f64) -> Geo<(ZeroSetLawReport, Option<i64>)> {
    let spec = SphereMeshSpec {
        center: [0.0; 3],
        rho_min: 0.1 * m,
        rho_max: 2.0 * m,
        n_lat: 12,
        n_lon: 24,
    };
    let n = PotentialField::schwarzschild_n(m);
    let s = MetricField::schwarzschild_full(m);
    let comp = extract_bounded_component(&n, &s, &spec)?;
    Ok((zero_set_laws(&n, &s, &comp)?, comp.euler_char))
}

fn mass_fit(r: &Resolver, _seed: u64) -> Result<Vec<Check>, CliError> {
    let g = metric(r, "schwarzschild(2)")?;
    let f = potential(r, "schwarzschild_N(2)")?;
    let window = r.range("window", [50.0, 400.0])?;
    let expected = r.f64("expected_mass", g.mass())?;
    let tol = r.f64("tolerance", 0.01)?;
    let defaults = MassFitOptions::default();
    let opts = MassFitOptions {
        n_radii: r.usize("n_radii", defaults.n_radii)?,
        basis_terms: r.usize("basis_terms", defaults.basis_terms)?,
        ..defaults
    };
    r.note("linear_tol", json!(opts.linear_tol), Source::Default);
    r.note("sphere", json!([opts.rule.n_theta, opts.rule.n_phi]), Source::Default);
    Ok(vec![check("mass", Expect::rel(expected, tol), move |e| {
        let fit = fit_mass_expansion(&f, &g, window, &opts)?;
        let mut table = Table::new("mass_fit", &["r", "sphere_average"])
            .with_field("limit_a", fit.limit_a)
            .with_field("coeff_a", fit.coeff_a);
        for (r, a) in fit.radii.iter().zip(&fit.averages) {
            table = table.row(vec![*r, *a]);
        }
        Ok(e.of(fit.mass_m).with_table(table))
    })])
}

fn huisken_yau(r: &Resolver, _seed: u64) -> Result<Vec<Check>, CliError> {
    let g = metric(r, "schwarzschild(1)")?;
    let radii = r.list("radii", &[20.0, 40.0])?;
    let direction = r.array("direction", [1.0, 0.3, 0.2])?;
    let expected = r.f64("expected_ratio", 2f64.powi(-4))?;
    let factor = r.f64("ratio_factor", 1.5)?;
    r.note("roundoff_floor", json!(HY_ROUNDOFF_FLOOR), Source::Default);
    if linalg::norm(&direction) == 0.0 {
        return Err(CliError::Config("direction must be non-zero".into()));
    }
    let expect = Expect {
        expected,
        tolerance: factor,
        norm: Norm::Factor,
    };
    Ok(vec![check("decay_ratio_per_doubling", expect, move |e| {
        let d = huisken_yau_decay(&g, direction, &radii)?;
        let mut table = Table::new("huisken_yau", &["ln_r", "ln_residual"]).with_field("slope", d.slope);
        for (r, res) in d.radii.iter().zip(&d.residuals) {
            table = table.row(vec![r.ln(), res.ln()]);
        }
        // Residual ratio per doubling of r between the outermost radii.
        let span = (d.radii[d.radii.len() - 1] / d.radii[0]).log2();
        let out = e.of(d.ratio().powf(1.0 / span)).with_table(table);
        Ok(if d.resolved {
            out
        } else {
            out.with_message(format!(
                "residuals {:?} sit below the roundoff floor {HY_ROUNDOFF_FLOOR:e}·|Ric|; the decay is not measurable",
                d.residuals
            ))
        })
    })])
}

fn anisotropy(r: &Resolver, _seed: u64) -> Result<Vec<Check>, CliError> {
    let g = metric(r, "schwarzschild(2)")?;
    let f = potential(r, "x1 + ln(r)")?;
    let y3 = r.list("y3", &[100.0, 200.0, 400.0, 800.0])?;
    let exponent = r.f64("exponent", 2.0)?;
    let expected = r.f64("expected_limit", 3.0 * g.mass())?;
    let tol = r.f64("tolerance", 0.05)?;
    let ring = r.positive("graph_ring", 50.0)?;
    let n_theta = r.usize("n_theta", 16)?;
    let annulus = r.range("annulus", [10.0, 2000.0])?;
    let grid = GraphGrid::new(vec![ring], n_theta).map_err(|e| CliError::Config(e.to_string()))?;
    Ok(vec![check("anisotropy_limit", Expect::rel(expected, tol), move |e| {
        let surface = extract_zero_graph(&f, &g, annulus, &grid)?;
        let rep = anisotropy_limit(&g, &surface, &y3, exponent)?;
        let mut table = Table::new("anisotropy", &["y3", "weighted_difference"]);
        for (y, t) in rep.y3.iter().zip(&rep.terms) {
            table = table.row(vec![*y, *t]);
        }
        Ok(e.of(rep.limit).with_table(table))
    })])
}

fn integral_identities(r: &Resolver, _seed: u64) -> Result<Vec<Check>, CliError> {
    let g = metric(r, "schwarzschild(1)")?;
    let f = potential(r, "schwarzschild_N(1)")?;
    let annulus = r.range("annulus", [2.0, 40.0])?;
    let tol = r.f64("tolerance", 1e-5)?;
    let [nt, np] = r.array("sphere", [16.0, 32.0])?.map(|v| v as usize);
    let quad = QuadratureSpec {
        n_radial: r.usize("n_radial", 48)?,
        sphere: SphereRule::new(nt, np),
        budget: r.usize("budget", 2_000_000)?,
    };
    let flux_radii = r.list("flux_radii", &[20.0, 40.0, 80.0, 160.0])?;
    let bookkeeping = r.bool("bookkeeping", true)?;
    let mut checks = Vec::new();
    let (g1, f1) = (g.clone(), f.clone());
    checks.push(check("divergence_defect", Expect::abs(0.0, tol), move |e| {
        let rep = integral_identity_check(&f1, &g1, annulus, &quad)?;
        let prof = flux_profile(&f1, &g1, &flux_radii, &quad.sphere)?;
        let mut table = Table::new("flux", &["r", "flux"]).with_field("decay_exponent", prof.decay_exponent);
        for (r, q) in prof.radii.iter().zip(&prof.fluxes) {
            table = table.row(vec![*r, *q]);
        }
        Ok(e.of(rep.relative_defect).with_table(table))
    }));
    if bookkeeping {
        let btol = r.f64("bookkeeping_tolerance", 0.02)?;
        let m = schwarzschild_mass(&g)
            .filter(|m| *m > 0.0)
            .ok_or_else(|| CliError::Config("bookkeeping needs a schwarzschild(m) metric with m > 0".into()))?;
        let outer = 400.0 * m;
        r.note("bookkeeping_breakpoints", json!([m * m / (4.0 * outer), m / 2.0, outer]), Source::Default);
        checks.push(check("bookkeeping", Expect::abs(0.0, btol), move |e| {
            let full = MetricField::schwarzschild_full(m);
            let spec = SphereMeshSpec {
                center: [0.0; 3],
                rho_min: 0.1 * m,
                rho_max: 2.0 * m,
                n_lat: 8,
                n_lon: 16,
            };
            let comp = extract_bounded_component(&f, &full, &spec)?;
            let term = BookkeepingTerm::from_component(&comp)
                .ok_or_else(|| GeometryError::InvalidInput("component has no Euler characteristic".into()))?;
            let quad = QuadratureSpec {
                n_radial: 64,
                sphere: SphereRule::new(8, 16),
                budget: 2_000_000,
            };
            let rep = zero_set_bookkeeping(&f, &full, &[m * m / (4.0 * outer), m / 2.0, outer], &quad, &[term])?;
            Ok(e.of(rep.relative_error))
        }));
    }
    Ok(checks)
}

fn conformal_double(r: &Resolver, seed: u64) -> Result<Vec<Check>, CliError> {
    let g = metric(r, "schwarzschild(1)")?;
    let f = potential(r, "schwarzschild_N(1)")?;
    let n = r.usize("n_points", 50)?;
    let range = radius_range(r, inner_radius(&g), 30.0)?;
    let tol = r.f64("tolerance", 1e-6)?;
    let points = random_points(&mut ChaCha8Rng::seed_from_u64(seed), n, range);
    Ok([("scalar_plus", 1.0), ("scalar_minus", -1.0)]
        .into_iter()
        .map(|(name, sign)| {
            let (g, f, points) = (g.clone(), f.clone(), points.clone());
            check(name, Expect::abs(0.0, tol), move |e| {
                Ok(e.of(max_over(&points, |p| Ok(conformal_double_scalar(&f, &g, sign, p)?.abs()))?))
            })
        })
        .collect())
}

fn flow_suite(r: &Resolver, seed: u64) -> Result<Vec<Check>, CliError> {
    let g = metric(r, "schwarzschild(1)")?;
    let f = potential(r, "schwarzschild_N(1)")?;
    let n = r.usize("n_points", 8)?;
    let range = radius_range(r, inner_radius(&g), 10.0)?;
    let expected = r.f64("expected_limit", 1.0)?;
    let tol = r.f64("tolerance", 1e-3)?;
    let defaults = FlowBudget::default();
    let budget = FlowBudget {
        t_max: r.positive("t_max", defaults.t_max)?,
        r_escape: r.positive("r_escape", defaults.r_escape)?,
        ..defaults
    };
    r.note("critical", json!(budget.critical), Source::Default);
    r.note("ode_tolerances", json!([budget.abs_tol, budget.rel_tol]), Source::Default);
    let points = random_points(&mut ChaCha8Rng::seed_from_u64(seed), n, range);
    let mut checks = Vec::new();
    for (i, p) in points.into_iter().enumerate() {
        let (g, f) = (g.clone(), f.clone());
        let trace = move || flow_classify(&f, &g, &p, &budget);
        let trace2 = trace.clone();
        checks.push(check(format!("flow_{i}_limit"), Expect::abs(expected, tol), move |e| {
            let tr = trace()?;
            let mut table = Table::new(&format!("flow_{i}"), &["t", "f", "grad_norm"]);
            for s in &tr.samples {
                table = table.row(vec![s.t, s.f, s.grad_norm]);
            }
            Ok(match tr.classification {
                FlowClass::EscapeToEnd(FlowLimit::Finite(b)) => e.of(b).with_table(table),
                other => Outcome::error(
                    format!("classified as {other:?}, not an escape with a finite limit"),
                    e.expected,
                    e.tolerance,
                    e.norm,
                )
                .with_table(table),
            })
        }));
        checks.push(check(format!("flow_{i}_monotonicity"), Expect::abs(0.0, 0.0), move |e| {
            Ok(e.of(trace2()?.monotonicity_violations as f64))
        }));
    }
    Ok(checks)
}
