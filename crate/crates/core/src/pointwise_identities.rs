//! Ricci eigenframes, Tod's identities and the quotient equation.

use serde::Serialize;

use crate::curvature::{
    curvature_at, curvature_with_ricci_gradient, ricci_covariant_derivative, Backend, CurvatureBundle,
};
use crate::error::{GeometryError, Result};
use crate::expr::Expr;
use crate::linalg::{self, Mat3, Vec3};
use crate::metric::{MetricField, Point3};
use crate::quadrature::SphereRule;
use crate::static_potentials::{
    covariant_hessian_from, require_static, PotentialField, DEFAULT_STATIC_TOL,
};

pub const DEFAULT_EIG_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Distinctness {
    AllDistinct,
    /// Indices of the coinciding pair in the ascending order; the third
    /// index is the simple eigenvalue.
    TwoEqual { pair: (usize, usize), simple: usize },
    AllEqual,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RicciEigenframe {
    /// Ascending eigenvalues of `Ric` relative to `g`.
    pub eigenvalues: Vec3,
    /// `g`-orthonormal eigenvectors in coordinate components.
    pub frame: [Vec3; 3],
    pub distinctness: Distinctness,
}

/// Gaps no larger than `tol·max|λ|` count as coincidences.
pub fn classify(eigenvalues: &Vec3, tol: f64) -> Distinctness {
    let scale = eigenvalues.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let thr = tol * scale;
    let g01 = eigenvalues[1] - eigenvalues[0];
    let g12 = eigenvalues[2] - eigenvalues[1];
    match (g01 <= thr, g12 <= thr) {
        (true, true) => Distinctness::AllEqual,
        (false, false) => Distinctness::AllDistinct,
        _ if g01 <= g12 => Distinctness::TwoEqual {
            pair: (0, 1),
            simple: 2,
        },
        _ => Distinctness::TwoEqual {
            pair: (1, 2),
            simple: 0,
        },
    }
}

fn fix_sign(v: &mut Vec3) {
    if let Some(c) = v.iter().find(|c| c.abs() > 1e-12) {
        if *c < 0.0 {
            for x in v.iter_mut() {
                *x = -*x;
            }
        }
    }
}

pub fn eigenframe_from(bundle: &CurvatureBundle, p: &Point3, tol: f64) -> Result<RicciEigenframe> {
    let (eigenvalues, mut frame) = linalg::generalized_eigen(&bundle.ricci, &bundle.metric)
        .ok_or(GeometryError::DegenerateMetric { point: p.coords() })?;
    for v in frame.iter_mut() {
        fix_sign(v);
    }
    Ok(RicciEigenframe {
        eigenvalues,
        frame,
        distinctness: classify(&eigenvalues, tol),
    })
}

pub fn ricci_eigenframe(metric: &MetricField, p: &Point3, tol: f64) -> Result<RicciEigenframe> {
    if !(tol > 0.0) {
        return Err(GeometryError::InvalidInput("eigenvalue tolerance must be positive".into()));
    }
    let bundle = curvature_at(metric, p, Backend::DualNumber)?;
    eigenframe_from(&bundle, p, tol)
}

/// Residuals of Tod's identities in the Ricci eigenframe:
///
/// ```text
/// f(R33;1 − R31;3) − (R22 − R33) f;1
/// f(R11;2 − R12;1) − (R33 − R11) f;2
/// f(R22;3 − R23;2) − (R11 − R22) f;3
/// ```
pub fn tod_identity_residuals(f: &PotentialField, metric: &MetricField, p: &Point3) -> Result<Vec3> {
    let (bundle, dric) = curvature_with_ricci_gradient(metric, p)?;
    require_static(f, &bundle, p, DEFAULT_STATIC_TOL)?;
    let frame = eigenframe_from(&bundle, p, DEFAULT_EIG_TOL)?;
    let nabla = ricci_covariant_derivative(&bundle, &dric);
    let (v, grad, _) = f.jet(p);
    let e = &frame.frame;

    // frame components R_ab;c
    let rd = |a: usize, b: usize, c: usize| -> f64 {
        let mut s = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    s += e[a][i] * e[b][j] * e[c][k] * nabla[k][i][j];
                }
            }
        }
        s
    };
    let df = |a: usize| linalg::dot(&e[a], &grad);
    let lam = &frame.eigenvalues;
    Ok([
        v * (rd(2, 2, 0) - rd(2, 0, 2)) - (lam[1] - lam[2]) * df(0),
        v * (rd(0, 0, 1) - rd(0, 1, 0)) - (lam[2] - lam[0]) * df(1),
        v * (rd(1, 1, 2) - rd(1, 2, 1)) - (lam[0] - lam[1]) * df(2),
    ])
}

/// Residual of `N Z_;ij + N_i Z_j + N_j Z_i = 0` for `Z = f/N`.
pub fn quotient_residual(
    f: &PotentialField,
    n: &PotentialField,
    metric: &MetricField,
    p: &Point3,
) -> Result<Mat3> {
    let bundle = curvature_at(metric, p, Backend::DualNumber)?;
    let nv = n.eval(p);
    if nv <= 0.0 {
        return Err(GeometryError::ZeroPotential {
            point: p.coords(),
            value: nv,
        });
    }
    require_static(f, &bundle, p, DEFAULT_STATIC_TOL)?;
    require_static(n, &bundle, p, DEFAULT_STATIC_TOL)?;
    let z = quotient_field(f, n);
    let (_, zg, zh) = z.jet(p);
    let zhess = covariant_hessian_from(&zg, &zh, &bundle);
    let (_, ng) = n.gradient(p);
    Ok(std::array::from_fn(|i| {
        std::array::from_fn(|j| nv * zhess[i][j] + ng[i] * zg[j] + ng[j] * zg[i])
    }))
}

/// `Z = f/N` as a field.
pub fn quotient_field(f: &PotentialField, n: &PotentialField) -> PotentialField {
    PotentialField {
        name: format!("({})/({})", f.name, n.name),
        expr: Expr::Div(Box::new(f.expr.clone()), Box::new(n.expr.clone())),
        linear_part: None,
    }
}

/// Sample points for a gap scan.
#[derive(Clone, Debug, PartialEq)]
pub enum Region {
    /// Uniform grid with `n` points per axis.
    Box { lo: Vec3, hi: Vec3, n: usize },
    /// `n_r` radii between the bounds times the nodes of `rule`.
    Annulus {
        r_min: f64,
        r_max: f64,
        n_r: usize,
        rule: SphereRule,
    },
    Points(Vec<Point3>),
}

impl Region {
    pub fn points(&self) -> Vec<Point3> {
        match self {
            Region::Box { lo, hi, n } => {
                let t = |k: usize| if *n > 1 { k as f64 / (*n - 1) as f64 } else { 0.5 };
                let mut out = Vec::with_capacity(n * n * n);
                for i in 0..*n {
                    for j in 0..*n {
                        for k in 0..*n {
                            out.push(Point3::new(
                                lo[0] + (hi[0] - lo[0]) * t(i),
                                lo[1] + (hi[1] - lo[1]) * t(j),
                                lo[2] + (hi[2] - lo[2]) * t(k),
                            ));
                        }
                    }
                }
                out
            }
            Region::Annulus {
                r_min,
                r_max,
                n_r,
                rule,
            } => {
                let nodes = rule.nodes();
                let mut out = Vec::with_capacity(n_r * nodes.len());
                for i in 0..*n_r {
                    let r = if *n_r > 1 {
                        r_min + (r_max - r_min) * i as f64 / (*n_r - 1) as f64
                    } else {
                        *r_min
                    };
                    out.extend(nodes.iter().map(|(n, _)| Point3::new(r * n[0], r * n[1], r * n[2])));
                }
                out
            }
            Region::Points(p) => p.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GapScanEntry {
    pub point: Vec3,
    pub eigenvalues: Vec3,
    pub class: Distinctness,
    /// Angle (radians) between the simple eigenvector and the radial
    /// direction, for `TwoEqual` points.
    pub simple_radial_angle: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GapScanReport {
    pub entries: Vec<GapScanEntry>,
    pub all_distinct: usize,
    pub two_equal: usize,
    pub all_equal: usize,
    pub max_simple_radial_angle: f64,
}

impl GapScanReport {
    pub fn distinct_fraction(&self) -> f64 {
        self.all_distinct as f64 / self.entries.len().max(1) as f64
    }
}

pub fn eigenvalue_gap_scan(metric: &MetricField, region: &Region, tol: f64) -> Result<GapScanReport> {
    let pts = region.points();
    if pts.is_empty() {
        return Err(GeometryError::InvalidInput("empty scan region".into()));
    }
    let mut entries = Vec::with_capacity(pts.len());
    for p in &pts {
        let frame = ricci_eigenframe(metric, p, tol)?;
        let simple_radial_angle = match frame.distinctness {
            Distinctness::TwoEqual { simple, .. } => {
                let v = frame.frame[simple];
                let x = p.coords();
                let angle = linalg::norm(&linalg::cross(&v, &x)).atan2(linalg::dot(&v, &x).abs());
                Some(angle)
            }
            _ => None,
        };
        entries.push(GapScanEntry {
            point: p.coords(),
            eigenvalues: frame.eigenvalues,
            class: frame.distinctness,
            simple_radial_angle,
        });
    }
    let count = |pred: fn(&Distinctness) -> bool| entries.iter().filter(|e| pred(&e.class)).count();
    Ok(GapScanReport {
        all_distinct: count(|c| matches!(c, Distinctness::AllDistinct)),
        two_equal: count(|c| matches!(c, Distinctness::TwoEqual { .. })),
        all_equal: count(|c| matches!(c, Distinctness::AllEqual)),
        max_simple_radial_angle: entries
            .iter()
            .filter_map(|e| e.simple_radial_angle)
            .fold(0.0, f64::max),
        entries,
    })
}
