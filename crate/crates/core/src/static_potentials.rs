//! Candidate static potentials and the residual operators of the static
//! equations `∇²f = f·Ric`, `Δf = 0`.

use std::fmt;

use crate::curvature::{curvature_at, Backend, CurvatureBundle};
use crate::dual::{gradient, hessian, Dual, Real};
use crate::error::{GeometryError, Result};
use crate::expr::Expr;
use crate::linalg::{self, least_squares, Mat3, Vec3};
use crate::metric::{MetricField, Point3};
use crate::quadrature::SphereRule;

/// A closed-form scalar field with derivative access through dual numbers.
#[derive(Clone, Debug, PartialEq)]
pub struct PotentialField {
    pub name: String,
    pub expr: Expr,
    /// Asymptotic linear part `(a₁, a₂, a₃)` when known in closed form.
    pub linear_part: Option<Vec3>,
}

impl fmt::Display for PotentialField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

fn c(v: f64) -> Box<Expr> {
    Box::new(Expr::Const(v))
}

impl PotentialField {
    /// `a0 + a·x`.
    pub fn affine(a0: f64, a: Vec3) -> Self {
        let mut e = Expr::Const(a0);
        for (i, &ai) in a.iter().enumerate() {
            if ai != 0.0 {
                e = Expr::Add(
                    Box::new(e),
                    Box::new(Expr::Mul(c(ai), Box::new(Expr::Coord(i)))),
                );
            }
        }
        Self {
            name: format!("affine({a0},{},{},{})", a[0], a[1], a[2]),
            expr: e,
            linear_part: Some(a),
        }
    }

    pub fn constant(v: f64) -> Self {
        Self::affine(v, [0.0; 3])
    }

    /// `N = (1 − m/2r)/(1 + m/2r)`.
    pub fn schwarzschild_n(m: f64) -> Self {
        let q = || Box::new(Expr::Div(c(m / 2.0), Box::new(Expr::Radius)));
        Self {
            name: format!("schwarzschild_N({m})"),
            expr: Expr::Div(
                Box::new(Expr::Sub(c(1.0), q())),
                Box::new(Expr::Add(c(1.0), q())),
            ),
            linear_part: Some([0.0; 3]),
        }
    }

    pub fn custom(src: &str) -> Result<Self> {
        Ok(Self {
            name: src.trim().to_string(),
            expr: Expr::parse(src)?,
            linear_part: None,
        })
    }

    /// `affine(a0,a1,a2,a3)`, `schwarzschild_N(m)`, or an expression.
    pub fn from_spec(spec: &str) -> Result<Self> {
        let s = spec.trim();
        if let Some(args) = call_args(s, "affine") {
            let v = parse_numbers(&args)?;
            if v.len() != 4 {
                return Err(GeometryError::InvalidInput(format!(
                    "affine takes 4 coefficients, got {}",
                    v.len()
                )));
            }
            return Ok(Self::affine(v[0], [v[1], v[2], v[3]]));
        }
        if let Some(args) = call_args(s, "schwarzschild_N") {
            let v = parse_numbers(&args)?;
            if v.len() != 1 {
                return Err(GeometryError::InvalidInput(
                    "schwarzschild_N takes one mass".into(),
                ));
            }
            return Ok(Self::schwarzschild_n(v[0]));
        }
        Self::custom(s)
    }

    pub fn scaled(&self, k: f64) -> Self {
        Self {
            name: format!("{k}*({})", self.name),
            expr: Expr::Mul(c(k), Box::new(self.expr.clone())),
            linear_part: self.linear_part.map(|a| a.map(|v| k * v)),
        }
    }

    pub fn sum(&self, other: &Self) -> Self {
        Self {
            name: format!("({}) + ({})", self.name, other.name),
            expr: Expr::Add(Box::new(self.expr.clone()), Box::new(other.expr.clone())),
            linear_part: match (self.linear_part, other.linear_part) {
                (Some(a), Some(b)) => Some([a[0] + b[0], a[1] + b[1], a[2] + b[2]]),
                _ => None,
            },
        }
    }

    /// The same scalar field seen in the chart `y = R x`.
    pub fn rotated(&self, rotation: &Mat3) -> Self {
        let rt = linalg::transpose(rotation);
        Self {
            name: format!("rot({})", self.name),
            expr: self.expr.substitute_linear(&rt),
            linear_part: self.linear_part.map(|a| linalg::mat_vec(rotation, &a)),
        }
    }

    pub fn value<T: Real>(&self, x: &[T; 3]) -> T {
        self.expr.eval(x)
    }

    pub fn eval(&self, p: &Point3) -> f64 {
        self.value(&p.coords())
    }

    pub fn gradient(&self, p: &Point3) -> (f64, Vec3) {
        gradient(|x| self.value(x), &p.coords())
    }

    /// Value, coordinate gradient and coordinate Hessian.
    pub fn jet(&self, p: &Point3) -> (f64, Vec3, Mat3) {
        hessian(|x| self.value(x), &p.coords())
    }

    /// `f − Σ aᵢ xᵢ` when the linear part is known.
    pub fn remainder(&self, p: &Point3) -> Option<f64> {
        self.linear_part
            .map(|a| self.eval(p) - linalg::dot(&a, &p.coords()))
    }
}

pub(crate) fn call_args(s: &str, name: &str) -> Option<String> {
    let rest = s.strip_prefix(name)?.trim_start();
    let inner = rest.strip_prefix('(')?.strip_suffix(')')?;
    Some(inner.to_string())
}

pub(crate) fn parse_numbers(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| GeometryError::InvalidInput(format!("bad number '{}'", t.trim())))
        })
        .collect()
}

/// Relative staticity tolerance: static iff `combined < tol·(1 + |f|)`.
pub const DEFAULT_STATIC_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StaticResidual {
    /// `∇²f − f·Ric` in coordinate components.
    pub tensor_residual: Mat3,
    /// `Δf`.
    pub laplacian_residual: f64,
    pub combined_norm: f64,
    pub value: f64,
}

impl StaticResidual {
    pub fn threshold(&self, tol: f64) -> f64 {
        tol * (1.0 + self.value.abs())
    }

    pub fn is_static(&self, tol: f64) -> bool {
        self.combined_norm < self.threshold(tol)
    }
}

/// Covariant Hessian from a coordinate jet and Christoffel symbols.
pub fn covariant_hessian_from(grad: &Vec3, hess: &Mat3, bundle: &CurvatureBundle) -> Mat3 {
    std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            hess[i][j] - (0..3).map(|k| bundle.gamma[k][i][j] * grad[k]).sum::<f64>()
        })
    })
}

/// `f_;ij = ∂ᵢ∂ⱼf − Γᵏᵢⱼ ∂ₖf`.
pub fn covariant_hessian(f: &PotentialField, metric: &MetricField, p: &Point3) -> Result<Mat3> {
    let bundle = curvature_at(metric, p, Backend::DualNumber)?;
    let (_, g, h) = f.jet(p);
    Ok(covariant_hessian_from(&g, &h, &bundle))
}

pub fn static_residual_from(f: &PotentialField, bundle: &CurvatureBundle, p: &Point3) -> StaticResidual {
    let (v, g, h) = f.jet(p);
    let hess = covariant_hessian_from(&g, &h, bundle);
    let tensor = linalg::sub(&hess, &linalg::scale(&bundle.ricci, v));
    let lap: f64 = (0..3)
        .flat_map(|i| (0..3).map(move |j| (i, j)))
        .map(|(i, j)| bundle.inverse[i][j] * hess[i][j])
        .sum();
    StaticResidual {
        tensor_residual: tensor,
        laplacian_residual: lap,
        combined_norm: linalg::frobenius(&tensor) + lap.abs(),
        value: v,
    }
}

pub fn static_residual(f: &PotentialField, metric: &MetricField, p: &Point3) -> Result<StaticResidual> {
    let bundle = curvature_at(metric, p, Backend::DualNumber)?;
    Ok(static_residual_from(f, &bundle, p))
}

/// `trace_g(∇²f − f Ric)`, which equals `Δf − f R`.
pub fn residual_trace(res: &StaticResidual, bundle: &CurvatureBundle) -> f64 {
    let mut s = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            s += bundle.inverse[i][j] * res.tensor_residual[i][j];
        }
    }
    s
}

/// Fails with `NotStatic` unless `f` passes the static test at `p`.
pub fn require_static(
    f: &PotentialField,
    bundle: &CurvatureBundle,
    p: &Point3,
    tol: f64,
) -> Result<StaticResidual> {
    let res = static_residual_from(f, bundle, p);
    if res.is_static(tol) {
        Ok(res)
    } else {
        Err(GeometryError::NotStatic {
            point: p.coords(),
            residual: res.combined_norm,
            threshold: res.threshold(tol),
        })
    }
}

// |∇f|²_g as a generic field, for differentiating once more
fn grad_norm_sq<T: Real>(f: &PotentialField, metric: &MetricField, x: &[T; 3]) -> T {
    let (_, df) = gradient(|y: &[Dual<T>; 3]| f.value(y), x);
    let gi = linalg::inverse(&metric.components(x));
    let mut s = T::zero();
    for i in 0..3 {
        for j in 0..3 {
            s = s + gi[i][j] * df[i] * df[j];
        }
    }
    s
}

/// `½Δ|∇f|² − |∇²f|² − ½ f⁻¹ ∇f(|∇f|²)`, which vanishes for static `f`.
pub fn bochner_residual(f: &PotentialField, metric: &MetricField, p: &Point3) -> Result<f64> {
    bochner_residual_with(f, metric, p, DEFAULT_STATIC_TOL)
}

pub fn bochner_residual_with(
    f: &PotentialField,
    metric: &MetricField,
    p: &Point3,
    tol: f64,
) -> Result<f64> {
    let bundle = curvature_at(metric, p, Backend::DualNumber)?;
    let (v, g, h) = f.jet(p);
    if v.abs() < 1e-10 {
        return Err(GeometryError::ZeroPotential {
            point: p.coords(),
            value: v,
        });
    }
    require_static(f, &bundle, p, tol)?;
    let hess = covariant_hessian_from(&g, &h, &bundle);
    let gi = &bundle.inverse;

    let (_, dphi, ddphi) = hessian(|x| grad_norm_sq(f, metric, x), &p.coords());
    let phi_hess = covariant_hessian_from(&dphi, &ddphi, &bundle);

    let mut lap_phi = 0.0;
    let mut hess_sq = 0.0;
    let mut df_dphi = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            lap_phi += gi[i][j] * phi_hess[i][j];
            df_dphi += gi[i][j] * g[i] * dphi[j];
            for a in 0..3 {
                for b in 0..3 {
                    hess_sq += gi[i][a] * gi[j][b] * hess[i][j] * hess[a][b];
                }
            }
        }
    }
    Ok(0.5 * lap_phi - hess_sq - 0.5 * df_dphi / v)
}

#[derive(Clone, Debug, PartialEq)]
pub struct LinearFitOptions {
    pub rule: SphereRule,
    /// Largest allowed change of any sphere average between successive radii.
    pub trend_tol: f64,
}

impl Default for LinearFitOptions {
    fn default() -> Self {
        Self {
            rule: SphereRule::default(),
            trend_tol: 0.1,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LinearFit {
    pub linear: Vec3,
    pub radii: Vec<f64>,
    /// Sphere averages of `∂ᵢf` per radius.
    pub averages: Vec<Vec3>,
    /// Sphere-averaged `|f − a·x|` per radius.
    pub remainder_means: Vec<f64>,
    /// Log–log slope of the remainder means against `r`.
    pub remainder_exponent: f64,
    /// Number of terms in the `1/r` extrapolation.
    pub extrapolation_order: usize,
}

/// Estimate `aᵢ = lim ∂ᵢf` from sphere averages, extrapolated in `1/r`.
pub fn fit_linear_part(
    f: &PotentialField,
    metric: &MetricField,
    radii: &[f64],
    opts: &LinearFitOptions,
) -> Result<LinearFit> {
    if radii.len() < 3 || radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(GeometryError::InvalidInput(
            "need at least three increasing radii".into(),
        ));
    }
    let mut averages = Vec::with_capacity(radii.len());
    for &r in radii {
        let mut avg = [0.0; 3];
        for (k, slot) in avg.iter_mut().enumerate() {
            *slot = opts.rule.average(r, |x| {
                metric.domain_check(&x)?;
                Ok(f.gradient(&x.into()).1[k])
            })?;
        }
        averages.push(avg);
    }
    for (i, w) in averages.windows(2).enumerate() {
        let change = (0..3).map(|k| (w[1][k] - w[0][k]).abs()).fold(0.0, f64::max);
        if change > opts.trend_tol {
            return Err(GeometryError::NonConvergent {
                r_prev: radii[i],
                r_next: radii[i + 1],
                change,
                tolerance: opts.trend_tol,
            });
        }
    }
    let rows: Vec<Vec<f64>> = radii.iter().map(|r| vec![1.0, 1.0 / r]).collect();
    let mut linear = [0.0; 3];
    for (k, slot) in linear.iter_mut().enumerate() {
        let y: Vec<f64> = averages.iter().map(|a| a[k]).collect();
        let (coef, _) = least_squares(&rows, &y)
            .ok_or_else(|| GeometryError::IllConditionedFit("linear-part extrapolation".into()))?;
        *slot = coef[0];
    }
    let mut remainder_means = Vec::with_capacity(radii.len());
    for &r in radii {
        remainder_means.push(opts.rule.average(r, |x| {
            Ok((f.value(&x) - linalg::dot(&linear, &x)).abs())
        })?);
    }
    let remainder_exponent = linalg::loglog_slope(radii, &remainder_means);
    Ok(LinearFit {
        linear,
        radii: radii.to_vec(),
        averages,
        remainder_means,
        remainder_exponent,
        extrapolation_order: 2,
    })
}
