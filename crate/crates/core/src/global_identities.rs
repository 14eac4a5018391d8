//! Quadrature-level checks: mass from the expansion of a bounded
//! potential, the Ricci model of asymptotically Schwarzschild ends, the
//! anisotropy of Ricci along large zero-set graphs, the divergence identity
//! `∫ f|Ric|² = Σ ∫ Ric(∇f, ν)`, conformal doubling and gradient flow.

use serde::Serialize;

use crate::curvature::{curvature_at, Backend, CurvatureBundle};
use crate::error::{GeometryError, Result};
use crate::linalg::{self, least_squares, loglog_slope, Mat3, Vec3};
use crate::metric::{MetricFamily, MetricField, Point3};
use crate::ode::{dopri45, OdeOptions, Status};
use crate::quadrature::{check_budget, interval_rule, SphereRule};
use crate::static_potentials::{
    covariant_hessian_from, fit_linear_part, require_static, LinearFitOptions, PotentialField,
    DEFAULT_STATIC_TOL,
};
use crate::zero_set_geometry::{SurfaceGraph, ZeroSetComponent};

// ---------------------------------------------------------------------------
// Mass

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MassFitOptions {
    pub n_radii: usize,
    /// Number of terms in `{1, 1/r, 1/r², …}`.
    pub basis_terms: usize,
    pub rule: SphereRule,
    /// Largest `|aᵢ|` accepted as "no linear part".
    pub linear_tol: f64,
}

impl Default for MassFitOptions {
    fn default() -> Self {
        Self {
            n_radii: 16,
            basis_terms: 3,
            rule: SphereRule::default(),
            linear_tol: 1e-3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MassFit {
    /// Value at infinity.
    pub limit_a: f64,
    /// Coefficient of `1/r`.
    pub coeff_a: f64,
    /// `−coeff_a / limit_a`, so `f ≈ a(1 − m/r)`.
    pub mass_m: f64,
    pub fit_window: (f64, f64),
    pub residual_norm: f64,
    pub radii: Vec<f64>,
    pub averages: Vec<f64>,
    pub basis_terms: usize,
}

/// Least-squares fit of sphere averages of `f` against powers of `1/r`.
pub fn fit_mass_expansion(
    f: &PotentialField,
    metric: &MetricField,
    window: (f64, f64),
    opts: &MassFitOptions,
) -> Result<MassFit> {
    let (r0, r1) = window;
    if !(r0 >= 3.0 && r1 > r0) || opts.n_radii < opts.basis_terms || opts.basis_terms < 2 {
        return Err(GeometryError::InvalidInput(format!(
            "mass window ({r0}, {r1}) needs 3 ≤ r_min < r_max and enough radii for the basis"
        )));
    }
    let linear = match f.linear_part {
        Some(a) => a,
        None => {
            let probe = [r0, (r0 * r1).sqrt(), r1];
            let lf = LinearFitOptions {
                rule: opts.rule,
                ..LinearFitOptions::default()
            };
            fit_linear_part(f, metric, &probe, &lf)?.linear
        }
    };
    if linear.iter().any(|a| a.abs() > opts.linear_tol) {
        return Err(GeometryError::UnboundedPotential { linear });
    }
    let n = opts.n_radii;
    let radii: Vec<f64> = (0..n)
        .map(|i| r0 * (r1 / r0).powf(i as f64 / (n - 1) as f64))
        .collect();
    let mut averages = Vec::with_capacity(n);
    for &r in &radii {
        averages.push(opts.rule.average(r, |x| {
            metric.domain_check(&x)?;
            Ok(f.value(&x))
        })?);
    }
    // columns scaled by r0 to keep the design matrix balanced
    let rows: Vec<Vec<f64>> = radii
        .iter()
        .map(|r| (0..opts.basis_terms).map(|k| (r0 / r).powi(k as i32)).collect())
        .collect();
    let (coef, resid) = least_squares(&rows, &averages)
        .ok_or_else(|| GeometryError::IllConditionedFit("sphere averages against 1/r^k".into()))?;
    let limit_a = coef[0];
    let coeff_a = coef[1] * r0;
    if limit_a.abs() < 1e-12 {
        return Err(GeometryError::IllConditionedFit(
            "limit value is zero, mass undefined".into(),
        ));
    }
    Ok(MassFit {
        limit_a,
        coeff_a,
        mass_m: -coeff_a / limit_a,
        fit_window: window,
        residual_norm: resid / (n as f64).sqrt(),
        radii,
        averages,
        basis_terms: opts.basis_terms,
    })
}

// ---------------------------------------------------------------------------
// Ricci model on asymptotically Schwarzschild ends

/// `(m/r³)φ⁻²(δ − 3nn)` with `φ = 1 + m/2r`.
pub fn schwarzschild_ricci_model(m: f64, x: &Vec3) -> Mat3 {
    let r = linalg::norm(x);
    let phi = 1.0 + m / (2.0 * r);
    let k = m / (r * r * r * phi * phi);
    std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            let d = if i == j { 1.0 } else { 0.0 };
            k * (d - 3.0 * x[i] * x[j] / (r * r))
        })
    })
}

/// Frobenius norm of `Ric − (m/r³)φ⁻²(δ − 3nn)` in coordinates.
pub fn huisken_yau_residual(metric: &MetricField, p: &Point3) -> Result<f64> {
    match metric.family {
        MetricFamily::Euclidean | MetricFamily::Schwarzschild { .. } | MetricFamily::PerturbedAs { .. } => {}
        _ => {
            return Err(GeometryError::InvalidInput(
                "Ricci model applies to Euclidean, Schwarzschild and perturbed families".into(),
            ))
        }
    }
    let m = metric.mass();
    let x = p.coords();
    if 1.0 + m / (2.0 * p.r()) <= 0.0 {
        return Err(GeometryError::Domain {
            point: x,
            reason: "conformal factor is not positive".into(),
        });
    }
    let b = curvature_at(metric, p, Backend::DualNumber)?;
    Ok(linalg::frobenius(&linalg::sub(&b.ricci, &schwarzschild_ricci_model(m, &x))))
}

/// Residuals below `HY_ROUNDOFF_FLOOR·|Ric|` are indistinguishable from
/// rounding and carry no decay information.
pub const HY_ROUNDOFF_FLOOR: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HuiskenYauDecay {
    pub radii: Vec<f64>,
    pub residuals: Vec<f64>,
    pub ricci_norms: Vec<f64>,
    pub slope: f64,
    /// Every residual sits above the roundoff floor.
    pub resolved: bool,
}

impl HuiskenYauDecay {
    /// Residual ratio between the last and first radius.
    pub fn ratio(&self) -> f64 {
        self.residuals[self.residuals.len() - 1] / self.residuals[0]
    }
}

pub fn huisken_yau_decay(metric: &MetricField, direction: Vec3, radii: &[f64]) -> Result<HuiskenYauDecay> {
    if radii.len() < 2 {
        return Err(GeometryError::InvalidInput("need at least two radii".into()));
    }
    let n = linalg::norm(&direction);
    let mut residuals = Vec::new();
    let mut ricci_norms = Vec::new();
    for &r in radii {
        let p = Point3::from(direction.map(|c| r * c / n));
        residuals.push(huisken_yau_residual(metric, &p)?);
        ricci_norms.push(linalg::frobenius(&curvature_at(metric, &p, Backend::DualNumber)?.ricci));
    }
    let resolved = residuals
        .iter()
        .zip(&ricci_norms)
        .all(|(e, s)| *e > HY_ROUNDOFF_FLOOR * s);
    Ok(HuiskenYauDecay {
        slope: loglog_slope(radii, &residuals),
        radii: radii.to_vec(),
        residuals,
        ricci_norms,
        resolved,
    })
}

// ---------------------------------------------------------------------------
// Anisotropy along a zero-set graph

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AnisotropyReport {
    pub y3: Vec<f64>,
    /// `|y₃|^p (Ric(ṽ,ṽ) − Ric(w̃,w̃))`.
    pub terms: Vec<f64>,
    pub exponent: f64,
    pub limit: f64,
    pub extrapolation_order: usize,
}

/// Along `y₂ = 0` on the graph, the weighted difference of Ricci on the
/// unit graph tangents `v = (∂₂q, 1, 0)`, `w = (∂₃q, 0, 1)`, extrapolated in
/// `1/y₃`.
pub fn anisotropy_limit(
    metric: &MetricField,
    graph: &SurfaceGraph,
    y3: &[f64],
    exponent: f64,
) -> Result<AnisotropyReport> {
    if y3.len() < 2 || y3.windows(2).any(|w| w[1] <= w[0]) {
        return Err(GeometryError::Resolution(
            "need at least two increasing y3 samples".into(),
        ));
    }
    let mut terms = Vec::with_capacity(y3.len());
    for &t in y3 {
        let node = graph.solve_at([0.0, t])?;
        let p = Point3::new(node.q, 0.0, t);
        let b = curvature_at(metric, &p, Backend::DualNumber)?;
        let v = [node.dq[0], 1.0, 0.0];
        let w = [node.dq[1], 0.0, 1.0];
        let unit = |e: &Vec3| linalg::bilinear(&b.ricci, e, e) / linalg::bilinear(&b.metric, e, e);
        terms.push(t.abs().powf(exponent) * (unit(&v) - unit(&w)));
    }
    let rows: Vec<Vec<f64>> = y3.iter().map(|t| vec![1.0, y3[0] / t]).collect();
    let (coef, _) = least_squares(&rows, &terms)
        .ok_or_else(|| GeometryError::IllConditionedFit("anisotropy terms against 1/y3".into()))?;
    Ok(AnisotropyReport {
        y3: y3.to_vec(),
        terms,
        exponent,
        limit: coef[0],
        extrapolation_order: 2,
    })
}

// ---------------------------------------------------------------------------
// Integral identities

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct QuadratureSpec {
    /// Gauss–Legendre nodes in `ln r` per radial interval.
    pub n_radial: usize,
    pub sphere: SphereRule,
    /// Largest number of curvature evaluations allowed.
    pub budget: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            n_radial: 48,
            sphere: SphereRule::default(),
            budget: 2_000_000,
        }
    }
}

impl QuadratureSpec {
    pub fn doubled(&self) -> Self {
        Self {
            n_radial: 2 * self.n_radial,
            sphere: self.sphere.doubled(),
            budget: self.budget,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IntegralReport {
    pub region: (f64, f64),
    /// `∫_U f|Ric|² dV`.
    pub bulk: f64,
    /// `(r, ∫_{S_r} Ric(∇f, ν) dA)` for the inner and outer spheres.
    pub fluxes: Vec<(f64, f64)>,
    /// `bulk − (outer − inner)`.
    pub defect: f64,
    pub relative_defect: f64,
    /// Largest `|f|Ric|² − ⟨∇²f, Ric⟩|` over the nodes, relative to the
    /// largest `|f||Ric|²`.
    pub pointwise_defect: f64,
    pub quadrature: QuadratureSpec,
    pub nodes: usize,
}

/// `g^{ac} g^{bd} A_ab B_cd`.
fn contract(inv: &Mat3, a: &Mat3, b: &Mat3) -> f64 {
    let ai = linalg::mat_mul(inv, a);
    let bi = linalg::mat_mul(inv, b);
    (0..3)
        .flat_map(|i| (0..3).map(move |j| (i, j)))
        .map(|(i, j)| ai[i][j] * bi[j][i])
        .sum()
}

fn sqrt_det(b: &CurvatureBundle) -> f64 {
    linalg::det(&b.metric).sqrt()
}

/// `∫_{S_r} Ric(∇f, ν) dA` with `ν` the outward `g`-unit normal.
pub fn sphere_flux(f: &PotentialField, metric: &MetricField, r: f64, rule: &SphereRule) -> Result<f64> {
    let mut acc = 0.0;
    for (n, w) in rule.nodes() {
        let p = Point3::from(n.map(|c| r * c));
        let b = curvature_at(metric, &p, Backend::DualNumber)?;
        let (_, df) = f.gradient(&p);
        let grad_up = linalg::mat_vec(&b.inverse, &df);
        // |∇r| dA and ν |∇r| = g⁻¹ dr cancel
        let nu_scaled = linalg::mat_vec(&b.inverse, &n);
        acc += w * r * r * sqrt_det(&b) * linalg::bilinear(&b.ricci, &grad_up, &nu_scaled);
    }
    Ok(acc)
}

/// Log-radial Gauss–Legendre times the sphere rule on `[r1, r2]`.
fn shell_nodes(r1: f64, r2: f64, quad: &QuadratureSpec) -> Vec<(Vec3, f64)> {
    let sphere = quad.sphere.nodes();
    let mut out = Vec::with_capacity(quad.n_radial * sphere.len());
    for (s, ws) in interval_rule(r1.ln(), r2.ln(), quad.n_radial) {
        let r = s.exp();
        for (n, wn) in &sphere {
            out.push((n.map(|c| r * c), ws * r * r * r * wn));
        }
    }
    out
}

/// Verify `∫_U f|Ric|² = ∫_{S_r₂} Ric(∇f,ν) − ∫_{S_r₁} Ric(∇f,ν)` on the
/// annulus `r₁ < |x| < r₂`.
pub fn integral_identity_check(
    f: &PotentialField,
    metric: &MetricField,
    region: (f64, f64),
    quad: &QuadratureSpec,
) -> Result<IntegralReport> {
    let (r1, r2) = region;
    if !(r1 > 0.0 && r2 > r1) {
        return Err(GeometryError::InvalidInput(format!("bad annulus ({r1}, {r2})")));
    }
    let nodes = (quad.n_radial + 2) * quad.sphere.len();
    check_budget(nodes, quad.budget)?;
    let mut bulk = 0.0;
    let mut worst = 0.0f64;
    let mut scale = 0.0f64;
    for (x, w) in shell_nodes(r1, r2, quad) {
        let p = Point3::from(x);
        let b = curvature_at(metric, &p, Backend::DualNumber)?;
        require_static(f, &b, &p, DEFAULT_STATIC_TOL)?;
        let (v, df, d2f) = f.jet(&p);
        let hess = covariant_hessian_from(&df, &d2f, &b);
        let lhs = v * b.ricci_norm_sq();
        let rhs = contract(&b.inverse, &hess, &b.ricci);
        worst = worst.max((lhs - rhs).abs());
        scale = scale.max(lhs.abs());
        bulk += w * sqrt_det(&b) * lhs;
    }
    let inner = sphere_flux(f, metric, r1, &quad.sphere)?;
    let outer = sphere_flux(f, metric, r2, &quad.sphere)?;
    let defect = bulk - (outer - inner);
    Ok(IntegralReport {
        region,
        bulk,
        fluxes: vec![(r1, inner), (r2, outer)],
        defect,
        relative_defect: if bulk != 0.0 { defect.abs() / bulk.abs() } else { defect.abs() },
        pointwise_defect: if scale > 0.0 { worst / scale } else { worst },
        quadrature: *quad,
        nodes,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FluxProfile {
    pub radii: Vec<f64>,
    pub fluxes: Vec<f64>,
    /// Log–log slope of `|flux|` against `r`.
    pub decay_exponent: f64,
}

pub fn flux_profile(
    f: &PotentialField,
    metric: &MetricField,
    radii: &[f64],
    rule: &SphereRule,
) -> Result<FluxProfile> {
    let fluxes = radii
        .iter()
        .map(|&r| sphere_flux(f, metric, r, rule))
        .collect::<Result<Vec<_>>>()?;
    let mags: Vec<f64> = fluxes.iter().map(|v| v.abs()).collect();
    Ok(FluxProfile {
        radii: radii.to_vec(),
        decay_exponent: loglog_slope(radii, &mags),
        fluxes,
    })
}

/// One zero-set component in `4π Σ c (χ − k)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BookkeepingTerm {
    /// `|∇f|` on the component.
    pub c: f64,
    pub euler_char: i64,
    /// Ends met; zero for closed components.
    pub ends_met: usize,
}

impl BookkeepingTerm {
    /// Closed components carry their mesh Euler characteristic; graph
    /// pieces see only an annulus, so their χ must be supplied.
    pub fn from_component(c: &ZeroSetComponent) -> Option<Self> {
        c.euler_char.map(|chi| Self {
            c: c.c,
            euler_char: chi,
            ends_met: c.ends_met.unwrap_or(0),
        })
    }

    pub fn weight(&self) -> f64 {
        self.c * (self.euler_char - self.ends_met as i64) as f64
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BookkeepingReport {
    /// `∫ |f||Ric|² dV` over the shells.
    pub integral: f64,
    /// `4π Σ c (χ − k)`.
    pub predicted: f64,
    pub relative_error: f64,
    pub breakpoints: Vec<f64>,
}

/// `∫ |f||Ric|²` over consecutive shells between `breakpoints`, compared
/// with the zero-set prediction. Put a breakpoint on every spherical zero
/// set so that `|f|` is smooth inside each shell.
pub fn zero_set_bookkeeping(
    f: &PotentialField,
    metric: &MetricField,
    breakpoints: &[f64],
    quad: &QuadratureSpec,
    terms: &[BookkeepingTerm],
) -> Result<BookkeepingReport> {
    if breakpoints.len() < 2 || breakpoints.windows(2).any(|w| w[1] <= w[0]) || breakpoints[0] <= 0.0 {
        return Err(GeometryError::InvalidInput(
            "breakpoints must be positive and increasing".into(),
        ));
    }
    check_budget((breakpoints.len() - 1) * quad.n_radial * quad.sphere.len(), quad.budget)?;
    let mut integral = 0.0;
    for w in breakpoints.windows(2) {
        for (x, wt) in shell_nodes(w[0], w[1], quad) {
            let p = Point3::from(x);
            let b = curvature_at(metric, &p, Backend::DualNumber)?;
            integral += wt * sqrt_det(&b) * f.eval(&p).abs() * b.ricci_norm_sq();
        }
    }
    let predicted = 4.0 * std::f64::consts::PI * terms.iter().map(BookkeepingTerm::weight).sum::<f64>();
    Ok(BookkeepingReport {
        integral,
        predicted,
        relative_error: if predicted != 0.0 {
            (integral - predicted).abs() / predicted.abs()
        } else {
            integral.abs()
        },
        breakpoints: breakpoints.to_vec(),
    })
}

// ---------------------------------------------------------------------------
// Conformal doubling

/// Scalar curvature of `(1 ± f)⁴ g` at `p`.
pub fn conformal_double_scalar(
    f: &PotentialField,
    metric: &MetricField,
    sign: f64,
    p: &Point3,
) -> Result<f64> {
    if sign != 1.0 && sign != -1.0 {
        return Err(GeometryError::InvalidInput(format!("sign must be ±1, got {sign}")));
    }
    let g = metric.conformal(f.expr.clone(), sign);
    Ok(curvature_at(&g, p, Backend::DualNumber)?.scalar)
}

// ---------------------------------------------------------------------------
// Gradient flow

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FlowBudget {
    pub t_max: f64,
    pub max_steps: usize,
    /// Coordinate radius that counts as reaching the end.
    pub r_escape: f64,
    /// `|∇f|` and speed below this declare a critical limit.
    pub critical: f64,
    pub abs_tol: f64,
    pub rel_tol: f64,
}

impl Default for FlowBudget {
    fn default() -> Self {
        Self {
            t_max: 1e13,
            max_steps: 200_000,
            r_escape: 1e3,
            critical: 1e-7,
            abs_tol: 1e-12,
            rel_tol: 1e-10,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum FlowLimit {
    Finite(f64),
    Unbounded,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum FlowClass {
    ExitBoundary,
    EscapeToEnd(FlowLimit),
    /// Heuristic: small gradient and small speed, not a proof of a limit.
    ConvergeCritical,
    Unresolved,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FlowSample {
    pub t: f64,
    pub point: Point3,
    pub f: f64,
    pub grad_norm: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FlowTrace {
    pub samples: Vec<FlowSample>,
    /// Forward parameter range actually integrated.
    pub interval: (f64, f64),
    pub classification: FlowClass,
    /// Steps where `f` failed to increase while `|∇f| > 1e-10`.
    pub monotonicity_violations: usize,
}

fn gradient_up(f: &PotentialField, metric: &MetricField, x: &Vec3) -> Result<(f64, Vec3, f64)> {
    let p = Point3::from(*x);
    let g = metric.eval(&p)?;
    let (v, df) = f.gradient(&p);
    let up = linalg::mat_vec(&linalg::inverse(&g), &df);
    Ok((v, up, linalg::dot(&up, &df).max(0.0).sqrt()))
}

/// Integrate `γ' = ∇f` forward from `p` and classify the trace.
pub fn flow_classify(
    f: &PotentialField,
    metric: &MetricField,
    p: &Point3,
    budget: &FlowBudget,
) -> Result<FlowTrace> {
    let x0 = p.coords();
    metric.domain_check(&x0)?;
    let opts = OdeOptions {
        max_steps: budget.max_steps,
        ..OdeOptions::with_tolerances(budget.abs_tol, budget.rel_tol)
    };
    let rhs = |_t: f64, y: &[f64; 3]| {
        metric.domain_check(y)?;
        Ok(gradient_up(f, metric, y)?.1)
    };
    let critical = |y: &[f64; 3]| match gradient_up(f, metric, y) {
        Ok((_, up, gn)) => gn < budget.critical && linalg::norm(&up) < budget.critical,
        Err(_) => false,
    };
    let sol = dopri45(rhs, 0.0, x0, budget.t_max, &opts, |_, y| {
        linalg::norm(y) >= budget.r_escape || critical(y)
    });
    let mut samples = Vec::with_capacity(sol.t.len());
    for (t, y) in sol.t.iter().zip(&sol.y) {
        let (v, _, gn) = gradient_up(f, metric, y)?;
        samples.push(FlowSample {
            t: *t,
            point: Point3::from(*y),
            f: v,
            grad_norm: gn,
        });
    }
    let monotonicity_violations = samples
        .windows(2)
        .filter(|w| w[0].grad_norm > 1e-10 && w[1].f <= w[0].f)
        .count();
    let last = samples.last().expect("initial sample");
    let classification = match &sol.status {
        Status::Stopped if last.point.r() >= budget.r_escape => {
            FlowClass::EscapeToEnd(escape_limit(&samples))
        }
        Status::Stopped => FlowClass::ConvergeCritical,
        Status::RhsFailed(_) => FlowClass::ExitBoundary,
        Status::StepTooSmall { h } => {
            return Err(GeometryError::StepFailure { t: last.t, step: *h });
        }
        Status::Completed | Status::MaxSteps => FlowClass::Unresolved,
    };
    Ok(FlowTrace {
        interval: (0.0, last.t),
        classification,
        monotonicity_violations,
        samples,
    })
}

// f-limit along an escaping trace by a fit in 1/r over the tail
fn escape_limit(samples: &[FlowSample]) -> FlowLimit {
    let last = samples.last().expect("non-empty");
    let r_end = last.point.r();
    if r_end * last.grad_norm / (1.0 + last.f.abs()) > 0.1 {
        return FlowLimit::Unbounded;
    }
    let mut tail: Vec<&FlowSample> = samples.iter().filter(|s| s.point.r() >= r_end / 4.0).collect();
    if tail.len() < 3 {
        tail = samples.iter().rev().take(3).collect();
    }
    let rows: Vec<Vec<f64>> = tail
        .iter()
        .map(|s| {
            let x = r_end / s.point.r();
            vec![1.0, x, x * x]
        })
        .collect();
    let ys: Vec<f64> = tail.iter().map(|s| s.f).collect();
    match least_squares(&rows, &ys) {
        Some((c, _)) => FlowLimit::Finite(c[0]),
        None => FlowLimit::Finite(last.f),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::static_potentials::PotentialField;
    use crate::zero_set_geometry::{extract_zero_graph, GraphGrid};
    use std::f64::consts::PI;

    #[test]
    fn mass_of_synthetic_and_schwarzschild_potentials() {
        let e = MetricField::euclidean();
        let opts = MassFitOptions {
            rule: SphereRule::new(8, 16),
            ..MassFitOptions::default()
        };
        let syn = PotentialField::custom("1 - 3/r + 5/r^2").unwrap();
        let fit = fit_mass_expansion(&syn, &e, (10.0, 100.0), &opts).unwrap();
        assert!((fit.mass_m - 3.0).abs() < 1e-9);
        let one = fit_mass_expansion(&PotentialField::constant(1.0), &e, (10.0, 100.0), &opts).unwrap();
        assert!((one.limit_a - 1.0).abs() < 1e-12 && one.coeff_a.abs() < 1e-10);
        let s = MetricField::schwarzschild(2.0);
        let fit = fit_mass_expansion(&PotentialField::schwarzschild_n(2.0), &s, (50.0, 400.0), &opts)
            .unwrap();
        assert!((fit.mass_m - 2.0).abs() < 1e-3, "{}", fit.mass_m);
    }

    #[test]
    fn residual_shrinks_outward() {
        let s = MetricField::schwarzschild(2.0);
        let n = PotentialField::schwarzschild_n(2.0);
        let opts = MassFitOptions {
            rule: SphereRule::new(4, 8),
            ..MassFitOptions::default()
        };
        let near = fit_mass_expansion(&n, &s, (10.0, 80.0), &opts).unwrap();
        let far = fit_mass_expansion(&n, &s, (40.0, 320.0), &opts).unwrap();
        assert!(far.residual_norm < near.residual_norm);
    }

    #[test]
    fn linear_potentials_are_rejected() {
        let e = MetricField::euclidean();
        let f = PotentialField::affine(1.0, [0.0, 0.2, 0.0]);
        assert!(matches!(
            fit_mass_expansion(&f, &e, (10.0, 100.0), &MassFitOptions::default()),
            Err(GeometryError::UnboundedPotential { .. })
        ));
        let g = PotentialField::custom("x1 + 1/r").unwrap();
        assert!(matches!(
            fit_mass_expansion(&g, &e, (10.0, 100.0), &MassFitOptions::default()),
            Err(GeometryError::UnboundedPotential { .. })
        ));
    }

    #[test]
    fn ricci_model_is_exact_on_schwarzschild() {
        for m in [1.0, 2.0, -1.0] {
            let s = MetricField::schwarzschild(m);
            let p = Point3::new(30.0, 4.0, -7.0);
            let b = curvature_at(&s, &p, Backend::DualNumber).unwrap();
            let scale = linalg::frobenius(&b.ricci);
            assert!(huisken_yau_residual(&s, &p).unwrap() < 1e-10 * scale);
        }
        let e = MetricField::euclidean();
        assert_eq!(huisken_yau_residual(&e, &Point3::new(5.0, 1.0, 0.0)).unwrap(), 0.0);
    }

    #[test]
    fn perturbed_residual_decays_like_inverse_fourth_power() {
        let m = MetricField::anisotropic(1.0, 1.0);
        let d = huisken_yau_decay(&m, [1.0, 0.3, 0.2], &[20.0, 40.0, 80.0]).unwrap();
        assert!(d.resolved);
        assert!((d.slope + 4.0).abs() < 0.15, "{}", d.slope);
    }

    #[test]
    fn anisotropy_weights() {
        let f = PotentialField::custom("x1 + ln(r)").unwrap();
        for m in [2.0, -1.0] {
            let metric = MetricField::schwarzschild(m);
            let grid = GraphGrid::new(vec![50.0], 16).unwrap();
            let g = extract_zero_graph(&f, &metric, (10.0, 2000.0), &grid).unwrap();
            let ys = [100.0, 200.0, 400.0, 800.0];
            let cubic = anisotropy_limit(&metric, &g, &ys, 3.0).unwrap();
            assert!((cubic.limit - 3.0 * m).abs() < 0.05 * 3.0 * m.abs(), "{cubic:?}");
            let square = anisotropy_limit(&metric, &g, &ys, 2.0).unwrap();
            assert!(square.limit.abs() < 0.1 * m.abs(), "{square:?}");
        }
        let e = MetricField::euclidean();
        let x1 = PotentialField::affine(0.0, [1.0, 0.0, 0.0]);
        let g = extract_zero_graph(&x1, &e, (10.0, 1000.0), &GraphGrid::new(vec![50.0], 8).unwrap())
            .unwrap();
        let r = anisotropy_limit(&e, &g, &[100.0, 200.0], 2.0).unwrap();
        assert!(r.terms.iter().all(|t| *t == 0.0));
    }

    #[test]
    fn divergence_identity_on_schwarzschild_annulus() {
        let s = MetricField::schwarzschild(1.0);
        let n = PotentialField::schwarzschild_n(1.0);
        let quad = QuadratureSpec {
            n_radial: 32,
            sphere: SphereRule::new(6, 12),
            budget: 1_000_000,
        };
        let rep = integral_identity_check(&n, &s, (2.0, 40.0), &quad).unwrap();
        assert!(rep.relative_defect < 1e-8, "{rep:?}");
        assert!(rep.pointwise_defect < 1e-8);
        let affine = PotentialField::affine(1.0, [1.0, 2.0, 3.0]);
        let e = MetricField::euclidean();
        let rep = integral_identity_check(&affine, &e, (1.0, 3.0), &quad).unwrap();
        assert_eq!((rep.bulk, rep.defect), (0.0, 0.0));
    }

    #[test]
    fn budget_and_staticity_guards() {
        let s = MetricField::schwarzschild(1.0);
        let n = PotentialField::schwarzschild_n(1.0);
        let quad = QuadratureSpec {
            budget: 10,
            ..QuadratureSpec::default()
        };
        assert!(matches!(
            integral_identity_check(&n, &s, (2.0, 4.0), &quad),
            Err(GeometryError::QuadratureBudget { .. })
        ));
        let quad = QuadratureSpec {
            n_radial: 4,
            sphere: SphereRule::new(2, 4),
            budget: 1000,
        };
        let bad = PotentialField::custom("x1^2").unwrap();
        assert!(matches!(
            integral_identity_check(&bad, &s, (2.0, 4.0), &quad),
            Err(GeometryError::NotStatic { .. })
        ));
    }

    #[test]
    fn horizon_bookkeeping_balances() {
        let m = 1.0;
        let s = MetricField::schwarzschild_full(m);
        let n = PotentialField::schwarzschild_n(m);
        let quad = QuadratureSpec {
            n_radial: 48,
            sphere: SphereRule::new(4, 8),
            budget: 1_000_000,
        };
        let big = 200.0;
        let term = BookkeepingTerm {
            c: 1.0 / (4.0 * m),
            euler_char: 2,
            ends_met: 0,
        };
        let rep =
            zero_set_bookkeeping(&n, &s, &[m * m / (4.0 * big), m / 2.0, big], &quad, &[term]).unwrap();
        assert!((rep.predicted - 2.0 * PI / m).abs() < 1e-12);
        assert!(rep.relative_error < 1e-4, "{rep:?}");
    }

    // R[φ⁴g] = φ⁻⁵(−8Δφ + R φ) on Euclidean space
    #[test]
    fn conformal_scalar_oracle() {
        let e = MetricField::euclidean();
        let sq = PotentialField::custom("x1^2").unwrap();
        let p = Point3::new(1.0, 0.0, 0.0);
        let r = conformal_double_scalar(&sq, &e, 1.0, &p).unwrap();
        // φ = 1 + x², Δφ = 2, φ = 2
        assert!((r + 16.0 / 32.0).abs() < 1e-12, "{r}");
        assert!(r.abs() > 0.01);
        let zero = PotentialField::constant(0.0);
        let s = MetricField::schwarzschild(1.0);
        let r0 = conformal_double_scalar(&zero, &s, 1.0, &Point3::new(3.0, 1.0, 0.0)).unwrap();
        assert!(r0.abs() < 1e-12);
        let n = PotentialField::schwarzschild_n(1.0);
        for sign in [1.0, -1.0] {
            let r = conformal_double_scalar(&n, &s, sign, &Point3::new(5.0, 1.0, 0.0)).unwrap();
            assert!(r.abs() < 1e-10, "{r}");
        }
        let one = PotentialField::constant(1.0);
        assert!(matches!(
            conformal_double_scalar(&one, &e, -1.0, &p),
            Err(GeometryError::DegenerateConformal { .. })
        ));
    }

    #[test]
    fn schwarzschild_flow_escapes_to_one() {
        let s = MetricField::schwarzschild(1.0);
        let n = PotentialField::schwarzschild_n(1.0);
        let tr = flow_classify(&n, &s, &Point3::new(3.0, 0.0, 0.0), &FlowBudget::default()).unwrap();
        match tr.classification {
            FlowClass::EscapeToEnd(FlowLimit::Finite(b)) => assert!((b - 1.0).abs() < 1e-6, "{b}"),
            c => panic!("{c:?}"),
        }
        assert_eq!(tr.monotonicity_violations, 0);
        assert!(tr.samples.last().unwrap().grad_norm < 1e-5);
    }

    #[test]
    fn linear_flow_is_unbounded() {
        let e = MetricField::euclidean();
        let f = PotentialField::affine(0.0, [1.0, 0.0, 0.0]);
        let tr = flow_classify(&f, &e, &Point3::new(0.5, 2.0, -1.0), &FlowBudget::default()).unwrap();
        assert_eq!(tr.classification, FlowClass::EscapeToEnd(FlowLimit::Unbounded));
        assert_eq!(tr.monotonicity_violations, 0);
    }

    #[test]
    fn flow_from_horizon_crosses_zero_upward() {
        let m = 2.0;
        let s = MetricField::schwarzschild_full(m);
        let n = PotentialField::schwarzschild_n(m);
        let tr = flow_classify(&n, &s, &Point3::new(0.0, m / 2.0, 0.0), &FlowBudget::default()).unwrap();
        let first = &tr.samples[0];
        assert!(first.f.abs() < 1e-15);
        assert!((first.grad_norm - 1.0 / (4.0 * m)).abs() < 1e-12);
        assert!(tr.samples[1].f > 0.0 && tr.samples[1].point.r() > m / 2.0);
        assert!(matches!(tr.classification, FlowClass::EscapeToEnd(FlowLimit::Finite(_))));
    }

    #[test]
    fn critical_point_is_detected() {
        // the flow of −|x|² runs into the origin
        let e = MetricField::euclidean();
        let f = PotentialField::custom("-(x1^2 + x2^2 + x3^2)").unwrap();
        let tr = flow_classify(&f, &e, &Point3::new(1.0, 0.5, 0.0), &FlowBudget::default()).unwrap();
        assert_eq!(tr.classification, FlowClass::ConvergeCritical);
    }
}
