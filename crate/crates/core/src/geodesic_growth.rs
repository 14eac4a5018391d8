//! Geodesics with the potential transported by `f″ = Ric(γ′,γ′) f`, and
//! the comparison function `w(t) = A t^α` bounding its growth.

use serde::Serialize;

use crate::curvature::{curvature_at, Backend, CurvatureBundle};
use crate::error::{GeometryError, Result};
use crate::linalg::{self, Vec3};
use crate::metric::{MetricField, Point3};
use crate::ode::{dopri45, rk4, OdeOptions, Solution, Status};
use crate::static_potentials::PotentialField;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GeodesicState {
    pub t: f64,
    pub position: Vec3,
    pub velocity: Vec3,
    pub f_val: f64,
    pub f_deriv: f64,
    /// `Ric(γ′, γ′)` at the position.
    pub h_val: f64,
}

impl GeodesicState {
    /// Start at `p` moving along the `g`-normalisation of `direction`.
    pub fn unit(
        metric: &MetricField,
        p: &Point3,
        direction: Vec3,
        t: f64,
        f_val: f64,
        f_deriv: f64,
    ) -> Result<Self> {
        let g = metric.eval(p)?;
        let len = linalg::bilinear(&g, &direction, &direction).sqrt();
        if !(len > 0.0) {
            return Err(GeometryError::InvalidInput("zero initial velocity".into()));
        }
        let velocity = direction.map(|v| v / len);
        let b = curvature_at(metric, p, Backend::DualNumber)?;
        Ok(Self {
            t,
            position: p.coords(),
            velocity,
            f_val,
            f_deriv,
            h_val: linalg::bilinear(&b.ricci, &velocity, &velocity),
        })
    }

    /// Same, with `f` and its directional derivative read from a field.
    pub fn unit_with_potential(
        metric: &MetricField,
        f: &PotentialField,
        p: &Point3,
        direction: Vec3,
        t: f64,
    ) -> Result<Self> {
        let mut s = Self::unit(metric, p, direction, t, 0.0, 0.0)?;
        let (v, g) = f.gradient(p);
        s.f_val = v;
        s.f_deriv = linalg::dot(&g, &s.velocity);
        Ok(s)
    }

    fn packed(&self) -> [f64; 8] {
        let (x, v) = (self.position, self.velocity);
        [x[0], x[1], x[2], v[0], v[1], v[2], self.f_val, self.f_deriv]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Trajectory {
    pub states: Vec<GeodesicState>,
    /// Largest `|g(γ′,γ′) − 1|` over the samples.
    pub speed_drift: f64,
}

impl Trajectory {
    pub fn last(&self) -> &GeodesicState {
        self.states.last().expect("non-empty trajectory")
    }
}

fn coupled_rhs(metric: &MetricField, y: &[f64; 8]) -> Result<([f64; 8], CurvatureBundle)> {
    let p = Point3::new(y[0], y[1], y[2]);
    let b = curvature_at(metric, &p, Backend::DualNumber)?;
    let v = [y[3], y[4], y[5]];
    let mut out = [0.0; 8];
    out[..3].copy_from_slice(&v);
    for k in 0..3 {
        let mut a = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                a += b.gamma[k][i][j] * v[i] * v[j];
            }
        }
        out[3 + k] = -a;
    }
    out[6] = y[7];
    out[7] = linalg::bilinear(&b.ricci, &v, &v) * y[6];
    Ok((out, b))
}

fn unpack(metric: &MetricField, t: f64, y: &[f64; 8]) -> Result<(GeodesicState, f64)> {
    let (_, b) = coupled_rhs(metric, y)?;
    let v = [y[3], y[4], y[5]];
    let speed = linalg::bilinear(&b.metric, &v, &v);
    Ok((
        GeodesicState {
            t,
            position: [y[0], y[1], y[2]],
            velocity: v,
            f_val: y[6],
            f_deriv: y[7],
            h_val: linalg::bilinear(&b.ricci, &v, &v),
        },
        (speed - 1.0).abs(),
    ))
}

fn check_unit(metric: &MetricField, start: &GeodesicState) -> Result<()> {
    let g = metric.eval(&start.position.into())?;
    let s = linalg::bilinear(&g, &start.velocity, &start.velocity);
    if (s - 1.0).abs() > 1e-8 {
        return Err(GeometryError::InvalidInput(format!(
            "initial velocity has g-norm² {s}, expected 1"
        )));
    }
    Ok(())
}

fn to_trajectory(metric: &MetricField, sol: &Solution<8>) -> Result<Trajectory> {
    let mut states = Vec::with_capacity(sol.t.len());
    let mut drift: f64 = 0.0;
    for (t, y) in sol.t.iter().zip(&sol.y) {
        let (s, d) = unpack(metric, *t, y)?;
        drift = drift.max(d);
        states.push(s);
    }
    Ok(Trajectory {
        states,
        speed_drift: drift,
    })
}

/// Adaptive integration of the geodesic and the transported potential.
pub fn integrate_geodesic(
    metric: &MetricField,
    start: &GeodesicState,
    t_end: f64,
    opts: &OdeOptions,
) -> Result<Trajectory> {
    check_unit(metric, start)?;
    let sol = dopri45(
        |_, y| coupled_rhs(metric, y).map(|r| r.0),
        start.t,
        start.packed(),
        t_end,
        opts,
        |_, _| false,
    );
    match &sol.status {
        Status::Completed => to_trajectory(metric, &sol),
        Status::RhsFailed(_) => {
            let (t, y) = sol.last();
            Err(GeometryError::DomainExit {
                t,
                point: [y[0], y[1], y[2]],
            })
        }
        Status::StepTooSmall { h } => Err(GeometryError::StepFailure {
            t: sol.last().0,
            step: *h,
        }),
        Status::MaxSteps | Status::Stopped => Err(GeometryError::StepFailure {
            t: sol.last().0,
            step: f64::NAN,
        }),
    }
}

/// Fixed-step RK4 variant, for self-convergence studies.
pub fn integrate_geodesic_fixed(
    metric: &MetricField,
    start: &GeodesicState,
    t_end: f64,
    steps: usize,
) -> Result<Trajectory> {
    check_unit(metric, start)?;
    let sol = rk4(
        |_, y| coupled_rhs(metric, y).map(|r| r.0),
        start.t,
        start.packed(),
        t_end,
        steps,
    )?;
    to_trajectory(metric, &sol)
}

/// `(t, f, f′)` samples.
pub type PotentialSamples = Vec<(f64, f64, f64)>;

/// Re-solve `f″ = Ric(γ′,γ′) f` along `trajectory` with new initial data,
/// sampling at the trajectory's parameter values.
pub fn transport_potential(
    metric: &MetricField,
    f0: f64,
    f0_deriv: f64,
    trajectory: &Trajectory,
    opts: &OdeOptions,
) -> Result<PotentialSamples> {
    let first = trajectory
        .states
        .first()
        .ok_or_else(|| GeometryError::InvalidInput("empty trajectory".into()))?;
    let mut state = GeodesicState {
        f_val: f0,
        f_deriv: f0_deriv,
        ..*first
    }
    .packed();
    let mut out = vec![(first.t, f0, f0_deriv)];
    for w in trajectory.states.windows(2) {
        let sol = dopri45(
            |_, y| coupled_rhs(metric, y).map(|r| r.0),
            w[0].t,
            state,
            w[1].t,
            opts,
            |_, _| false,
        );
        if sol.status != Status::Completed {
            return Err(GeometryError::StepFailure {
                t: sol.last().0,
                step: f64::NAN,
            });
        }
        state = sol.last().1;
        out.push((w[1].t, state[6], state[7]));
    }
    Ok(out)
}

/// Solve `f″ = h(t) f` for a prescribed coefficient.
pub fn transport_with_coefficient<H: Fn(f64) -> f64>(
    h: H,
    t0: f64,
    t_end: f64,
    f0: f64,
    f0_deriv: f64,
    opts: &OdeOptions,
) -> Result<PotentialSamples> {
    let sol = dopri45(
        |t, y: &[f64; 2]| Ok([y[1], h(t) * y[0]]),
        t0,
        [f0, f0_deriv],
        t_end,
        opts,
        |_, _| false,
    );
    match sol.status {
        Status::Completed => Ok(sol.t.iter().zip(&sol.y).map(|(t, y)| (*t, y[0], y[1])).collect()),
        _ => Err(GeometryError::StepFailure {
            t: sol.last().0,
            step: f64::NAN,
        }),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GrowthBound {
    pub epsilon: f64,
    /// `½(1 + √(1 + 4ε))`, the root of `α(α − 1) = ε` above 1.
    pub alpha: f64,
    pub a_coef: f64,
    pub r0: f64,
    /// `a = sup(|f| + |∇f|)` on the starting sphere.
    pub a_data: f64,
}

impl GrowthBound {
    /// `A = max(a/r₀^α, a/(α r₀^(α−1)))·(1 + 10⁻⁶)`.
    pub fn new(epsilon: f64, r0: f64, a_data: f64) -> Result<Self> {
        if !(epsilon > 0.0 && r0 > 0.0 && a_data >= 0.0) {
            return Err(GeometryError::InvalidInput(
                "growth bound needs ε > 0, r₀ > 0, a ≥ 0".into(),
            ));
        }
        let alpha = 0.5 * (1.0 + (1.0 + 4.0 * epsilon).sqrt());
        let a_coef = (a_data / r0.powf(alpha)).max(a_data / (alpha * r0.powf(alpha - 1.0))) * (1.0 + 1e-6);
        Ok(Self {
            epsilon,
            alpha,
            a_coef,
            r0,
            a_data,
        })
    }

    pub fn w(&self, t: f64) -> f64 {
        self.a_coef * t.powf(self.alpha)
    }

    pub fn w_deriv(&self, t: f64) -> f64 {
        self.a_coef * self.alpha * t.powf(self.alpha - 1.0)
    }

    pub fn w_second(&self, t: f64) -> f64 {
        self.a_coef * self.alpha * (self.alpha - 1.0) * t.powf(self.alpha - 2.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GrowthSample {
    pub t: f64,
    pub f: f64,
    pub f_deriv: f64,
    pub h: f64,
}

impl From<&GeodesicState> for GrowthSample {
    fn from(s: &GeodesicState) -> Self {
        Self {
            t: s.t,
            f: s.f_val,
            f_deriv: s.f_deriv,
            h: s.h_val,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GrowthVerdict {
    pub holds: bool,
    /// `min (w(t) − |f(t)|)` over the samples.
    pub min_margin: f64,
    pub violations: usize,
}

/// Check `|f(t)| ≤ w(t)` on samples that start at `t = r₀`, after
/// verifying the hypotheses of the comparison argument.
pub fn growth_bound_check(samples: &[GrowthSample], bound: &GrowthBound) -> Result<GrowthVerdict> {
    let first = samples
        .first()
        .ok_or_else(|| GeometryError::InvalidInput("no samples".into()))?;
    let mut failed = Vec::new();
    if (first.t - bound.r0).abs() > 1e-12 * bound.r0.max(1.0) {
        failed.push(format!("samples start at t = {} instead of r0 = {}", first.t, bound.r0));
    }
    if first.f.abs() >= bound.w(bound.r0) {
        failed.push(format!("|f(r0)| = {} is not below w(r0) = {}", first.f.abs(), bound.w(bound.r0)));
    }
    if first.f_deriv.abs() >= bound.w_deriv(bound.r0) {
        failed.push(format!(
            "|f'(r0)| = {} is not below w'(r0) = {}",
            first.f_deriv.abs(),
            bound.w_deriv(bound.r0)
        ));
    }
    if let Some(s) = samples
        .iter()
        .find(|s| s.h.abs() > bound.epsilon / (s.t * s.t) * (1.0 + 1e-12))
    {
        failed.push(format!(
            "|h({})| = {} exceeds eps/t^2 = {}",
            s.t,
            s.h.abs(),
            bound.epsilon / (s.t * s.t)
        ));
    }
    if !failed.is_empty() {
        return Err(GeometryError::Precondition { failed });
    }
    let mut min_margin = f64::INFINITY;
    let mut violations = 0;
    for s in samples {
        let margin = bound.w(s.t) - s.f.abs();
        if margin < 0.0 {
            violations += 1;
        }
        min_margin = min_margin.min(margin);
    }
    Ok(GrowthVerdict {
        holds: violations == 0,
        min_margin,
        violations,
    })
}
