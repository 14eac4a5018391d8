//! Coordinate points and metric families.

use serde::{Deserialize, Serialize};

use crate::dual::Real;
use crate::error::{GeometryError, Result};
use crate::expr::Expr;
use crate::linalg::{self, Mat3, Vec3};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point3 {
    pub x1: f64,
    pub x2: f64,
    pub x3: f64,
}

impl Point3 {
    pub const fn new(x1: f64, x2: f64, x3: f64) -> Self {
        Self { x1, x2, x3 }
    }

    pub fn r(&self) -> f64 {
        (self.x1 * self.x1 + self.x2 * self.x2 + self.x3 * self.x3).sqrt()
    }

    pub fn coords(&self) -> Vec3 {
        [self.x1, self.x2, self.x3]
    }
}

impl From<Vec3> for Point3 {
    fn from(x: Vec3) -> Self {
        Self::new(x[0], x[1], x[2])
    }
}

/// One summand `r⁻²·P(x/r)·S` of an asymptotically Schwarzschild
/// perturbation, with `P(n) = c0 + c1·n + nᵀ c2 n` and `S` a constant
/// symmetric tensor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerturbationTerm {
    pub tensor: Mat3,
    pub c0: f64,
    pub c1: Vec3,
    pub c2: Mat3,
}

impl PerturbationTerm {
    /// Term acting on the `(i, j)` and `(j, i)` components.
    pub fn component(i: usize, j: usize, c0: f64, c1: Vec3, c2: Mat3) -> Self {
        let mut tensor = [[0.0; 3]; 3];
        tensor[i][j] = 1.0;
        tensor[j][i] = 1.0;
        Self { tensor, c0, c1, c2 }
    }

    fn angular<T: Real>(&self, n: &[T; 3]) -> T {
        let mut p = T::cst(self.c0);
        for a in 0..3 {
            p = p + n[a] * self.c1[a];
            for b in 0..3 {
                if self.c2[a][b] != 0.0 {
                    p = p + n[a] * n[b] * self.c2[a][b];
                }
            }
        }
        p
    }

    fn rotated(&self, rot: &Mat3) -> Self {
        let rt = linalg::transpose(rot);
        Self {
            tensor: linalg::mat_mul(&linalg::mat_mul(rot, &self.tensor), &rt),
            c0: self.c0,
            c1: linalg::mat_vec(rot, &self.c1),
            c2: linalg::mat_mul(&linalg::mat_mul(rot, &self.c2), &rt),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum MetricFamily {
    Euclidean,
    /// `(1 + m/2r)⁴ δ`.
    Schwarzschild { m: f64, exterior_only: bool },
    /// Schwarzschild plus an `O₂(r⁻²)` perturbation.
    PerturbedAs {
        m: f64,
        terms: Vec<PerturbationTerm>,
    },
    /// Components `g11 g12 g13 g22 g23 g33` as expressions.
    Generic { components: Box<[Expr; 6]> },
    /// `g'(y) = R g(Rᵀy) Rᵀ`.
    Rotated { base: Box<MetricField>, rotation: Mat3 },
    /// `(1 + sign·f)⁴ g`.
    Conformal {
        base: Box<MetricField>,
        factor: Expr,
        sign: f64,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct MetricField {
    pub family: MetricFamily,
    pub tau: f64,
}

const MIN_EIGENVALUE: f64 = 1e-10;

impl MetricField {
    pub fn euclidean() -> Self {
        Self {
            family: MetricFamily::Euclidean,
            tau: 1.0,
        }
    }

    /// Exterior region `r > m/2` only.
    pub fn schwarzschild(m: f64) -> Self {
        Self {
            family: MetricFamily::Schwarzschild {
                m,
                exterior_only: true,
            },
            tau: 1.0,
        }
    }

    /// Both ends, `r > 0`.
    pub fn schwarzschild_full(m: f64) -> Self {
        Self {
            family: MetricFamily::Schwarzschild {
                m,
                exterior_only: false,
            },
            tau: 1.0,
        }
    }

    pub fn perturbed_as(m: f64, terms: Vec<PerturbationTerm>) -> Self {
        Self {
            family: MetricFamily::PerturbedAs { m, terms },
            tau: 1.0,
        }
    }

    /// Schwarzschild with `p₁₁ = ε r⁻² (n₂² − n₃²)`; breaks the residual
    /// rotational symmetry so all Ricci eigenvalues separate.
    pub fn anisotropic(m: f64, eps: f64) -> Self {
        let mut c2 = [[0.0; 3]; 3];
        c2[1][1] = eps;
        c2[2][2] = -eps;
        Self::perturbed_as(m, vec![PerturbationTerm::component(0, 0, 0.0, [0.0; 3], c2)])
    }

    pub fn generic(components: [Expr; 6], tau: f64) -> Result<Self> {
        check_tau(tau)?;
        Ok(Self {
            family: MetricFamily::Generic {
                components: Box::new(components),
            },
            tau,
        })
    }

    /// Parse six component expressions in the order `g11 g12 g13 g22 g23 g33`.
    pub fn generic_from_strs(components: &[&str; 6], tau: f64) -> Result<Self> {
        let mut parsed = Vec::with_capacity(6);
        for c in components {
            parsed.push(Expr::parse(c)?);
        }
        let arr: [Expr; 6] = parsed.try_into().expect("six components");
        Self::generic(arr, tau)
    }

    /// `euclidean`, `schwarzschild(m)`, `schwarzschild_full(m)`,
    /// `anisotropic(m, eps)` or `generic(g11; g12; g13; g22; g23; g33; tau)`.
    pub fn from_spec(spec: &str) -> Result<Self> {
        use crate::static_potentials::{call_args, parse_numbers};
        let s = spec.trim();
        let arity = |name: &str, v: &[f64], n: usize| {
            if v.len() == n {
                Ok(())
            } else {
                Err(GeometryError::InvalidInput(format!(
                    "{name} takes {n} argument(s), got {}",
                    v.len()
                )))
            }
        };
        if s == "euclidean" {
            return Ok(Self::euclidean());
        }
        if let Some(args) = call_args(s, "schwarzschild") {
            let v = parse_numbers(&args)?;
            arity("schwarzschild", &v, 1)?;
            return Ok(Self::schwarzschild(v[0]));
        }
        if let Some(args) = call_args(s, "schwarzschild_full") {
            let v = parse_numbers(&args)?;
            arity("schwarzschild_full", &v, 1)?;
            return Ok(Self::schwarzschild_full(v[0]));
        }
        if let Some(args) = call_args(s, "anisotropic") {
            let v = parse_numbers(&args)?;
            arity("anisotropic", &v, 2)?;
            return Ok(Self::anisotropic(v[0], v[1]));
        }
        if let Some(args) = call_args(s, "generic") {
            let parts: Vec<&str> = args.split(';').map(str::trim).collect();
            if parts.len() != 7 {
                return Err(GeometryError::InvalidInput(format!(
                    "generic takes six components and tau separated by ';', got {} fields",
                    parts.len()
                )));
            }
            let tau = parse_numbers(parts[6])?[0];
            let comps: [&str; 6] = std::array::from_fn(|i| parts[i]);
            return Self::generic_from_strs(&comps, tau);
        }
        Err(GeometryError::InvalidInput(format!("unknown metric spec '{s}'")))
    }

    pub fn with_tau(mut self, tau: f64) -> Result<Self> {
        check_tau(tau)?;
        self.tau = tau;
        Ok(self)
    }

    /// `(1 + sign·f)⁴ g` for the given potential expression.
    pub fn conformal(&self, factor: Expr, sign: f64) -> Self {
        Self {
            family: MetricFamily::Conformal {
                base: Box::new(self.clone()),
                factor,
                sign: sign.signum(),
            },
            tau: self.tau,
        }
    }

    /// ADM mass parameter where the family has one.
    pub fn mass(&self) -> f64 {
        match &self.family {
            MetricFamily::Schwarzschild { m, .. } | MetricFamily::PerturbedAs { m, .. } => *m,
            MetricFamily::Rotated { base, .. } => base.mass(),
            _ => 0.0,
        }
    }

    pub fn domain_check(&self, x: &Vec3) -> Result<()> {
        if x.iter().any(|c| !c.is_finite()) {
            return Err(GeometryError::Domain {
                point: *x,
                reason: "non-finite coordinate".into(),
            });
        }
        let r = linalg::norm(x);
        match &self.family {
            MetricFamily::Euclidean | MetricFamily::Generic { .. } => Ok(()),
            MetricFamily::Schwarzschild { m, exterior_only } => {
                let bound = if *m < 0.0 || *exterior_only { m.abs() / 2.0 } else { 0.0 };
                if r <= bound {
                    Err(GeometryError::Domain {
                        point: *x,
                        reason: format!("r = {r} must exceed {bound}"),
                    })
                } else {
                    Ok(())
                }
            }
            MetricFamily::PerturbedAs { m, .. } => {
                let bound = m.abs() / 2.0;
                if r <= bound {
                    Err(GeometryError::Domain {
                        point: *x,
                        reason: format!("r = {r} must exceed {bound}"),
                    })
                } else {
                    Ok(())
                }
            }
            MetricFamily::Rotated { base, rotation } => {
                base.domain_check(&linalg::mat_vec(&linalg::transpose(rotation), x))
            }
            MetricFamily::Conformal { base, factor, sign } => {
                base.domain_check(x)?;
                let w = 1.0 + sign * factor.eval(x);
                if !(w > 1e-8) {
                    return Err(GeometryError::DegenerateConformal {
                        point: *x,
                        sign: if *sign > 0.0 { '+' } else { '-' },
                        factor: w,
                    });
                }
                Ok(())
            }
        }
    }

    /// Metric components at `x`, generic over the scalar type. The caller
    /// is responsible for [`MetricField::domain_check`].
    pub fn components<T: Real>(&self, x: &[T; 3]) -> [[T; 3]; 3] {
        match &self.family {
            MetricFamily::Euclidean => delta(),
            MetricFamily::Schwarzschild { m, .. } => {
                let r = radius(x);
                let phi = r.recip() * (m / 2.0) + 1.0;
                scaled_delta(phi.powi(4))
            }
            MetricFamily::PerturbedAs { m, terms } => {
                let r = radius(x);
                let phi = r.recip() * (m / 2.0) + 1.0;
                let mut g = scaled_delta(phi.powi(4));
                let inv_r = r.recip();
                let n = [x[0] * inv_r, x[1] * inv_r, x[2] * inv_r];
                let inv_r2 = inv_r * inv_r;
                for term in terms {
                    let p = term.angular(&n) * inv_r2;
                    for (i, row) in g.iter_mut().enumerate() {
                        for (j, gij) in row.iter_mut().enumerate() {
                            if term.tensor[i][j] != 0.0 {
                                *gij = *gij + p * term.tensor[i][j];
                            }
                        }
                    }
                }
                g
            }
            MetricFamily::Generic { components } => {
                let c: Vec<T> = components.iter().map(|e| e.eval(x)).collect();
                [[c[0], c[1], c[2]], [c[1], c[3], c[4]], [c[2], c[4], c[5]]]
            }
            MetricFamily::Rotated { base, rotation } => {
                let xb: [T; 3] = std::array::from_fn(|a| {
                    x[0] * rotation[0][a] + x[1] * rotation[1][a] + x[2] * rotation[2][a]
                });
                let gb = base.components(&xb);
                std::array::from_fn(|i| {
                    std::array::from_fn(|j| {
                        let mut s = T::zero();
                        for a in 0..3 {
                            for b in 0..3 {
                                let w = rotation[i][a] * rotation[j][b];
                                if w != 0.0 {
                                    s = s + gb[a][b] * w;
                                }
                            }
                        }
                        s
                    })
                })
            }
            MetricFamily::Conformal { base, factor, sign } => {
                let w = (factor.eval(x) * *sign + 1.0).powi(4);
                let gb = base.components(x);
                std::array::from_fn(|i| std::array::from_fn(|j| gb[i][j] * w))
            }
        }
    }

    /// Metric at a real point, with domain and definiteness checks.
    pub fn eval(&self, p: &Point3) -> Result<Mat3> {
        let x = p.coords();
        self.domain_check(&x)?;
        let g = self.components(&x);
        self.check_definite(&x, &g)?;
        Ok(g)
    }

    pub(crate) fn check_definite(&self, x: &Vec3, g: &Mat3) -> Result<()> {
        if g.iter().flatten().any(|v| !v.is_finite()) {
            return Err(GeometryError::Domain {
                point: *x,
                reason: "metric is not finite".into(),
            });
        }
        let lmin = linalg::sym_eigenvalues(g)[0];
        if lmin > MIN_EIGENVALUE {
            Ok(())
        } else {
            Err(GeometryError::SingularMetric {
                point: *x,
                min_eigenvalue: lmin,
            })
        }
    }
}

fn check_tau(tau: f64) -> Result<()> {
    if tau > 0.5 && tau <= 1.0 {
        Ok(())
    } else {
        Err(GeometryError::InvalidInput(format!(
            "decay exponent {tau} outside (1/2, 1]"
        )))
    }
}

fn radius<T: Real>(x: &[T; 3]) -> T {
    (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt()
}

fn delta<T: Real>() -> [[T; 3]; 3] {
    scaled_delta(T::one())
}

fn scaled_delta<T: Real>(s: T) -> [[T; 3]; 3] {
    let z = T::zero();
    [[s, z, z], [z, s, z], [z, z, s]]
}

/// Express `metric` in the chart `y = R x`. Spherically symmetric families
/// come back unchanged and perturbations are rotated term by term.
pub fn rotate_chart(metric: &MetricField, rotation: &Mat3) -> Result<MetricField> {
    let deviation = linalg::orthogonality_defect(rotation);
    if deviation > 1e-12 {
        return Err(GeometryError::NotOrthogonal { deviation });
    }
    let family = match &metric.family {
        MetricFamily::Euclidean | MetricFamily::Schwarzschild { .. } => metric.family.clone(),
        MetricFamily::PerturbedAs { m, terms } => MetricFamily::PerturbedAs {
            m: *m,
            terms: terms.iter().map(|t| t.rotated(rotation)).collect(),
        },
        MetricFamily::Rotated {
            base,
            rotation: inner,
        } => MetricFamily::Rotated {
            base: base.clone(),
            rotation: linalg::mat_mul(rotation, inner),
        },
        _ => MetricFamily::Rotated {
            base: Box::new(metric.clone()),
            rotation: *rotation,
        },
    };
    Ok(MetricField {
        family,
        tau: metric.tau,
    })
}
