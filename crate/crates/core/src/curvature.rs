//! Christoffel symbols, Riemann, Ricci and scalar curvature.
//!
//! Index convention: `∇_c∇_b ∂_a − ∇_b∇_c ∂_a = R^d_acb ∂_d`, which in
//! components reads
//!
//! ```text
//! R^d_abc = ∂_b Γ^d_ca − ∂_c Γ^d_ba + Γ^d_be Γ^e_ca − Γ^d_ce Γ^e_ba
//! ```
//!
//! with `Ric_ac = R^b_abc` and `R = g^ac Ric_ac`. Round spheres have
//! positive Ricci curvature in this convention.

use crate::dual::{seed, seed2, Dual, Real};
use crate::error::Result;
use crate::linalg::{self, Mat3, Vec3};
use crate::metric::{MetricField, Point3};

pub type Tensor3<T = f64> = [[[T; 3]; 3]; 3];
pub type Tensor4<T = f64> = [[[[T; 3]; 3]; 3]; 3];

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Backend {
    /// Nested dual numbers through the closed-form metric.
    DualNumber,
    /// Central differences with step `rel_step·max(1, r)`.
    FiniteDifference { rel_step: f64 },
}

impl Backend {
    pub const DEFAULT_FD_STEP: f64 = 1e-4;

    pub fn finite_difference() -> Self {
        Backend::FiniteDifference {
            rel_step: Self::DEFAULT_FD_STEP,
        }
    }
}

/// Metric components with first and second coordinate derivatives:
/// `dg[k][i][j] = ∂_k g_ij`, `d2g[k][l][i][j] = ∂_k ∂_l g_ij`.
#[derive(Clone, Copy, Debug)]
pub struct MetricJet<T> {
    pub g: [[T; 3]; 3],
    pub dg: Tensor3<T>,
    pub d2g: Tensor4<T>,
}

#[derive(Clone, Copy, Debug)]
pub struct CurvatureBundle<T = f64> {
    pub metric: [[T; 3]; 3],
    pub inverse: [[T; 3]; 3],
    /// `gamma[k][i][j] = Γ^k_ij`.
    pub gamma: Tensor3<T>,
    /// `riemann[d][a][b][c] = R^d_abc`.
    pub riemann: Tensor4<T>,
    pub ricci: [[T; 3]; 3],
    pub scalar: T,
}

impl CurvatureBundle<f64> {
    /// `|Ric|²_g`.
    pub fn ricci_norm_sq(&self) -> f64 {
        let mixed = self.ricci_mixed();
        let mut s = 0.0;
        for a in 0..3 {
            for b in 0..3 {
                s += mixed[a][b] * mixed[b][a];
            }
        }
        s
    }

    /// `R^a_b = g^{ac} R_cb`.
    pub fn ricci_mixed(&self) -> Mat3 {
        linalg::mat_mul(&self.inverse, &self.ricci)
    }
}

/// Jet of the metric by six `Dual<Dual<T>>` evaluations.
pub fn metric_jet<T: Real>(metric: &MetricField, x: &[T; 3]) -> MetricJet<T> {
    let z = T::zero();
    let mut jet = MetricJet {
        g: [[z; 3]; 3],
        dg: [[[z; 3]; 3]; 3],
        d2g: [[[[z; 3]; 3]; 3]; 3],
    };
    for k in 0..3 {
        for l in k..3 {
            let g = metric.components(&seed2(x, k, l));
            for i in 0..3 {
                for j in 0..3 {
                    let d = g[i][j];
                    jet.g[i][j] = d.re.re;
                    if k == l {
                        jet.dg[k][i][j] = d.eps.re;
                    }
                    jet.d2g[k][l][i][j] = d.eps.eps;
                    jet.d2g[l][k][i][j] = d.eps.eps;
                }
            }
        }
    }
    jet
}

/// Jet by central differences of the real metric.
pub fn metric_jet_fd(metric: &MetricField, x: &Vec3, rel_step: f64) -> Result<MetricJet<f64>> {
    let h = rel_step * linalg::norm(x).max(1.0);
    let eval = |dx: [f64; 3]| -> Result<Mat3> {
        let y = [x[0] + dx[0], x[1] + dx[1], x[2] + dx[2]];
        metric.domain_check(&y)?;
        Ok(metric.components(&y))
    };
    let offset = |pairs: &[(usize, f64)]| {
        let mut d = [0.0; 3];
        for &(k, s) in pairs {
            d[k] += s * h;
        }
        d
    };
    let g0 = eval([0.0; 3])?;
    let mut jet = MetricJet {
        g: g0,
        dg: [[[0.0; 3]; 3]; 3],
        d2g: [[[[0.0; 3]; 3]; 3]; 3],
    };
    for k in 0..3 {
        let gp = eval(offset(&[(k, 1.0)]))?;
        let gm = eval(offset(&[(k, -1.0)]))?;
        for i in 0..3 {
            for j in 0..3 {
                jet.dg[k][i][j] = (gp[i][j] - gm[i][j]) / (2.0 * h);
                jet.d2g[k][k][i][j] = (gp[i][j] - 2.0 * g0[i][j] + gm[i][j]) / (h * h);
            }
        }
        for l in (k + 1)..3 {
            let gpp = eval(offset(&[(k, 1.0), (l, 1.0)]))?;
            let gpm = eval(offset(&[(k, 1.0), (l, -1.0)]))?;
            let gmp = eval(offset(&[(k, -1.0), (l, 1.0)]))?;
            let gmm = eval(offset(&[(k, -1.0), (l, -1.0)]))?;
            for i in 0..3 {
                for j in 0..3 {
                    let v = (gpp[i][j] - gpm[i][j] - gmp[i][j] + gmm[i][j]) / (4.0 * h * h);
                    jet.d2g[k][l][i][j] = v;
                    jet.d2g[l][k][i][j] = v;
                }
            }
        }
    }
    Ok(jet)
}

/// Curvature from a metric jet; shared by both backends.
pub fn assemble<T: Real>(jet: &MetricJet<T>) -> CurvatureBundle<T> {
    let z = T::zero();
    let ginv = linalg::inverse(&jet.g);

    // Christoffel symbols of the first kind, Γ_lij = ½(∂_i g_jl + ∂_j g_il − ∂_l g_ij)
    let mut first = [[[z; 3]; 3]; 3];
    for l in 0..3 {
        for i in 0..3 {
            for j in i..3 {
                let v = (jet.dg[i][j][l] + jet.dg[j][i][l] - jet.dg[l][i][j]) * 0.5;
                first[l][i][j] = v;
                first[l][j][i] = v;
            }
        }
    }
    let mut gamma = [[[z; 3]; 3]; 3];
    for k in 0..3 {
        for i in 0..3 {
            for j in i..3 {
                let mut s = z;
                for l in 0..3 {
                    s = s + ginv[k][l] * first[l][i][j];
                }
                gamma[k][i][j] = s;
                gamma[k][j][i] = s;
            }
        }
    }

    // ∂_m g^{kl} = −g^{ka} ∂_m g_ab g^{bl}
    let mut dginv = [[[z; 3]; 3]; 3];
    for m in 0..3 {
        let t = linalg_mul(&ginv, &jet.dg[m]);
        let p = linalg_mul(&t, &ginv);
        for k in 0..3 {
            for l in 0..3 {
                dginv[m][k][l] = -p[k][l];
            }
        }
    }

    // dgamma[m][k][i][j] = ∂_m Γ^k_ij
    let mut dgamma = [[[[z; 3]; 3]; 3]; 3];
    for m in 0..3 {
        for i in 0..3 {
            for j in i..3 {
                let mut dfirst = [z; 3];
                for (l, df) in dfirst.iter_mut().enumerate() {
                    *df = (jet.d2g[m][i][j][l] + jet.d2g[m][j][i][l] - jet.d2g[m][l][i][j]) * 0.5;
                }
                for k in 0..3 {
                    let mut s = z;
                    for l in 0..3 {
                        s = s + dginv[m][k][l] * first[l][i][j] + ginv[k][l] * dfirst[l];
                    }
                    dgamma[m][k][i][j] = s;
                    dgamma[m][k][j][i] = s;
                }
            }
        }
    }

    let mut riemann = [[[[z; 3]; 3]; 3]; 3];
    for d in 0..3 {
        for a in 0..3 {
            for b in 0..3 {
                for c in (b + 1)..3 {
                    let mut v = dgamma[b][d][c][a] - dgamma[c][d][b][a];
                    for e in 0..3 {
                        v = v + gamma[d][b][e] * gamma[e][c][a] - gamma[d][c][e] * gamma[e][b][a];
                    }
                    riemann[d][a][b][c] = v;
                    riemann[d][a][c][b] = -v;
                }
            }
        }
    }

    let mut ricci = [[z; 3]; 3];
    for a in 0..3 {
        for c in a..3 {
            let mut s = z;
            for b in 0..3 {
                s = s + riemann[b][a][b][c];
            }
            ricci[a][c] = s;
            ricci[c][a] = s;
        }
    }
    let mut scalar = z;
    for a in 0..3 {
        for c in 0..3 {
            scalar = scalar + ginv[a][c] * ricci[a][c];
        }
    }

    CurvatureBundle {
        metric: jet.g,
        inverse: ginv,
        gamma,
        riemann,
        ricci,
        scalar,
    }
}

fn linalg_mul<T: Real>(a: &[[T; 3]; 3], b: &[[T; 3]; 3]) -> [[T; 3]; 3] {
    std::array::from_fn(|i| {
        std::array::from_fn(|j| a[i][0] * b[0][j] + a[i][1] * b[1][j] + a[i][2] * b[2][j])
    })
}

pub fn curvature_at(metric: &MetricField, p: &Point3, backend: Backend) -> Result<CurvatureBundle> {
    let x = p.coords();
    metric.domain_check(&x)?;
    let jet = match backend {
        Backend::DualNumber => metric_jet(metric, &x),
        Backend::FiniteDifference { rel_step } => metric_jet_fd(metric, &x, rel_step)?,
    };
    metric.check_definite(&x, &jet.g)?;
    Ok(assemble(&jet))
}

/// Curvature at `p` together with `∂_c R_ab` (indexed `[c][a][b]`), from
/// one extra dual layer per direction.
pub fn curvature_with_ricci_gradient(
    metric: &MetricField,
    p: &Point3,
) -> Result<(CurvatureBundle, Tensor3)> {
    let x = p.coords();
    metric.domain_check(&x)?;
    let mut base = None;
    let mut dric = [[[0.0; 3]; 3]; 3];
    for (c, slot) in dric.iter_mut().enumerate() {
        let xd: [Dual<f64>; 3] = seed(&x, c);
        let jet = metric_jet(metric, &xd);
        let bundle = assemble(&jet);
        for a in 0..3 {
            for b in 0..3 {
                slot[a][b] = bundle.ricci[a][b].eps;
            }
        }
        if base.is_none() {
            base = Some(strip(&bundle));
        }
    }
    let base = base.expect("three directions evaluated");
    metric.check_definite(&x, &base.metric)?;
    Ok((base, dric))
}

fn strip(b: &CurvatureBundle<Dual<f64>>) -> CurvatureBundle {
    let m2 = |m: &[[Dual<f64>; 3]; 3]| -> Mat3 { std::array::from_fn(|i| std::array::from_fn(|j| m[i][j].re)) };
    CurvatureBundle {
        metric: m2(&b.metric),
        inverse: m2(&b.inverse),
        gamma: std::array::from_fn(|k| m2(&b.gamma[k])),
        riemann: std::array::from_fn(|d| std::array::from_fn(|a| m2(&b.riemann[d][a]))),
        ricci: m2(&b.ricci),
        scalar: b.scalar.re,
    }
}

/// `∇_c R_ab = ∂_c R_ab − Γ^e_ca R_eb − Γ^e_cb R_ae`, indexed `[c][a][b]`.
pub fn ricci_covariant_derivative(bundle: &CurvatureBundle, dric: &Tensor3) -> Tensor3 {
    let mut out = [[[0.0; 3]; 3]; 3];
    for c in 0..3 {
        for a in 0..3 {
            for b in 0..3 {
                let mut v = dric[c][a][b];
                for e in 0..3 {
                    v -= bundle.gamma[e][c][a] * bundle.ricci[e][b]
                        + bundle.gamma[e][c][b] * bundle.ricci[a][e];
                }
                out[c][a][b] = v;
            }
        }
    }
    out
}

/// Three-dimensional Riemann tensor from its Ricci part:
/// `R^d_abc = δ^d_b R_ac − δ^d_c R_ab + g_ac R^d_b − g_ab R^d_c
///  + ½R(δ^d_c g_ab − δ^d_b g_ac)`.
pub fn reconstruct_riemann_from_ricci(ricci: &Mat3, scalar: f64, g: &Mat3) -> Result<Tensor4> {
    let origin = [f64::NAN; 3];
    MetricField::euclidean().check_definite(&origin, g)?;
    let mixed = linalg::mat_mul(&linalg::inverse(g), ricci);
    let delta = |i: usize, j: usize| if i == j { 1.0 } else { 0.0 };
    let mut out = [[[[0.0; 3]; 3]; 3]; 3];
    for (d, block) in out.iter_mut().enumerate() {
        for a in 0..3 {
            for b in 0..3 {
                for c in 0..3 {
                    block[a][b][c] = delta(d, b) * ricci[a][c] - delta(d, c) * ricci[a][b]
                        + g[a][c] * mixed[d][b]
                        - g[a][b] * mixed[d][c]
                        + 0.5 * scalar * (delta(d, c) * g[a][b] - delta(d, b) * g[a][c]);
                }
            }
        }
    }
    Ok(out)
}

/// Largest absolute entry of a difference of two rank-4 tensors.
pub fn max_abs_diff4(a: &Tensor4, b: &Tensor4) -> f64 {
    let mut m: f64 = 0.0;
    for d in 0..3 {
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    m = m.max((a[d][i][j][k] - b[d][i][j][k]).abs());
                }
            }
        }
    }
    m
}
