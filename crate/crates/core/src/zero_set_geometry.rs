//! Level sets `f = 0` as surfaces.
//!
//! A surface point is always found as a root of `f` along a ray
//! `base(u, v) + s·dir(u, v)`: vertical lines for graphs `y₁ = q(y₂, y₃)`,
//! radial rays for closed star-shaped components. Once the `f64` root is
//! known, a few Newton steps carried out in dual arithmetic give exact
//! derivatives of the embedding, so the induced metric, its Christoffel
//! symbols and the Gaussian curvature (Brioschi) need no finite differences.

use serde::Serialize;

use crate::curvature::{curvature_at, Backend, CurvatureBundle};
use crate::dual::{seed2, Dual, Real};
use crate::error::{GeometryError, Result};
use crate::linalg::{self, least_squares, loglog_slope, Mat3, Vec3};
use crate::metric::{MetricField, Point3};
use crate::static_potentials::{
    covariant_hessian_from, require_static, PotentialField, DEFAULT_STATIC_TOL,
};

/// Required `|f|` at a certified root.
pub const ROOT_TOL: f64 = 1e-10;
/// `|∇f|` below this at a zero-set point aborts the component.
pub const CRITICAL_GRAD: f64 = 1e-8;
/// Lower bound on `∂f/∂y₁` along graph search segments.
pub const GRAPH_MIN_SLOPE: f64 = 0.5;
const SCAN_SAMPLES: usize = 128;
const NEWTON_LIFT_STEPS: usize = 4;

pub type Mat2 = [[f64; 2]; 2];

/// Which family of rays parameterizes the surface near a site.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum ChartKind {
    /// `X = (s, u, v)`.
    Graph,
    /// `X = center + s·n` with `n = normalize(axis + u·t1 + v·t2)`.
    Radial {
        center: Vec3,
        axis: Vec3,
        t1: Vec3,
        t2: Vec3,
    },
}

impl ChartKind {
    pub fn radial(center: Vec3, axis: Vec3) -> Self {
        let n = normalize(&axis);
        let (t1, t2) = orthonormal_complement(&n);
        ChartKind::Radial {
            center,
            axis: n,
            t1,
            t2,
        }
    }

    fn ray<T: Real>(&self, u: T, v: T) -> ([T; 3], [T; 3]) {
        match self {
            ChartKind::Graph => ([T::zero(), u, v], [T::one(), T::zero(), T::zero()]),
            ChartKind::Radial {
                center,
                axis,
                t1,
                t2,
            } => {
                let d: [T; 3] = std::array::from_fn(|i| u * t1[i] + v * t2[i] + axis[i]);
                let len = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
                (center.map(T::cst), d.map(|c| c / len))
            }
        }
    }
}

fn normalize(v: &Vec3) -> Vec3 {
    let n = linalg::norm(v);
    v.map(|c| c / n)
}

fn orthonormal_complement(n: &Vec3) -> (Vec3, Vec3) {
    let k = (0..3)
        .min_by(|&a, &b| n[a].abs().total_cmp(&n[b].abs()))
        .unwrap_or(0);
    let mut e = [0.0; 3];
    e[k] = 1.0;
    let t1 = normalize(&linalg::cross(n, &e));
    let t2 = linalg::cross(n, &t1);
    (t1, t2)
}

/// Root of `f` along one ray, with the sampling bracket that certified it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RayRoot {
    pub s: f64,
    pub bracket: (f64, f64),
    pub residual: f64,
}

impl RayRoot {
    pub fn certified(&self) -> bool {
        self.residual < ROOT_TOL && self.bracket.0 <= self.s && self.s <= self.bracket.1
    }
}

/// Induced metric `σ` with first and second partials in the chart
/// parameters: `d[k] = ∂_k σ`, `dd[k][l] = ∂_k ∂_l σ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SigmaJet {
    pub sigma: Mat2,
    pub d: [Mat2; 2],
    pub dd: [[Mat2; 2]; 2],
}

impl SigmaJet {
    pub fn det(&self) -> f64 {
        self.sigma[0][0] * self.sigma[1][1] - self.sigma[0][1] * self.sigma[1][0]
    }

    pub fn inverse(&self) -> Mat2 {
        inverse2(&self.sigma)
    }

    /// Gaussian curvature by the Brioschi formula.
    pub fn gauss(&self) -> f64 {
        let (e, f, g) = (self.sigma[0][0], self.sigma[0][1], self.sigma[1][1]);
        let (e_u, e_v) = (self.d[0][0][0], self.d[1][0][0]);
        let (f_u, f_v) = (self.d[0][0][1], self.d[1][0][1]);
        let (g_u, g_v) = (self.d[0][1][1], self.d[1][1][1]);
        let e_vv = self.dd[1][1][0][0];
        let f_uv = self.dd[0][1][0][1];
        let g_uu = self.dd[0][0][1][1];
        let m1 = [
            [-0.5 * e_vv + f_uv - 0.5 * g_uu, 0.5 * e_u, f_u - 0.5 * e_v],
            [f_v - 0.5 * g_u, e, f],
            [0.5 * g_v, f, g],
        ];
        let m2 = [[0.0, 0.5 * e_v, 0.5 * g_u], [0.5 * e_v, e, f], [0.5 * g_u, f, g]];
        let w = e * g - f * f;
        (linalg::det(&m1) - linalg::det(&m2)) / (w * w)
    }

    /// `Γ[c][a][b] = Γ^c_ab` of σ.
    pub fn christoffel(&self) -> [[[f64; 2]; 2]; 2] {
        christoffel2(&self.sigma, &self.d)
    }
}

fn inverse2(m: &Mat2) -> Mat2 {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    [[m[1][1] / det, -m[0][1] / det], [-m[1][0] / det, m[0][0] / det]]
}

fn christoffel2(sigma: &Mat2, d: &[Mat2; 2]) -> [[[f64; 2]; 2]; 2] {
    let inv = inverse2(sigma);
    std::array::from_fn(|c| {
        std::array::from_fn(|a| {
            std::array::from_fn(|b| {
                (0..2)
                    .map(|e| 0.5 * inv[c][e] * (d[a][e][b] + d[b][e][a] - d[e][a][b]))
                    .sum()
            })
        })
    })
}

fn sigma_norm(m: &Mat2, inv: &Mat2) -> f64 {
    let mut s = 0.0;
    for a in 0..2 {
        for b in 0..2 {
            for c in 0..2 {
                for d in 0..2 {
                    s += inv[a][c] * inv[b][d] * m[a][b] * m[c][d];
                }
            }
        }
    }
    s.max(0.0).sqrt()
}

/// Embedding `X(u, v)` with its first and second partials.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EmbeddingJet {
    pub x: Vec3,
    pub dx: [Vec3; 2],
    pub ddx: [[Vec3; 2]; 2],
}

impl EmbeddingJet {
    /// Value, parameter gradient and parameter Hessian of `field ∘ X`.
    pub fn pullback(&self, field: &PotentialField) -> (f64, [f64; 2], Mat2) {
        let (v, g, h) = field.jet(&Point3::from(self.x));
        let grad = [linalg::dot(&g, &self.dx[0]), linalg::dot(&g, &self.dx[1])];
        let hess = std::array::from_fn(|a| {
            std::array::from_fn(|b| {
                linalg::bilinear(&h, &self.dx[a], &self.dx[b]) + linalg::dot(&g, &self.ddx[a][b])
            })
        });
        (v, grad, hess)
    }
}

/// A ray family together with the surface it cuts out.
#[derive(Clone, Copy, Debug)]
pub struct SurfaceChart<'a> {
    pub f: &'a PotentialField,
    pub metric: &'a MetricField,
    pub kind: ChartKind,
}

fn seed_uv(u: f64, v: f64, outer: usize, inner: usize) -> (Dual<Dual<f64>>, Dual<Dual<f64>>) {
    let s = seed2(&[u, v, 0.0], outer, inner);
    (s[0], s[1])
}

impl<'a> SurfaceChart<'a> {
    pub fn new(f: &'a PotentialField, metric: &'a MetricField, kind: ChartKind) -> Self {
        Self { f, metric, kind }
    }

    // f along the ray with its s-derivative
    fn along<T: Real>(&self, base: &[T; 3], dir: &[T; 3], s: T) -> Dual<T> {
        let x: [Dual<T>; 3] = std::array::from_fn(|i| {
            Dual::constant(base[i]) + Dual::var(s) * Dual::constant(dir[i])
        });
        self.f.value(&x)
    }

    /// Sample `f` on `[lo, hi]` along the ray through `(u, v)`, demand a
    /// single sign change, and polish it by safeguarded Newton.
    /// With `min_slope`, the derivative along the ray must exceed it at
    /// every sample. `node` labels errors.
    pub fn solve(
        &self,
        u: f64,
        v: f64,
        lo: f64,
        hi: f64,
        min_slope: Option<f64>,
        node: [f64; 2],
    ) -> Result<RayRoot> {
        let (base, dir) = self.kind.ray(u, v);
        let n = SCAN_SAMPLES;
        let mut xs = Vec::with_capacity(n + 1);
        let mut fs = Vec::with_capacity(n + 1);
        let mut min_d = f64::INFINITY;
        for i in 0..=n {
            let s = lo + (hi - lo) * i as f64 / n as f64;
            let d = self.along(&base, &dir, s);
            if !d.re.is_finite() || !d.eps.is_finite() {
                let p = std::array::from_fn(|k| base[k] + s * dir[k]);
                return Err(GeometryError::Domain {
                    point: p,
                    reason: "potential is not finite on the search segment".into(),
                });
            }
            min_d = min_d.min(d.eps);
            xs.push(s);
            fs.push(d.re);
        }
        if let Some(bound) = min_slope {
            if min_d <= bound {
                return Err(GeometryError::Monotonicity {
                    node,
                    min_derivative: min_d,
                });
            }
        }
        let mut brackets = Vec::new();
        for i in 0..=n {
            if fs[i] == 0.0 {
                brackets.push((xs[i], xs[i]));
            } else if i < n && fs[i + 1] != 0.0 && (fs[i] > 0.0) != (fs[i + 1] > 0.0) {
                brackets.push((xs[i], xs[i + 1]));
            }
        }
        match brackets.len() {
            0 => Err(GeometryError::NoRoot { node }),
            1 => {
                let (a, b) = brackets[0];
                let s = self.polish(&base, &dir, a, b);
                let residual = self.along(&base, &dir, s).re.abs();
                Ok(RayRoot {
                    s,
                    bracket: (a, b),
                    residual,
                })
            }
            count => Err(GeometryError::MultiRoot { node, count }),
        }
    }

    fn polish(&self, base: &Vec3, dir: &Vec3, mut a: f64, mut b: f64) -> f64 {
        if a == b {
            return a;
        }
        let fa = self.along(base, dir, a).re;
        let mut s = 0.5 * (a + b);
        for _ in 0..200 {
            let d = self.along(base, dir, s);
            if d.re == 0.0 {
                break;
            }
            if (d.re > 0.0) == (fa > 0.0) {
                a = s;
            } else {
                b = s;
            }
            let newton = s - d.re / d.eps;
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            let next = if d.eps != 0.0 && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (a + b)
            };
            let done = (next - s).abs() <= 1e-15 * s.abs().max(1.0);
            s = next;
            if done {
                break;
            }
        }
        s
    }

    /// Surface point over `(u, v)` starting from the known root `s0`.
    /// The Newton steps run in `T`, so dual parts of `u` and `v` come out
    /// as exact derivatives of the embedding.
    pub fn embed<T: Real>(&self, u: T, v: T, s0: f64) -> [T; 3] {
        let (base, dir) = self.kind.ray(u, v);
        let mut s = T::cst(s0);
        for _ in 0..NEWTON_LIFT_STEPS {
            let d = self.along(&base, &dir, s);
            s = s - d.re / d.eps;
        }
        std::array::from_fn(|i| base[i] + s * dir[i])
    }

    pub fn point(&self, u: f64, v: f64, s0: f64) -> Result<Vec3> {
        let x = self.embed(u, v, s0);
        self.metric.domain_check(&x)?;
        Ok(x)
    }

    /// Induced metric `σ_αβ = g(∂_αX, ∂_βX)`.
    pub fn sigma<T: Real>(&self, u: T, v: T, s0: f64) -> [[T; 2]; 2] {
        let xu = self.embed(Dual::var(u), Dual::constant(v), s0);
        let xv = self.embed(Dual::constant(u), Dual::var(v), s0);
        let x = xu.map(|c| c.re);
        let e = [xu.map(|c| c.eps), xv.map(|c| c.eps)];
        let g = self.metric.components(&x);
        std::array::from_fn(|a| {
            std::array::from_fn(|b| {
                let mut s = T::zero();
                for i in 0..3 {
                    for j in 0..3 {
                        s = s + g[i][j] * e[a][i] * e[b][j];
                    }
                }
                s
            })
        })
    }

    /// `σ` and its first partials.
    pub fn sigma_first(&self, u: f64, v: f64, s0: f64) -> (Mat2, [Mat2; 2]) {
        let su = self.sigma(Dual::var(u), Dual::constant(v), s0);
        let sv = self.sigma(Dual::constant(u), Dual::var(v), s0);
        (
            su.map(|r| r.map(|c| c.re)),
            [su.map(|r| r.map(|c| c.eps)), sv.map(|r| r.map(|c| c.eps))],
        )
    }

    pub fn sigma_jet(&self, u: f64, v: f64, s0: f64) -> SigmaJet {
        let mut jet = SigmaJet {
            sigma: [[0.0; 2]; 2],
            d: [[[0.0; 2]; 2]; 2],
            dd: [[[[0.0; 2]; 2]; 2]; 2],
        };
        for (outer, inner) in [(0, 0), (0, 1), (1, 1)] {
            let (uu, vv) = seed_uv(u, v, outer, inner);
            let s = self.sigma(uu, vv, s0);
            for a in 0..2 {
                for b in 0..2 {
                    let c = s[a][b];
                    jet.sigma[a][b] = c.re.re;
                    if outer == inner {
                        jet.d[outer][a][b] = c.eps.re;
                    }
                    jet.dd[outer][inner][a][b] = c.eps.eps;
                    jet.dd[inner][outer][a][b] = c.eps.eps;
                }
            }
        }
        jet
    }

    pub fn embedding_jet(&self, u: f64, v: f64, s0: f64) -> EmbeddingJet {
        let mut jet = EmbeddingJet {
            x: [0.0; 3],
            dx: [[0.0; 3]; 2],
            ddx: [[[0.0; 3]; 2]; 2],
        };
        for (outer, inner) in [(0, 0), (0, 1), (1, 1)] {
            let (uu, vv) = seed_uv(u, v, outer, inner);
            let x = self.embed(uu, vv, s0);
            for i in 0..3 {
                jet.x[i] = x[i].re.re;
                if outer == inner {
                    jet.dx[outer][i] = x[i].eps.re;
                }
                jet.ddx[outer][inner][i] = x[i].eps.eps;
                jet.ddx[inner][outer][i] = x[i].eps.eps;
            }
        }
        jet
    }

    /// `|∇f|_g` at `x`; aborts with `CriticalOnZeroSet` below the floor.
    pub fn grad_norm(&self, x: &Vec3) -> Result<f64> {
        let (_, df) = self.f.gradient(&Point3::from(*x));
        let gi = linalg::inverse(&self.metric.eval(&Point3::from(*x))?);
        let n = linalg::bilinear(&gi, &df, &df).max(0.0).sqrt();
        if n < CRITICAL_GRAD {
            return Err(GeometryError::CriticalOnZeroSet {
                point: *x,
                grad_norm: n,
            });
        }
        Ok(n)
    }
}

// ---------------------------------------------------------------------------
// Graph components

/// Polar sampling grid for the graph chart: nodes at `ρ(cos θ_k, sin θ_k)`
/// for each ring radius `ρ` and `θ_k = 2πk/n_theta`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GraphGrid {
    pub rings: Vec<f64>,
    pub n_theta: usize,
}

impl GraphGrid {
    pub fn new(rings: Vec<f64>, n_theta: usize) -> Result<Self> {
        if rings.is_empty() || rings.windows(2).any(|w| w[1] <= w[0]) || rings[0] <= 0.0 {
            return Err(GeometryError::InvalidInput(
                "ring radii must be positive and strictly increasing".into(),
            ));
        }
        if n_theta < 4 {
            return Err(GeometryError::InvalidInput("n_theta must be at least 4".into()));
        }
        Ok(Self { rings, n_theta })
    }

    /// `n_rings` radii spaced geometrically strictly inside the annulus.
    pub fn geometric(annulus: (f64, f64), n_rings: usize, n_theta: usize) -> Result<Self> {
        let (c, r) = annulus;
        if !(c > 0.0 && r > c) || n_rings == 0 {
            return Err(GeometryError::InvalidInput(format!(
                "bad annulus ({c}, {r}) or ring count"
            )));
        }
        let rings = (0..n_rings)
            .map(|i| c * (r / c).powf((i as f64 + 0.5) / n_rings as f64))
            .collect();
        Self::new(rings, n_theta)
    }

    pub fn node(&self, ring: usize, k: usize) -> [f64; 2] {
        let th = 2.0 * std::f64::consts::PI * k as f64 / self.n_theta as f64;
        let rho = self.rings[ring];
        [rho * th.cos(), rho * th.sin()]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GraphNode {
    pub ybar: [f64; 2],
    pub q: f64,
    pub bracket: (f64, f64),
    pub root_residual: f64,
    pub dq: [f64; 2],
    pub ddq: Mat2,
    pub sigma: Mat2,
    /// `h = σ − δ`.
    pub h: Mat2,
    /// `dh[k] = ∂_k h`.
    pub dh: [Mat2; 2],
    pub gauss: f64,
    pub grad_norm: f64,
}

impl GraphNode {
    pub fn certified(&self) -> bool {
        RayRoot {
            s: self.q,
            bracket: self.bracket,
            residual: self.root_residual,
        }
        .certified()
    }

    pub fn rho(&self) -> f64 {
        self.ybar[0].hypot(self.ybar[1])
    }
}

/// The zero set of `f` over an annulus `C < |ȳ| < R_max`, as a graph
/// `y₁ = q(ȳ)`. Nodes are stored ring by ring.
#[derive(Clone, Debug)]
pub struct SurfaceGraph {
    pub potential: PotentialField,
    pub metric: MetricField,
    pub annulus: (f64, f64),
    pub grid: GraphGrid,
    pub nodes: Vec<GraphNode>,
}

fn graph_node(chart: &SurfaceChart<'_>, ybar: [f64; 2]) -> Result<GraphNode> {
    let [u, v] = ybar;
    let half = 10f64.max(u.hypot(v));
    let root = chart.solve(u, v, -half, half, Some(GRAPH_MIN_SLOPE), ybar)?;
    let x = chart.point(u, v, root.s)?;
    let grad_norm = chart.grad_norm(&x)?;
    let emb = chart.embedding_jet(u, v, root.s);
    let jet = chart.sigma_jet(u, v, root.s);
    let h = std::array::from_fn(|a| {
        std::array::from_fn(|b| jet.sigma[a][b] - if a == b { 1.0 } else { 0.0 })
    });
    Ok(GraphNode {
        ybar,
        q: root.s,
        bracket: root.bracket,
        root_residual: root.residual,
        dq: [emb.dx[0][0], emb.dx[1][0]],
        ddq: [
            [emb.ddx[0][0][0], emb.ddx[0][1][0]],
            [emb.ddx[1][0][0], emb.ddx[1][1][0]],
        ],
        sigma: jet.sigma,
        h,
        dh: jet.d,
        gauss: jet.gauss(),
        grad_norm,
    })
}

/// Solve for the graph at every grid node. Requires `∂f/∂y₁ > ½` along
/// each search segment `[−max(10, |ȳ|), max(10, |ȳ|)]`.
pub fn extract_zero_graph(
    f: &PotentialField,
    metric: &MetricField,
    annulus: (f64, f64),
    grid: &GraphGrid,
) -> Result<SurfaceGraph> {
    let (c, r_max) = annulus;
    if let Some(bad) = grid.rings.iter().find(|&&rho| rho <= c || rho >= r_max) {
        return Err(GeometryError::InvalidInput(format!(
            "ring {bad} lies outside the annulus ({c}, {r_max})"
        )));
    }
    let chart = SurfaceChart::new(f, metric, ChartKind::Graph);
    let mut nodes = Vec::with_capacity(grid.rings.len() * grid.n_theta);
    for ring in 0..grid.rings.len() {
        for k in 0..grid.n_theta {
            nodes.push(graph_node(&chart, grid.node(ring, k))?);
        }
    }
    Ok(SurfaceGraph {
        potential: f.clone(),
        metric: metric.clone(),
        annulus,
        grid: grid.clone(),
        nodes,
    })
}

fn ring_slope(radii: &[f64], values: &[f64]) -> f64 {
    if values.iter().all(|&v| v == 0.0) {
        return f64::NEG_INFINITY;
    }
    loglog_slope(radii, values)
}

impl SurfaceGraph {
    pub fn chart(&self) -> SurfaceChart<'_> {
        SurfaceChart::new(&self.potential, &self.metric, ChartKind::Graph)
    }

    pub fn ring(&self, i: usize) -> &[GraphNode] {
        let n = self.grid.n_theta;
        &self.nodes[i * n..(i + 1) * n]
    }

    /// Solve for a single off-grid point of the graph.
    pub fn solve_at(&self, ybar: [f64; 2]) -> Result<GraphNode> {
        let rho = ybar[0].hypot(ybar[1]);
        if rho <= self.annulus.0 || rho >= self.annulus.1 {
            return Err(GeometryError::Resolution(format!(
                "|ȳ| = {rho} lies outside the extracted annulus {:?}",
                self.annulus
            )));
        }
        graph_node(&self.chart(), ybar)
    }

    pub fn all_certified(&self) -> bool {
        self.nodes.iter().all(GraphNode::certified)
    }

    fn per_ring<F: Fn(&GraphNode) -> f64>(&self, f: F) -> Vec<f64> {
        (0..self.grid.rings.len())
            .map(|i| self.ring(i).iter().map(&f).fold(0.0, f64::max))
            .collect()
    }

    /// Fitted log–log exponent of `max |h| + |ȳ|·max |∂h|` across rings.
    pub fn metric_decay_exponent(&self) -> f64 {
        let v = self.per_ring(|n| {
            let h = n.h.iter().flatten().fold(0.0f64, |m, c| m.max(c.abs()));
            let dh = n.dh.iter().flatten().flatten().fold(0.0f64, |m, c| m.max(c.abs()));
            h + n.rho() * dh
        });
        ring_slope(&self.grid.rings, &v)
    }

    /// Fitted log–log exponent of `max |q|` across rings.
    pub fn q_growth_exponent(&self) -> f64 {
        let v = self.per_ring(|n| n.q.abs());
        ring_slope(&self.grid.rings, &v)
    }

    /// Rows `(y₂, y₃, q, K, |∇f|, root residual)` for surface dumps.
    pub fn rows(&self) -> Vec<[f64; 6]> {
        self.nodes
            .iter()
            .map(|n| [n.ybar[0], n.ybar[1], n.q, n.gauss, n.grad_norm, n.root_residual])
            .collect()
    }
}

// ---------------------------------------------------------------------------
// Closed components

/// Rays from `center` in the directions of a latitude–longitude sphere,
/// searched for a root on `[rho_min, rho_max]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SphereMeshSpec {
    pub center: Vec3,
    pub rho_min: f64,
    pub rho_max: f64,
    pub n_lat: usize,
    pub n_lon: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MeshVertex {
    pub direction: Vec3,
    pub rho: f64,
    pub point: Vec3,
    pub root_residual: f64,
    pub grad_norm: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClosedMesh {
    pub spec: SphereMeshSpec,
    pub vertices: Vec<MeshVertex>,
    pub faces: Vec<Vec<usize>>,
}

impl ClosedMesh {
    pub fn edge_count(&self) -> usize {
        let mut edges = std::collections::BTreeSet::new();
        for f in &self.faces {
            for i in 0..f.len() {
                let (a, b) = (f[i], f[(i + 1) % f.len()]);
                edges.insert((a.min(b), a.max(b)));
            }
        }
        edges.len()
    }

    /// `V − E + F`.
    pub fn euler_characteristic(&self) -> i64 {
        self.vertices.len() as i64 - self.edge_count() as i64 + self.faces.len() as i64
    }
}

fn sphere_directions(n_lat: usize, n_lon: usize) -> (Vec<Vec3>, Vec<Vec<usize>>) {
    use std::f64::consts::PI;
    let mut dirs = vec![[0.0, 0.0, 1.0]];
    for i in 1..n_lat {
        let th = PI * i as f64 / n_lat as f64;
        for j in 0..n_lon {
            let ph = 2.0 * PI * j as f64 / n_lon as f64;
            dirs.push([th.sin() * ph.cos(), th.sin() * ph.sin(), th.cos()]);
        }
    }
    dirs.push([0.0, 0.0, -1.0]);
    let south = dirs.len() - 1;
    let at = |i: usize, j: usize| 1 + (i - 1) * n_lon + j % n_lon;
    let mut faces = Vec::new();
    for j in 0..n_lon {
        faces.push(vec![0, at(1, j), at(1, j + 1)]);
    }
    for i in 1..n_lat - 1 {
        for j in 0..n_lon {
            faces.push(vec![at(i, j), at(i + 1, j), at(i + 1, j + 1), at(i, j + 1)]);
        }
    }
    for j in 0..n_lon {
        faces.push(vec![at(n_lat - 1, j + 1), at(n_lat - 1, j), south]);
    }
    (dirs, faces)
}

/// A connected piece of `f⁻¹(0)` with its `|∇f|` samples.
#[derive(Clone, Debug)]
pub enum ComponentKind {
    UnboundedGraph(SurfaceGraph),
    BoundedClosed(ClosedMesh),
}

#[derive(Clone, Debug)]
pub struct ZeroSetComponent {
    pub kind: ComponentKind,
    pub grad_norm_samples: Vec<f64>,
    /// Mean of `grad_norm_samples`.
    pub c: f64,
    pub euler_char: Option<i64>,
    /// Ends met by an unbounded component; a single chart always gives 1.
    pub ends_met: Option<usize>,
}

/// Where a law is evaluated: a chart and parameters `(u, v)` with the
/// known root `s`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SurfaceSite {
    pub kind: ChartKind,
    pub u: f64,
    pub v: f64,
    pub s: f64,
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len().max(1) as f64
}

impl ZeroSetComponent {
    pub fn from_graph(graph: SurfaceGraph) -> Self {
        let samples: Vec<f64> = graph.nodes.iter().map(|n| n.grad_norm).collect();
        Self {
            c: mean(&samples),
            grad_norm_samples: samples,
            kind: ComponentKind::UnboundedGraph(graph),
            euler_char: None,
            ends_met: Some(1),
        }
    }

    /// Standard deviation of the `|∇f|` samples over their mean.
    pub fn grad_spread(&self) -> f64 {
        let m = mean(&self.grad_norm_samples);
        let var = self
            .grad_norm_samples
            .iter()
            .map(|g| (g - m) * (g - m))
            .sum::<f64>()
            / self.grad_norm_samples.len().max(1) as f64;
        var.sqrt() / m
    }

    pub fn sites(&self) -> Vec<SurfaceSite> {
        match &self.kind {
            ComponentKind::UnboundedGraph(g) => g
                .nodes
                .iter()
                .map(|n| SurfaceSite {
                    kind: ChartKind::Graph,
                    u: n.ybar[0],
                    v: n.ybar[1],
                    s: n.q,
                })
                .collect(),
            ComponentKind::BoundedClosed(mesh) => mesh
                .vertices
                .iter()
                .map(|vx| SurfaceSite {
                    kind: ChartKind::radial(mesh.spec.center, vx.direction),
                    u: 0.0,
                    v: 0.0,
                    s: vx.rho,
                })
                .collect(),
        }
    }
}

/// Mesh a closed component that is star-shaped about `spec.center`.
pub fn extract_bounded_component(
    f: &PotentialField,
    metric: &MetricField,
    spec: &SphereMeshSpec,
) -> Result<ZeroSetComponent> {
    if spec.n_lat < 2 || spec.n_lon < 3 || !(spec.rho_max > spec.rho_min) {
        return Err(GeometryError::InvalidInput("degenerate sphere mesh spec".into()));
    }
    let (dirs, faces) = sphere_directions(spec.n_lat, spec.n_lon);
    let mut vertices = Vec::with_capacity(dirs.len());
    for d in dirs {
        let chart = SurfaceChart::new(f, metric, ChartKind::radial(spec.center, d));
        let node = [d[2].clamp(-1.0, 1.0).acos(), d[1].atan2(d[0])];
        let root = chart.solve(0.0, 0.0, spec.rho_min, spec.rho_max, None, node)?;
        let point = chart.point(0.0, 0.0, root.s)?;
        let grad_norm = chart.grad_norm(&point)?;
        vertices.push(MeshVertex {
            direction: d,
            rho: root.s,
            point,
            root_residual: root.residual,
            grad_norm,
        });
    }
    let mesh = ClosedMesh {
        spec: spec.clone(),
        vertices,
        faces,
    };
    let samples: Vec<f64> = mesh.vertices.iter().map(|v| v.grad_norm).collect();
    Ok(ZeroSetComponent {
        c: mean(&samples),
        grad_norm_samples: samples,
        euler_char: Some(mesh.euler_characteristic()),
        kind: ComponentKind::BoundedClosed(mesh),
        ends_met: None,
    })
}

// ---------------------------------------------------------------------------
// Laws along a component

/// Geometry at one site: ambient curvature, g-orthonormal tangent frame,
/// unit normal and the induced-metric jet.
struct SiteFrame {
    point: Point3,
    bundle: CurvatureBundle,
    jet: SigmaJet,
    tangent: [Vec3; 2],
}

fn site_frame(chart: &SurfaceChart<'_>, site: &SurfaceSite) -> Result<SiteFrame> {
    let x = chart.point(site.u, site.v, site.s)?;
    let point = Point3::from(x);
    let bundle = curvature_at(chart.metric, &point, Backend::DualNumber)?;
    let emb = chart.embedding_jet(site.u, site.v, site.s);
    let jet = chart.sigma_jet(site.u, site.v, site.s);
    let g = &bundle.metric;
    let e1 = emb.dx[0].map(|c| c / linalg::bilinear(g, &emb.dx[0], &emb.dx[0]).sqrt());
    let p = linalg::bilinear(g, &emb.dx[1], &e1);
    let w: Vec3 = std::array::from_fn(|i| emb.dx[1][i] - p * e1[i]);
    let e2 = w.map(|c| c / linalg::bilinear(g, &w, &w).sqrt());
    Ok(SiteFrame {
        point,
        bundle,
        jet,
        tangent: [e1, e2],
    })
}

/// `Rm(X, Y, Y, X)` for the ambient curvature.
fn sectional_numerator(b: &CurvatureBundle, x: &Vec3, y: &Vec3) -> f64 {
    let mut s = 0.0;
    for d in 0..3 {
        for e in 0..3 {
            let gde = b.metric[d][e] * x[e];
            if gde == 0.0 {
                continue;
            }
            for a in 0..3 {
                for bb in 0..3 {
                    for c in 0..3 {
                        s += gde * b.riemann[d][a][bb][c] * y[a] * x[bb] * y[c];
                    }
                }
            }
        }
    }
    s
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LawSample {
    pub point: Point3,
    /// Intrinsic Gaussian curvature of σ.
    pub gauss: f64,
    /// Gauss equation: ambient sectional curvature plus `det II`.
    pub gauss_extrinsic: f64,
    pub r11: f64,
    pub r22: f64,
    pub r33: f64,
    /// `max_α |Ric(ν, e_α)|`.
    pub normal_mixed: f64,
    /// `|II|` in the orthonormal frame.
    pub second_fundamental: f64,
    pub grad_norm: f64,
}

impl LawSample {
    fn scale(&self) -> f64 {
        [self.gauss, self.r11, self.r22, self.r33]
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()))
    }

    fn rel(&self, a: f64, b: f64) -> f64 {
        let s = self.scale();
        if s > 0.0 {
            (a - b).abs() / s
        } else {
            0.0
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ZeroSetLawReport {
    pub samples: Vec<LawSample>,
    pub grad_norm_mean: f64,
    pub grad_norm_spread: f64,
    /// Largest `|K − 2R₁₁|` relative to the local curvature scale.
    pub k_vs_2r11: f64,
    pub k_vs_2r22: f64,
    pub k_vs_minus_r33: f64,
    pub r11_vs_r22: f64,
    pub normal_mixed: f64,
    pub second_fundamental: f64,
    /// Largest relative mismatch between intrinsic and Gauss-equation `K`.
    pub gauss_consistency: f64,
}

impl ZeroSetLawReport {
    pub fn holds(&self, tol: f64) -> bool {
        [
            self.grad_norm_spread,
            self.k_vs_2r11,
            self.k_vs_2r22,
            self.k_vs_minus_r33,
            self.r11_vs_r22,
            self.normal_mixed,
            self.second_fundamental,
        ]
        .iter()
        .all(|v| *v < tol)
    }
}

fn fold_max<I: Iterator<Item = f64>>(it: I) -> f64 {
    it.fold(0.0, f64::max)
}

/// Check `|∇f|` constancy, total geodesy, `Ric(ν, X) = 0` and
/// `K = 2R₁₁ = 2R₂₂ = −R₃₃` at every site of the component.
pub fn zero_set_laws(
    f: &PotentialField,
    metric: &MetricField,
    component: &ZeroSetComponent,
) -> Result<ZeroSetLawReport> {
    let mut samples = Vec::new();
    for site in component.sites() {
        let chart = SurfaceChart::new(f, metric, site.kind);
        let fr = site_frame(&chart, &site)?;
        require_static(f, &fr.bundle, &fr.point, DEFAULT_STATIC_TOL)?;
        let (_, df, d2f) = f.jet(&fr.point);
        let hess = covariant_hessian_from(&df, &d2f, &fr.bundle);
        let nu_up = linalg::mat_vec(&fr.bundle.inverse, &df);
        let grad_norm = linalg::dot(&nu_up, &df).max(0.0).sqrt();
        if grad_norm < CRITICAL_GRAD {
            return Err(GeometryError::CriticalOnZeroSet {
                point: fr.point.coords(),
                grad_norm,
            });
        }
        let nu = nu_up.map(|c| c / grad_norm);
        let ric = &fr.bundle.ricci;
        let [e1, e2] = fr.tangent;
        let (a, b, c) = (
            linalg::bilinear(ric, &e1, &e1),
            linalg::bilinear(ric, &e1, &e2),
            linalg::bilinear(ric, &e2, &e2),
        );
        let mid = 0.5 * (a + c);
        let rad = (0.25 * (a - c) * (a - c) + b * b).sqrt();
        let ii: Mat2 = [
            [
                linalg::bilinear(&hess, &e1, &e1) / grad_norm,
                linalg::bilinear(&hess, &e1, &e2) / grad_norm,
            ],
            [
                linalg::bilinear(&hess, &e2, &e1) / grad_norm,
                linalg::bilinear(&hess, &e2, &e2) / grad_norm,
            ],
        ];
        let det_ii = ii[0][0] * ii[1][1] - ii[0][1] * ii[1][0];
        samples.push(LawSample {
            point: fr.point,
            gauss: fr.jet.gauss(),
            gauss_extrinsic: sectional_numerator(&fr.bundle, &e1, &e2) + det_ii,
            r11: mid - rad,
            r22: mid + rad,
            r33: linalg::bilinear(ric, &nu, &nu),
            normal_mixed: linalg::bilinear(ric, &nu, &e1)
                .abs()
                .max(linalg::bilinear(ric, &nu, &e2).abs()),
            second_fundamental: ii.iter().flatten().map(|v| v * v).sum::<f64>().sqrt(),
            grad_norm,
        });
    }
    let grads: Vec<f64> = samples.iter().map(|s| s.grad_norm).collect();
    let gm = mean(&grads);
    let spread = (grads.iter().map(|g| (g - gm) * (g - gm)).sum::<f64>()
        / grads.len().max(1) as f64)
        .sqrt()
        / gm;
    Ok(ZeroSetLawReport {
        grad_norm_mean: gm,
        grad_norm_spread: spread,
        k_vs_2r11: fold_max(samples.iter().map(|s| s.rel(s.gauss, 2.0 * s.r11))),
        k_vs_2r22: fold_max(samples.iter().map(|s| s.rel(s.gauss, 2.0 * s.r22))),
        k_vs_minus_r33: fold_max(samples.iter().map(|s| s.rel(s.gauss, -s.r33))),
        r11_vs_r22: fold_max(samples.iter().map(|s| s.rel(s.r11, s.r22))),
        normal_mixed: fold_max(samples.iter().map(|s| {
            let sc = s.scale();
            if sc > 0.0 {
                s.normal_mixed / sc
            } else {
                s.normal_mixed
            }
        })),
        second_fundamental: fold_max(samples.iter().map(|s| s.second_fundamental)),
        gauss_consistency: fold_max(samples.iter().map(|s| s.rel(s.gauss, s.gauss_extrinsic))),
        samples,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Kf3Sample {
    pub point: Point3,
    pub gauss: f64,
    pub f_value: f64,
    pub kf3: f64,
    /// `|∇²_Σ f − ½ K f σ|_σ`.
    pub hessian_residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Kf3Report {
    pub samples: Vec<Kf3Sample>,
    pub mean: f64,
    /// `(max − min)/max |K f³|`, zero when every sample vanishes.
    pub relative_spread: f64,
    pub max_hessian_residual: f64,
    /// Largest `|f_zero|` over the sites.
    pub max_zero_residual: f64,
}

/// Along a component of `f_zero⁻¹(0)`, sample `K·f_other³` and the
/// intrinsic Hessian law `∇²_Σ f_other = ½ K f_other σ`.
pub fn kf3_law(
    f_other: &PotentialField,
    f_zero: &PotentialField,
    metric: &MetricField,
    component: &ZeroSetComponent,
) -> Result<Kf3Report> {
    let mut samples = Vec::new();
    let mut max_zero = 0.0f64;
    for site in component.sites() {
        let chart = SurfaceChart::new(f_zero, metric, site.kind);
        let x = chart.point(site.u, site.v, site.s)?;
        let point = Point3::from(x);
        let bundle = curvature_at(metric, &point, Backend::DualNumber)?;
        require_static(f_zero, &bundle, &point, DEFAULT_STATIC_TOL)?;
        require_static(f_other, &bundle, &point, DEFAULT_STATIC_TOL)?;
        max_zero = max_zero.max(f_zero.eval(&point).abs());
        let jet = chart.sigma_jet(site.u, site.v, site.s);
        let emb = chart.embedding_jet(site.u, site.v, site.s);
        let (fv, df, d2f) = emb.pullback(f_other);
        let gamma = jet.christoffel();
        let k = jet.gauss();
        let resid: Mat2 = std::array::from_fn(|a| {
            std::array::from_fn(|b| {
                d2f[a][b]
                    - (0..2).map(|c| gamma[c][a][b] * df[c]).sum::<f64>()
                    - 0.5 * k * fv * jet.sigma[a][b]
            })
        });
        samples.push(Kf3Sample {
            point,
            gauss: k,
            f_value: fv,
            kf3: k * fv * fv * fv,
            hessian_residual: sigma_norm(&resid, &jet.inverse()),
        });
    }
    let vals: Vec<f64> = samples.iter().map(|s| s.kf3).collect();
    let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
    let scale = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(Kf3Report {
        mean: mean(&vals),
        relative_spread: if scale > 0.0 { (hi - lo) / scale } else { 0.0 },
        max_hessian_residual: fold_max(samples.iter().map(|s| s.hessian_residual)),
        max_zero_residual: max_zero,
        samples,
    })
}

// ---------------------------------------------------------------------------
// Gauss–Bonnet on large circles

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GaussBonnetReport {
    pub radii: Vec<f64>,
    /// `∫_{γ_R} κ ds` on the full ring.
    pub integrals: Vec<f64>,
    /// The same with every other node, as a resolution check.
    pub half_resolution: Vec<f64>,
    /// `max |κR − 1|` on each ring.
    pub kappa_defect: Vec<f64>,
    pub limit: f64,
    /// Number of terms in the `1/R` extrapolation.
    pub extrapolation_order: usize,
    /// Log–log slope of `kappa_defect` against `R`.
    pub kappa_decay_exponent: f64,
}

/// Relative tolerance between full and half-resolution ring integrals.
pub const RING_RESOLUTION_TOL: f64 = 1e-6;

/// Geodesic curvature of the coordinate circles `|ȳ| = R` in `(Ω_C, σ)`,
/// integrated by the periodic trapezoid rule over the grid nodes of each
/// ring, then extrapolated to `R → ∞` by a fit in `{1, 1/R}`.
pub fn gauss_bonnet_limit(surface: &SurfaceGraph, radii: &[f64]) -> Result<GaussBonnetReport> {
    let n = surface.grid.n_theta;
    if n < 16 || n % 2 == 1 {
        return Err(GeometryError::Resolution(format!(
            "{n} nodes per ring; need an even count of at least 16"
        )));
    }
    if radii.is_empty() {
        return Err(GeometryError::InvalidInput("no radii requested".into()));
    }
    let chart = surface.chart();
    let mut out = GaussBonnetReport {
        radii: radii.to_vec(),
        integrals: Vec::new(),
        half_resolution: Vec::new(),
        kappa_defect: Vec::new(),
        limit: f64::NAN,
        extrapolation_order: 0,
        kappa_decay_exponent: f64::NAN,
    };
    for &r in radii {
        let ring = surface
            .grid
            .rings
            .iter()
            .position(|&rho| (rho - r).abs() <= 1e-9 * r)
            .ok_or_else(|| {
                GeometryError::Resolution(format!("R = {r} is not a ring of the extraction grid"))
            })?;
        let mut integrand = Vec::with_capacity(n);
        let mut defect = 0.0f64;
        for node in surface.ring(ring) {
            let [u, v] = node.ybar;
            let (sigma, d) = chart.sigma_first(u, v, node.q);
            let gamma = christoffel2(&sigma, &d);
            let c = [u, v];
            let cp = [-v, u];
            let acc: [f64; 2] = std::array::from_fn(|k| {
                -c[k]
                    + (0..2)
                        .flat_map(|a| (0..2).map(move |b| (a, b)))
                        .map(|(a, b)| gamma[k][a][b] * cp[a] * cp[b])
                        .sum::<f64>()
            });
            let ip = |x: &[f64; 2], y: &[f64; 2]| {
                (0..2)
                    .flat_map(|a| (0..2).map(move |b| (a, b)))
                    .map(|(a, b)| sigma[a][b] * x[a] * y[b])
                    .sum::<f64>()
            };
            let tt = ip(&cp, &cp);
            let w = [-u, -v];
            let proj = ip(&w, &cp) / tt;
            let nrm: [f64; 2] = std::array::from_fn(|k| w[k] - proj * cp[k]);
            let nlen = ip(&nrm, &nrm).sqrt();
            let kappa = ip(&acc, &nrm) / (nlen * tt);
            defect = defect.max((kappa * r - 1.0).abs());
            integrand.push(kappa * tt.sqrt());
        }
        let h = 2.0 * std::f64::consts::PI / n as f64;
        let full: f64 = integrand.iter().sum::<f64>() * h;
        let half: f64 = integrand.iter().step_by(2).sum::<f64>() * 2.0 * h;
        if (full - half).abs() > RING_RESOLUTION_TOL * full.abs().max(1.0) {
            return Err(GeometryError::Resolution(format!(
                "ring R = {r}: {n} nodes give {full}, half as many give {half}"
            )));
        }
        out.integrals.push(full);
        out.half_resolution.push(half);
        out.kappa_defect.push(defect);
    }
    if radii.len() == 1 {
        out.limit = out.integrals[0];
        out.extrapolation_order = 1;
    } else {
        let rows: Vec<Vec<f64>> = radii.iter().map(|r| vec![1.0, 1.0 / r]).collect();
        let (coef, _) = least_squares(&rows, &out.integrals).ok_or_else(|| {
            GeometryError::IllConditionedFit("ring integrals against {1, 1/R}".into())
        })?;
        out.limit = coef[0];
        out.extrapolation_order = 2;
        out.kappa_decay_exponent = ring_slope(radii, &out.kappa_defect);
    }
    Ok(out)
}

/// Symmetric part of a 3×3 bilinear form restricted to two vectors.
pub fn restrict(m: &Mat3, e: &[Vec3; 2]) -> Mat2 {
    std::array::from_fn(|a| std::array::from_fn(|b| linalg::bilinear(m, &e[a], &e[b])))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn x1() -> PotentialField {
        PotentialField::affine(0.0, [1.0, 0.0, 0.0])
    }

    fn log_graph() -> PotentialField {
        PotentialField::custom("x1 + ln(sqrt(x2^2 + x3^2))").unwrap()
    }

    #[test]
    fn plane_is_flat_graph() {
        let e = MetricField::euclidean();
        let grid = GraphGrid::new(vec![20.0, 40.0], 16).unwrap();
        let g = extract_zero_graph(&x1(), &e, (10.0, 50.0), &grid).unwrap();
        for n in &g.nodes {
            assert_eq!(n.q, 0.0);
            assert_eq!(n.sigma, [[1.0, 0.0], [0.0, 1.0]]);
            assert_eq!(n.gauss, 0.0);
        }
        let gb = gauss_bonnet_limit(&g, &[20.0, 40.0]).unwrap();
        for i in &gb.integrals {
            assert!((i - 2.0 * PI).abs() < 1e-12);
        }
        assert!(g.all_certified());
    }

    #[test]
    fn log_graph_inverts_in_closed_form() {
        let e = MetricField::euclidean();
        let grid = GraphGrid::geometric((10.0, 300.0), 4, 16).unwrap();
        let g = extract_zero_graph(&log_graph(), &e, (10.0, 300.0), &grid).unwrap();
        for n in &g.nodes {
            assert!((n.q + n.rho().ln()).abs() < 1e-9);
            // ∂q = −ȳ/|ȳ|²
            assert!((n.dq[0] + n.ybar[0] / n.rho().powi(2)).abs() < 1e-12);
        }
        assert!(g.all_certified());
    }

    #[test]
    fn log_graph_ring_integral_matches_revolution_formula() {
        let e = MetricField::euclidean();
        let grid = GraphGrid::new(vec![50.0, 100.0, 200.0], 32).unwrap();
        let g = extract_zero_graph(&log_graph(), &e, (10.0, 400.0), &grid).unwrap();
        let gb = gauss_bonnet_limit(&g, &[50.0, 100.0, 200.0]).unwrap();
        for (r, i) in gb.radii.iter().zip(&gb.integrals) {
            let exact = 2.0 * PI / (1.0 + 1.0 / (r * r)).sqrt();
            assert!((i - exact).abs() < 1e-10, "{r}: {i} vs {exact}");
        }
        assert!((gb.limit - 2.0 * PI).abs() < 1e-3 * 2.0 * PI);
    }

    #[test]
    fn brioschi_matches_finite_differences() {
        let m = MetricField::schwarzschild(2.0);
        let f = PotentialField::custom("x1 + ln(r)").unwrap();
        let chart = SurfaceChart::new(&f, &m, ChartKind::Graph);
        let (u, v) = (12.0, 7.0);
        let s = chart.solve(u, v, -14.0, 14.0, Some(0.5), [u, v]).unwrap().s;
        let jet = chart.sigma_jet(u, v, s);
        // second differences of σ evaluated from fresh roots
        let h = 1e-3;
        let sig = |du: f64, dv: f64| {
            let r = chart
                .solve(u + du, v + dv, -14.0, 14.0, None, [u, v])
                .unwrap();
            chart.sigma(u + du, v + dv, r.s)
        };
        let c = sig(0.0, 0.0);
        let (pu, mu, pv, mv) = (sig(h, 0.0), sig(-h, 0.0), sig(0.0, h), sig(0.0, -h));
        let (pp, pm, mp, mm) = (sig(h, h), sig(h, -h), sig(-h, h), sig(-h, -h));
        let mut fd = jet;
        for a in 0..2 {
            for b in 0..2 {
                fd.d[0][a][b] = (pu[a][b] - mu[a][b]) / (2.0 * h);
                fd.d[1][a][b] = (pv[a][b] - mv[a][b]) / (2.0 * h);
                fd.dd[0][0][a][b] = (pu[a][b] - 2.0 * c[a][b] + mu[a][b]) / (h * h);
                fd.dd[1][1][a][b] = (pv[a][b] - 2.0 * c[a][b] + mv[a][b]) / (h * h);
                let x = (pp[a][b] - pm[a][b] - mp[a][b] + mm[a][b]) / (4.0 * h * h);
                fd.dd[0][1][a][b] = x;
                fd.dd[1][0][a][b] = x;
            }
        }
        let (k, kf) = (jet.gauss(), fd.gauss());
        assert!((k - kf).abs() < 1e-4 * k.abs(), "{k} vs {kf}");
    }

    #[test]
    fn intrinsic_and_gauss_equation_agree_on_curved_graph() {
        let m = MetricField::anisotropic(1.0, 1.0);
        let f = PotentialField::custom("x1 + 0.3*x2^2/r").unwrap();
        let chart = SurfaceChart::new(&f, &m, ChartKind::Graph);
        for (u, v) in [(15.0, 3.0), (-8.0, 11.0)] {
            let s = chart.solve(u, v, -20.0, 20.0, Some(0.5), [u, v]).unwrap().s;
            let fr = site_frame(&chart, &SurfaceSite { kind: ChartKind::Graph, u, v, s }).unwrap();
            let (_, df, d2f) = f.jet(&fr.point);
            let hess = covariant_hessian_from(&df, &d2f, &fr.bundle);
            let gn = linalg::bilinear(&fr.bundle.inverse, &df, &df).sqrt();
            let ii = restrict(&hess, &fr.tangent).map(|r| r.map(|c| c / gn));
            let ext = sectional_numerator(&fr.bundle, &fr.tangent[0], &fr.tangent[1])
                + ii[0][0] * ii[1][1]
                - ii[0][1] * ii[1][0];
            let k = fr.jet.gauss();
            assert!((k - ext).abs() < 1e-8 * k.abs().max(1e-6), "{k} vs {ext}");
        }
    }

    #[test]
    fn horizon_laws() {
        for m in [1.0, 2.0] {
            let metric = MetricField::schwarzschild_full(m);
            let n = PotentialField::schwarzschild_n(m);
            let spec = SphereMeshSpec {
                center: [0.0; 3],
                rho_min: 0.1 * m,
                rho_max: 2.0 * m,
                n_lat: 6,
                n_lon: 8,
            };
            let comp = extract_bounded_component(&n, &metric, &spec).unwrap();
            assert_eq!(comp.euler_char, Some(2));
            assert!((comp.c - 1.0 / (4.0 * m)).abs() < 1e-9);
            let rep = zero_set_laws(&n, &metric, &comp).unwrap();
            assert!(rep.holds(1e-6), "{rep:?}");
            for s in &rep.samples {
                assert!((s.gauss - 1.0 / (4.0 * m * m)).abs() < 1e-8 / (m * m));
            }
            assert!(rep.gauss_consistency < 1e-8);
        }
    }

    #[test]
    fn plane_laws_vanish() {
        let e = MetricField::euclidean();
        let grid = GraphGrid::new(vec![20.0], 8).unwrap();
        let comp = ZeroSetComponent::from_graph(
            extract_zero_graph(&x1(), &e, (10.0, 30.0), &grid).unwrap(),
        );
        let rep = zero_set_laws(&x1(), &e, &comp).unwrap();
        assert!(rep.samples.iter().all(|s| s.gauss == 0.0 && s.r33 == 0.0));
        assert_eq!(comp.grad_spread(), 0.0);
    }

    #[test]
    fn non_static_component_is_rejected() {
        let m = MetricField::anisotropic(1.0, 1.0);
        let grid = GraphGrid::new(vec![20.0], 8).unwrap();
        let comp =
            ZeroSetComponent::from_graph(extract_zero_graph(&x1(), &m, (10.0, 30.0), &grid).unwrap());
        assert!(matches!(
            zero_set_laws(&x1(), &m, &comp),
            Err(GeometryError::NotStatic { .. })
        ));
    }

    #[test]
    fn search_failures() {
        let e = MetricField::euclidean();
        let grid = GraphGrid::new(vec![20.0], 8).unwrap();
        let far = PotentialField::affine(100.0, [1.0, 0.0, 0.0]);
        assert!(matches!(
            extract_zero_graph(&far, &e, (10.0, 30.0), &grid),
            Err(GeometryError::NoRoot { .. })
        ));
        let flat = PotentialField::custom("x1^2 - 1").unwrap();
        assert!(matches!(
            extract_zero_graph(&flat, &e, (10.0, 30.0), &grid),
            Err(GeometryError::Monotonicity { .. })
        ));
        let spec = SphereMeshSpec {
            center: [0.0; 3],
            rho_min: 0.5,
            rho_max: 3.0,
            n_lat: 4,
            n_lon: 4,
        };
        let shells = PotentialField::custom("(r - 1)*(r - 2)").unwrap();
        assert!(matches!(
            extract_bounded_component(&shells, &e, &spec),
            Err(GeometryError::MultiRoot { count: 2, .. })
        ));
        let cubic = PotentialField::custom("(r - 1.1)^3").unwrap();
        assert!(matches!(
            extract_bounded_component(&cubic, &e, &spec),
            Err(GeometryError::CriticalOnZeroSet { .. })
        ));
    }

    #[test]
    fn gauss_bonnet_resolution_errors() {
        let e = MetricField::euclidean();
        let grid = GraphGrid::new(vec![20.0], 8).unwrap();
        let g = extract_zero_graph(&x1(), &e, (10.0, 30.0), &grid).unwrap();
        assert!(matches!(gauss_bonnet_limit(&g, &[20.0]), Err(GeometryError::Resolution(_))));
        let grid = GraphGrid::new(vec![20.0], 16).unwrap();
        let g = extract_zero_graph(&x1(), &e, (10.0, 30.0), &grid).unwrap();
        assert!(matches!(gauss_bonnet_limit(&g, &[25.0]), Err(GeometryError::Resolution(_))));
    }

    #[test]
    fn flat_kf3_examples() {
        let e = MetricField::euclidean();
        let grid = GraphGrid::new(vec![15.0, 25.0], 8).unwrap();
        let comp =
            ZeroSetComponent::from_graph(extract_zero_graph(&x1(), &e, (10.0, 30.0), &grid).unwrap());
        for other in [
            PotentialField::affine(1.0, [0.0, 1.0, 0.0]),
            PotentialField::affine(0.0, [0.0, 1.0, 0.0]),
        ] {
            let rep = kf3_law(&other, &x1(), &e, &comp).unwrap();
            assert_eq!(rep.relative_spread, 0.0);
            assert!(rep.samples.iter().all(|s| s.kf3 == 0.0));
            assert!(rep.max_hessian_residual < 1e-14);
        }
    }

    /// `N²dt² + ds² + a(s)²dθ²` with `N = (3s/2)^{2/3}`, `a = N^{-1/2}`:
    /// `N` and `t·N` are static and the slice `t = 0` has `K·N³ = −1`.
    pub(crate) fn warped() -> (MetricField, PotentialField, PotentialField) {
        let metric = MetricField::generic_from_strs(
            &["(1.5*(x2+100))^(4/3)", "0", "0", "1", "0", "(1.5*(x2+100))^(-2/3)"],
            1.0,
        )
        .unwrap();
        let n = PotentialField::custom("(1.5*(x2+100))^(2/3)").unwrap();
        let tn = PotentialField::custom("x1*(1.5*(x2+100))^(2/3)").unwrap();
        (metric, n, tn)
    }

    #[test]
    fn warped_product_kf3_is_constant() {
        let (metric, n, tn) = warped();
        let grid = GraphGrid::new(vec![15.0, 30.0, 45.0], 12).unwrap();
        let comp =
            ZeroSetComponent::from_graph(extract_zero_graph(&tn, &metric, (10.0, 50.0), &grid).unwrap());
        let rep = kf3_law(&n, &tn, &metric, &comp).unwrap();
        assert!(rep.relative_spread < 1e-8, "{}", rep.relative_spread);
        assert!((rep.mean + 1.0).abs() < 1e-8, "{}", rep.mean);
        let scale = rep.samples.iter().map(|s| (s.gauss * s.f_value).abs()).fold(0.0, f64::max);
        assert!(rep.max_hessian_residual < 1e-8 * scale.max(1e-12));
    }

    #[test]
    fn mesh_counts() {
        let (dirs, faces) = sphere_directions(5, 7);
        assert_eq!(dirs.len(), 2 + 4 * 7);
        assert_eq!(faces.len(), 7 * 2 + 3 * 7);
    }
}
