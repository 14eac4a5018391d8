//! Curvature and static potentials on asymptotically flat 3-manifolds
//! given in a single global chart.
//!
//! The crate is layered:
//!
//! - [`metric`], [`curvature`]: closed-form metric families and their
//!   Christoffel, Riemann, Ricci and scalar curvature, differentiated
//!   exactly with nested [`dual`] numbers (or by finite differences).
//! - [`static_potentials`]: residuals of `∇²f = f·Ric`, `Δf = 0`.
//! - [`pointwise_identities`]: Ricci eigenframes and the identities that
//!   tie them to a static potential.
//! - [`geodesic_growth`]: geodesics, transport of `f` along them and the
//!   comparison bound for `f'' = h f`.
//! - [`zero_set_geometry`]: level sets `f = 0` as graphs or closed meshes,
//!   their intrinsic curvature and the laws they obey.
//! - [`global_identities`]: mass, asymptotic Ricci model, integral
//!   identities, conformal doubling and gradient-flow classification.

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod curvature;
pub mod dual;
pub mod error;
pub mod expr;
pub mod geodesic_growth;
pub mod global_identities;
pub mod linalg;
pub mod metric;
pub mod ode;
pub mod pointwise_identities;
pub mod quadrature;
pub mod static_potentials;
pub mod zero_set_geometry;

pub use curvature::{curvature_at, Backend, CurvatureBundle};
pub use dual::{Dual, Real};
pub use error::{GeometryError, Result};
pub use expr::Expr;
pub use geodesic_growth::{
    growth_bound_check, integrate_geodesic, transport_potential, GeodesicState, GrowthBound,
    GrowthSample, GrowthVerdict, Trajectory,
};
pub use global_identities::{
    anisotropy_limit, conformal_double_scalar, fit_mass_expansion, flow_classify,
    huisken_yau_residual, integral_identity_check, zero_set_bookkeeping, FlowBudget, FlowClass,
    FlowLimit, FlowTrace, IntegralReport, MassFit, MassFitOptions, QuadratureSpec,
};
pub use linalg::{Mat3, Vec3};
pub use metric::{rotate_chart, MetricFamily, MetricField, PerturbationTerm, Point3};
pub use pointwise_identities::{
    eigenvalue_gap_scan, ricci_eigenframe, tod_identity_residuals, Distinctness, Region,
    RicciEigenframe,
};
pub use quadrature::SphereRule;
pub use static_potentials::{
    fit_linear_part, static_residual, PotentialField, StaticResidual, DEFAULT_STATIC_TOL,
};
pub use zero_set_geometry::{
    extract_bounded_component, extract_zero_graph, gauss_bonnet_limit, kf3_law, zero_set_laws,
    GraphGrid, SphereMeshSpec, SurfaceGraph, ZeroSetComponent,
};
