use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum GeometryError {
    #[error("point {point:?} lies outside the chart: {reason}")]
    Domain { point: [f64; 3], reason: String },

    #[error("metric is not positive definite at {point:?} (smallest eigenvalue {min_eigenvalue:e})")]
    SingularMetric { point: [f64; 3], min_eigenvalue: f64 },

    #[error("rotation matrix is not orthogonal (deviation {deviation:e})")]
    NotOrthogonal { deviation: f64 },

    #[error("Ricci eigen-decomposition failed at {point:?}")]
    DegenerateMetric { point: [f64; 3] },

    #[error("potential vanishes at {point:?} (|f| = {value:e})")]
    ZeroPotential { point: [f64; 3], value: f64 },

    #[error("potential is not static at {point:?}: residual {residual:e} exceeds {threshold:e}")]
    NotStatic {
        point: [f64; 3],
        residual: f64,
        threshold: f64,
    },

    #[error("sphere averages do not settle: change {change:e} between radii {r_prev} and {r_next} exceeds {tolerance:e}")]
    NonConvergent {
        r_prev: f64,
        r_next: f64,
        change: f64,
        tolerance: f64,
    },

    #[error("trajectory left the chart at t = {t} near {point:?}")]
    DomainExit { t: f64, point: [f64; 3] },

    #[error("step control failed at t = {t} (step {step:e})")]
    StepFailure { t: f64, step: f64 },

    #[error("growth bound hypotheses fail: {}", failed.join("; "))]
    Precondition { failed: Vec<String> },

    #[error("no root on the search segment at node {node:?}")]
    NoRoot { node: [f64; 2] },

    #[error("{count} sign changes on the search segment at node {node:?}")]
    MultiRoot { node: [f64; 2], count: usize },

    #[error("derivative along the graph direction drops to {min_derivative} (< 1/2) at node {node:?}")]
    Monotonicity { node: [f64; 2], min_derivative: f64 },

    #[error("grid under-resolved: {0}")]
    Resolution(String),

    #[error("gradient vanishes near a zero-set point {point:?} (|grad f| = {grad_norm:e})")]
    CriticalOnZeroSet { point: [f64; 3], grad_norm: f64 },

    #[error("potential has a non-zero linear part {linear:?}")]
    UnboundedPotential { linear: [f64; 3] },

    #[error("ill-conditioned fit: {0}")]
    IllConditionedFit(String),

    #[error("quadrature request of {requested} nodes exceeds the budget {budget}")]
    QuadratureBudget { requested: usize, budget: usize },

    #[error("conformal factor 1 {sign} f = {factor:e} is not positive at {point:?}")]
    DegenerateConformal {
        point: [f64; 3],
        sign: char,
        factor: f64,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("expression parse error at byte {position}: {message}")]
    Parse { position: usize, message: String },
}

pub type Result<T, E = GeometryError> = std::result::Result<T, E>;

impl GeometryError {
    /// Variant name, for reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Self::Domain { .. } => "Domain",
            Self::SingularMetric { .. } => "SingularMetric",
            Self::NotOrthogonal { .. } => "NotOrthogonal",
            Self::DegenerateMetric { .. } => "DegenerateMetric",
            Self::ZeroPotential { .. } => "ZeroPotential",
            Self::NotStatic { .. } => "NotStatic",
            Self::NonConvergent { .. } => "NonConvergent",
            Self::DomainExit { .. } => "DomainExit",
            Self::StepFailure { .. } => "StepFailure",
            Self::Precondition { .. } => "Precondition",
            Self::NoRoot { .. } => "NoRoot",
            Self::MultiRoot { .. } => "MultiRoot",
            Self::Monotonicity { .. } => "Monotonicity",
            Self::Resolution(_) => "Resolution",
            Self::CriticalOnZeroSet { .. } => "CriticalOnZeroSet",
            Self::UnboundedPotential { .. } => "UnboundedPotential",
            Self::IllConditionedFit(_) => "IllConditionedFit",
            Self::QuadratureBudget { .. } => "QuadratureBudget",
            Self::DegenerateConformal { .. } => "DegenerateConformal",
            Self::InvalidInput(_) => "InvalidInput",
            Self::Parse { .. } => "Parse",
        }
    }
}
