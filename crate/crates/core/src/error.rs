use std::fmt;

use serde::Serialize;

/// The excluded curvature ratios that do not give a helical CRPC surface.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DegenerateCase {
    /// `a = 1`, `k = 0`: only planes and spheres, neither of which is helical.
    SpherePlane,
    /// `a = -1`, `k = ∞`: helical minimal surfaces.
    Minimal,
    /// `a ∈ {0, ∞}`, `k = 1`: developable surfaces.
    Developable,
    /// NaN or infinite input.
    NonFinite,
}

impl fmt::Display for DegenerateCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            DegenerateCase::SpherePlane => "sphere/plane (a = 1, k = 0)",
            DegenerateCase::Minimal => "minimal (a = -1, k = inf)",
            DegenerateCase::Developable => "developable (k = 1)",
            DegenerateCase::NonFinite => "non-finite parameter",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CrpcError {
    #[error("degenerate curvature ratio: {0}")]
    DegenerateRatio(DegenerateCase),

    #[error("invalid k = {k}: {reason}")]
    InvalidK { k: f64, reason: &'static str },

    #[error("empty solution domain for k = {k}, C = {c} (need C > {c_min})")]
    EmptyDomain { k: f64, c: f64, c_min: f64 },

    #[error("solution parameter must be positive, got s = {0}")]
    NonPositiveS(f64),

    #[error("parameter {value} lies outside the domain {what}")]
    OutsideDomain { value: f64, what: String },

    #[error("quadrature failed to reach tolerance {tolerance:e} (estimate {estimate:e}, {panels} panels)")]
    QuadratureFailure {
        tolerance: f64,
        estimate: f64,
        panels: usize,
    },

    #[error("branch {branch} is inconsistent with k = {k}")]
    BranchMismatch { branch: &'static str, k: f64 },

    #[error("singular point at t = {t}")]
    SingularPoint { t: f64 },

    #[error("umbilic point: principal curvatures {kappa1} and {kappa2} coincide")]
    UmbilicPoint { kappa1: f64, kappa2: f64 },

    #[error("implicit polynomial degree {degree} exceeds bound {bound}")]
    DegreeBlowup { degree: u32, bound: u32 },

    #[error("root finding did not converge: {0}")]
    RootNotFound(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

impl CrpcError {
    /// Stable machine-readable name of the error variant.
    pub fn code(&self) -> &'static str {
        match self {
            CrpcError::DegenerateRatio(_) => "DegenerateRatio",
            CrpcError::InvalidK { .. } => "InvalidK",
            CrpcError::EmptyDomain { .. } => "EmptyDomain",
            CrpcError::NonPositiveS(_) => "NonPositiveS",
            CrpcError::OutsideDomain { .. } => "OutsideDomain",
            CrpcError::QuadratureFailure { .. } => "QuadratureFailure",
            CrpcError::BranchMismatch { .. } => "BranchMismatch",
            CrpcError::SingularPoint { .. } => "SingularPoint",
            CrpcError::UmbilicPoint { .. } => "UmbilicPoint",
            CrpcError::DegreeBlowup { .. } => "DegreeBlowup",
            CrpcError::RootNotFound(_) => "RootNotFound",
            CrpcError::InvalidParameter(_) => "InvalidParameter",
        }
    }

    /// True for errors caused by the caller's parameter choice rather than by
    /// the numerics of a valid configuration.
    pub fn is_invalid_input(&self) -> bool {
        matches!(
            self,
            CrpcError::DegenerateRatio(_)
                | CrpcError::InvalidK { .. }
                | CrpcError::BranchMismatch { .. }
                | CrpcError::InvalidParameter(_)
        )
    }
}

pub type Result<T, E = CrpcError> = std::result::Result<T, E>;
