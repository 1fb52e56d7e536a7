//! JSON report records. Everything except `timings` is a deterministic
//! function of the run configuration.

use crpc_core::planar::class_from_min_g;
use crpc_core::{
    a_pair_from_k, classify_shape, contour_tangent, cusp_discriminant_slope, cusp_parameter, discriminant, g_of_s,
    self_intersection, t_of_s, Branch, CrpcCertificate, DomainInfo, GaussSign, SelfIntersection, ShapeClassKind,
};
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::Result;

pub const SCHEMA_VERSION: u32 = 1;

pub const RATIO_BOUND: f64 = 1e-8;
pub const RATIO_BOUND_FD: f64 = 1e-4;
pub const ODE_BOUND: f64 = 1e-9;
pub const STEINER_BOUND: f64 = 1e-8;
pub const CONJUGACY_BOUND: f64 = 1e-8;

/// Wall-clock data, excluded from determinism comparisons.
#[derive(Debug, Clone, Serialize)]
pub struct Timings {
    pub total_seconds: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate_seconds: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CurvatureInfo {
    pub k: f64,
    pub a_low: f64,
    pub a_high: f64,
    pub gauss_sign: GaussSign,
}

impl CurvatureInfo {
    pub fn of(k: f64) -> Result<Self> {
        let (a_low, a_high) = a_pair_from_k(k)?;
        Ok(CurvatureInfo {
            k,
            a_low,
            a_high,
            gauss_sign: GaussSign::of_k(k),
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassificationInfo {
    pub class: ShapeClassKind,
    #[serde(rename = "C")]
    pub c: f64,
    #[serde(rename = "C_k")]
    pub c_k: f64,
    /// Class implied by the sign pattern of sampled `g`.
    pub min_g_class: ShapeClassKind,
    pub min_g: f64,
    pub self_intersection: Option<SelfIntersection>,
}

/// Classification data for `k > 1`, `None` otherwise.
pub fn classification_info(k: f64, c: f64, pitch: f64) -> Result<Option<ClassificationInfo>> {
    if k <= 1.0 {
        return Ok(None);
    }
    let class = classify_shape(k, c)?;
    let (min_g_class, min_g) = class_from_min_g(k, c, 400)?;
    Ok(Some(ClassificationInfo {
        class: class.class,
        c: class.c,
        c_k: class.c_k,
        min_g_class,
        min_g,
        self_intersection: self_intersection(k, c, pitch)?,
    }))
}

#[derive(Debug, Clone, Serialize)]
pub struct CuspInfo {
    pub s_k: f64,
    pub t_k: f64,
    /// `|dX0/ds|` at `s_k`.
    pub tangent_norm: f64,
    pub discriminant: f64,
    pub discriminant_slope: f64,
    pub expected_slope: f64,
}

/// Cusp data for `k < 1`, `None` otherwise.
pub fn cusp_info(k: f64, c: f64) -> Result<Option<CuspInfo>> {
    if k >= 1.0 {
        return Ok(None);
    }
    let s_k = cusp_parameter(k)?;
    let t_k = t_of_s(s_k, k, c)?;
    let tangent_norm = contour_tangent(s_k, k, c, Branch::X0)?
        .finite()
        .map_or(f64::INFINITY, |v| v.norm());
    Ok(Some(CuspInfo {
        s_k,
        t_k,
        tangent_norm,
        discriminant: discriminant(t_k, g_of_s(s_k, k, c)?, k),
        discriminant_slope: cusp_discriminant_slope(k, c)?,
        expected_slope: -6.0 - 2.0 * k * k,
    }))
}

#[derive(Debug, Clone, Serialize)]
pub struct Bounds {
    pub ratio_bound: f64,
    pub ratio_ok: bool,
    pub ode_bound: f64,
    pub ode_ok: bool,
    pub steiner_bound: f64,
    pub steiner_ok: bool,
    pub conjugacy_bound: f64,
    pub conjugacy_ok: bool,
    pub gauss_sign_ok: bool,
    pub passed: bool,
}

impl Bounds {
    pub fn check(cert: &CrpcCertificate, fd_only: bool) -> Self {
        let ratio_bound = if fd_only { RATIO_BOUND_FD } else { RATIO_BOUND };
        let ratio_ok = cert.max_rel_deviation <= ratio_bound;
        let ode_ok = cert.residual_stats.max <= ODE_BOUND;
        let steiner_ok = cert.steiner_stats.max <= STEINER_BOUND;
        // the bilinear form uses the analytic jet; FD partials only reach the FD bound
        let conjugacy_bound = if fd_only { RATIO_BOUND_FD } else { CONJUGACY_BOUND };
        let conjugacy_ok = cert.max_conjugacy_defect <= conjugacy_bound;
        let gauss_sign_ok = cert.gauss_sign_consistent;
        Bounds {
            ratio_bound,
            ratio_ok,
            ode_bound: ODE_BOUND,
            ode_ok,
            steiner_bound: STEINER_BOUND,
            steiner_ok,
            conjugacy_bound,
            conjugacy_ok,
            gauss_sign_ok,
            passed: ratio_ok && ode_ok && steiner_ok && conjugacy_ok && gauss_sign_ok,
        }
    }

    /// Names of the violated bounds.
    pub fn failures(&self) -> Vec<&'static str> {
        [
            (self.ratio_ok, "ratio"),
            (self.ode_ok, "ode"),
            (self.steiner_ok, "steiner"),
            (self.conjugacy_ok, "conjugacy"),
            (self.gauss_sign_ok, "gauss_sign"),
        ]
        .into_iter()
        .filter(|(ok, _)| !ok)
        .map(|(_, name)| name)
        .collect()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport<'a> {
    pub schema_version: u32,
    pub command: &'static str,
    pub config: &'a RunConfig,
    pub curvature: CurvatureInfo,
    pub domain: DomainInfo,
    pub certificate: CrpcCertificate,
    pub bounds: Bounds,
    pub classification: Option<ClassificationInfo>,
    pub cusp: Option<CuspInfo>,
    pub timings: Timings,
}

#[derive(Debug, Clone, Serialize)]
pub struct AxisRatios {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub full: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub minus: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub plus: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SummaryReport<'a> {
    pub schema_version: u32,
    pub command: &'static str,
    pub config: &'a RunConfig,
    pub curvature: CurvatureInfo,
    pub domain: DomainInfo,
    pub classification: Option<ClassificationInfo>,
    pub cusp: Option<CuspInfo>,
    pub axis_point_ratio: AxisRatios,
    /// Largest relative mismatch of one-sided derivatives at the glue point.
    pub glue_mismatch: f64,
    pub timings: Timings,
}

#[derive(Debug, Clone, Serialize)]
pub struct TopviewReport {
    pub schema_version: u32,
    pub command: &'static str,
    pub n: u64,
    pub m: u64,
    pub k: f64,
    pub symbolic_c: bool,
    #[serde(rename = "C")]
    pub c: Option<String>,
    pub degree: u32,
    pub degree_bound: u32,
    pub within_bound: bool,
    pub terms: usize,
    pub residual: f64,
    #[serde(rename = "residual_C")]
    pub residual_c: f64,
    pub residual_samples: usize,
    pub output: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub polynomial: Option<String>,
}
