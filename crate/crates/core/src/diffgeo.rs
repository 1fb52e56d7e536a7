//! Curvature certification of helical CRPC surfaces.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{CrpcError, Result};
use crate::params::{a_pair_from_k, k_from_a, GaussSign, ShapeParams};
use crate::profile::{
    dz_dt_of_s, g_of_s, g_prime_of_s, h_prime_of_s, t_of_s, BranchTag, GluedProfile, ProfileJet, Vec3,
};
use crate::surface::{partials_from_jet, sweep_point, unit_normal, HelicalPatch, SurfacePartials};
use crate::tolerance::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FundamentalForms {
    pub e: f64,
    pub f: f64,
    pub g: f64,
    pub l: f64,
    pub m: f64,
    pub n: f64,
}

impl FundamentalForms {
    pub fn first_det(&self) -> f64 {
        self.e * self.g - self.f * self.f
    }

    /// `II(a X_v + b X_t, c X_v + d X_t)`.
    pub fn second(&self, (a, b): (f64, f64), (c, d): (f64, f64)) -> f64 {
        self.l * a * c + self.m * (a * d + b * c) + self.n * b * d
    }
}

pub fn fundamental_forms(partials: &SurfacePartials, normal: &Vec3) -> Result<FundamentalForms> {
    let p = partials;
    let forms = FundamentalForms {
        e: p.xv.dot(&p.xv),
        f: p.xv.dot(&p.xt),
        g: p.xt.dot(&p.xt),
        l: normal.dot(&p.xvv),
        m: normal.dot(&p.xvt),
        n: normal.dot(&p.xtt),
    };
    if !(forms.first_det() > 0.0) {
        return Err(CrpcError::SingularPoint { t: f64::NAN });
    }
    Ok(forms)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvatureReport {
    /// Principal curvature of smaller magnitude.
    pub kappa1: f64,
    /// Principal curvature of larger magnitude.
    pub kappa2: f64,
    /// `kappa1 / kappa2`, so `|ratio| <= 1`.
    pub ratio: f64,
    /// `arctan sqrt(|ratio|)`.
    pub alpha: f64,
    /// `None` where one principal curvature vanishes.
    pub gauss_sign: Option<GaussSign>,
}

impl CurvatureReport {
    pub fn gauss_curvature(&self) -> f64 {
        self.kappa1 * self.kappa2
    }
}

/// Eigenvalues of the shape operator, the roots of
/// `(EG - F^2) κ^2 - (EN + GL - 2FM) κ + (LN - M^2) = 0`.
pub fn principal_curvatures(forms: &FundamentalForms) -> Result<CurvatureReport> {
    principal_curvatures_with(forms, &Tolerances::default())
}

pub fn principal_curvatures_with(forms: &FundamentalForms, tol: &Tolerances) -> Result<CurvatureReport> {
    let det = forms.first_det();
    if !(det > 0.0) {
        return Err(CrpcError::SingularPoint { t: f64::NAN });
    }
    let fo = forms;
    let mean = (fo.e * fo.n + fo.g * fo.l - 2.0 * fo.f * fo.m) / (2.0 * det);
    let gauss = (fo.l * fo.n - fo.m * fo.m) / det;
    let root = (mean * mean - gauss).max(0.0).sqrt();
    // the root of larger magnitude has no cancellation; Vieta gives the other
    let big = if mean >= 0.0 { mean + root } else { mean - root };
    let (k1, k2) = if big == 0.0 { (0.0, 0.0) } else { (gauss / big, big) };
    if (k2 - k1).abs() < tol.umbilic_rel * k1.abs().max(k2.abs()) || (k1 == 0.0 && k2 == 0.0) {
        return Err(CrpcError::UmbilicPoint { kappa1: k1, kappa2: k2 });
    }
    let ratio = k1 / k2;
    let gauss_sign = if k1 == 0.0 {
        None
    } else if ratio > 0.0 {
        Some(GaussSign::Positive)
    } else {
        Some(GaussSign::Negative)
    };
    Ok(CurvatureReport {
        kappa1: k1,
        kappa2: k2,
        ratio,
        alpha: ratio.abs().sqrt().atan(),
        gauss_sign,
    })
}

/// `α = arctan sqrt(|a|)`.
pub fn characteristic_angle(a: f64) -> Result<f64> {
    k_from_a(a)?;
    Ok(a.abs().sqrt().atan())
}

/// Relative value of the second fundamental form on the helical path
/// tangent `X_v` and the steepest-descent direction of the height `z` in the
/// tangent plane. The two directions are conjugate, so this vanishes.
pub fn conjugacy_defect(
    partials: &SurfacePartials,
    normal: &Vec3,
    forms: &FundamentalForms,
    report: &CurvatureReport,
) -> f64 {
    let up = Vec3::z();
    let descent = -(up - up.dot(normal) * normal);
    let (e, f, g) = (forms.e, forms.f, forms.g);
    let det = forms.first_det();
    let (rv, rt) = (partials.xv.dot(&descent), partials.xt.dot(&descent));
    let a = (g * rv - f * rt) / det;
    let b = (e * rt - f * rv) / det;
    let value = forms.second((1.0, 0.0), (a, b));
    let scale = report.kappa2.abs() * partials.xv.norm() * descent.norm();
    if scale == 0.0 {
        0.0
    } else {
        value.abs() / scale
    }
}

/// Relative residual of the profile ODE
/// `(1 + t^2) + (w + g)^2 = k^2 (w - g)^2`, `w = (t + 1/t) g'(t)`.
pub fn ode_residual_of(t: f64, g: f64, g_prime_t: f64, k: f64) -> f64 {
    let w = (t + 1.0 / t) * g_prime_t;
    let lhs = (1.0 + t * t) + (w + g) * (w + g);
    let rhs = k * k * (w - g) * (w - g);
    (lhs - rhs).abs() / lhs.max(rhs)
}

/// `dg/dt = g'(s) / t'(s)` with `t' = h'/(2t)`; at the cusp, where both
/// vanish, the limit `t · dz/dt` is used.
fn g_prime_in_t(s: f64, k: f64, c: f64, t: f64) -> Result<f64> {
    let hp = h_prime_of_s(s, k, c)?;
    if hp.abs() <= 1e-9 * (2.0 * c * s.powf(k)).abs() {
        return Ok(t * dz_dt_of_s(s, k, c)?);
    }
    Ok(g_prime_of_s(s, k, c)? * 2.0 * t / hp)
}

fn interior_t(s: f64, k: f64, c: f64) -> Result<f64> {
    if k == 1.0 {
        return Err(CrpcError::InvalidK {
            k,
            reason: "k = 1 describes developable surfaces",
        });
    }
    let t = t_of_s(s, k, c)?;
    if t <= 0.0 {
        return Err(CrpcError::OutsideDomain {
            value: s,
            what: "open domain I_C (t(s) = 0)".into(),
        });
    }
    Ok(t)
}

/// ODE residual of the closed-form profile at `s`.
pub fn ode_residual(s: f64, k: f64, c: f64) -> Result<f64> {
    let t = interior_t(s, k, c)?;
    let g = g_of_s(s, k, c)?;
    Ok(ode_residual_of(t, g, g_prime_in_t(s, k, c, t)?, k))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SteinerDiagnostic {
    /// Radius of the Steiner circle.
    pub r_s: f64,
    /// Distance from the involution centre to the circle centre.
    pub d_s: f64,
    /// `d_s / r_s`, equal to `k` on a CRPC surface.
    pub ratio: f64,
}

/// Steiner circle of the tangent plane at the contour point over `t`:
/// centre `m = (0, r)`, `r = W/2` with `W = sqrt(1 + t^2)`, and involution
/// centre `I = μ (1/2, f'' W)` with `μ = W^2 / (W^2 f'' - g)`, `f'' = g'(t)/t`.
pub fn steiner_diagnostic(s: f64, k: f64, c: f64) -> Result<SteinerDiagnostic> {
    let t = interior_t(s, k, c)?;
    let g = g_of_s(s, k, c)?;
    let fpp = g_prime_in_t(s, k, c, t)? / t;
    Ok(steiner_of(t, g, fpp))
}

pub fn steiner_of(t: f64, g: f64, fpp: f64) -> SteinerDiagnostic {
    let w2 = 1.0 + t * t;
    let w = w2.sqrt();
    let mu = w2 / (w2 * fpp - g);
    let (ix, iy) = (0.5 * mu, mu * fpp * w);
    let r = 0.5 * w;
    let d = ix.hypot(iy - r);
    SteinerDiagnostic {
        r_s: r,
        d_s: d,
        ratio: d / r,
    }
}

/// `(L/E) / (N/G)` at the glue point, the ratio of the normal curvatures in
/// the path and profile directions there.
pub fn axis_point_ratio(k: f64, c: f64, branch: BranchTag) -> Result<f64> {
    let params = ShapeParams::normalized(k, c)?;
    let profile = GluedProfile::new(params, branch)?;
    let patch = HelicalPatch::new(profile, 0.5, (0.0, 0.0), (2, 2))?;
    let partials = crate::surface::surface_partials(&patch, 0.0, 0.0)?;
    let normal = unit_normal(&partials, patch.orientation()).ok_or(CrpcError::SingularPoint { t: 0.0 })?;
    let f = fundamental_forms(&partials, &normal)?;
    Ok((f.l * f.g) / (f.n * f.e))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DerivativeMode {
    Analytic,
    FiniteDifference,
}

#[derive(Debug, Clone)]
pub struct CertificateConfig {
    pub branch: BranchTag,
    pub grid: (usize, usize),
    pub v_range: (f64, f64),
    /// Half-width of the `t` interval; `None` picks the patch default.
    pub t_extent: Option<f64>,
    pub mode: DerivativeMode,
    pub fd_step: f64,
    /// Number of profile samples for the ODE and Steiner statistics.
    pub profile_samples: usize,
    pub tolerances: Tolerances,
    /// Scales `g` by this factor (negative control).
    pub g_scale: f64,
    pub mirror: bool,
    /// Seed for a reproducible jitter of the sample points inside their grid
    /// cells; `None` samples the cell centres.
    pub jitter_seed: Option<u64>,
}

impl CertificateConfig {
    pub fn new(branch: BranchTag) -> Self {
        CertificateConfig {
            branch,
            grid: (64, 64),
            v_range: (0.0, std::f64::consts::TAU),
            t_extent: None,
            mode: DerivativeMode::Analytic,
            fd_step: crate::surface::FD_STEP,
            profile_samples: 1000,
            tolerances: Tolerances::default(),
            g_scale: 1.0,
            mirror: false,
            jitter_seed: None,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CertificateParams {
    pub k: f64,
    pub c: f64,
    pub pitch: f64,
    pub branch: BranchTag,
    pub a_low: f64,
    pub a_high: f64,
    pub mode: DerivativeMode,
    pub g_scale: f64,
    pub mirror: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct GridInfo {
    pub n_v: usize,
    pub n_t: usize,
    pub v_range: (f64, f64),
    pub t_range: (f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ParamPoint {
    pub v: f64,
    pub t: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SampleStats {
    pub samples: usize,
    pub max: f64,
    pub mean: f64,
}

impl SampleStats {
    fn of(values: &[f64]) -> Self {
        let max = values.iter().copied().fold(0.0, f64::max);
        let mean = if values.is_empty() {
            0.0
        } else {
            values.iter().sum::<f64>() / values.len() as f64
        };
        SampleStats {
            samples: values.len(),
            max,
            mean,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CrpcCertificate {
    pub params: CertificateParams,
    pub grid: GridInfo,
    /// Max over the grid of `min(|ratio - a_low|/|a_low|, |ratio - a_high|/|a_high|)`.
    pub max_rel_deviation: f64,
    pub argmax: ParamPoint,
    /// Relative ODE residual at the profile samples.
    pub residual_stats: SampleStats,
    /// `|d_s/r_s - k| / k` at the profile samples.
    pub steiner_stats: SampleStats,
    /// Grid points skipped as singular or with a vanishing curvature.
    pub excluded_points: usize,
    pub gauss_sign_consistent: bool,
    pub max_conjugacy_defect: f64,
}

fn cell_point((a, b): (f64, f64), j: usize, n: usize, offset: f64) -> f64 {
    a + (b - a) * (j as f64 + 0.5 + offset) / n as f64
}

/// Offsets in `[-0.45, 0.45)` cell widths, all zero without a seed.
fn jitter_offsets(seed: Option<u64>, count: usize) -> Vec<f64> {
    match seed {
        None => vec![0.0; count],
        Some(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..count).map(|_| rng.random_range(-0.45..0.45)).collect()
        }
    }
}

struct GridPoint {
    v: f64,
    t: f64,
    report: Option<CurvatureReport>,
    conjugacy: f64,
}

/// Relative deviation of `ratio` from the nearer of the two admissible ratios.
pub fn ratio_deviation(ratio: f64, a_low: f64, a_high: f64) -> f64 {
    let d_low = (ratio - a_low).abs() / a_low.abs();
    let d_high = (ratio - a_high).abs() / a_high.abs();
    d_low.min(d_high)
}

/// Checks the curvature ratio on the cell centres of an `n_v × n_t` grid.
pub fn crpc_certificate(k: f64, c: f64, pitch: f64, config: &CertificateConfig) -> Result<CrpcCertificate> {
    let params = ShapeParams::with_tolerances(k, c, pitch, &config.tolerances)?;
    let inner = ShapeParams::normalized(k, c)?;
    let mut profile =
        GluedProfile::with_tolerances(inner, config.branch, config.tolerances)?.with_g_scale(config.g_scale);
    if config.mirror {
        profile = profile.mirrored();
    }
    let patch = HelicalPatch::new(profile, pitch, config.v_range, (2, 2))?;
    let patch = match config.t_extent {
        Some(ext) => HelicalPatch::with_t_range(patch.profile, pitch, config.v_range, (-ext, ext), (2, 2))?,
        None => patch,
    };
    let (nv, nt) = config.grid;
    if nv == 0 || nt == 0 {
        return Err(CrpcError::InvalidParameter("certificate grid must be non-empty".into()));
    }
    let (a_low, a_high) = a_pair_from_k(k)?;
    let orientation = patch.orientation();
    let tol = config.tolerances;

    let t_offsets = jitter_offsets(config.jitter_seed, nt);
    let v_offsets = jitter_offsets(config.jitter_seed.map(|s| s ^ 0x9e37_79b9_7f4a_7c15), nt * nv);
    let columns: Vec<Vec<GridPoint>> = (0..nt)
        .into_par_iter()
        .map(|j| {
            let t = cell_point(patch.t_range, j, nt, t_offsets[j]);
            let v_off = &v_offsets[j * nv..(j + 1) * nv];
            column_points(&patch, t, nv, v_off, config, orientation, &tol)
        })
        .collect::<Result<_>>()?;

    let points: Vec<GridPoint> = columns.into_iter().flatten().collect();
    let mean_kappa = {
        let ks: Vec<f64> = points.iter().filter_map(|p| p.report.map(|r| r.kappa2.abs())).collect();
        ks.iter().sum::<f64>() / ks.len().max(1) as f64
    };
    let mut excluded = 0;
    let mut max_dev = 0.0;
    let mut argmax = ParamPoint {
        v: f64::NAN,
        t: f64::NAN,
    };
    let mut sign_ok = true;
    let mut max_conj: f64 = 0.0;
    let expected_sign = GaussSign::of_k(k);
    for p in &points {
        let Some(r) = p.report else {
            excluded += 1;
            continue;
        };
        if r.kappa1.abs() < tol.vanishing_curvature * mean_kappa {
            excluded += 1;
            continue;
        }
        let dev = ratio_deviation(r.ratio, a_low, a_high);
        if !(dev <= max_dev) {
            max_dev = dev;
            argmax = ParamPoint { v: p.v, t: p.t };
        }
        sign_ok &= r.gauss_sign == Some(expected_sign);
        max_conj = max_conj.max(p.conjugacy);
    }

    let (residuals, steiner) = profile_statistics(&patch.profile, patch.t_range, config.profile_samples)?;
    Ok(CrpcCertificate {
        params: CertificateParams {
            k: params.k,
            c: params.c,
            pitch: params.pitch,
            branch: config.branch,
            a_low,
            a_high,
            mode: config.mode,
            g_scale: config.g_scale,
            mirror: config.mirror,
        },
        grid: GridInfo {
            n_v: nv,
            n_t: nt,
            v_range: config.v_range,
            t_range: patch.t_range,
        },
        max_rel_deviation: max_dev,
        argmax,
        residual_stats: SampleStats::of(&residuals),
        steiner_stats: SampleStats::of(&steiner),
        excluded_points: excluded,
        gauss_sign_consistent: sign_ok,
        max_conjugacy_defect: max_conj,
    })
}

fn column_points(
    patch: &HelicalPatch,
    t: f64,
    nv: usize,
    v_offsets: &[f64],
    config: &CertificateConfig,
    orientation: f64,
    tol: &Tolerances,
) -> Result<Vec<GridPoint>> {
    let pitch = patch.pitch;
    let eval_point =
        |v: f64, jet: Option<&ProfileJet>, fd: Option<&[Vec3; 3]>| -> Result<Option<(SurfacePartials, Vec3)>> {
            let partials = match (jet, fd) {
                (Some(jet), _) => partials_from_jet(jet, v, pitch),
                (None, Some(p)) => {
                    let h = config.fd_step;
                    let x = |dv: f64, i: usize| sweep_point(p[i], v + dv, pitch);
                    let c = x(0.0, 1);
                    let h2 = h * h;
                    SurfacePartials {
                        xv: (x(h, 1) - x(-h, 1)) / (2.0 * h),
                        xt: (x(0.0, 2) - x(0.0, 0)) / (2.0 * h),
                        xvv: (x(h, 1) - 2.0 * c + x(-h, 1)) / h2,
                        xtt: (x(0.0, 2) - 2.0 * c + x(0.0, 0)) / h2,
                        xvt: (x(h, 2) - x(h, 0) - x(-h, 2) + x(-h, 0)) / (4.0 * h2),
                    }
                }
                (None, None) => return Ok(None),
            };
            Ok(unit_normal(&partials, orientation).map(|n| (partials, n)))
        };
    let (jet, fd) = match config.mode {
        DerivativeMode::Analytic => match patch.profile.jet(t) {
            Ok(j) => (Some(j), None),
            Err(CrpcError::SingularPoint { .. }) => (None, None),
            Err(e) => return Err(e),
        },
        DerivativeMode::FiniteDifference => {
            let h = config.fd_step;
            if t.abs() + h > patch.profile.t_max() {
                (None, None)
            } else {
                let pr = &patch.profile;
                (None, Some([pr.point(t - h)?, pr.point(t)?, pr.point(t + h)?]))
            }
        }
    };
    (0..nv)
        .map(|i| {
            let v = cell_point(config.v_range, i, nv, v_offsets[i]);
            let mut gp = GridPoint {
                v,
                t,
                report: None,
                conjugacy: 0.0,
            };
            if let Some((partials, normal)) = eval_point(v, jet.as_ref(), fd.as_ref())? {
                let forms = match fundamental_forms(&partials, &normal) {
                    Ok(f) => f,
                    Err(_) => return Ok(gp),
                };
                if let Ok(r) = principal_curvatures_with(&forms, tol) {
                    gp.conjugacy = conjugacy_defect(&partials, &normal, &forms, &r);
                    gp.report = Some(r);
                }
            }
            Ok(gp)
        })
        .collect()
}

/// ODE residuals and Steiner errors at `count` profile points with
/// `t ∈ (0, t_hi]`, read off the glued profile (including any `g` scaling).
fn profile_statistics(profile: &GluedProfile, t_range: (f64, f64), count: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let params = profile.params();
    let k = params.k;
    let t_hi = t_range.0.abs().max(t_range.1.abs());
    (0..count)
        .into_par_iter()
        .map(|i| {
            let t = t_hi * (i as f64 + 0.5) / count as f64;
            let (d1, _, _) = profile.derivatives(t)?;
            let (_, y) = profile.top_view(t)?;
            // y is ±g; the ODE is invariant under the half turn about the x-axis
            let sign = if profile.is_mirrored() { -1.0 } else { 1.0 };
            let g = sign * y;
            let gp = sign * d1.y;
            let residual = ode_residual_of(t, g, gp, k);
            let st = steiner_of(t, g, gp / t);
            Ok((residual, (st.ratio - k).abs() / k))
        })
        .collect::<Result<Vec<_>>>()
        .map(|v| v.into_iter().unzip())
}
