use std::io::BufReader;
use std::path::Path;
use std::time::Instant;

use crpc_core::{
    axis_point_ratio, build_implicit_polynomial, compute_domain_with, crpc_certificate, degree_bound, glue_derivatives,
    min_c, parse_rational, plane_section_of, read_profile_csv, sample_mesh, singular_curve, sweep_profile,
    topview_samples, write_polyline_obj, write_profile_csv, BranchTag, CMode, CertificateConfig, DerivativeMode,
    GluedProfile, HelicalPatch, ProfileSample, ShapeParams,
};
use serde::Serialize;

use crate::config::{Format, RunConfig};
use crate::error::{CliError, Result};
use crate::output::{print_summary, write_atomic, write_json};
use crate::report::{
    classification_info, cusp_info, AxisRatios, Bounds, CurvatureInfo, SummaryReport, Timings, TopviewReport,
    VerificationReport, SCHEMA_VERSION,
};

const DEFAULT_PROFILE_SAMPLES: usize = 1000;
const DEFAULT_TOPVIEW_SAMPLES: usize = 200;
const DEFAULT_SECTION_SAMPLES: usize = 1000;

/// Validated `(k, C, pitch)` and the glued profile at the normalised pitch.
fn build_profile(cfg: &RunConfig) -> Result<(ShapeParams, GluedProfile)> {
    let (k, c) = (cfg.require_k()?, cfg.require_c()?);
    let params = ShapeParams::with_tolerances(k, c, cfg.pitch, &cfg.tolerances)?;
    let profile = GluedProfile::with_tolerances(ShapeParams::normalized(k, c)?, cfg.branch_tag()?, cfg.tolerances)?;
    Ok((params, profile))
}

fn display(path: Option<&Path>) -> Option<String> {
    path.map(|p| p.display().to_string())
}

#[derive(Serialize)]
struct GenerateSummary {
    command: &'static str,
    format: &'static str,
    out: Option<String>,
    profile_out: Option<String>,
    vertices: usize,
    faces: usize,
}

pub fn generate(cfg: &RunConfig, out: Option<&Path>, profile_out: Option<&Path>, from: Option<&Path>) -> Result<()> {
    let format = cfg.format_in("generate", &[Format::Obj, Format::Csv, Format::Poly])?;
    let (nv, nt) = cfg.grid;
    let mut summary = GenerateSummary {
        command: "generate",
        format: format.name(),
        out: display(out),
        profile_out: display(profile_out),
        vertices: 0,
        faces: 0,
    };

    if let Some(path) = from {
        if format != Format::Obj {
            return Err(CliError::InvalidArgs("--from-profile only produces obj meshes".into()));
        }
        let k = cfg.require_k()?;
        let file = std::fs::File::open(path).map_err(|e| CliError::io(path.display().to_string(), e))?;
        let samples = read_profile_csv(BufReader::new(file))?;
        let points: Vec<_> = samples.iter().map(ProfileSample::point).collect();
        let orientation = if k > 1.0 { 1.0 } else { -1.0 };
        let mesh = sweep_profile(&points, cfg.pitch, cfg.v_range, nv, orientation)?;
        write_atomic(out, |w| mesh.write_obj(w))?;
        summary.vertices = mesh.vertex_count();
        summary.faces = mesh.face_count();
        return finish_summary(out, &summary);
    }

    let (params, profile) = build_profile(cfg)?;
    if format == Format::Poly {
        let curve = singular_curve(params.k, params.c, cfg.pitch, cfg.v_range, nv)?;
        write_atomic(out, |w| write_polyline_obj(w, &curve))?;
        summary.vertices = curve.len();
        return finish_summary(out, &summary);
    }

    let patch = HelicalPatch::new(profile, cfg.pitch, cfg.v_range, (nv, nt))?;
    let samples: Vec<ProfileSample> = (0..nt)
        .map(|j| patch.profile.sample(patch.t_at(j)))
        .collect::<crpc_core::Result<_>>()?;
    if let Some(p) = profile_out {
        write_atomic(Some(p), |w| write_profile_csv(w, &samples))?;
    }
    match format {
        Format::Csv => {
            write_atomic(out, |w| write_profile_csv(w, &samples))?;
            summary.vertices = samples.len();
        }
        _ => {
            let mesh = sample_mesh(&patch)?;
            write_atomic(out, |w| mesh.write_obj(w))?;
            summary.vertices = mesh.vertex_count();
            summary.faces = mesh.face_count();
        }
    }
    finish_summary(out, &summary)
}

fn finish_summary<T: Serialize>(out: Option<&Path>, summary: &T) -> Result<()> {
    // with data on stdout the summary would corrupt it
    if out.is_some() {
        print_summary(summary)?;
    }
    Ok(())
}

pub fn verify(cfg: &RunConfig, out: Option<&Path>, fd_only: bool, tamper_g: Option<f64>) -> Result<()> {
    cfg.format_in("verify", &[Format::Json])?;
    let start = Instant::now();
    let (params, _) = build_profile(cfg)?;
    let (k, c) = (params.k, params.c);
    let mut cert_cfg = CertificateConfig::new(cfg.branch_tag()?);
    cert_cfg.grid = cfg.grid;
    cert_cfg.v_range = cfg.v_range;
    cert_cfg.tolerances = cfg.tolerances;
    cert_cfg.profile_samples = cfg.samples.unwrap_or(DEFAULT_PROFILE_SAMPLES);
    cert_cfg.jitter_seed = cfg.seed;
    if fd_only {
        cert_cfg.mode = DerivativeMode::FiniteDifference;
    }
    if let Some(scale) = tamper_g {
        cert_cfg.g_scale = scale;
    }
    let cert_start = Instant::now();
    let certificate = crpc_certificate(k, c, cfg.pitch, &cert_cfg)?;
    let certificate_seconds = cert_start.elapsed().as_secs_f64();
    let bounds = Bounds::check(&certificate, fd_only);
    let report = VerificationReport {
        schema_version: SCHEMA_VERSION,
        command: "verify",
        config: cfg,
        curvature: CurvatureInfo::of(k)?,
        domain: compute_domain_with(k, c, &cfg.tolerances)?,
        certificate,
        classification: classification_info(k, c, cfg.pitch)?,
        cusp: cusp_info(k, c)?,
        bounds: bounds.clone(),
        timings: Timings {
            total_seconds: start.elapsed().as_secs_f64(),
            certificate_seconds: Some(certificate_seconds),
        },
    };
    write_json(out, &report)?;
    if bounds.passed {
        Ok(())
    } else {
        Err(CliError::BoundsViolated(bounds.failures().join(", ")))
    }
}

pub fn topview(cfg: &RunConfig, out: Option<&Path>, n: u64, m: u64, symbolic_c: bool) -> Result<()> {
    let format = cfg.format_in("topview", &[Format::Json, Format::Poly])?;
    if let Some(k) = cfg.k {
        if (k - n as f64 / m.max(1) as f64).abs() > 1e-12 * k.max(1.0) {
            return Err(CliError::InvalidArgs(format!("--k {k} disagrees with --n {n} --m {m}")));
        }
    }
    let mode = if symbolic_c {
        CMode::Symbolic
    } else {
        let text = cfg
            .c_text
            .as_deref()
            .ok_or_else(|| CliError::InvalidArgs("topview needs --C for a numeric constant, or --symbolic-C".into()))?;
        CMode::Numeric(parse_rational(text).map_err(|e| CliError::InvalidArgs(format!("--C: {e}")))?)
    };
    let poly = build_implicit_polynomial(n, m, mode)?;
    let k = n as f64 / m as f64;
    let residual_c = match cfg.c {
        Some(c) => c,
        None => min_c(k).map_or(2.0, |lo| (2.0 * lo).max(2.0)),
    };
    let samples_n = cfg.samples.unwrap_or(DEFAULT_TOPVIEW_SAMPLES);
    let profile = GluedProfile::with_tolerances(
        ShapeParams::normalized(k, residual_c)?,
        BranchTag::default_for(k),
        cfg.tolerances,
    )?;
    let samples = topview_samples(&profile, samples_n)?;
    let residual = crpc_core::residual(&poly, &samples, residual_c);
    let degree = poly.degree_xy().unwrap_or(0);
    let bound = degree_bound(n, m);
    if let Some(path) = out {
        match format {
            Format::Poly => write_atomic(Some(path), |w| writeln!(w, "{poly}"))?,
            _ => write_json(Some(path), &poly.to_json())?,
        }
    }
    let report = TopviewReport {
        schema_version: SCHEMA_VERSION,
        command: "topview",
        n,
        m,
        k,
        symbolic_c,
        c: if symbolic_c { None } else { cfg.c_text.clone() },
        degree,
        degree_bound: bound,
        within_bound: degree <= bound,
        terms: poly.len(),
        residual,
        residual_c,
        residual_samples: samples.len(),
        output: display(out),
        polynomial: out.is_none().then(|| poly.to_string()),
    };
    write_json(None, &report)
}

#[derive(Serialize)]
struct ClassifyReport {
    schema_version: u32,
    command: &'static str,
    k: f64,
    #[serde(flatten)]
    classification: crate::report::ClassificationInfo,
}

pub fn classify(cfg: &RunConfig, out: Option<&Path>) -> Result<()> {
    cfg.format_in("classify", &[Format::Json])?;
    let (k, c) = (cfg.require_k()?, cfg.require_c()?);
    ShapeParams::with_tolerances(k, c, cfg.pitch, &cfg.tolerances)?;
    let classification = classification_info(k, c, cfg.pitch)?.ok_or(crpc_core::CrpcError::InvalidK {
        k,
        reason: "shape classes are defined for k > 1",
    })?;
    write_json(
        out,
        &ClassifyReport {
            schema_version: SCHEMA_VERSION,
            command: "classify",
            k,
            classification,
        },
    )
}

#[derive(Serialize)]
struct ProfileSummary {
    command: &'static str,
    format: &'static str,
    out: Option<String>,
    plane_angle: f64,
    points: usize,
    pieces: usize,
    max_angle_jump: f64,
}

pub fn profile(cfg: &RunConfig, out: Option<&Path>, t_extent: Option<f64>, svg_scale: f64) -> Result<()> {
    let format = cfg.format_in("profile", &[Format::Svg, Format::Csv])?;
    if !(svg_scale > 0.0 && svg_scale.is_finite()) {
        return Err(CliError::InvalidArgs(format!(
            "--svg-scale must be positive, got {svg_scale}"
        )));
    }
    let (_, profile) = build_profile(cfg)?;
    let angle = cfg.plane_angle.unwrap_or(0.0);
    let section = plane_section_of(
        &profile,
        cfg.pitch,
        angle,
        cfg.samples.unwrap_or(DEFAULT_SECTION_SAMPLES),
        t_extent,
    )?;
    match format {
        Format::Csv => write_atomic(out, |w| section.write_csv(w))?,
        _ => write_atomic(out, |w| section.write_svg(w, svg_scale))?,
    }
    finish_summary(
        out,
        &ProfileSummary {
            command: "profile",
            format: format.name(),
            out: display(out),
            plane_angle: angle,
            points: section.points.len(),
            pieces: section.piece_boundaries.len() + 1,
            max_angle_jump: section.max_angle_jump(),
        },
    )
}

pub fn report(cfg: &RunConfig, out: Option<&Path>) -> Result<()> {
    cfg.format_in("report", &[Format::Json])?;
    let start = Instant::now();
    let (params, profile) = build_profile(cfg)?;
    let (k, c) = (params.k, params.c);
    let axis = |tag| axis_point_ratio(k, c, tag).ok();
    let axis_point_ratio = if k > 1.0 {
        AxisRatios {
            full: axis(BranchTag::Full),
            minus: None,
            plus: None,
        }
    } else {
        AxisRatios {
            full: None,
            minus: axis(BranchTag::Minus),
            plus: axis(BranchTag::Plus),
        }
    };
    let glue = glue_derivatives(&profile, crpc_core::profile::GLUE_DELTA, crpc_core::profile::GLUE_NODES)?;
    let summary = SummaryReport {
        schema_version: SCHEMA_VERSION,
        command: "report",
        config: cfg,
        curvature: CurvatureInfo::of(k)?,
        domain: compute_domain_with(k, c, &cfg.tolerances)?,
        classification: classification_info(k, c, cfg.pitch)?,
        cusp: cusp_info(k, c)?,
        axis_point_ratio,
        glue_mismatch: glue.mismatch(),
        timings: Timings {
            total_seconds: start.elapsed().as_secs_f64(),
            certificate_seconds: None,
        },
    };
    write_json(out, &summary)
}
