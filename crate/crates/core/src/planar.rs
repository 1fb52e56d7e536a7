//! Sections of a helical surface by planes through its axis, and the shape
//! classes of negatively curved surfaces.
//!
//! A contour point with polar angle `θ` reaches the plane at angle `φ` after
//! the screw motion by `v = φ + jπ - θ`. The angle `θ` is tracked
//! continuously along the profile from the glue point outwards, so one
//! formula covers every regime (including the glue point on the axis at
//! `C = C_k`, where `θ` is taken as the limit along the profile).

use std::f64::consts::{FRAC_PI_2, PI};
use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{CrpcError, Result};
use crate::format::fmt_f64;
use crate::numeric::bisect;
use crate::params::{critical_c, ShapeParams};
use crate::profile::{g_of_s, glued_profile, BranchTag, GluedProfile, Vec3};
use crate::surface::helical_motion;

/// Default half-width in `t` of sections of unbounded profiles.
pub const DEFAULT_SECTION_T: f64 = 6.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PlanarPoint {
    /// Solution parameter of the source contour point.
    pub s: f64,
    /// Signed profile parameter of the source point.
    pub t: f64,
    /// Signed distance from the axis along the plane direction `φ`.
    pub u: f64,
    pub z: f64,
    /// Screw angle that carried the contour point into the plane.
    pub v: f64,
    /// `0` before and `1` after the profile crosses the plane `g = 0`, plus
    /// `2` on the `t < 0` half.
    pub piece: u8,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlanarProfile {
    pub plane_angle: f64,
    pub pitch: f64,
    /// Ordered by the profile parameter `t`, from negative to positive.
    pub points: Vec<PlanarPoint>,
    /// `s` values at which the pieces switch (the zero of `g`, when sampled).
    pub piece_boundaries: Vec<f64>,
}

impl PlanarPoint {
    /// The point in space, `(u cos φ, u sin φ, z)`.
    pub fn position(&self, plane_angle: f64) -> Vec3 {
        let (sn, cs) = plane_angle.sin_cos();
        Vec3::new(self.u * cs, self.u * sn, self.z)
    }
}

impl PlanarProfile {
    /// Largest angle jump between consecutive samples on the same half.
    pub fn max_angle_jump(&self) -> f64 {
        self.points
            .windows(2)
            .filter(|w| (w[0].t < 0.0) == (w[1].t < 0.0) || w[0].t == 0.0 || w[1].t == 0.0)
            .map(|w| (w[1].v - w[0].v).abs())
            .fold(0.0, f64::max)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "s,u,z,piece")?;
        for p in &self.points {
            writeln!(out, "{},{},{},{}", fmt_f64(p.s), fmt_f64(p.u), fmt_f64(p.z), p.piece)?;
        }
        Ok(())
    }

    /// SVG polyline of `(u, z)` with `z` pointing up; `scale` is user units
    /// per model unit.
    pub fn write_svg<W: Write>(&self, mut out: W, scale: f64) -> std::io::Result<()> {
        let (mut u0, mut u1, mut z0, mut z1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for p in &self.points {
            u0 = u0.min(p.u);
            u1 = u1.max(p.u);
            z0 = z0.min(p.z);
            z1 = z1.max(p.z);
        }
        if self.points.is_empty() {
            (u0, u1, z0, z1) = (0.0, 1.0, 0.0, 1.0);
        }
        let margin = 0.05 * (u1 - u0).max(z1 - z0).max(1e-12);
        let (w, h) = ((u1 - u0 + 2.0 * margin) * scale, (z1 - z0 + 2.0 * margin) * scale);
        writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="0 0 {} {}">"#,
            fmt_f64(w),
            fmt_f64(h),
            fmt_f64(w),
            fmt_f64(h)
        )?;
        let pts: Vec<String> = self
            .points
            .iter()
            .map(|p| {
                let x = (p.u - u0 + margin) * scale;
                let y = (z1 - p.z + margin) * scale;
                format!("{},{}", fmt_f64(x), fmt_f64(y))
            })
            .collect();
        writeln!(
            out,
            r#"  <polyline fill="none" stroke="black" stroke-width="{}" points="{}"/>"#,
            fmt_f64(0.002 * w.max(h)),
            pts.join(" ")
        )?;
        writeln!(out, "</svg>")
    }
}

/// Section of the surface for `(k, C)` (default branch) by the plane through
/// the axis at angle `plane_angle`, with `samples` points per half.
pub fn plane_section(k: f64, c: f64, pitch: f64, plane_angle: f64, samples: usize) -> Result<PlanarProfile> {
    ShapeParams::new(k, c, pitch)?;
    let profile = glued_profile(k, c, BranchTag::default_for(k))?;
    plane_section_of(&profile, pitch, plane_angle, samples, None)
}

/// Section for an explicit profile, sampling `t` uniformly in `[-T, T]` with
/// `T = t_extent` (default `t_k`, or [`DEFAULT_SECTION_T`]).
pub fn plane_section_of(
    profile: &GluedProfile,
    pitch: f64,
    plane_angle: f64,
    samples: usize,
    t_extent: Option<f64>,
) -> Result<PlanarProfile> {
    if samples < 2 {
        return Err(CrpcError::InvalidParameter(
            "a plane section needs at least 2 samples per half".into(),
        ));
    }
    let tm = profile.t_max();
    let ext = t_extent
        .unwrap_or(if tm.is_finite() { tm } else { DEFAULT_SECTION_T })
        .min(tm);
    let k = profile.params().k;
    let g_zero = (k > 1.0).then(|| ((k + 1.0) / (k - 1.0)).sqrt());

    let glue_y = profile.point(0.0)?.y;
    let half = |sign: f64| -> Result<Vec<PlanarPoint>> {
        let raw: Vec<(f64, f64, Vec3)> = (0..samples)
            .into_par_iter()
            .map(|i| {
                let t = sign * ext * i as f64 / (samples - 1) as f64;
                Ok((t, profile.s_of_t(t)?, profile.point(t)?))
            })
            .collect::<Result<_>>()?;
        // sequential unwrap from the glue point outwards
        let scale = raw.iter().map(|r| r.2.xy().norm()).fold(0.0, f64::max);
        let mut thetas = Vec::with_capacity(raw.len());
        let mut prev: Option<f64> = None;
        for (_, _, p) in &raw {
            let rho = p.xy().norm();
            let th = if rho <= 1e-14 * scale.max(1e-300) {
                f64::NAN
            } else {
                p.y.atan2(p.x)
            };
            let th = match (prev, th.is_nan()) {
                (_, true) => f64::NAN,
                (None, false) => th,
                (Some(q), false) => th + 2.0 * PI * ((q - th) / (2.0 * PI)).round(),
            };
            if !th.is_nan() {
                prev = Some(th);
            }
            thetas.push(th);
        }
        // on the axis the angle is the limit along the tangent direction
        let (d1, _, _) = profile.derivatives(0.0)?;
        let lim = (sign * d1.y).atan2(sign * d1.x);
        let first = thetas.iter().position(|t| !t.is_nan()).unwrap_or(thetas.len());
        for th in thetas.iter_mut().take(first) {
            *th = lim;
        }
        if first < thetas.len() {
            // keep the unwrapped branch consistent with the limit
            let shift = 2.0 * PI * ((lim - thetas[first]) / (2.0 * PI)).round();
            for th in thetas.iter_mut().skip(first) {
                *th += shift;
            }
        }
        // choose the ray (j) so that v(0) lies in (-π/2, π/2]
        let v0 = plane_angle - thetas[0];
        let j = (-(v0 - FRAC_PI_2) / PI).floor();
        let ray = if (j as i64).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        Ok(raw
            .iter()
            .zip(&thetas)
            .map(|(&(t, s, p), &th)| {
                let v = plane_angle + j * PI - th;
                let q = helical_motion(v, 2.0 * pitch * p, pitch);
                let crossed = (glue_y < 0.0 && p.y >= 0.0) || (glue_y > 0.0 && p.y <= 0.0);
                PlanarPoint {
                    s,
                    t,
                    u: ray * q.xy().norm(),
                    z: q.z,
                    v,
                    piece: u8::from(crossed) + if sign < 0.0 { 2 } else { 0 },
                }
            })
            .collect())
    };

    let neg = half(-1.0)?;
    let pos = half(1.0)?;
    let mut points: Vec<PlanarPoint> = neg.into_iter().skip(1).rev().collect();
    points.extend(pos);
    let mut piece_boundaries = Vec::new();
    if let Some(sz) = g_zero {
        let s_hi = points.iter().map(|p| p.s).fold(0.0, f64::max);
        if sz > profile.domain().s0 && sz <= s_hi {
            piece_boundaries.push(sz);
        }
    }
    Ok(PlanarProfile {
        plane_angle,
        pitch,
        points,
        piece_boundaries,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ShapeClassKind {
    /// `C < C_k`: the contour stays on one side of the `(x, z)`-plane.
    OneSided,
    /// `C = C_k`: the contour touches the plane and the axis lies on the surface.
    AxisTouching,
    /// `C > C_k`: the contour crosses the plane; the `(y, z)`-profile crosses itself.
    SelfIntersecting,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShapeClass {
    pub class: ShapeClassKind,
    pub c: f64,
    pub c_k: f64,
}

fn require_negative_curvature(k: f64) -> Result<()> {
    if !(k > 1.0) {
        return Err(CrpcError::InvalidK {
            k,
            reason: "shape classes are defined for k > 1",
        });
    }
    Ok(())
}

pub fn classify_shape(k: f64, c: f64) -> Result<ShapeClass> {
    classify_shape_with(k, c, 1e-10)
}

pub fn classify_shape_with(k: f64, c: f64, rel_tol: f64) -> Result<ShapeClass> {
    require_negative_curvature(k)?;
    let c_k = critical_c(k)?;
    if !(c > 0.0 && c.is_finite()) {
        return Err(CrpcError::InvalidParameter(format!("C must be positive, got {c}")));
    }
    let class = if (c - c_k).abs() <= rel_tol * c_k {
        ShapeClassKind::AxisTouching
    } else if c < c_k {
        ShapeClassKind::OneSided
    } else {
        ShapeClassKind::SelfIntersecting
    };
    Ok(ShapeClass { class, c, c_k })
}

/// Shape class read off the minimum of `g` over `count` samples of the
/// domain `[s0, 4 s0]` (on which `g` is increasing for `k > 1`).
pub fn class_from_min_g(k: f64, c: f64, count: usize) -> Result<(ShapeClassKind, f64)> {
    require_negative_curvature(k)?;
    let dom = crate::params::compute_domain(k, c)?;
    let mut min_g = f64::INFINITY;
    let mut scale: f64 = 0.0;
    for i in 0..count.max(2) {
        let s = dom.s0 * (1.0 + 3.0 * i as f64 / (count.max(2) - 1) as f64);
        let g = g_of_s(s, k, c)?;
        min_g = min_g.min(g);
        scale = scale.max(g.abs());
    }
    let class = if min_g.abs() <= 1e-9 * scale.max(1.0) {
        ShapeClassKind::AxisTouching
    } else if min_g > 0.0 {
        ShapeClassKind::OneSided
    } else {
        ShapeClassKind::SelfIntersecting
    };
    Ok((class, min_g))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SelfIntersection {
    /// Position in the `(y, z)`-plane.
    pub y: f64,
    pub z: f64,
    /// Contour parameters of the crossing on the `t > 0` half.
    pub s: f64,
    pub t: f64,
    /// The two surface preimages are `(v, t)` and `(-v, -t)`.
    pub v: f64,
}

/// Crossing of the `(y, z)`-profile with the `y`-axis for `C > C_k`.
pub fn self_intersection(k: f64, c: f64, pitch: f64) -> Result<Option<SelfIntersection>> {
    let class = classify_shape(k, c)?;
    if class.class != ShapeClassKind::SelfIntersecting {
        return Ok(None);
    }
    let profile = glued_profile(k, c, BranchTag::Full)?;
    // ζ(t) = z + v/2 with v = -π/2 - θ carries X0(t) to the negative y-axis
    let screw = |t: f64| -> Result<(f64, f64, Vec3)> {
        let p = profile.point(t)?;
        let v = -FRAC_PI_2 - p.y.atan2(p.x);
        Ok((p.z + 0.5 * v, v, p))
    };
    let mut prev_t = 0.0;
    let mut dipped = false;
    let mut t = 1e-3;
    let mut bracket = None;
    while t < 1e9 {
        let (zeta, _, _) = screw(t)?;
        if zeta < 0.0 {
            dipped = true;
        } else if dipped {
            bracket = Some((prev_t, t));
            break;
        }
        prev_t = t;
        t *= 1.05;
    }
    let Some((lo, hi)) = bracket else {
        return Err(CrpcError::RootNotFound("self-intersection of the (y,z)-profile"));
    };
    let t_star = bisect(|t| screw(t).map(|r| r.0).unwrap_or(f64::NAN), lo, hi, 1e-15)?;
    let (zeta, v, p) = screw(t_star)?;
    let s = profile.s_of_t(t_star)?;
    Ok(Some(SelfIntersection {
        y: -2.0 * pitch * p.xy().norm(),
        z: 2.0 * pitch * zeta,
        s,
        t: t_star,
        v,
    }))
}
