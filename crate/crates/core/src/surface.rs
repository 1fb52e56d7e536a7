//! Helical sweep of a glued profile: `X(v, t) = 2p H(v, P(t))` with
//! `H(v, (x, y, z)) = (x cos v - y sin v, x sin v + y cos v, z + v/2)`.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{CrpcError, Result};
use crate::format::fmt_f64;
use crate::profile::{BranchTag, GluedProfile, ProfileJet, Vec3};

/// Screw motion about the `z`-axis: rotation by `v` and translation `pitch * v`.
pub fn helical_motion(v: f64, point: Vec3, pitch: f64) -> Vec3 {
    let (sn, cs) = v.sin_cos();
    Vec3::new(
        point.x * cs - point.y * sn,
        point.x * sn + point.y * cs,
        point.z + pitch * v,
    )
}

fn rotate(v: f64, p: Vec3) -> Vec3 {
    let (sn, cs) = v.sin_cos();
    Vec3::new(p.x * cs - p.y * sn, p.x * sn + p.y * cs, p.z)
}

#[derive(Debug, Clone)]
pub struct HelicalPatch {
    pub profile: GluedProfile,
    pub pitch: f64,
    pub v_range: (f64, f64),
    pub t_range: (f64, f64),
    pub grid: (usize, usize),
}

/// Default half-width of the sampled `t` interval for unbounded profiles.
pub const DEFAULT_T_EXTENT: f64 = 2.0;
/// Fraction of `t_k` covered by default when the profile ends in a cusp.
pub const DEFAULT_CUSP_FRACTION: f64 = 0.98;

impl HelicalPatch {
    /// Patch over `v ∈ v_range` and the default `t` interval, which stays
    /// clear of the cusp rows.
    pub fn new(profile: GluedProfile, pitch: f64, v_range: (f64, f64), grid: (usize, usize)) -> Result<Self> {
        let tm = profile.t_max();
        let ext = if tm.is_finite() {
            DEFAULT_CUSP_FRACTION * tm
        } else {
            DEFAULT_T_EXTENT
        };
        Self::with_t_range(profile, pitch, v_range, (-ext, ext), grid)
    }

    pub fn with_t_range(
        profile: GluedProfile,
        pitch: f64,
        v_range: (f64, f64),
        t_range: (f64, f64),
        grid: (usize, usize),
    ) -> Result<Self> {
        if !(pitch.is_finite() && pitch != 0.0) {
            return Err(CrpcError::InvalidParameter(format!(
                "pitch must be finite and nonzero, got {pitch}"
            )));
        }
        if !(v_range.0.is_finite() && v_range.1.is_finite() && v_range.0 <= v_range.1) {
            return Err(CrpcError::InvalidParameter(format!("bad v range {v_range:?}")));
        }
        if grid.0 < 2 || grid.1 < 2 {
            return Err(CrpcError::InvalidParameter(format!(
                "grid must be at least 2x2, got {}x{}",
                grid.0, grid.1
            )));
        }
        let tm = profile.t_max();
        let (a, b) = t_range;
        if !(a.is_finite() && b.is_finite() && a <= b) || a < -tm || b > tm {
            return Err(CrpcError::OutsideDomain {
                value: if a < -tm { a } else { b },
                what: format!("profile parameter range [-{tm}, {tm}]"),
            });
        }
        Ok(HelicalPatch {
            profile,
            pitch,
            v_range,
            t_range,
            grid,
        })
    }

    /// `t` range covering the whole profile up to and including the cusp rows.
    pub fn including_cusp(mut self) -> Self {
        let tm = self.profile.t_max();
        if tm.is_finite() {
            self.t_range = (-tm, tm);
        }
        self
    }

    pub fn v_at(&self, i: usize) -> f64 {
        lerp(self.v_range, i, self.grid.0)
    }

    pub fn t_at(&self, j: usize) -> f64 {
        lerp(self.t_range, j, self.grid.1)
    }

    /// `+1` if `X_v × X_t` points to the side the paper's normal uses.
    /// At the glue point `X_v × X_t` is a positive multiple of
    /// `(k^2 - 1) (0, 1, 0)`, so the sign flips with `k - 1`.
    pub fn orientation(&self) -> f64 {
        if self.profile.params().k > 1.0 {
            1.0
        } else {
            -1.0
        }
    }

    fn is_singular_t(&self, t: f64) -> bool {
        let tm = self.profile.t_max();
        tm.is_finite() && (t.abs() - tm).abs() <= self.profile.tolerances().singular_rel * tm
    }
}

fn lerp((a, b): (f64, f64), i: usize, n: usize) -> f64 {
    if i + 1 == n {
        b
    } else {
        a + (b - a) * i as f64 / (n - 1) as f64
    }
}

pub fn evaluate_surface(patch: &HelicalPatch, v: f64, t: f64) -> Result<Vec3> {
    let p = patch.profile.point(t)?;
    Ok(sweep_point(p, v, patch.pitch))
}

/// `2p H(v, P)`.
pub fn sweep_point(p: Vec3, v: f64, pitch: f64) -> Vec3 {
    helical_motion(v, 2.0 * pitch * p, pitch)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SurfacePartials {
    pub xv: Vec3,
    pub xt: Vec3,
    pub xvv: Vec3,
    pub xvt: Vec3,
    pub xtt: Vec3,
}

impl SurfacePartials {
    /// `X_v × X_t`, not normalised.
    pub fn cross(&self) -> Vec3 {
        self.xv.cross(&self.xt)
    }
}

/// Partials at angle `v` from a profile jet.
pub fn partials_from_jet(jet: &ProfileJet, v: f64, pitch: f64) -> SurfacePartials {
    let s = 2.0 * pitch;
    let rp = rotate(v, jet.point);
    let rd1 = rotate(v, jet.d1);
    let rd2 = rotate(v, jet.d2);
    SurfacePartials {
        xv: s * Vec3::new(-rp.y, rp.x, 0.5),
        xvv: s * Vec3::new(-rp.x, -rp.y, 0.0),
        xt: s * rd1,
        xvt: s * Vec3::new(-rd1.y, rd1.x, 0.0),
        xtt: s * rd2,
    }
}

/// Analytic partial derivatives.
pub fn surface_partials(patch: &HelicalPatch, v: f64, t: f64) -> Result<SurfacePartials> {
    let jet = patch.profile.jet(t)?;
    Ok(partials_from_jet(&jet, v, patch.pitch))
}

/// Default step of [`surface_partials_fd`].
pub const FD_STEP: f64 = 2e-4;

/// Partials by central differences of [`evaluate_surface`] with step `h` in
/// both parameters.
pub fn surface_partials_fd(patch: &HelicalPatch, v: f64, t: f64, h: f64) -> Result<SurfacePartials> {
    let x = |dv: f64, dt: f64| evaluate_surface(patch, v + dv, t + dt);
    let tm = patch.profile.t_max();
    if (t.abs() + h) > tm {
        return Err(CrpcError::SingularPoint { t });
    }
    let c = x(0.0, 0.0)?;
    let (vp, vm) = (x(h, 0.0)?, x(-h, 0.0)?);
    let (tp, tmn) = (x(0.0, h)?, x(0.0, -h)?);
    let (pp, pm, mp, mm) = (x(h, h)?, x(h, -h)?, x(-h, h)?, x(-h, -h)?);
    let h2 = h * h;
    Ok(SurfacePartials {
        xv: (vp - vm) / (2.0 * h),
        xt: (tp - tmn) / (2.0 * h),
        xvv: (vp - 2.0 * c + vm) / h2,
        xtt: (tp - 2.0 * c + tmn) / h2,
        xvt: (pp - pm - mp + mm) / (4.0 * h2),
    })
}

/// Oriented unit normal, `None` where `X_v × X_t` vanishes.
pub fn unit_normal(partials: &SurfacePartials, orientation: f64) -> Option<Vec3> {
    let n = partials.cross();
    let len = n.norm();
    if len == 0.0 || !len.is_finite() {
        None
    } else {
        Some(orientation * n / len)
    }
}

/// Quad grid sampled from a patch. Vertex `(i, j)` (angle index `i`, profile
/// index `j`) is stored at `i * n_t + j`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SurfaceMesh {
    pub vertices: Vec<Vec3>,
    /// `None` at singular vertices.
    pub normals: Vec<Option<Vec3>>,
    pub faces: Vec<[usize; 4]>,
    pub grid_shape: (usize, usize),
    pub singular_flags: Vec<bool>,
}

struct Column {
    point: Vec3,
    jet: Option<ProfileJet>,
    singular: bool,
}

pub fn sample_mesh(patch: &HelicalPatch) -> Result<SurfaceMesh> {
    let (nv, nt) = patch.grid;
    let columns: Vec<Column> = (0..nt)
        .into_par_iter()
        .map(|j| {
            let t = patch.t_at(j);
            let singular = patch.is_singular_t(t);
            let point = patch.profile.point(t)?;
            let jet = if singular { None } else { Some(patch.profile.jet(t)?) };
            Ok(Column { point, jet, singular })
        })
        .collect::<Result<_>>()?;
    let orientation = patch.orientation();
    let rows: Vec<Vec<(Vec3, Option<Vec3>, bool)>> = (0..nv)
        .into_par_iter()
        .map(|i| {
            let v = patch.v_at(i);
            columns
                .iter()
                .map(|col| {
                    let x = sweep_point(col.point, v, patch.pitch);
                    let n = col
                        .jet
                        .as_ref()
                        .and_then(|jet| unit_normal(&partials_from_jet(jet, v, patch.pitch), orientation));
                    (x, n, col.singular || n.is_none())
                })
                .collect()
        })
        .collect();
    let mut mesh = SurfaceMesh {
        vertices: Vec::with_capacity(nv * nt),
        normals: Vec::with_capacity(nv * nt),
        faces: Vec::with_capacity((nv - 1) * (nt - 1)),
        grid_shape: (nv, nt),
        singular_flags: Vec::with_capacity(nv * nt),
    };
    for row in rows {
        for (x, n, sing) in row {
            mesh.vertices.push(x);
            mesh.normals.push(if sing { None } else { n });
            mesh.singular_flags.push(sing);
        }
    }
    for i in 0..nv - 1 {
        for j in 0..nt - 1 {
            let a = i * nt + j;
            let b = (i + 1) * nt + j;
            let c = b + 1;
            let d = a + 1;
            // (v, t) order is counterclockwise seen from X_v × X_t
            mesh.faces
                .push(if orientation > 0.0 { [a, b, c, d] } else { [a, d, c, b] });
        }
    }
    Ok(mesh)
}

/// Mesh swept from stored profile points (for example a re-read profile CSV)
/// with the vertex layout of [`sample_mesh`]. Normals come from central
/// differences on the grid, one-sided at the boundary.
pub fn sweep_profile(
    points: &[Vec3],
    pitch: f64,
    v_range: (f64, f64),
    n_v: usize,
    orientation: f64,
) -> Result<SurfaceMesh> {
    let nt = points.len();
    if n_v < 2 || nt < 2 {
        return Err(CrpcError::InvalidParameter(format!(
            "a swept mesh needs at least 2x2 vertices, got {n_v}x{nt}"
        )));
    }
    let vertices: Vec<Vec3> = (0..n_v)
        .flat_map(|i| {
            let v = lerp(v_range, i, n_v);
            points.iter().map(move |&p| sweep_point(p, v, pitch))
        })
        .collect();
    let at = |i: usize, j: usize| vertices[i * nt + j];
    let diff = |lo: Vec3, hi: Vec3| hi - lo;
    let normals: Vec<Option<Vec3>> = (0..n_v)
        .flat_map(|i| (0..nt).map(move |j| (i, j)))
        .map(|(i, j)| {
            let dv = diff(at(i.saturating_sub(1), j), at((i + 1).min(n_v - 1), j));
            let dt = diff(at(i, j.saturating_sub(1)), at(i, (j + 1).min(nt - 1)));
            let n = dv.cross(&dt);
            let len = n.norm();
            (len > 0.0 && len.is_finite()).then(|| orientation.signum() * n / len)
        })
        .collect();
    let singular_flags = normals.iter().map(Option::is_none).collect();
    let faces = (0..n_v - 1)
        .flat_map(|i| (0..nt - 1).map(move |j| (i, j)))
        .map(|(i, j)| {
            let a = i * nt + j;
            let b = (i + 1) * nt + j;
            if orientation > 0.0 {
                [a, b, b + 1, a + 1]
            } else {
                [a, a + 1, b + 1, b]
            }
        })
        .collect();
    Ok(SurfaceMesh {
        vertices,
        normals,
        faces,
        grid_shape: (n_v, nt),
        singular_flags,
    })
}

/// The helix traced by the cusp point, `2p H(v, X0(s_k))`, sampled at `n_v`
/// angles. The cusp point is taken from the `Minus` profile, anchored at `s0`.
pub fn singular_curve(k: f64, c: f64, pitch: f64, v_range: (f64, f64), n_v: usize) -> Result<Vec<Vec3>> {
    if k >= 1.0 {
        return Err(CrpcError::InvalidK {
            k,
            reason: "only surfaces with k < 1 have a singular curve",
        });
    }
    if n_v == 0 {
        return Ok(Vec::new());
    }
    let profile = crate::profile::glued_profile(k, c, BranchTag::Minus)?;
    let cusp = profile.point(profile.t_max())?;
    Ok((0..n_v)
        .map(|i| {
            let v = if n_v == 1 { v_range.0 } else { lerp(v_range, i, n_v) };
            sweep_point(cusp, v, pitch)
        })
        .collect())
}

impl SurfaceMesh {
    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    /// Splits every quad into two triangles along the `a-c` diagonal.
    pub fn triangles(&self) -> Vec<[usize; 3]> {
        self.faces
            .iter()
            .flat_map(|&[a, b, c, d]| [[a, b, c], [a, c, d]])
            .collect()
    }

    /// Wavefront OBJ with `v`, `vn` and `f a//n` quad records. Faces that
    /// touch a singular vertex are written without normal references.
    pub fn write_obj<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(
            out,
            "# helical CRPC surface, grid {}x{}",
            self.grid_shape.0, self.grid_shape.1
        )?;
        for p in &self.vertices {
            writeln!(out, "v {} {} {}", fmt_f64(p.x), fmt_f64(p.y), fmt_f64(p.z))?;
        }
        let mut normal_index = vec![0usize; self.normals.len()];
        let mut next = 1;
        for (i, n) in self.normals.iter().enumerate() {
            if let Some(n) = n {
                writeln!(out, "vn {} {} {}", fmt_f64(n.x), fmt_f64(n.y), fmt_f64(n.z))?;
                normal_index[i] = next;
                next += 1;
            }
        }
        for face in &self.faces {
            let with_normals = face.iter().all(|&i| normal_index[i] > 0);
            write!(out, "f")?;
            for &i in face {
                if with_normals {
                    write!(out, " {}//{}", i + 1, normal_index[i])?;
                } else {
                    write!(out, " {}", i + 1)?;
                }
            }
            writeln!(out)?;
        }
        Ok(())
    }

    /// One row per vertex: `i,j,x,y,z,nx,ny,nz,singular` (empty normal at
    /// singular vertices).
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "i,j,x,y,z,nx,ny,nz,singular")?;
        let nt = self.grid_shape.1;
        for (idx, p) in self.vertices.iter().enumerate() {
            let n = match self.normals[idx] {
                Some(n) => format!("{},{},{}", fmt_f64(n.x), fmt_f64(n.y), fmt_f64(n.z)),
                None => ",,".to_string(),
            };
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                idx / nt,
                idx % nt,
                fmt_f64(p.x),
                fmt_f64(p.y),
                fmt_f64(p.z),
                n,
                self.singular_flags[idx]
            )?;
        }
        Ok(())
    }
}

/// Polyline as OBJ vertices and a single `l` element.
pub fn write_polyline_obj<W: Write>(mut out: W, points: &[Vec3]) -> std::io::Result<()> {
    for p in points {
        writeln!(out, "v {} {} {}", fmt_f64(p.x), fmt_f64(p.y), fmt_f64(p.z))?;
    }
    if !points.is_empty() {
        write!(out, "l")?;
        for i in 1..=points.len() {
            write!(out, " {i}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}

pub fn write_polyline_csv<W: Write>(mut out: W, points: &[Vec3]) -> std::io::Result<()> {
    writeln!(out, "x,y,z")?;
    for p in points {
        writeln!(out, "{},{},{}", fmt_f64(p.x), fmt_f64(p.y), fmt_f64(p.z))?;
    }
    Ok(())
}
