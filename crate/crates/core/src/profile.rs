//! The generating contour of a helical CRPC surface.
//!
//! With the internal pitch fixed to `1/2`, the contour is given in the
//! parameter `s` by
//!
//! ```text
//! h(s) = 2 C s^(k+1) / (s^2 + 1)
//! t(s) = sqrt(h(s) - 1)
//! g(s) = ((k-1) s^2 - (k+1)) / (4 k s) * sqrt(h(s))
//! X0(s) = ( t/2, g, z),   X1(s) = (-t/2, g, -z),   dz/ds = g'(s) / t(s)
//! ```
//!
//! `z` has no elementary antiderivative. Near a root of `h = 1` the integrand
//! behaves like `1/sqrt(s - s0)`, so it is integrated in `u = sqrt(|s - anchor|)`
//! where it is smooth.
//!
//! [`GluedProfile`] joins `X0` and `X1` at a root into one curve
//! parametrised by the signed projection parameter `t`, which is the
//! parametrisation in which the joined curve is smooth.

use std::io::{BufRead, Write};

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{CrpcError, Result};
use crate::format::fmt_f64;
use crate::numeric::{integrate, kronrod21};
use crate::params::{compute_domain_with, cusp_parameter, DomainInfo, ShapeParams};
use crate::tolerance::Tolerances;

pub type Vec3 = Vector3<f64>;

fn check_s(s: f64) -> Result<()> {
    if s > 0.0 && s.is_finite() {
        Ok(())
    } else {
        Err(CrpcError::NonPositiveS(s))
    }
}

/// `h(s) = 2 C s^(k+1) / (s^2 + 1)`, so that `t^2 + 1 = h`.
pub fn h_of_s(s: f64, k: f64, c: f64) -> Result<f64> {
    check_s(s)?;
    Ok(2.0 * c * s.powf(k + 1.0) / (s * s + 1.0))
}

/// `h'(s) = 2 C s^k ((k-1) s^2 + 1 + k) / (s^2 + 1)^2`.
pub fn h_prime_of_s(s: f64, k: f64, c: f64) -> Result<f64> {
    check_s(s)?;
    let w = s * s + 1.0;
    Ok(2.0 * c * s.powf(k) * ((k - 1.0) * s * s + 1.0 + k) / (w * w))
}

/// `t(s) = sqrt(h(s) - 1)`; values of `h` just below one (within the root
/// tolerance) are clamped to `t = 0`.
pub fn t_of_s(s: f64, k: f64, c: f64) -> Result<f64> {
    let h = h_of_s(s, k, c)?;
    let t2 = h - 1.0;
    if t2 < 0.0 {
        if t2 >= -1e-12 {
            return Ok(0.0);
        }
        return Err(CrpcError::OutsideDomain {
            value: s,
            what: format!("I_C (h(s) = {h} < 1)"),
        });
    }
    Ok(t2.sqrt())
}

pub fn g_of_s(s: f64, k: f64, c: f64) -> Result<f64> {
    let h = h_of_s(s, k, c)?;
    Ok(((k - 1.0) * s * s - (k + 1.0)) / (4.0 * k * s) * h.sqrt())
}

/// `g'(s) = h'(s) ((k+1) s^2 - (k-1)) / (8 k s sqrt(h(s)))`.
pub fn g_prime_of_s(s: f64, k: f64, c: f64) -> Result<f64> {
    let h = h_of_s(s, k, c)?;
    let hp = h_prime_of_s(s, k, c)?;
    Ok(hp * ((k + 1.0) * s * s - (k - 1.0)) / (8.0 * k * s * h.sqrt()))
}

/// `dz/dt = 2 g'(s) / h'(s) = ((k+1) s^2 - k + 1) / (4 k s sqrt(h))`, also the
/// `z`-component of the `t`-derivative of the glued profile. Finite at the
/// cusp `s_k`, where `g'` and `h'` vanish together.
pub fn dz_dt_of_s(s: f64, k: f64, c: f64) -> Result<f64> {
    let h = h_of_s(s, k, c)?;
    Ok(((k + 1.0) * s * s - k + 1.0) / (4.0 * k * s * h.sqrt()))
}

/// `s`-derivative of [`dz_dt_of_s`].
pub fn dz_dt_prime_of_s(s: f64, k: f64, c: f64) -> Result<f64> {
    let h = h_of_s(s, k, c)?;
    let hp = h_prime_of_s(s, k, c)?;
    let q = (k + 1.0) * s * s - k + 1.0;
    Ok((2.0 * (k + 1.0) * s - q / s - q * hp / (2.0 * h)) / (4.0 * k * s * h.sqrt()))
}

/// Which of the two solution curves a point belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    X0,
    X1,
}

impl Branch {
    pub fn as_str(&self) -> &'static str {
        match self {
            Branch::X0 => "X0",
            Branch::X1 => "X1",
        }
    }

    fn sign(&self) -> f64 {
        match self {
            Branch::X0 => 1.0,
            Branch::X1 => -1.0,
        }
    }
}

/// Which monotone piece of `t(s)` a glued profile is built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BranchTag {
    /// `k > 1`: `s ∈ [s0, ∞)`, glued at `s0`.
    Full,
    /// `k < 1`: `s ∈ [s0, s_k]`, glued at `s0`.
    Minus,
    /// `k < 1`: `s ∈ [s_k, s0']`, glued at `s0'`.
    Plus,
}

impl BranchTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            BranchTag::Full => "full",
            BranchTag::Minus => "minus",
            BranchTag::Plus => "plus",
        }
    }

    /// `Full` for `k > 1`, `Minus` for `k < 1`.
    pub fn default_for(k: f64) -> BranchTag {
        if k > 1.0 {
            BranchTag::Full
        } else {
            BranchTag::Minus
        }
    }
}

/// One evaluated contour point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileSample {
    pub s: f64,
    /// Projection parameter, `t >= 0`.
    pub t: f64,
    pub g: f64,
    pub z: f64,
    pub branch: Branch,
}

impl ProfileSample {
    pub fn point(&self) -> Vec3 {
        Vec3::new(self.branch.sign() * self.t / 2.0, self.g, self.z)
    }
}

/// Contour integral `z(s) = ∫_{anchor}^{s} g'(σ)/t(σ) dσ` measured in
/// `u = sqrt(|σ - anchor|)` from a root `anchor` of `h = 1`.
#[derive(Debug, Clone)]
struct AnchoredIntegrand {
    k: f64,
    c: f64,
    anchor: f64,
    /// `+1` when `s` grows away from the anchor, `-1` otherwise.
    dir: f64,
    /// `h(anchor) - 1`, zero up to rounding.
    h_defect: f64,
}

impl AnchoredIntegrand {
    fn new(k: f64, c: f64, anchor: f64, dir: f64) -> Self {
        let h_defect = h_of_s(anchor, k, c).map(|h| h - 1.0).unwrap_or(0.0);
        AnchoredIntegrand {
            k,
            c,
            anchor,
            dir,
            h_defect,
        }
    }

    fn s_at(&self, delta: f64) -> f64 {
        self.anchor + self.dir * delta
    }

    fn h(&self, s: f64) -> f64 {
        2.0 * self.c * s.powf(self.k + 1.0) / (s * s + 1.0)
    }

    fn hp(&self, s: f64) -> f64 {
        let w = s * s + 1.0;
        2.0 * self.c * s.powf(self.k) * ((self.k - 1.0) * s * s + 1.0 + self.k) / (w * w)
    }

    /// `t^2` at `s = anchor + dir * delta`, free of the cancellation in
    /// `h(s) - 1` close to the anchor.
    fn t_squared(&self, delta: f64) -> f64 {
        if delta <= 0.0 {
            return 0.0;
        }
        let s = self.s_at(delta);
        let direct = self.h(s) - 1.0;
        if direct > 0.5 {
            return direct;
        }
        // h(s) - h(anchor) = dir * ∫_0^delta h'(anchor + dir x) dx on panels
        // short compared to the distance to the branch point s = 0.
        let mut acc = 0.0;
        let mut x = 0.0;
        let mut panels = 0;
        while x < delta {
            let room = if self.dir > 0.0 {
                0.25 * (self.anchor + x)
            } else {
                0.2 * (self.anchor - x)
            };
            let mut w = room.min(delta - x);
            if panels >= 400 || w <= 0.0 {
                w = delta - x;
            }
            acc += kronrod21(|y| self.hp(self.s_at(y)), x, x + w);
            x += w;
            panels += 1;
        }
        (self.h_defect + self.dir * acc).max(0.0)
    }

    fn t_at_u(&self, u: f64) -> f64 {
        self.t_squared(u * u).sqrt()
    }

    /// `dz/du`.
    fn dz_du(&self, u: f64) -> f64 {
        if u == 0.0 {
            // limit of 2u/t with t ≈ u sqrt(|h'(anchor)|)
            let hp = self.hp(self.anchor);
            let q = self.gp_over_hp(self.anchor);
            return self.dir * 2.0 * q * hp / hp.abs().sqrt();
        }
        let s = self.s_at(u * u);
        let t = self.t_at_u(u);
        if t == 0.0 {
            return self.dz_du(0.0);
        }
        self.dir * 2.0 * u * self.gp_over_hp(s) * self.hp(s) / t
    }

    /// `g'(s) / h'(s)`, finite everywhere.
    fn gp_over_hp(&self, s: f64) -> f64 {
        let k = self.k;
        ((k + 1.0) * s * s - (k - 1.0)) / (8.0 * k * s * self.h(s).sqrt())
    }

    fn integrate(&self, u_lo: f64, u_hi: f64, tol: &Tolerances) -> Result<f64> {
        integrate(
            |u| self.dz_du(u),
            u_lo,
            u_hi,
            tol.quad_abs,
            tol.quad_rel,
            tol.quad_max_panels,
        )
    }
}

/// `z(s) = ∫_{anchor_s}^{s} g'(σ)/t(σ) dσ`.
///
/// Endpoints that are roots of `h = 1` are handled with the substitution
/// `σ = root ± u^2`.
pub fn z_of_s(s: f64, k: f64, c: f64, anchor_s: f64) -> Result<f64> {
    z_of_s_with(s, k, c, anchor_s, &Tolerances::default())
}

pub fn z_of_s_with(s: f64, k: f64, c: f64, anchor_s: f64, tol: &Tolerances) -> Result<f64> {
    // validates ranges
    t_of_s(s, k, c)?;
    t_of_s(anchor_s, k, c)?;
    if s == anchor_s {
        return Ok(0.0);
    }
    let is_root = |x: f64| (h_of_s(x, k, c).unwrap() - 1.0).abs() <= 1e-9;
    let (lo, hi, sign) = if s > anchor_s {
        (anchor_s, s, 1.0)
    } else {
        (s, anchor_s, -1.0)
    };
    let lo_root = is_root(lo);
    let hi_root = is_root(hi);
    let value = match (lo_root, hi_root) {
        (false, false) => integrate(
            |x| {
                let t = t_of_s(x, k, c).unwrap_or(f64::NAN);
                g_prime_of_s(x, k, c).unwrap_or(f64::NAN) / t
            },
            lo,
            hi,
            tol.quad_abs,
            tol.quad_rel,
            tol.quad_max_panels,
        )?,
        (true, false) => {
            let f = AnchoredIntegrand::new(k, c, lo, 1.0);
            f.integrate(0.0, (hi - lo).sqrt(), tol)?
        }
        (false, true) => {
            let f = AnchoredIntegrand::new(k, c, hi, -1.0);
            -f.integrate(0.0, (hi - lo).sqrt(), tol)?
        }
        (true, true) => {
            let mid = 0.5 * (lo + hi);
            let left = AnchoredIntegrand::new(k, c, lo, 1.0);
            let right = AnchoredIntegrand::new(k, c, hi, -1.0);
            let half = (mid - lo).sqrt();
            left.integrate(0.0, half, tol)? - right.integrate(0.0, (hi - mid).sqrt(), tol)?
        }
    };
    Ok(sign * value)
}

/// Point `X0(s) = (t/2, g, z)` or `X1(s) = (-t/2, g, -z)` with `z(anchor_s) = 0`.
pub fn contour_point(s: f64, k: f64, c: f64, branch: Branch, anchor_s: f64) -> Result<Vec3> {
    let t = t_of_s(s, k, c)?;
    let g = g_of_s(s, k, c)?;
    let z = z_of_s(s, k, c, anchor_s)?;
    let sg = branch.sign();
    Ok(Vec3::new(sg * t / 2.0, g, sg * z))
}

/// Tangent of a contour in the `s` parametrisation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ContourTangent {
    Finite(Vec3),
    /// At a root of `h = 1`, where `t = 0` and `dx/ds ~ 1/t` diverges.
    Unbounded,
}

impl ContourTangent {
    pub fn finite(self) -> Option<Vec3> {
        match self {
            ContourTangent::Finite(v) => Some(v),
            ContourTangent::Unbounded => None,
        }
    }
}

/// `dX/ds = h'(s) (1/(4t), Q/(8 k s sqrt h), Q/(8 k s t sqrt h))` with
/// `Q = (k+1) s^2 - k + 1`; `X1` flips the `x` and `z` components.
pub fn contour_tangent(s: f64, k: f64, c: f64, branch: Branch) -> Result<ContourTangent> {
    let t = t_of_s(s, k, c)?;
    if t == 0.0 {
        return Ok(ContourTangent::Unbounded);
    }
    let h = h_of_s(s, k, c)?;
    let hp = h_prime_of_s(s, k, c)?;
    let q = (k + 1.0) * s * s - k + 1.0;
    let y = q / (8.0 * k * s * h.sqrt());
    let sg = branch.sign();
    Ok(ContourTangent::Finite(hp * Vec3::new(sg / (4.0 * t), y, sg * y / t)))
}

/// Discriminant `D(t, g) = 16 k^2 g^2 + 4 (k^2 - 1)(1 + t^2)` of the ODE read
/// as a quadratic in `(t + 1/t) g'(t)`; the two solution families meet where
/// `D = 0`.
pub fn discriminant(t: f64, g: f64, k: f64) -> f64 {
    16.0 * k * k * g * g + 4.0 * (k * k - 1.0) * (1.0 + t * t)
}

/// `∇D = (8 (k^2 - 1) t, 32 k^2 g)`.
pub fn discriminant_gradient(t: f64, g: f64, k: f64) -> (f64, f64) {
    (8.0 * (k * k - 1.0) * t, 32.0 * k * k * g)
}

/// `∇D · T` at the cusp `s_k`, with the limit tangent
/// `T = (1/(4t), Q/(8 k s sqrt h))` and `∇D` taken in `(t, g)`.
pub fn cusp_discriminant_slope(k: f64, c: f64) -> Result<f64> {
    let sk = cusp_parameter(k)?;
    let t = t_of_s(sk, k, c)?;
    let h = h_of_s(sk, k, c)?;
    let q = (k + 1.0) * sk * sk - k + 1.0;
    let (dt, dg) = discriminant_gradient(t, g_of_s(sk, k, c)?, k);
    Ok(dt / (4.0 * t) + dg * q / (8.0 * k * sk * h.sqrt()))
}

/// Position and first two `t`-derivatives of a glued profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileJet {
    pub t: f64,
    pub s: f64,
    pub point: Vec3,
    pub d1: Vec3,
    pub d2: Vec3,
}

/// The contour as a single curve in the signed parameter `t`: `X0` on `t > 0`,
/// `X1` on `t < 0`, glued at `t = 0` where both meet the `y`-axis.
#[derive(Debug, Clone)]
pub struct GluedProfile {
    params: ShapeParams,
    domain: DomainInfo,
    tag: BranchTag,
    integrand: AnchoredIntegrand,
    /// Extent of `u = sqrt(|s - anchor|)` (infinite for `Full`).
    u_max: f64,
    /// `t_k` for `Minus`/`Plus`, infinite for `Full`.
    t_max: f64,
    /// `(u_j, z(u_j))`, increasing in `u`, starting at `(0, 0)`.
    checkpoints: Vec<(f64, f64)>,
    tol: Tolerances,
    mirror: bool,
    g_scale: f64,
}

const CHECKPOINTS: usize = 48;
const FULL_COVER_T: f64 = 64.0;

impl GluedProfile {
    pub fn new(params: ShapeParams, tag: BranchTag) -> Result<Self> {
        Self::with_tolerances(params, tag, Tolerances::default())
    }

    pub fn with_tolerances(params: ShapeParams, tag: BranchTag, tol: Tolerances) -> Result<Self> {
        let (k, c) = (params.k, params.c);
        match (tag, k > 1.0) {
            (BranchTag::Full, false) => return Err(CrpcError::BranchMismatch { branch: "full", k }),
            (BranchTag::Minus, true) | (BranchTag::Plus, true) => {
                return Err(CrpcError::BranchMismatch {
                    branch: tag.as_str(),
                    k,
                })
            }
            _ => {}
        }
        let domain = compute_domain_with(k, c, &tol)?;
        let (anchor, dir) = match tag {
            BranchTag::Full | BranchTag::Minus => (domain.s0, 1.0),
            BranchTag::Plus => (domain.s0_prime.expect("k < 1"), -1.0),
        };
        let integrand = AnchoredIntegrand::new(k, c, anchor, dir);
        let mut profile = GluedProfile {
            params,
            domain,
            tag,
            integrand,
            u_max: f64::INFINITY,
            t_max: f64::INFINITY,
            checkpoints: vec![(0.0, 0.0)],
            tol,
            mirror: false,
            g_scale: 1.0,
        };
        let u_cover = if let Some(sk) = domain.s_k {
            profile.u_max = (sk - anchor).abs().sqrt();
            profile.t_max = t_of_s(sk, k, c)?;
            profile.u_max
        } else {
            // cover t up to FULL_COVER_T, but never beyond s ~ 1e12 * s0
            let u_limit = (1e12 * anchor.max(1.0)).sqrt();
            if profile.integrand.t_at_u(u_limit) <= FULL_COVER_T {
                u_limit
            } else {
                profile.invert_u(FULL_COVER_T)?
            }
        };
        let mut z = 0.0;
        let mut u_prev = 0.0;
        for j in 1..=CHECKPOINTS {
            let u = u_cover * j as f64 / CHECKPOINTS as f64;
            z += profile.integrand.integrate(u_prev, u, &profile.tol)?;
            profile.checkpoints.push((u, z));
            u_prev = u;
        }
        Ok(profile)
    }

    /// Reflects the profile by the half turn `(x, y, z) -> (x, -y, -z)` about
    /// the `x`-axis. This is the solution family with the opposite sign of the
    /// `cosh` substitution; the swept surface is congruent.
    pub fn mirrored(mut self) -> Self {
        self.mirror = !self.mirror;
        self
    }

    /// Test hook: scales the `y`-coordinate (and its derivatives) by `factor`.
    /// Any factor other than one destroys the CRPC property.
    pub fn with_g_scale(mut self, factor: f64) -> Self {
        self.g_scale = factor;
        self
    }

    pub fn params(&self) -> &ShapeParams {
        &self.params
    }

    pub fn domain(&self) -> &DomainInfo {
        &self.domain
    }

    pub fn tag(&self) -> BranchTag {
        self.tag
    }

    pub fn tolerances(&self) -> &Tolerances {
        &self.tol
    }

    /// Root of `h = 1` at which the two branches are glued.
    pub fn anchor(&self) -> f64 {
        self.integrand.anchor
    }

    /// Largest admissible `|t|` (`t_k` for `k < 1`, infinite otherwise).
    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    pub fn is_mirrored(&self) -> bool {
        self.mirror
    }

    fn invert_u(&self, tau: f64) -> Result<f64> {
        let f = &self.integrand;
        if tau == 0.0 {
            return Ok(0.0);
        }
        let slope0 = f.hp(f.anchor).abs().sqrt();
        let mut lo = 0.0;
        let mut hi;
        if self.u_max.is_finite() {
            hi = self.u_max;
            if f.t_at_u(hi) <= tau {
                return Ok(hi);
            }
        } else {
            hi = (tau / slope0).max(f64::MIN_POSITIVE);
            let mut guard = 0;
            while f.t_at_u(hi) < tau {
                lo = hi;
                hi *= 2.0;
                guard += 1;
                if guard > 2000 || !f.s_at(hi * hi).is_finite() {
                    return Err(CrpcError::OutsideDomain {
                        value: tau,
                        what: "representable range of the profile".into(),
                    });
                }
            }
        }
        let mut u = (tau / slope0).clamp(lo, hi);
        if !(u > lo && u < hi) {
            u = 0.5 * (lo + hi);
        }
        for _ in 0..200 {
            let t = f.t_at_u(u);
            let r = t - tau;
            if r == 0.0 {
                return Ok(u);
            }
            if r < 0.0 {
                lo = u;
            } else {
                hi = u;
            }
            // dt/du = dir * h'(s) * u / t
            let s = f.s_at(u * u);
            let dtdu = if t > 0.0 { f.dir * f.hp(s) * u / t } else { slope0 };
            let mut next = u - r / dtdu;
            let newton_ok = dtdu > 0.0 && next > lo && next < hi;
            if !newton_ok {
                next = 0.5 * (lo + hi);
            }
            let step = (next - u).abs();
            u = next;
            let scale = u.abs().max(f64::MIN_POSITIVE);
            if newton_ok && step <= 4.0 * f64::EPSILON * scale {
                return Ok(u);
            }
            if hi - lo <= 2.0 * f64::EPSILON * scale {
                return Ok(u);
            }
            if !newton_ok && hi - lo <= self.tol.inversion_rel * 1e-3 * scale {
                return Ok(u);
            }
        }
        Ok(u)
    }

    fn check_t(&self, t: f64) -> Result<f64> {
        let tau = t.abs();
        if !tau.is_finite() || tau > self.t_max * (1.0 + 1e-14) {
            return Err(CrpcError::OutsideDomain {
                value: t,
                what: format!("[-{}, {}]", self.t_max, self.t_max),
            });
        }
        Ok(tau.min(self.t_max))
    }

    /// Solution parameter `s` of the point with projection parameter `t`.
    pub fn s_of_t(&self, t: f64) -> Result<f64> {
        let tau = self.check_t(t)?;
        let u = self.invert_u(tau)?;
        Ok(self.integrand.s_at(u * u))
    }

    fn z_of_u(&self, u: f64) -> Result<f64> {
        let j = match self.checkpoints.binary_search_by(|(uj, _)| uj.total_cmp(&u)) {
            Ok(j) => return Ok(self.checkpoints[j].1),
            Err(j) => j - 1,
        };
        let (uj, zj) = self.checkpoints[j];
        Ok(zj + self.integrand.integrate(uj, u, &self.tol)?)
    }

    fn orient(&self, v: Vec3) -> Vec3 {
        let y = self.g_scale * v.y;
        if self.mirror {
            Vec3::new(v.x, -y, -v.z)
        } else {
            Vec3::new(v.x, y, v.z)
        }
    }

    /// Top view `(x, y) = (t/2, g)` without evaluating the `z` integral.
    pub fn top_view(&self, t: f64) -> Result<(f64, f64)> {
        let s = self.s_of_t(t)?;
        let (k, c) = (self.params.k, self.params.c);
        let p = self.orient(Vec3::new(t / 2.0, g_of_s(s, k, c)?, 0.0));
        Ok((p.x, p.y))
    }

    pub fn point(&self, t: f64) -> Result<Vec3> {
        let tau = self.check_t(t)?;
        let u = self.invert_u(tau)?;
        let s = self.integrand.s_at(u * u);
        let (k, c) = (self.params.k, self.params.c);
        let z = self.z_of_u(u)?;
        let sign = if t < 0.0 { -1.0 } else { 1.0 };
        Ok(self.orient(Vec3::new(t / 2.0, g_of_s(s, k, c)?, sign * z)))
    }

    pub fn sample(&self, t: f64) -> Result<ProfileSample> {
        let p = self.point(t)?;
        Ok(ProfileSample {
            s: self.s_of_t(t)?,
            t: t.abs(),
            g: p.y,
            z: p.z,
            branch: if t < 0.0 { Branch::X1 } else { Branch::X0 },
        })
    }

    /// Point and analytic `t`-derivatives
    /// `P' = (1/2, t q, q)`, `P'' = (0, q + t dq/dt, dq/dt)` with
    /// `q = dz/dt` and `dq/dt = 2 t q'(s) / h'(s)`.
    ///
    /// `P''` does not exist at the cusp `|t| = t_k`.
    pub fn jet(&self, t: f64) -> Result<ProfileJet> {
        let point = self.point(t)?;
        let (d1, d2, s) = self.derivatives(t)?;
        Ok(ProfileJet { t, s, point, d1, d2 })
    }

    /// Analytic first and second `t`-derivatives (no `z` quadrature involved).
    pub fn derivatives(&self, t: f64) -> Result<(Vec3, Vec3, f64)> {
        let s = self.s_of_t(t)?;
        let (k, c) = (self.params.k, self.params.c);
        let q = dz_dt_of_s(s, k, c)?;
        let d1 = Vec3::new(0.5, t * q, q);
        let dq_dt = if t == 0.0 {
            0.0
        } else {
            let hp = h_prime_of_s(s, k, c)?;
            if hp == 0.0 || t.abs() >= self.t_max {
                return Err(CrpcError::SingularPoint { t });
            }
            2.0 * t * dz_dt_prime_of_s(s, k, c)? / hp
        };
        if !dq_dt.is_finite() {
            return Err(CrpcError::SingularPoint { t });
        }
        let d2 = Vec3::new(0.0, q + t * dq_dt, dq_dt);
        Ok((self.orient(d1), self.orient(d2), s))
    }

    /// The glue point `X(0) = (0, g(anchor), 0)` on the `y`-axis.
    pub fn glue_point(&self) -> Result<Vec3> {
        self.point(0.0)
    }
}

/// One-sided `t`-derivatives of orders `0..=4` of a glued profile at the glue
/// point, estimated from Chebyshev interpolation of samples on `[0, δ]` and
/// `[-δ, 0]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GlueDerivatives {
    pub delta: f64,
    pub nodes: usize,
    /// `right[n]` is the `n`-th derivative from `t > 0`.
    pub right: Vec<[f64; 3]>,
    pub left: Vec<[f64; 3]>,
}

impl GlueDerivatives {
    /// Max over orders `1..=4` and coordinates of `|left - right| / max(1, |right|)`.
    pub fn mismatch(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for n in 1..self.right.len() {
            for i in 0..3 {
                let (l, r) = (self.left[n][i], self.right[n][i]);
                worst = worst.max((l - r).abs() / r.abs().max(1.0));
            }
        }
        worst
    }
}

/// `T_n^(r)(1) = prod_{j<r} (n^2 - j^2) / (2j + 1)`.
fn chebyshev_endpoint_derivative(n: usize, r: usize) -> f64 {
    (0..r).fold(1.0, |acc, j| {
        acc * ((n * n) as f64 - (j * j) as f64) / (2 * j + 1) as f64
    })
}

/// Derivatives of orders `0..=orders` at `t = 0` of the Chebyshev interpolant
/// of `f` on the Lobatto nodes of `[0, sign δ]`.
fn endpoint_derivatives(
    f: impl Fn(f64) -> Result<Vec3>,
    sign: f64,
    delta: f64,
    n: usize,
    orders: usize,
) -> Result<Vec<Vec3>> {
    use std::f64::consts::PI;
    // ξ = 1 is t = 0
    let values: Vec<Vec3> = (0..=n)
        .map(|j| f(sign * delta * (1.0 - (j as f64 * PI / n as f64).cos()) / 2.0))
        .collect::<Result<_>>()?;
    let coef: Vec<Vec3> = (0..=n)
        .map(|m| {
            let acc = values.iter().enumerate().fold(Vec3::zeros(), |acc, (j, v)| {
                let w = if j == 0 || j == n { 0.5 } else { 1.0 };
                acc + w * (m as f64 * j as f64 * PI / n as f64).cos() * v
            });
            acc * if m == 0 || m == n {
                1.0 / n as f64
            } else {
                2.0 / n as f64
            }
        })
        .collect();
    let dxi = -2.0 / (sign * delta);
    Ok((0..=orders)
        .map(|r| {
            let d = coef.iter().enumerate().fold(Vec3::zeros(), |acc, (m, c)| {
                acc + chebyshev_endpoint_derivative(m, r) * c
            });
            d * dxi.powi(r as i32)
        })
        .collect())
}

pub const GLUE_DELTA: f64 = 0.4;
pub const GLUE_NODES: usize = 16;

/// Orders `1..=4` come from interpolating the analytic first derivative, which
/// avoids the quadrature noise carried by `z`.
pub fn glue_derivatives(profile: &GluedProfile, delta: f64, nodes: usize) -> Result<GlueDerivatives> {
    let n = nodes.max(4);
    let delta = delta.min(0.5 * profile.t_max());
    let p0 = profile.point(0.0)?;
    let side = |sign: f64| -> Result<Vec<[f64; 3]>> {
        let higher = endpoint_derivatives(|t| Ok(profile.derivatives(t)?.0), sign, delta, n, 3)?;
        Ok(std::iter::once(p0).chain(higher).map(|d| [d.x, d.y, d.z]).collect())
    };
    Ok(GlueDerivatives {
        delta,
        nodes: n,
        right: side(1.0)?,
        left: side(-1.0)?,
    })
}

/// Glued profile for `(k, C)` at the normalised pitch.
pub fn glued_profile(k: f64, c: f64, tag: BranchTag) -> Result<GluedProfile> {
    GluedProfile::new(ShapeParams::normalized(k, c)?, tag)
}

/// The two cusp-free pieces `(X^-, X^+)` of a positively curved surface.
/// They share the cusp point at `s_k` up to their independent `z` anchors.
pub fn split_at_cusp(k: f64, c: f64) -> Result<(GluedProfile, GluedProfile)> {
    if k >= 1.0 {
        return Err(CrpcError::InvalidK {
            k,
            reason: "only surfaces with k < 1 have a cusp",
        });
    }
    let params = ShapeParams::normalized(k, c)?;
    Ok((
        GluedProfile::new(params, BranchTag::Minus)?,
        GluedProfile::new(params, BranchTag::Plus)?,
    ))
}

/// Samples `count` evenly spaced `t` values over `[-t_extent, t_extent]`.
pub fn sample_profile(profile: &GluedProfile, t_extent: f64, count: usize) -> Result<Vec<ProfileSample>> {
    let ext = t_extent.min(profile.t_max());
    (0..count)
        .map(|i| {
            let t = if count == 1 {
                0.0
            } else {
                -ext + 2.0 * ext * i as f64 / (count - 1) as f64
            };
            profile.sample(t)
        })
        .collect()
}

pub const PROFILE_CSV_HEADER: &str = "s,t,g,x,y,z,branch";

pub fn write_profile_csv<W: Write>(mut out: W, samples: &[ProfileSample]) -> std::io::Result<()> {
    writeln!(out, "{PROFILE_CSV_HEADER}")?;
    for smp in samples {
        let p = smp.point();
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            fmt_f64(smp.s),
            fmt_f64(smp.t),
            fmt_f64(smp.g),
            fmt_f64(p.x),
            fmt_f64(p.y),
            fmt_f64(p.z),
            smp.branch.as_str()
        )?;
    }
    Ok(())
}

pub fn read_profile_csv<R: BufRead>(input: R) -> Result<Vec<ProfileSample>> {
    let bad = |msg: String| CrpcError::InvalidParameter(msg);
    let mut lines = input.lines();
    let header = lines
        .next()
        .ok_or_else(|| bad("empty profile CSV".into()))?
        .map_err(|e| bad(e.to_string()))?;
    if header.trim() != PROFILE_CSV_HEADER {
        return Err(bad(format!("unexpected header {header:?}")));
    }
    let mut out = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line.map_err(|e| bad(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 7 {
            return Err(bad(format!("line {}: expected 7 columns", i + 2)));
        }
        let num = |j: usize| -> Result<f64> { cols[j].parse::<f64>().map_err(|e| bad(format!("line {}: {e}", i + 2))) };
        let branch = match cols[6].trim() {
            "X0" => Branch::X0,
            "X1" => Branch::X1,
            other => return Err(bad(format!("line {}: unknown branch {other}", i + 2))),
        };
        let sample = ProfileSample {
            s: num(0)?,
            t: num(1)?,
            g: num(2)?,
            z: num(5)?,
            branch,
        };
        let _x = num(3)?;
        out.push(sample);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::compute_domain;

    #[test]
    fn h_values() {
        assert_eq!(h_of_s(1.0, 2.0, 1.0).unwrap(), 1.0);
        assert!(h_of_s(1e-12, 2.0, 1.0).unwrap() < 1e-30);
        assert!((h_of_s(2f64.sqrt(), 3.0, 0.375).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(h_of_s(0.0, 2.0, 1.0), Err(CrpcError::NonPositiveS(0.0)));
        assert!(h_prime_of_s(-1.0, 2.0, 1.0).is_err());
    }

    #[test]
    fn t_values() {
        assert_eq!(t_of_s(1.0, 2.0, 1.0).unwrap(), 0.0);
        assert!((t_of_s(2.0, 2.0, 1.0).unwrap() - (11.0f64 / 5.0).sqrt()).abs() < 1e-15);
        assert!(matches!(t_of_s(0.5, 2.0, 1.0), Err(CrpcError::OutsideDomain { .. })));
    }

    #[test]
    fn t_is_maximal_at_cusp() {
        let d = compute_domain(0.5, 2.0).unwrap();
        let sk = d.s_k.unwrap();
        let tk = t_of_s(sk, 0.5, 2.0).unwrap();
        for i in 1..200 {
            let s = d.s0 + (d.s0_prime.unwrap() - d.s0) * i as f64 / 200.0;
            assert!(t_of_s(s, 0.5, 2.0).unwrap() <= tk);
        }
    }

    #[test]
    fn g_values() {
        assert!(g_of_s(2f64.sqrt(), 3.0, 0.7).unwrap().abs() < 1e-16);
        assert!((g_of_s(1.0, 2.0, 1.0).unwrap() + 0.25).abs() < 1e-16);
        let expect = (0.8f64).sqrt() / 6.0;
        assert!((g_of_s(2.0, 3.0, 0.125).unwrap() - expect).abs() < 1e-15);
    }

    #[test]
    fn g_prime_matches_central_differences() {
        for &(k, c) in &[(3.0, 1.0), (2.0, 1.0), (0.5, 2.0), (1.5, 0.3)] {
            for &s in &[0.7, 1.3, 2.9, 5.0] {
                let hs = 1e-6 * s;
                let fd = (g_of_s(s + hs, k, c).unwrap() - g_of_s(s - hs, k, c).unwrap()) / (2.0 * hs);
                let exact = g_prime_of_s(s, k, c).unwrap();
                assert!((fd - exact).abs() <= 1e-8 * exact.abs().max(1e-3), "{k} {c} {s}");
            }
        }
    }

    #[test]
    fn z_anchor_is_zero() {
        assert_eq!(z_of_s(1.0, 2.0, 1.0, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn z_derivative_is_g_prime_over_t() {
        let (k, c) = (2.0, 1.0);
        for &s in &[1.2, 1.7, 3.0] {
            let hs = 1e-5;
            let fd = (z_of_s(s + hs, k, c, 1.0).unwrap() - z_of_s(s - hs, k, c, 1.0).unwrap()) / (2.0 * hs);
            let exact = g_prime_of_s(s, k, c).unwrap() / t_of_s(s, k, c).unwrap();
            assert!((fd - exact).abs() <= 1e-6 * exact.abs());
        }
    }

    #[test]
    fn z_between_two_roots() {
        let (k, c) = (0.5, 2.0);
        let d = compute_domain(k, c).unwrap();
        let sk = d.s_k.unwrap();
        let whole = z_of_s(d.s0_prime.unwrap(), k, c, d.s0).unwrap();
        let a = z_of_s(sk, k, c, d.s0).unwrap();
        let b = z_of_s(d.s0_prime.unwrap(), k, c, sk).unwrap();
        assert!((whole - (a + b)).abs() < 1e-9);
    }

    #[test]
    fn contour_points_share_y() {
        let (k, c) = (2.0, 1.0);
        for &s in &[1.0, 1.5, 2.5] {
            let p0 = contour_point(s, k, c, Branch::X0, 1.0).unwrap();
            let p1 = contour_point(s, k, c, Branch::X1, 1.0).unwrap();
            assert_eq!(p0.y, p1.y);
            assert_eq!(p0.x, -p1.x);
            assert_eq!(p0.z, -p1.z);
        }
        let glue = contour_point(1.0, k, c, Branch::X0, 1.0).unwrap();
        assert_eq!(glue, Vec3::new(0.0, -0.25, 0.0));
    }

    #[test]
    fn axis_point_lies_on_surface_at_critical_c() {
        let s0 = compute_domain(3.0, 0.375).unwrap().s0;
        let p = contour_point(s0, 3.0, 0.375, Branch::X0, s0).unwrap();
        assert!(p.norm() < 1e-15);
    }

    #[test]
    fn tangent_unbounded_at_root_and_zero_at_cusp() {
        assert_eq!(
            contour_tangent(1.0, 2.0, 1.0, Branch::X0).unwrap(),
            ContourTangent::Unbounded
        );
        let sk = 3f64.sqrt();
        let v = contour_tangent(sk, 0.5, 2.0, Branch::X0).unwrap().finite().unwrap();
        assert!(v.norm() < 1e-15);
    }

    #[test]
    fn tangent_matches_finite_differences() {
        let (k, c, s) = (2.0, 1.0, 2.0);
        for branch in [Branch::X0, Branch::X1] {
            let hs = 1e-5;
            let fd = (contour_point(s + hs, k, c, branch, 1.0).unwrap()
                - contour_point(s - hs, k, c, branch, 1.0).unwrap())
                / (2.0 * hs);
            let exact = contour_tangent(s, k, c, branch).unwrap().finite().unwrap();
            assert!((fd - exact).norm() <= 1e-6 * exact.norm());
        }
    }

    #[test]
    fn branch_tags_checked() {
        assert!(matches!(
            glued_profile(0.5, 2.0, BranchTag::Full),
            Err(CrpcError::BranchMismatch { .. })
        ));
        assert!(matches!(
            glued_profile(3.0, 1.0, BranchTag::Plus),
            Err(CrpcError::BranchMismatch { .. })
        ));
        assert!(matches!(split_at_cusp(2.0, 1.0), Err(CrpcError::InvalidK { .. })));
    }

    #[test]
    fn glued_profile_symmetry() {
        let p = glued_profile(3.0, 1.0, BranchTag::Full).unwrap();
        for &t in &[0.1, 0.7, 2.5, 30.0, 80.0] {
            let a = p.point(t).unwrap();
            let b = p.point(-t).unwrap();
            assert_eq!(a.y, b.y);
            assert_eq!(a.x, -b.x);
            assert_eq!(a.z, -b.z);
        }
        let glue = p.glue_point().unwrap();
        assert_eq!((glue.x, glue.z), (0.0, 0.0));
    }

    #[test]
    fn glued_profile_matches_direct_contour() {
        let (k, c) = (2.0, 1.0);
        let p = glued_profile(k, c, BranchTag::Full).unwrap();
        for &s in &[1.01, 1.5, 4.0] {
            let t = t_of_s(s, k, c).unwrap();
            let direct = contour_point(s, k, c, Branch::X0, 1.0).unwrap();
            let glued = p.point(t).unwrap();
            assert!((direct - glued).norm() < 1e-9, "{s}: {direct} vs {glued}");
            assert!((p.s_of_t(t).unwrap() - s).abs() < 1e-12 * s);
        }
    }

    #[test]
    fn small_k_domain_is_bounded() {
        let (minus, plus) = split_at_cusp(0.5, 2.0).unwrap();
        let tk = minus.t_max();
        assert_eq!(tk, plus.t_max());
        assert!(minus.point(tk * 1.001).is_err());
        let a = minus.point(tk).unwrap();
        let b = plus.point(tk).unwrap();
        assert!((a.x - b.x).abs() < 1e-15 && (a.y - b.y).abs() < 1e-9);
        assert!(matches!(minus.jet(tk), Err(CrpcError::SingularPoint { .. })));
    }

    #[test]
    fn cusp_discriminant_vanishes() {
        let (k, c) = (0.5, 2.0);
        let sk = 3f64.sqrt();
        let d = discriminant(t_of_s(sk, k, c).unwrap(), g_of_s(sk, k, c).unwrap(), k);
        assert!(d.abs() < 1e-12);
        for (k, c) in [(0.5, 2.0), (0.5, 10.0), (0.6, 3.0), (0.2, 40.0)] {
            let slope = cusp_discriminant_slope(k, c).unwrap();
            assert!((slope + 6.0 + 2.0 * k * k).abs() < 1e-10, "{k} {c}: {slope}");
        }
        assert!(cusp_discriminant_slope(3.0, 1.0).is_err());
    }

    #[test]
    fn glue_is_smooth() {
        for (k, c, tag) in [
            (3.0, 1.0, BranchTag::Full),
            (3.0, 10.0, BranchTag::Full),
            (2.0, 0.3, BranchTag::Full),
            (0.5, 2.0, BranchTag::Minus),
            (0.5, 2.0, BranchTag::Plus),
            (0.6, 3.0, BranchTag::Plus),
        ] {
            let p = glued_profile(k, c, tag).unwrap();
            let d = glue_derivatives(&p, GLUE_DELTA, GLUE_NODES).unwrap();
            let q = d.right[1];
            assert!((q[0] - 0.5).abs() < 1e-9, "{q:?}");
            assert!(
                d.mismatch() <= 1e-5,
                "{k} {tag:?}: {} {:?} {:?}",
                d.mismatch(),
                d.right,
                d.left
            );
        }
    }

    #[test]
    fn csv_round_trip() {
        let p = glued_profile(3.0, 1.0, BranchTag::Full).unwrap();
        let samples = sample_profile(&p, 2.0, 9).unwrap();
        let mut buf = Vec::new();
        write_profile_csv(&mut buf, &samples).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("s,t,g,x,y,z,branch\n"));
        let back = read_profile_csv(&buf[..]).unwrap();
        assert_eq!(back, samples);
    }
}
