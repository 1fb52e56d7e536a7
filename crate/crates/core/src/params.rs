//! Parameter algebra: the curvature ratio `a`, the invariant
//! `k = |1 - a| / |1 + a|`, the shape constant `C` and the solution domain
//! in the parameter `s`.
//!
//! `k` is the canonical parameter used everywhere internally. It does not
//! distinguish `a` from `1/a`, which is exactly the ambiguity of labelling the
//! two principal directions of a helical surface.

use serde::{Deserialize, Serialize};

use crate::error::{CrpcError, DegenerateCase, Result};
use crate::numeric::{bisect, newton_polish};
use crate::profile::{h_of_s, h_prime_of_s};
use crate::tolerance::Tolerances;

/// Sign of the Gaussian curvature of the surfaces belonging to a given `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GaussSign {
    /// `k > 1`, `a < 0`.
    Negative,
    /// `k < 1`, `a > 0`.
    Positive,
}

impl GaussSign {
    pub fn of_k(k: f64) -> GaussSign {
        if k < 1.0 {
            GaussSign::Positive
        } else {
            GaussSign::Negative
        }
    }
}

/// A principal curvature ratio together with its invariant `k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvatureSpec {
    pub a: f64,
    pub k: f64,
    pub gauss_sign: GaussSign,
}

impl CurvatureSpec {
    pub fn from_a(a: f64) -> Result<Self> {
        let k = k_from_a(a)?;
        Ok(CurvatureSpec {
            a,
            k,
            gauss_sign: GaussSign::of_k(k),
        })
    }

    /// Builds the spec from `k`, choosing the representative `|a| < 1`.
    pub fn from_k(k: f64) -> Result<Self> {
        let (a_low, _) = a_pair_from_k(k)?;
        Ok(CurvatureSpec {
            a: a_low,
            k,
            gauss_sign: GaussSign::of_k(k),
        })
    }

    /// Both ratios `{a, 1/a}` that share this `k`.
    pub fn ratio_pair(&self) -> (f64, f64) {
        a_pair_from_k(self.k).expect("validated on construction")
    }
}

fn check_k(k: f64) -> Result<()> {
    if !k.is_finite() {
        return Err(CrpcError::DegenerateRatio(if k == f64::INFINITY {
            DegenerateCase::Minimal
        } else {
            DegenerateCase::NonFinite
        }));
    }
    if k == 0.0 {
        return Err(CrpcError::DegenerateRatio(DegenerateCase::SpherePlane));
    }
    if k == 1.0 {
        return Err(CrpcError::DegenerateRatio(DegenerateCase::Developable));
    }
    if k < 0.0 {
        return Err(CrpcError::InvalidK {
            k,
            reason: "k must be positive",
        });
    }
    Ok(())
}

/// `k = |1 - a| / |1 + a|`.
pub fn k_from_a(a: f64) -> Result<f64> {
    if !a.is_finite() {
        return Err(CrpcError::DegenerateRatio(DegenerateCase::NonFinite));
    }
    if a == 1.0 {
        return Err(CrpcError::DegenerateRatio(DegenerateCase::SpherePlane));
    }
    if a == -1.0 {
        return Err(CrpcError::DegenerateRatio(DegenerateCase::Minimal));
    }
    if a == 0.0 {
        return Err(CrpcError::DegenerateRatio(DegenerateCase::Developable));
    }
    // Always evaluated at the reciprocal with |a| >= 1, so a and 1/a agree
    // whenever 1/(1/a) == a.
    let b = if a.abs() < 1.0 { 1.0 / a } else { a };
    let (num, den) = ((1.0 - b).abs(), (1.0 + b).abs());
    Ok(num / den)
}

/// The two ratios `(a_low, a_high) = ((1-k)/(1+k), (1+k)/(1-k))` with `k(a) = k`.
pub fn a_pair_from_k(k: f64) -> Result<(f64, f64)> {
    check_k(k)?;
    let a_low = (1.0 - k) / (1.0 + k);
    let a_high = (1.0 + k) / (1.0 - k);
    Ok((a_low, a_high))
}

/// Shape constant `C_k` at which the profile touches the `(x, z)`-plane and
/// the helical axis lies on the surface. Defined for `k > 1` only.
pub fn critical_c(k: f64) -> Result<f64> {
    check_k(k)?;
    if k <= 1.0 {
        return Err(CrpcError::InvalidK {
            k,
            reason: "C_k classifies the negatively curved case k > 1 only",
        });
    }
    Ok(k * (k - 1.0).powf((k - 1.0) / 2.0) / (k + 1.0).powf((k + 1.0) / 2.0))
}

/// Cusp parameter `s_k = sqrt((1+k)/(1-k))` for `0 < k < 1`.
pub fn cusp_parameter(k: f64) -> Result<f64> {
    check_k(k)?;
    if k >= 1.0 {
        return Err(CrpcError::InvalidK {
            k,
            reason: "cusps only occur for k < 1",
        });
    }
    Ok(((1.0 + k) / (1.0 - k)).sqrt())
}

/// Smallest admissible `C` for `0 < k < 1`.
///
/// This threshold is derived rather than quoted: `h(s) = 2 C s^(k+1) / (s^2+1)`
/// attains its maximum at `s_k`, so the domain `{h > 1}` is nonempty exactly
/// when `h(s_k) > 1`, i.e. `C > (s_k^2 + 1) / (2 s_k^(k+1))`.
pub fn min_c(k: f64) -> Result<f64> {
    check_k(k)?;
    if k >= 1.0 {
        return Err(CrpcError::InvalidK {
            k,
            reason: "for k > 1 every C > 0 is admissible",
        });
    }
    let sk = cusp_parameter(k)?;
    Ok((sk * sk + 1.0) / (2.0 * sk.powf(k + 1.0)))
}

/// `(k, C, pitch)`: one concrete helical CRPC surface up to the choice of
/// profile branch.
///
/// All construction happens at the normalised internal pitch `1/2`; `pitch`
/// only scales the final surface by `2 * pitch`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShapeParams {
    pub k: f64,
    pub c: f64,
    pub pitch: f64,
}

impl ShapeParams {
    pub fn new(k: f64, c: f64, pitch: f64) -> Result<Self> {
        Self::with_tolerances(k, c, pitch, &Tolerances::default())
    }

    pub fn with_tolerances(k: f64, c: f64, pitch: f64, tol: &Tolerances) -> Result<Self> {
        check_k(k)?;
        if !(c.is_finite() && c > 0.0) {
            return Err(CrpcError::InvalidParameter(format!(
                "C must be positive and finite, got {c}"
            )));
        }
        if !(pitch.is_finite() && pitch != 0.0) {
            return Err(CrpcError::InvalidParameter(format!(
                "pitch must be finite and nonzero, got {pitch}"
            )));
        }
        if k < 1.0 {
            let c_min = min_c(k)?;
            if c - c_min <= tol.near_critical * c_min {
                return Err(CrpcError::EmptyDomain { k, c, c_min });
            }
        }
        Ok(ShapeParams { k, c, pitch })
    }

    /// Normalised parameters (pitch 1/2).
    pub fn normalized(k: f64, c: f64) -> Result<Self> {
        Self::new(k, c, 0.5)
    }

    pub fn curvature(&self) -> CurvatureSpec {
        CurvatureSpec::from_k(self.k).expect("k validated on construction")
    }

    pub fn gauss_sign(&self) -> GaussSign {
        GaussSign::of_k(self.k)
    }
}

/// The open solution interval `I_C = {s > 0 : h(s) > 1}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DomainInfo {
    pub s0: f64,
    pub s0_prime: Option<f64>,
    pub s_k: Option<f64>,
    /// `(s0, ∞)` for `k > 1`, `(s0, s0')` for `k < 1`. The upper end is
    /// serialised as `null` when unbounded.
    pub interval: (f64, Option<f64>),
}

impl DomainInfo {
    pub fn contains(&self, s: f64) -> bool {
        s > self.interval.0 && self.interval.1.is_none_or(|hi| s < hi)
    }

    pub fn upper(&self) -> f64 {
        self.interval.1.unwrap_or(f64::INFINITY)
    }
}

fn refine_root(k: f64, c: f64, lo: f64, hi: f64, tol: &Tolerances) -> Result<f64> {
    let f = |s: f64| h_of_s(s, k, c).map(|h| h - 1.0).unwrap_or(f64::NAN);
    let df = |s: f64| h_prime_of_s(s, k, c).unwrap_or(f64::NAN);
    let root = bisect(f, lo, hi, tol.root_rel)?;
    Ok(newton_polish(f, df, root, lo, hi, 2))
}

/// Roots of `h(s) = 1` delimiting `I_C`.
pub fn compute_domain(k: f64, c: f64) -> Result<DomainInfo> {
    compute_domain_with(k, c, &Tolerances::default())
}

pub fn compute_domain_with(k: f64, c: f64, tol: &Tolerances) -> Result<DomainInfo> {
    ShapeParams::with_tolerances(k, c, 0.5, tol)?;
    let h = |s: f64| h_of_s(s, k, c).unwrap_or(f64::NAN);
    const START: f64 = 1e-6;

    // Lower root. h is increasing on (0, s_k) for k < 1 and on (0, ∞) for k > 1.
    let upper_limit = if k < 1.0 { cusp_parameter(k)? } else { f64::INFINITY };
    let (mut lo, mut hi) = (START, START);
    if h(START) >= 1.0 {
        while h(lo) >= 1.0 {
            hi = lo;
            lo *= 0.5;
            if lo < f64::MIN_POSITIVE {
                return Err(CrpcError::RootNotFound("lower root underflows"));
            }
        }
    } else {
        while h(hi) < 1.0 {
            lo = hi;
            hi *= 2.0;
            if hi >= upper_limit {
                hi = upper_limit;
                break;
            }
            if !hi.is_finite() {
                return Err(CrpcError::RootNotFound("lower root overflows"));
            }
        }
    }
    let s0 = refine_root(k, c, lo, hi, tol)?;

    if k > 1.0 {
        return Ok(DomainInfo {
            s0,
            s0_prime: None,
            s_k: None,
            interval: (s0, None),
        });
    }

    let sk = upper_limit;
    let (mut lo, mut hi) = (sk, sk);
    while h(hi) >= 1.0 {
        lo = hi;
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(CrpcError::RootNotFound("upper root overflows"));
        }
    }
    let s0p = refine_root(k, c, lo, hi, tol)?;
    Ok(DomainInfo {
        s0,
        s0_prime: Some(s0p),
        s_k: Some(sk),
        interval: (s0, Some(s0p)),
    })
}
