//! Shared numerical tolerances.
//!
//! Every module reads its thresholds from one [`Tolerances`] record so that
//! tests and the command line can tighten or relax them in one place.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Relative bracket width at which root bisection stops.
    pub root_rel: f64,
    /// Absolute error requested from the adaptive quadrature.
    pub quad_abs: f64,
    /// Relative error requested from the adaptive quadrature.
    pub quad_rel: f64,
    /// Maximum number of quadrature panels before giving up.
    pub quad_max_panels: usize,
    /// Relative tolerance of the `s(t)` inversion bisection.
    pub inversion_rel: f64,
    /// `C - C_min < near_critical * C_min` is treated as an empty domain.
    pub near_critical: f64,
    /// Principal curvatures closer than this (relative) are reported as umbilic.
    pub umbilic_rel: f64,
    /// Curvatures below this fraction of the grid mean are excluded from ratio checks.
    pub vanishing_curvature: f64,
    /// Relative band around `C_k` classified as axis touching.
    pub classification_rel: f64,
    /// Vertices closer than `singular_rel * t_k` to the cusp row are flagged.
    pub singular_rel: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            root_rel: 1e-12,
            quad_abs: 1e-10,
            quad_rel: 1e-12,
            quad_max_panels: 4000,
            inversion_rel: 1e-13,
            near_critical: 1e-10,
            umbilic_rel: 1e-12,
            vanishing_curvature: 1e-10,
            classification_rel: 1e-10,
            singular_rel: 1e-9,
        }
    }
}

impl Tolerances {
    /// Tighter quadrature for derivative estimation by finite differences.
    pub fn strict() -> Self {
        Tolerances {
            quad_abs: 1e-14,
            quad_rel: 1e-14,
            quad_max_panels: 20000,
            ..Tolerances::default()
        }
    }

    /// Looser settings for quick previews.
    pub fn relaxed() -> Self {
        Tolerances {
            quad_abs: 1e-8,
            quad_rel: 1e-10,
            ..Tolerances::default()
        }
    }

    /// Looks up a named preset (`default`, `strict`, `relaxed`).
    pub fn preset(name: &str) -> Option<Self> {
        match name.trim().to_ascii_lowercase().as_str() {
            "" | "default" => Some(Tolerances::default()),
            "strict" => Some(Tolerances::strict()),
            "relaxed" => Some(Tolerances::relaxed()),
            _ => None,
        }
    }
}
