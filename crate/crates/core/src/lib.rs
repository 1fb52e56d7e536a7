//! Helical surfaces whose principal curvatures have a constant ratio.
//!
//! A helical CRPC surface is swept by a screw motion from a closed-form
//! contour determined by the invariant `k = |1 - a| / |1 + a|` of the
//! curvature ratio `a` and a shape constant `C`. This crate evaluates the
//! contour ([`profile`]), sweeps it into surfaces and meshes ([`surface`]),
//! certifies the curvature ratio ([`diffgeo`]), derives exact implicit
//! equations of the top view for rational `k` ([`topview`]) and studies plane
//! sections and shape classes ([`planar`]).
//!
//! ```
//! use crpc_core::{crpc_certificate, BranchTag, CertificateConfig};
//!
//! let cfg = CertificateConfig { grid: (4, 8), profile_samples: 10, ..CertificateConfig::new(BranchTag::Full) };
//! let cert = crpc_certificate(3.0, 1.0, 0.5, &cfg).unwrap();
//! assert!(cert.max_rel_deviation < 1e-8);
//! ```

pub mod diffgeo;
pub mod error;
pub mod format;
pub mod numeric;
pub mod params;
pub mod planar;
pub mod profile;
pub mod surface;
pub mod tolerance;
pub mod topview;

pub use diffgeo::{
    axis_point_ratio, characteristic_angle, crpc_certificate, fundamental_forms, ode_residual, principal_curvatures,
    steiner_diagnostic, CertificateConfig, CrpcCertificate, CurvatureReport, DerivativeMode, FundamentalForms,
    SteinerDiagnostic,
};
pub use error::{CrpcError, DegenerateCase, Result};
pub use params::{
    a_pair_from_k, compute_domain, compute_domain_with, critical_c, cusp_parameter, k_from_a, min_c, CurvatureSpec,
    DomainInfo, GaussSign, ShapeParams,
};
pub use planar::{
    class_from_min_g, classify_shape, plane_section, plane_section_of, self_intersection, PlanarProfile,
    SelfIntersection, ShapeClass, ShapeClassKind,
};
pub use profile::{
    contour_point, contour_tangent, cusp_discriminant_slope, discriminant, g_of_s, g_prime_of_s, glue_derivatives,
    glued_profile, h_of_s, h_prime_of_s, read_profile_csv, sample_profile, split_at_cusp, t_of_s, write_profile_csv,
    z_of_s, Branch, BranchTag, ContourTangent, GlueDerivatives, GluedProfile, ProfileSample, Vec3,
};
pub use surface::{
    evaluate_surface, helical_motion, sample_mesh, singular_curve, surface_partials, sweep_profile, write_polyline_obj,
    HelicalPatch, SurfaceMesh, SurfacePartials,
};
pub use tolerance::Tolerances;
pub use topview::{
    build_implicit_polynomial, degree_bound, parse_rational, residual, s_squared_branches, topview_samples, CMode,
    MultiPoly,
};
