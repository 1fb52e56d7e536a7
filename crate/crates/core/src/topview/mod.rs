//! Exact implicit equations of the top view `(x, y) = (±t/2, g)` for
//! rational `k = n/m`.

pub mod elimination;
pub mod poly;
pub mod samples;

pub use elimination::{build_implicit_polynomial, degree_bound, example_sextic, s_squared_branches, CMode};
pub use poly::{parse_rational, MultiPoly, RationalFunction};
pub use samples::{residual, topview_samples};
