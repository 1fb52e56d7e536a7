use super::poly::MultiPoly;
use crate::error::Result;
use crate::profile::{g_of_s, t_of_s, GluedProfile};

/// Upper end of the `t` range covered for unbounded profiles.
pub const TOPVIEW_T_EXTENT: f64 = 8.0;

/// `count` top-view points `(±t/2, g)` over an even `s`-sample of the whole
/// domain; the sign of `x` alternates, starting with `+` at `s0`.
///
/// For `k < 1` the sample spans `[s0, s0']` regardless of the profile piece.
/// For `k > 1` it spans `[s0, s(t = 8)]`. Mirrored profiles give `-g`.
pub fn topview_samples(profile: &GluedProfile, count: usize) -> Result<Vec<(f64, f64)>> {
    let params = profile.params();
    let (k, c) = (params.k, params.c);
    let dom = profile.domain();
    let lo = dom.s0;
    let hi = match dom.s0_prime {
        Some(s) => s,
        None => profile.s_of_t(TOPVIEW_T_EXTENT)?,
    };
    let ysign = if profile.is_mirrored() { -1.0 } else { 1.0 };
    (0..count)
        .map(|i| {
            let s = if count == 1 {
                lo
            } else if i + 1 == count {
                hi
            } else {
                lo + (hi - lo) * i as f64 / (count - 1) as f64
            };
            let t = t_of_s(s, k, c)?;
            let x = if i % 2 == 0 { t / 2.0 } else { -t / 2.0 };
            Ok((x, ysign * g_of_s(s, k, c)?))
        })
        .collect()
}

/// Max over the samples of `|p(x, y, C)|` divided by the largest absolute
/// term of `p` there. Zero for an empty sample list.
pub fn residual(poly: &MultiPoly, samples: &[(f64, f64)], c: f64) -> f64 {
    samples
        .iter()
        .map(|&(x, y)| {
            let (value, scale) = poly.eval_terms([x, y, c]);
            if scale == 0.0 {
                0.0
            } else {
                value.abs() / scale
            }
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::{glued_profile, BranchTag};
    use crate::topview::elimination::{build_implicit_polynomial, example_sextic, CMode};
    use crate::topview::poly::rat;

    #[test]
    fn one_sided_profile() {
        let p = glued_profile(3.0, 0.125, BranchTag::Full).unwrap();
        assert!(topview_samples(&p, 50).unwrap().iter().all(|&(_, y)| y > 0.0));
    }

    #[test]
    fn touching_profile() {
        let p = glued_profile(3.0, 0.375, BranchTag::Full).unwrap();
        let s = topview_samples(&p, 50).unwrap();
        assert!(s[0].1.abs() < 1e-15 && s[0].0 == 0.0);
        assert!(s[1..].iter().all(|&(_, y)| y > 0.0));
    }

    #[test]
    fn crossing_profile() {
        let p = glued_profile(3.0, 10.0, BranchTag::Full).unwrap();
        let s = topview_samples(&p, 50).unwrap();
        assert!(s.iter().any(|&(_, y)| y < 0.0) && s.iter().any(|&(_, y)| y > 0.0));
    }

    #[test]
    fn sextic_residual() {
        let p = glued_profile(3.0, 2.0, BranchTag::Full).unwrap();
        let s = topview_samples(&p, 200).unwrap();
        assert!(residual(&example_sextic(), &s, 2.0) <= 1e-9);
        let random: MultiPoly = "3 * x^3 + -2 * x * y + 5/7 * y^2 + 1".parse().unwrap();
        assert!(residual(&random, &s, 2.0) >= 1e-2);
        assert_eq!(residual(&random, &[], 2.0), 0.0);
    }

    #[test]
    fn numeric_c_polynomial_vanishes_on_profile() {
        let poly = build_implicit_polynomial(2, 1, CMode::Numeric(rat(1, 1))).unwrap();
        let p = glued_profile(2.0, 1.0, BranchTag::Full).unwrap();
        let s = topview_samples(&p, 200).unwrap();
        assert!(residual(&poly, &s, 0.0) <= 1e-9);
    }
}
