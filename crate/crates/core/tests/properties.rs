use crpc_core::diffgeo::conjugacy_defect;
use crpc_core::planar::class_from_min_g;
use crpc_core::surface::unit_normal;
use crpc_core::{
    compute_domain, critical_c, evaluate_surface, fundamental_forms, g_of_s, g_prime_of_s, glued_profile, h_of_s,
    helical_motion, k_from_a, principal_curvatures, self_intersection, surface_partials, t_of_s, z_of_s, BranchTag,
    GaussSign, HelicalPatch, ShapeClassKind,
};
use proptest::prelude::*;
use proptest::strategy::ValueTree;

fn k_strategy() -> impl Strategy<Value = f64> {
    prop_oneof![0.05f64..0.95, 1.05f64..10.0]
}

/// `C` drawn above the admissibility threshold for `k < 1`.
fn kc_strategy() -> impl Strategy<Value = (f64, f64)> {
    k_strategy().prop_flat_map(|k| {
        let lo = crpc_core::min_c(k).unwrap_or(0.0);
        (
            Just(k),
            (-2.0f64..2.0).prop_map(move |e| lo.max(1e-3) * 1.1 + 10f64.powf(e)),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn k_is_symmetric_in_a(a in prop_oneof![-50.0f64..-1.001, -0.999f64..-0.01, 0.01f64..0.999, 1.001f64..50.0]) {
        let b = 1.0 / a;
        prop_assume!(1.0 / b == a);
        prop_assert_eq!(k_from_a(a).unwrap(), k_from_a(b).unwrap());
    }

    #[test]
    fn contour_identities((k, c) in kc_strategy(), frac in 0.0f64..1.0) {
        let dom = compute_domain(k, c).unwrap();
        let hi = dom.s0_prime.unwrap_or(dom.s0 * 5.0);
        let s = dom.s0 + frac * (hi - dom.s0);
        let (t, g, h) = (t_of_s(s, k, c).unwrap(), g_of_s(s, k, c).unwrap(), h_of_s(s, k, c).unwrap());
        prop_assert!((t * t + 1.0 - h).abs() <= 1e-12 * h);
        let expect = ((k - 1.0) * s * s - (k + 1.0)).powi(2) / (16.0 * k * k * s * s);
        prop_assert!((g * g / (t * t + 1.0) - expect).abs() <= 1e-12 * expect.max(1.0));
    }

    #[test]
    fn helical_invariance(v in -3.0f64..3.0, dv in -3.0f64..3.0, t in -1.5f64..1.5, pitch in 0.1f64..2.0) {
        let profile = glued_profile(3.0, 1.0, BranchTag::Full).unwrap();
        let patch = HelicalPatch::new(profile, pitch, (0.0, 1.0), (2, 2)).unwrap();
        let shifted = evaluate_surface(&patch, v + dv, t).unwrap();
        let moved = helical_motion(dv, evaluate_surface(&patch, v, t).unwrap(), pitch);
        prop_assert!((shifted - moved).norm() <= 1e-12 * (1.0 + moved.norm()));
    }

    #[test]
    fn pitch_similarity(v in -3.0f64..3.0, t in -1.5f64..1.5, pitch in 0.1f64..4.0) {
        let profile = glued_profile(2.0, 1.0, BranchTag::Full).unwrap();
        let unit = HelicalPatch::new(profile.clone(), 0.5, (0.0, 1.0), (2, 2)).unwrap();
        let scaled = HelicalPatch::new(profile, pitch, (0.0, 1.0), (2, 2)).unwrap();
        let a = evaluate_surface(&scaled, v, t).unwrap();
        let b = 2.0 * pitch * evaluate_surface(&unit, v, t).unwrap();
        prop_assert!((a - b).norm() <= 4.0 * f64::EPSILON * b.norm().max(1.0));
    }

    #[test]
    fn gauss_sign_and_conjugacy((k, c) in kc_strategy(), v in 0.0f64..6.2, frac in -0.9f64..0.9) {
        let branch = BranchTag::default_for(k);
        let profile = glued_profile(k, c, branch).unwrap();
        let tm = profile.t_max().min(2.0);
        let patch = HelicalPatch::new(profile, 0.5, (0.0, 1.0), (2, 2)).unwrap();
        let t = frac * tm;
        let p = surface_partials(&patch, v, t).unwrap();
        let n = unit_normal(&p, patch.orientation()).unwrap();
        let forms = fundamental_forms(&p, &n).unwrap();
        if let Ok(r) = principal_curvatures(&forms) {
            if let Some(sign) = r.gauss_sign {
                prop_assert_eq!(sign, GaussSign::of_k(k));
            }
            prop_assert!(conjugacy_defect(&p, &n, &forms, &r) <= 1e-8);
        }
    }
}

#[test]
fn classification_matches_min_g() {
    let mut runner = proptest::test_runner::TestRunner::deterministic();
    for _ in 0..20 {
        let k = (1.05f64..10.0).new_tree(&mut runner).unwrap().current();
        let ck = critical_c(k).unwrap();
        let c = ck * 10f64.powf((-2.0f64..2.0).new_tree(&mut runner).unwrap().current());
        if ((c - ck) / ck).abs() < 1e-3 {
            continue;
        }
        let class = crpc_core::classify_shape(k, c).unwrap().class;
        let (from_g, _) = class_from_min_g(k, c, 400).unwrap();
        assert_eq!(class, from_g, "k={k} C={c}");
        let found = self_intersection(k, c, 0.5).unwrap().is_some();
        assert_eq!(found, class == ShapeClassKind::SelfIntersecting, "k={k} C={c}");
    }
}

#[test]
fn z_matches_brute_force_simpson() {
    // s = 1 + u^2 removes the inverse square root at s0 = 1
    let (k, c, s_end) = (2.0, 1.0, 2.0);
    let s0 = compute_domain(k, c).unwrap().s0;
    assert!((s0 - 1.0).abs() < 1e-12);
    let f = |u: f64| {
        if u == 0.0 {
            // limit of 2u g'(s)/t(s) as u -> 0
            let d = 1e-7;
            let s = s0 + d * d;
            return 2.0 * d * g_prime_of_s(s, k, c).unwrap() / t_of_s(s, k, c).unwrap();
        }
        let s = s0 + u * u;
        2.0 * u * g_prime_of_s(s, k, c).unwrap() / t_of_s(s, k, c).unwrap()
    };
    let n = 20_000;
    let b = (s_end - s0).sqrt();
    let hstep = b / n as f64;
    let mut sum = f(0.0) + f(b);
    for i in 1..n {
        sum += if i % 2 == 1 { 4.0 } else { 2.0 } * f(i as f64 * hstep);
    }
    let simpson = sum * hstep / 3.0;
    let z = z_of_s(s_end, k, c, s0).unwrap();
    assert!((z - simpson).abs() <= 1e-6, "{z} vs {simpson}");
}
