use crpc_core::{crpc_certificate, BranchTag, CertificateConfig, DerivativeMode};

const CONFIGS: [(f64, f64, BranchTag); 6] = [
    (3.0, 1.0, BranchTag::Full),
    (3.0, 0.375, BranchTag::Full),
    (3.0, 0.01, BranchTag::Full),
    (2.0, 1.0, BranchTag::Full),
    (0.5, 2.0, BranchTag::Minus),
    (0.5, 2.0, BranchTag::Plus),
];

#[test]
fn analytic_certificates() {
    for (k, c, branch) in CONFIGS {
        let cert = crpc_certificate(k, c, 0.5, &CertificateConfig::new(branch)).unwrap();
        assert!(
            cert.max_rel_deviation <= 1e-8,
            "{k} {c} {branch:?}: {}",
            cert.max_rel_deviation
        );
        assert!(cert.residual_stats.samples >= 1000);
        assert!(
            cert.residual_stats.max <= 1e-9,
            "{k} {c}: ode {}",
            cert.residual_stats.max
        );
        assert!(
            cert.steiner_stats.max <= 1e-8,
            "{k} {c}: steiner {}",
            cert.steiner_stats.max
        );
        assert!(cert.gauss_sign_consistent);
        assert!(
            cert.max_conjugacy_defect <= 1e-8,
            "{k} {c}: conj {}",
            cert.max_conjugacy_defect
        );
        assert!(cert.excluded_points < 64 * 64 / 10);
    }
}

#[test]
fn finite_difference_certificates() {
    for (k, c, branch) in CONFIGS {
        let mut config = CertificateConfig::new(branch);
        config.mode = DerivativeMode::FiniteDifference;
        let cert = crpc_certificate(k, c, 0.5, &config).unwrap();
        assert!(
            cert.max_rel_deviation <= 1e-4,
            "{k} {c} {branch:?}: {}",
            cert.max_rel_deviation
        );
    }
}

#[test]
fn perturbed_profile_fails() {
    for (k, c, branch) in CONFIGS {
        let mut config = CertificateConfig::new(branch);
        config.g_scale = 1.01;
        let cert = crpc_certificate(k, c, 0.5, &config).unwrap();
        assert!(
            cert.max_rel_deviation > 1e-3,
            "{k} {c} {branch:?}: {}",
            cert.max_rel_deviation
        );
    }
}

#[test]
fn jittered_samples_are_reproducible() {
    let mut config = CertificateConfig::new(BranchTag::Full);
    config.grid = (16, 16);
    config.jitter_seed = Some(7);
    let a = crpc_certificate(3.0, 1.0, 0.5, &config).unwrap();
    let b = crpc_certificate(3.0, 1.0, 0.5, &config).unwrap();
    assert_eq!(a.argmax, b.argmax);
    assert_eq!(a.max_rel_deviation, b.max_rel_deviation);
    assert!(a.max_rel_deviation <= 1e-8);
    config.jitter_seed = None;
    let c = crpc_certificate(3.0, 1.0, 0.5, &config).unwrap();
    assert_ne!(a.argmax, c.argmax);
}
