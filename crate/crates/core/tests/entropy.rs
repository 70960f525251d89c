use metric_pair::catalog::build;
use metric_pair::entropy::{
    entropy_substitute, gaussian_factor, potential_from_gaussian, shannon_entropy,
    shannon_information, substitute_axis, DensitySpec, EntropyMap, GaussianParams,
    SubstitutionMode,
};
use metric_pair::Role;

#[test]
fn uniform_entropy_is_log_width() {
    for w in [0.5, 1.0, 2.0, 5.0] {
        let d = DensitySpec::parse(&format!("1/{w}"), "x", 0.0, w, 1000).unwrap();
        let s = shannon_entropy(&d).unwrap();
        assert!(
            (s.entropy - f64::ln(w)).abs() < 1e-6,
            "w = {w}: {}",
            s.entropy
        );
        assert!((s.total_mass - 1.0).abs() < 1e-12);
    }
}

#[test]
fn normal_entropy() {
    let d = DensitySpec::parse("exp(-x^2/2)/sqrt(2*pi)", "x", -10.0, 10.0, 4000).unwrap();
    let s = shannon_entropy(&d).unwrap();
    let want = 0.5 * (2.0 * std::f64::consts::PI * std::f64::consts::E).ln();
    assert!((s.entropy - want).abs() < 1e-4);
}

#[test]
fn zero_density_contributes_nothing() {
    let d = DensitySpec::parse("2*x", "x", 0.0, 1.0, 2000).unwrap();
    // -∫ 2x ln(2x) dx on [0,1] = 1/2 - ln 2
    let s = shannon_entropy(&d).unwrap();
    assert!((s.entropy - (0.5 - 2f64.ln())).abs() < 1e-5);
}

#[test]
fn potentials_round_trip() {
    for (m, s, x) in [(0.0, 1.0, 0.3), (1.5, 0.2, 1.4), (-2.0, 3.0, 0.0)] {
        let g = GaussianParams::new(m, s).unwrap();
        let psi = potential_from_gaussian(&g, x, 1.0);
        assert!(((2.0 * psi).exp() - gaussian_factor(x, &g)).abs() < 1e-12);
        let phi = potential_from_gaussian(&g, x, -1.0);
        assert!((phi + psi).abs() < 1e-15);
    }
    assert!(shannon_information(0.0).is_err());
    assert_eq!(shannon_information(1.0).unwrap(), 0.0);
}

#[test]
fn chain_rule_substitution_inverts() {
    let m = build("flrw", &[("a".to_string(), "exp(t)".to_string())].into()).unwrap();
    let s = EntropyMap::parse("2*t + 1", "(t - 1)/2", "t").unwrap();
    let sub = entropy_substitute(&m, &s, SubstitutionMode::ChainRule).unwrap();
    assert_eq!(sub.chart().axes()[0].role, Role::Entropy);
    let back = substitute_axis(
        &sub,
        0,
        &s.inverted().unwrap(),
        SubstitutionMode::ChainRule,
        "t",
        Role::Time,
    )
    .unwrap();
    for p in [[0.3, 0.1, -0.2, 0.5], [-0.7, 0.0, 0.4, 0.9]] {
        let (x, y) = (
            m.tensor().table(&p).unwrap(),
            back.tensor().table(&p).unwrap(),
        );
        for k in x.entries.keys().chain(y.entries.keys()) {
            assert!((x.get(k) - y.get(k)).norm() < 1e-8, "{k:?} at {p:?}");
        }
    }
}
