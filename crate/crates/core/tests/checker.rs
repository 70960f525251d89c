use metric_pair::catalog::{build, build_default};
use metric_pair::checker::{
    blend_metrics, check_distance_axioms, check_metric, classify_definiteness, probe_smoothness,
    CheckOptions, Classification, Verdict,
};
use metric_pair::geodesic::SolverConfig;
use metric_pair::{Chart, Error, Expr, MetricSpec, Scope, Symmetry, TensorField, TensorSpec};

fn diag(values: [&str; 2]) -> TensorField {
    let scope = Scope::new(&["x1", "x2"]);
    TensorSpec::new(Chart::euclidean(2), 0, 2)
        .symmetry(Symmetry::Full)
        .with(vec![0, 0], Expr::parse(values[0], &scope).unwrap())
        .with(vec![1, 1], Expr::parse(values[1], &scope).unwrap())
        .build()
        .unwrap()
}

fn weight(src: &str) -> Expr {
    Expr::parse(src, &Scope::new(&["x1", "x2"])).unwrap()
}

#[test]
fn euclidean_is_a_metric() {
    let m = build("euclidean", &[("dim".to_string(), "2".to_string())].into()).unwrap();
    let r = check_metric(&m, &CheckOptions::new(1)).unwrap();
    assert!(!r.has_failures());
    assert_eq!(r.positive_definite, Verdict::Pass);
    let d = r.distance_axioms.unwrap();
    assert_eq!(d.kind, "metric");
    for a in [
        &d.nonnegativity,
        &d.symmetry,
        &d.triangle,
        &d.identity_of_indiscernibles,
        &d.topology,
    ] {
        assert_eq!(a.verdict, Verdict::Pass);
    }
}

#[test]
fn cubic_identity_fails_with_null_witness() {
    let m = build_default("cubic2d").unwrap();
    let d = check_distance_axioms(&m, &SolverConfig::with_seed(4), 4, 4, 4).unwrap();
    assert_eq!(d.nonnegativity.verdict, Verdict::Pass);
    assert_eq!(d.identity_of_indiscernibles.verdict, Verdict::Fail);
    assert_eq!(d.kind, "pseudo-metric");
    assert!(d.identity_of_indiscernibles.witness.is_some());
}

#[test]
fn sest_defaults_are_lorentzian() {
    // the time block keeps its negative sign, so the default is indefinite
    let m = build_default("sest").unwrap();
    let c = classify_definiteness(&m, 64, 64, 2).unwrap();
    assert_eq!(c.classification, Classification::Indefinite);
    let r = check_metric(
        &m,
        &CheckOptions {
            pairs: 2,
            triples: 2,
            ..CheckOptions::new(2)
        },
    )
    .unwrap();
    assert!(!r.has_failures());
    assert_eq!(r.distance_axioms.unwrap().kind, "pseudo-metric");
}

#[test]
fn blends() {
    let e = diag(["1", "1"]);
    let b = blend_metrics(
        &[
            (weight("0.5 + 0.4*sin(x1)"), e.clone()),
            (weight("0.5 - 0.4*sin(x1)"), e.clone()),
        ],
        64,
        0,
    )
    .unwrap();
    let t = b.table(&[0.3, -0.2]).unwrap();
    assert!((t.get(&[0, 0]).re() - 1.0).abs() < 1e-15);
    assert_eq!(t.get(&[0, 1]).re(), 0.0);

    let b = blend_metrics(
        &[
            (weight("1/2"), diag(["1", "1"])),
            (weight("1/2"), diag(["4", "4"])),
        ],
        16,
        0,
    )
    .unwrap();
    let t = b.table(&[0.0, 0.0]).unwrap();
    assert_eq!(t.get(&[0, 0]).re(), 2.5);
    assert_eq!(t.get(&[1, 1]).re(), 2.5);

    let b = blend_metrics(
        &[
            (weight("cos(x1)^2"), diag(["1 + x2^2", "2"])),
            (weight("sin(x1)^2"), diag(["3", "exp(x1)"])),
        ],
        64,
        0,
    )
    .unwrap();
    let m = MetricSpec::from_tensor("blend", b).unwrap();
    assert_eq!(
        classify_definiteness(&m, 64, 64, 0).unwrap().classification,
        Classification::PositiveDefinite
    );
}

#[test]
fn blend_rejects_bad_partitions() {
    let e = diag(["1", "1"]);
    let err = blend_metrics(
        &[(weight("0.7"), e.clone()), (weight("0.7"), e.clone())],
        8,
        0,
    )
    .unwrap_err();
    assert!(matches!(err, Error::PartitionOfUnity(_)));
    let err = blend_metrics(
        &[(weight("1.5"), e.clone()), (weight("-0.5"), e.clone())],
        8,
        0,
    )
    .unwrap_err();
    assert!(matches!(err, Error::PartitionOfUnity(_)));
    let err = blend_metrics(&[(weight("1"), diag(["1", "-1"]))], 8, 0).unwrap_err();
    assert!(matches!(err, Error::PartitionOfUnity(_)));
}

#[test]
fn smoothness_flags_unresolved_variation() {
    let smooth = probe_smoothness(&diag(["1 + x1^2", "cosh(x2)"]), 16, 0).unwrap();
    assert_eq!(smooth.verdict, Verdict::Pass);
    // oscillation far below the probe step: difference quotients never settle
    let rough = probe_smoothness(&diag(["2 + sin(1000*x1)", "1"]), 16, 0).unwrap();
    assert_eq!(rough.verdict, Verdict::Indeterminate);
    assert!(rough.witness.is_some());
}

#[test]
fn reports_are_reproducible() {
    let m = build_default("minkowski").unwrap();
    let opts = CheckOptions {
        pairs: 1,
        triples: 1,
        ..CheckOptions::new(77)
    };
    assert_eq!(
        check_metric(&m, &opts).unwrap(),
        check_metric(&m, &opts).unwrap()
    );
}
