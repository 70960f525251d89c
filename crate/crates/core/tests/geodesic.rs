use metric_pair::catalog::{build, build_default, BuildParams};
use metric_pair::geodesic::{curve_length, distance, Curve, Quadrature, SolverConfig};
use metric_pair::sampling::{interior_point, rng};
use metric_pair::{Chart, Expr, MetricSpec, Symmetry, TensorSpec};

fn params(kv: &[(&str, &str)]) -> BuildParams {
    kv.iter()
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect()
}

fn path(n: usize, s: impl Fn(f64) -> f64, f: impl Fn(f64) -> Vec<f64>) -> Curve {
    Curve {
        nodes: (0..=n).map(|i| f(s(i as f64 / n as f64))).collect(),
    }
}

#[test]
fn chord_lengths() {
    let e2 = build("euclidean", &params(&[("dim", "2")])).unwrap();
    let cubic = build_default("cubic2d").unwrap();
    let mink = build("minkowski", &params(&[("c", "1")])).unwrap();
    for n in [2, 8, 64] {
        let l = curve_length(
            &e2,
            &Curve::chord(&[0.0, 0.0], &[3.0, 4.0], n),
            Quadrature::Simpson,
        )
        .unwrap();
        assert!((l - 5.0).abs() < 1e-10);
    }
    let l = curve_length(
        &cubic,
        &Curve::chord(&[0.0, 0.0], &[1.0, 1.0], 64),
        Quadrature::Simpson,
    )
    .unwrap();
    assert!((l - 2f64.cbrt()).abs() < 1e-9);
    let l = curve_length(
        &cubic,
        &Curve::chord(&[0.0, 0.0], &[1.0, -1.0], 64),
        Quadrature::Midpoint,
    )
    .unwrap();
    assert!(l.abs() < 1e-12);
    let l = curve_length(
        &mink,
        &Curve::chord(&[0.0; 4], &[1.0, 0.0, 0.0, 0.0], 64),
        Quadrature::Simpson,
    )
    .unwrap();
    assert!((l - 1.0).abs() < 1e-12);
}

#[test]
fn reparameterization_invariance() {
    let e2 = build("euclidean", &params(&[("dim", "2")])).unwrap();
    let cubic = build_default("cubic2d").unwrap();
    let arc = |t: f64| vec![t, 0.5 * t * t];
    for m in [&e2, &cubic] {
        let uniform = curve_length(m, &path(256, |t| t, arc), Quadrature::Simpson).unwrap();
        let warped = curve_length(
            m,
            &path(256, |t| 0.5 * (t + t * t), arc),
            Quadrature::Simpson,
        )
        .unwrap();
        assert!((uniform - warped).abs() < 1e-6, "{} vs {}", uniform, warped);
    }
}

#[test]
fn reported_value_is_curve_length_and_below_chord() {
    let cubic = build_default("cubic2d").unwrap();
    let cfg = SolverConfig::with_seed(5);
    for (p, q) in [
        ([0.0, 0.0], [1.0, 1.0]),
        ([0.2, -0.4], [0.9, 0.3]),
        ([-1.0, 0.5], [0.5, -0.5]),
    ] {
        let r = distance(&cubic, &p, &q, &cfg).unwrap();
        let relen = curve_length(&cubic, &r.best_curve(), cfg.quadrature).unwrap();
        assert!(
            (relen - r.value).abs() <= 1e-12 * r.value.max(1.0),
            "{relen} vs {}",
            r.value
        );
        assert!(r.value <= r.chord + 1e-12);
        assert_eq!(r.curve.first().unwrap().as_slice(), &p);
        assert_eq!(r.curve.last().unwrap().as_slice(), &q);
    }
}

#[test]
fn seeded_runs_are_bit_identical() {
    let m = build("flrw", &params(&[("a", "exp(t)")])).unwrap();
    let cfg = SolverConfig::with_seed(42);
    let p = [0.1, 0.0, 0.2, -0.3];
    let q = [0.4, 0.5, -0.1, 0.2];
    let a = distance(&m, &p, &q, &cfg).unwrap();
    let b = distance(&m, &p, &q, &cfg).unwrap();
    assert_eq!(a, b);
}

#[test]
fn refinement_does_not_raise_distance() {
    let m = build("euclidean", &params(&[("dim", "2")])).unwrap();
    let cubic = build_default("cubic2d").unwrap();
    for m in [&m, &cubic] {
        let mut prev = f64::INFINITY;
        for n in [16, 32, 64, 128] {
            let cfg = SolverConfig {
                segments: n,
                ..SolverConfig::with_seed(8)
            };
            let d = distance(m, &[0.1, 0.2], &[0.7, 0.9], &cfg).unwrap().value;
            assert!(d <= prev + cfg.value_tol, "N = {n}: {d} after {prev}");
            prev = d;
        }
    }
}

#[test]
fn distance_is_symmetric_on_symmetric_metrics() {
    let cfg = SolverConfig::with_seed(13);
    let metrics = [
        build("euclidean", &params(&[("dim", "2")])).unwrap(),
        build_default("cubic2d").unwrap(),
        build("flrw", &params(&[("a", "1")])).unwrap(),
    ];
    for (k, m) in metrics.iter().enumerate() {
        let mut r = rng(13, k as u64);
        for _ in 0..100 {
            let p = interior_point(m.chart(), &mut r);
            let q = interior_point(m.chart(), &mut r);
            let a = distance(m, &p, &q, &cfg).unwrap().value;
            let b = distance(m, &q, &p, &cfg).unwrap().value;
            assert!(
                (a - b).abs() <= cfg.epsilon(),
                "{}: {a} vs {b} for {p:?} {q:?}",
                m.name
            );
        }
    }
}

#[test]
fn flrw_spatial_pair_is_reached_through_null_legs() {
    // with a = 1 the chart is Minkowski space, where any two points are
    // joined by a zig-zag of null segments of zero length
    let m = build("flrw", &params(&[("a", "1")])).unwrap();
    let r = distance(
        &m,
        &[0.0; 4],
        &[0.0, 1.0, 0.0, 0.0],
        &SolverConfig::with_seed(1),
    )
    .unwrap();
    assert_eq!(r.chord, 1.0);
    assert!(r.value < 1e-6, "{}", r.value);
}

#[test]
fn asymmetric_fixture_has_symmetric_distance() {
    // m_112 != m_121; the line element only sees the symmetric part, and
    // reversing a curve flips the sign of an odd-order integrand under |.|
    let t = TensorSpec::new(Chart::euclidean(2), 0, 3)
        .symmetry(Symmetry::None)
        .with(vec![0, 0, 0], Expr::c(1.0))
        .with(vec![1, 1, 1], Expr::c(1.0))
        .with(vec![0, 0, 1], Expr::c(0.9))
        .with(vec![0, 1, 0], Expr::c(-0.4))
        .build()
        .unwrap();
    let sym = metric_pair::checker::check_symmetry(&t, 8, 0).unwrap();
    assert_eq!(sym.verdict, metric_pair::checker::Verdict::Fail);
    let m = MetricSpec::from_tensor("fixture", t).unwrap();
    let cfg = SolverConfig::with_seed(2);
    let (p, q) = ([0.1, 0.2], [0.8, 0.5]);
    let a = distance(&m, &p, &q, &cfg).unwrap();
    let b = distance(&m, &q, &p, &cfg).unwrap();
    assert!((a.chord - b.chord).abs() < 1e-12);
    assert!(
        (a.value - b.value).abs() <= cfg.epsilon(),
        "{} vs {}",
        a.value,
        b.value
    );
}
