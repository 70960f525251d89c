//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use metric_pair::catalog::{self, build, build_default, BuildParams};
use metric_pair::checker::{self, CheckOptions, Classification, Verdict};
use metric_pair::entropy::{
    gaussian_factor, shannon_entropy, simpson, DensitySpec, GaussianParams,
};
use metric_pair::geodesic::{distance, triangle_probe, SolverConfig};
use metric_pair::hessian::{hessian_metric, verify_flrw_warped, Potential};
use metric_pair::maps::{transform_tensor, CartesianToSpherical};
use metric_pair::sampling::{interior_point, rng};
use metric_pair::scalar::{projective_equiv, Quaternion, PROJECTIVE_TOL};
use metric_pair::{Axis, Chart, Expr, MetricSpec, Role, Symmetry, TensorSpec};
use num_complex::Complex64;
use rand::Rng;

type Check = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn e<T, E: std::fmt::Display>(r: Result<T, E>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn params(kv: &[(&str, &str)]) -> BuildParams {
    kv.iter()
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect()
}

fn within(elapsed: Duration, limit: Duration, what: &str) -> Result<(), String> {
    ensure(elapsed < limit, || {
        format!("{what} took {:.2?}, limit {:.0?}", elapsed, limit)
    })
}

// 1
fn euclidean_geodesic() -> Check {
    let m = e(build("euclidean", &params(&[("dim", "2")])))?;
    let cfg = SolverConfig {
        segments: 64,
        restarts: 8,
        ..SolverConfig::with_seed(1)
    };
    let t = Instant::now();
    let d = e(distance(&m, &[0.0, 0.0], &[3.0, 4.0], &cfg))?.value;
    within(t.elapsed(), Duration::from_secs(1), "distance")?;
    ensure((d - 5.0).abs() / 5.0 < 1e-3, || format!("d = {d}"))?;
    Ok(format!("d = {d:.12}"))
}

// 2
fn cubic_distance() -> Check {
    // dual functional: l(v) = 2^{-2/3}(v1 + v2) never exceeds |v1^3 + v2^3|^{1/3}
    let mut r = rng(2024, 0);
    let c = 2f64.powf(-2.0 / 3.0);
    for _ in 0..100_000 {
        let th: f64 = r.random_range(0.0..std::f64::consts::TAU);
        let (v1, v2) = (th.cos(), th.sin());
        let l = c * (v1 + v2);
        let cube = (v1.powi(3) + v2.powi(3)).abs().cbrt();
        ensure(l <= cube + 1e-15, || {
            format!("dual bound fails at theta = {th}: {l} > {cube}")
        })?;
    }
    let m = e(build_default("cubic2d"))?;
    let d = e(distance(
        &m,
        &[0.0, 0.0],
        &[1.0, 1.0],
        &SolverConfig::with_seed(2),
    ))?
    .value;
    let target = 2f64.cbrt();
    ensure(d >= target - 1e-6 && d <= target + 1e-3, || {
        format!("d = {d}, expected [{}, {}]", target - 1e-6, target + 1e-3)
    })?;
    Ok(format!(
        "d = {d:.12}, 2^(1/3) = {target:.12}; dual bound holds on 1e5 directions"
    ))
}

// 3
fn degenerate_direction() -> Check {
    let m = e(build_default("cubic2d"))?;
    let d = e(distance(
        &m,
        &[0.0, 0.0],
        &[1.0, -1.0],
        &SolverConfig::with_seed(3),
    ))?
    .value;
    ensure(d <= 1e-6, || format!("d = {d}"))?;
    let report = e(checker::check_metric(&m, &CheckOptions::new(3)))?;
    let kind = report.distance_axioms.map(|a| a.kind).unwrap_or_default();
    ensure(kind == "pseudo-metric", || format!("checker says {kind}"))?;
    Ok(format!("d = {d:e}, checker: {kind}"))
}

// 4
fn invariance() -> Check {
    let t = Instant::now();
    let ids = catalog::ids();
    ensure(ids.len() >= 16, || format!("only {} entries", ids.len()))?;
    let mut worst = 0.0f64;
    for (i, id) in ids.iter().enumerate() {
        let m = e(build_default(id))?;
        let c = e(checker::check_invariance(&m, 100, 40 + i as u64))?;
        ensure(c.samples == 100, || format!("{id}: {} samples", c.samples))?;
        ensure(
            c.verdict == Verdict::Pass && c.max_relative_deviation < 1e-8,
            || {
                format!(
                    "{id}: {:?}, deviation {:e}",
                    c.verdict, c.max_relative_deviation
                )
            },
        )?;
        worst = worst.max(c.max_relative_deviation);
    }
    within(t.elapsed(), Duration::from_secs(30), "invariance suite")?;
    Ok(format!(
        "{} entries, worst relative deviation {worst:e}",
        ids.len()
    ))
}

fn max_diff(a: &MetricSpec, b: &MetricSpec, points: &[Vec<f64>]) -> Result<f64, String> {
    let mut worst = 0.0f64;
    for p in points {
        let (x, y) = (e(a.tensor().table(p))?, e(b.tensor().table(p))?);
        for k in x.entries.keys().chain(y.entries.keys()) {
            worst = worst.max((x.get(k) - y.get(k)).norm());
        }
    }
    Ok(worst)
}

// 5
fn flrw_reductions() -> Check {
    let mut r = rng(5, 0);
    let flrw = e(build("flrw", &params(&[("a", "1")])))?;
    let mink = e(build_default("minkowski"))?;
    let pts: Vec<Vec<f64>> = (0..50)
        .map(|_| interior_point(flrw.chart(), &mut r))
        .collect();
    for p in &pts {
        let (x, y) = (e(flrw.tensor().table(p))?, e(mink.tensor().table(p))?);
        ensure(x.entries == y.entries, || {
            format!("flrw(a=1) differs from minkowski at {p:?}")
        })?;
    }

    let gp = e(build_default("gpflrw"))?;
    let flrw1 = e(build_default("flrw"))?;
    let d_gp = max_diff(&gp, &flrw1, &pts)?;
    ensure(d_gp < 1e-12, || format!("gpflrw vs flrw: {d_gp:e}"))?;

    let ads = e(build(
        "perturbed_ads",
        &params(&[
            ("k", "0"),
            ("psi", "0"),
            ("phi", "0"),
            ("a", "1"),
            ("d_tau", "1"),
            ("d_r", "3"),
        ]),
    ))?;
    let map = e(CartesianToSpherical::new(4, 1, 3))?;
    let mut d_ads = 0.0f64;
    for _ in 0..50 {
        let p = interior_point(ads.chart(), &mut r);
        let x = e(ads.tensor().table(&p))?;
        let y = e(transform_tensor(mink.tensor(), &map, &p))?;
        for k in x.entries.keys().chain(y.entries.keys()) {
            d_ads = d_ads.max((x.get(k) - y.get(k)).norm());
        }
    }
    ensure(d_ads < 1e-12, || {
        format!("perturbed_ads vs minkowski: {d_ads:e}")
    })?;
    Ok(format!(
        "flrw(a=1) == minkowski exactly; gpflrw {d_gp:e}; perturbed_ads {d_ads:e}"
    ))
}

// 6
fn warped_equivalence() -> Check {
    let mut out = Vec::new();
    for (a, lo, hi) in [("1", -1.0, 1.0), ("exp(t)", -1.0, 1.0), ("t^2", 0.05, 3.0)] {
        let v = e(verify_flrw_warped(a, 1.0, lo, hi, 100, 6))?;
        ensure(v.equivalent && v.max_deviation < 1e-14, || {
            format!("a = {a}: deviation {:e}", v.max_deviation)
        })?;
        out.push(format!("{a}: {:e}", v.max_deviation));
    }
    Ok(out.join(", "))
}

// 7
fn hessian_reconstruction() -> Check {
    let plane = e(Chart::new(vec![
        Axis::new("x", Role::Space),
        Axis::new("y", Role::Space),
    ]))?;
    let cubic = e(build_default("cubic2d"))?;
    let p = e(Potential::parse("(x^3 + y^3)/6", plane.clone()))?;
    let mut worst3 = 0.0f64;
    for pt in [[0.0, 0.0], [0.4, -0.9], [1.3, 0.2]] {
        let h = e(hessian_metric(&p, 3, &pt, None))?;
        let g = e(cubic.tensor().table(&pt))?;
        for idx in (0..8).map(|b| vec![b & 1, b >> 1 & 1, b >> 2 & 1]) {
            worst3 = worst3.max((h.table.get(&idx) - g.get(&idx)).norm());
        }
    }
    ensure(worst3 < 1e-6, || format!("cubic deviation {worst3:e}"))?;

    let mut worst2 = 0.0f64;
    for (src, exact) in [
        ("(x^2 + y^2)/2", [[1.0, 0.0], [0.0, 1.0]]),
        ("x*y", [[0.0, 1.0], [1.0, 0.0]]),
        ("3*x^2 - 2*x*y + y^2/4", [[6.0, -2.0], [-2.0, 0.5]]),
    ] {
        let p = e(Potential::parse(src, plane.clone()))?;
        for pt in [[0.2, 0.3], [-1.1, 2.5]] {
            let h = e(hessian_metric(&p, 2, &pt, None))?;
            for i in 0..2 {
                for j in 0..2 {
                    worst2 = worst2.max((h.table.get(&[i, j]).re() - exact[i][j]).abs());
                }
            }
        }
    }
    ensure(worst2 < 1e-8, || format!("quadratic deviation {worst2:e}"))?;
    Ok(format!("cubic {worst3:e}, quadratic {worst2:e}"))
}

// 8
fn entropy_values() -> Check {
    let u = e(shannon_entropy(&e(DensitySpec::parse(
        "1/2", "x", 0.0, 2.0, 2000,
    ))?))?
    .entropy;
    ensure((u - 2f64.ln()).abs() < 1e-6, || format!("uniform: {u}"))?;
    let g = e(shannon_entropy(&e(DensitySpec::parse(
        "exp(-x^2/2)/sqrt(2*pi)",
        "x",
        -10.0,
        10.0,
        4000,
    ))?))?
    .entropy;
    let want = 0.5 * (2.0 * std::f64::consts::PI * std::f64::consts::E).ln();
    ensure((g - want).abs() < 1e-4, || {
        format!("gaussian: {g} vs {want}")
    })?;
    let mut r = rng(8, 0);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let mean = r.random_range(-5.0..5.0);
        let sigma = r.random_range(0.1..3.0);
        let gp = e(GaussianParams::new(mean, sigma))?;
        let mass = simpson(
            |x| gaussian_factor(x, &gp),
            mean - 15.0 * sigma,
            mean + 15.0 * sigma,
            4000,
        );
        worst = worst.max((mass - 1.0).abs());
    }
    ensure(worst < 1e-8, || format!("gaussian mass off by {worst:e}"))?;
    Ok(format!(
        "uniform {u:.9}, gaussian {g:.6}, mass error {worst:e}"
    ))
}

// 9
fn checker_soundness() -> Check {
    let classify = |id: &str| -> Result<checker::Definiteness, String> {
        e(checker::classify_definiteness(
            &e(build_default(id))?,
            64,
            64,
            9,
        ))
    };
    let eu = classify("euclidean")?;
    ensure(
        eu.classification == Classification::PositiveDefinite,
        || format!("euclidean: {}", eu.label()),
    )?;
    let mk = classify("minkowski")?;
    ensure(mk.classification == Classification::Indefinite, || {
        format!("minkowski: {}", mk.label())
    })?;
    let cu = classify("cubic2d")?;
    let again = classify("cubic2d")?;
    ensure(
        matches!(
            cu.classification,
            Classification::Indefinite | Classification::Degenerate
        ) && cu.has_null_directions,
        || format!("cubic2d: {}", cu.label()),
    )?;
    ensure(
        cu.min.is_some() && cu.max.is_some() && cu.zero.is_some(),
        || "cubic2d witnesses missing".into(),
    )?;
    ensure(cu == again, || {
        "cubic2d witnesses differ between runs".into()
    })?;

    let asym = e(TensorSpec::new(Chart::euclidean(2), 0, 2)
        .symmetry(Symmetry::None)
        .with(vec![0, 0], Expr::c(1.0))
        .with(vec![1, 1], Expr::c(1.0))
        .with(vec![0, 1], Expr::c(1.0))
        .build())?;
    let s = e(checker::check_symmetry(&asym, 16, 9))?;
    ensure(s.verdict == Verdict::Fail && s.witness.is_some(), || {
        format!("asymmetric fixture: {:?}", s.verdict)
    })?;
    let w = s.witness.unwrap();
    Ok(format!(
        "euclidean {}, minkowski {}, cubic2d {}; asymmetric witness {:?} vs {:?}",
        eu.label(),
        mk.label(),
        cu.label(),
        w.tuple.unwrap_or_default(),
        w.partner.unwrap_or_default()
    ))
}

// 10
fn determinism() -> Check {
    for args in common::MATRIX {
        let a = common::cli(args);
        let b = common::cli(args);
        ensure(a.code == 0, || {
            format!("{args:?} exited {}: {}", a.code, a.stderr)
        })?;
        ensure(a.stdout == b.stdout, || {
            format!("{args:?} differs between runs")
        })?;
    }
    Ok(format!(
        "{} invocations byte-identical",
        common::MATRIX.len()
    ))
}

// 11
fn triangle() -> Check {
    let t = Instant::now();
    let cfg = SolverConfig::with_seed(11);
    let mut out = Vec::new();
    let metrics = [
        ("euclidean", e(build_default("euclidean"))?),
        ("cubic2d", e(build_default("cubic2d"))?),
        ("flrw(a=1)", e(build("flrw", &params(&[("a", "1")])))?),
    ];
    for (k, (name, m)) in metrics.iter().enumerate() {
        let mut r = rng(11, k as u64);
        let triples: Vec<[Vec<f64>; 3]> = (0..200)
            .map(|_| std::array::from_fn(|_| interior_point(m.chart(), &mut r)))
            .collect();
        let rep = e(triangle_probe(m, &triples, &cfg))?;
        ensure(rep.violations.is_empty(), || {
            format!(
                "{name}: {} violations, worst margin {:e} (epsilon {:e})",
                rep.violations.len(),
                rep.worst_margin,
                rep.epsilon
            )
        })?;
        out.push(format!("{name} worst margin {:e}", rep.worst_margin));
    }
    within(t.elapsed(), Duration::from_secs(120), "triangle suite")?;
    Ok(format!("{} (epsilon {:e})", out.join(", "), cfg.epsilon()))
}

// 12
fn scalar_algebra() -> Check {
    let mut r = rng(12, 0);
    let mut q = || {
        Quaternion::new(
            r.random_range(-10.0..10.0),
            r.random_range(-10.0..10.0),
            r.random_range(-10.0..10.0),
            r.random_range(-10.0..10.0),
        )
    };
    let (mut w_norm, mut w_assoc) = (0.0f64, 0.0f64);
    for _ in 0..10_000 {
        let (a, b, c) = (q(), q(), q());
        let s = a.norm() * b.norm();
        w_norm = w_norm.max(((a * b).norm() - s).abs() / s.max(1.0));
        let (x, y) = ((a * b) * c, a * (b * c));
        let d = Quaternion::new(x.w - y.w, x.x - y.x, x.y - y.y, x.z - y.z).norm();
        w_assoc = w_assoc.max(d / (s * c.norm()).max(1.0));
    }
    ensure(w_norm < 1e-12 && w_assoc < 1e-12, || {
        format!("norm {w_norm:e}, associativity {w_assoc:e}")
    })?;

    let mut r = rng(12, 1);
    for _ in 0..1_000 {
        let n = r.random_range(2..6);
        let a: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(r.random_range(-5.0..5.0), r.random_range(-5.0..5.0)))
            .collect();
        let lam = Complex64::from_polar(
            r.random_range(0.1..10.0),
            r.random_range(0.0..std::f64::consts::TAU),
        );
        let b: Vec<Complex64> = a.iter().map(|z| z * lam).collect();
        ensure(e(projective_equiv(&a, &b, PROJECTIVE_TOL))?, || {
            format!("{a:?} vs scaled by {lam}")
        })?;
        let mut c = a.clone();
        c[n - 1] += Complex64::new(0.5, -0.25);
        let cl: Vec<Complex64> = c.iter().map(|z| z * lam).collect();
        ensure(
            e(projective_equiv(&a, &c, PROJECTIVE_TOL))?
                == e(projective_equiv(&b, &cl, PROJECTIVE_TOL))?,
            || format!("rescaling changed the answer for {a:?}"),
        )?;
    }
    Ok(format!(
        "norm {w_norm:e}, associativity {w_assoc:e}; 1000 projective rescalings"
    ))
}

fn main() {
    let criteria: [(&str, fn() -> Check); 12] = [
        ("euclidean geodesic", euclidean_geodesic),
        ("cubic metric distance", cubic_distance),
        ("degenerate direction", degenerate_direction),
        ("line-element invariance", invariance),
        ("FLRW reductions", flrw_reductions),
        ("warped-product equivalence", warped_equivalence),
        ("Hessian reconstruction", hessian_reconstruction),
        ("entropy values", entropy_values),
        ("checker soundness", checker_soundness),
        ("determinism", determinism),
        ("triangle inequality", triangle),
        ("scalar algebra", scalar_algebra),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        let secs = t.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("criterion {:>2} PASS  {name} ({secs:.2}s): {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name} ({secs:.2}s): {detail}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
