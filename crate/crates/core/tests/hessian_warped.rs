use metric_pair::hessian::{
    hessian_field, hessian_metric, verify_flrw_warped, warped_product, Potential, WarpSpec,
};
use metric_pair::{catalog, checker, Axis, Chart, Expr, Role, Symmetry, TensorSpec};

fn plane() -> Chart {
    Chart::new(vec![
        Axis::new("x", Role::Space),
        Axis::new("y", Role::Space),
    ])
    .unwrap()
}

#[test]
fn cubic_potential_reproduces_cubic2d() {
    // third partials of (x^3 + y^3)/6 are 1 on the pure axes and 0 elsewhere
    let p = Potential::parse("(x^3 + y^3)/6", plane()).unwrap();
    let cubic = catalog::build_default("cubic2d").unwrap();
    for point in [[0.0, 0.0], [0.7, -0.4], [-1.5, 2.0]] {
        let h = hessian_metric(&p, 3, &point, None).unwrap();
        let g = cubic.tensor().table(&point).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    let idx = [i, j, k];
                    assert!(
                        (h.table.get(&idx) - g.get(&idx)).norm() < 1e-6,
                        "{idx:?} at {point:?}"
                    );
                }
            }
        }
        let step = h.step.iter().cloned().fold(0.0, f64::max);
        assert!(h.max_asymmetry < 10.0 * step * step);
    }
}

#[test]
fn quadratic_potential_is_exact_and_constant() {
    let p = Potential::parse("(x^2 + y^2)/2", plane()).unwrap();
    let a = hessian_metric(&p, 2, &[0.1, 0.9], None).unwrap();
    let b = hessian_metric(&p, 2, &[-3.0, 1.7], None).unwrap();
    for idx in [[0, 0], [0, 1], [1, 0], [1, 1]] {
        let want = if idx[0] == idx[1] { 1.0 } else { 0.0 };
        assert!((a.table.get(&idx).re() - want).abs() < 1e-8);
        assert!((a.table.get(&idx) - b.table.get(&idx)).norm() < 1e-8);
    }
}

#[test]
fn hessian_passes_symmetry_check() {
    let p = Potential::parse("x^4*y + sin(x*y)", plane()).unwrap();
    let f = hessian_field(&p, 4).unwrap();
    assert_eq!(f.symmetry(), Symmetry::Full);
    let s = checker::check_symmetry(&f, 32, 1).unwrap();
    assert_eq!(s.verdict, checker::Verdict::Pass);
}

#[test]
fn flrw_is_a_warped_product() {
    for (a, lo, hi) in [("1", -1.0, 1.0), ("exp(t)", -1.0, 1.0), ("t^2", 0.1, 3.0)] {
        let v = verify_flrw_warped(a, 1.0, lo, hi, 100, 7).unwrap();
        assert!(v.equivalent, "a = {a}: {}", v.max_deviation);
    }
    let v = verify_flrw_warped("exp(t)", 2.5, -1.0, 1.0, 100, 7).unwrap();
    assert!(v.equivalent);
}

fn block(chart: Chart, diag: Vec<Expr>) -> metric_pair::TensorField {
    let mut s = TensorSpec::new(chart, 0, 2).symmetry(Symmetry::Full);
    for (i, e) in diag.into_iter().enumerate() {
        s.set(vec![i, i], e);
    }
    s.build().unwrap()
}

#[test]
fn unit_warp_is_direct_sum() {
    let base = block(Chart::euclidean(2), vec![Expr::c(1.0), Expr::c(1.0)]);
    let fiber_chart = Chart::new(vec![Axis::new("u", Role::Space)]).unwrap();
    let fiber = block(fiber_chart, vec![Expr::c(1.0)]);
    let m = warped_product(&WarpSpec {
        base,
        fiber,
        warp: Expr::c(1.0),
    })
    .unwrap();
    let t = m.tensor().table(&[0.3, 0.2, -0.5]).unwrap();
    for i in 0..3 {
        for j in 0..3 {
            assert_eq!(t.get(&[i, j]).re(), if i == j { 1.0 } else { 0.0 });
        }
    }
}

#[test]
fn sphere_fiber_and_homogeneity() {
    let base_chart = Chart::new(vec![Axis::new("t", Role::Time).bounded(0.1, 5.0)]).unwrap();
    let base = block(base_chart.clone(), vec![Expr::c(-1.0)]);
    let sphere = Chart::new(vec![
        Axis::new("th", Role::Space).bounded(0.0, std::f64::consts::PI),
        Axis::new("ph", Role::Space),
    ])
    .unwrap();
    let scope = sphere.scope();
    let gf = block(
        sphere,
        vec![Expr::c(1.0), Expr::parse("sin(th)^2", &scope).unwrap()],
    );
    let warp = Expr::parse("t^2", &base_chart.scope()).unwrap();
    let m = warped_product(&WarpSpec {
        base,
        fiber: gf.clone(),
        warp,
    })
    .unwrap();
    let (t, th, ph) = (1.3, 0.8, 2.0);
    let tab = m.tensor().table(&[t, th, ph]).unwrap();
    let f2 = (t * t) * (t * t);
    assert!((tab.get(&[0, 0]).re() + 1.0).abs() < 1e-15);
    assert!((tab.get(&[1, 1]).re() - f2).abs() < 1e-12);
    assert!((tab.get(&[2, 2]).re() - f2 * th.sin().powi(2)).abs() < 1e-12);
    assert_eq!(tab.get(&[0, 1]).re(), 0.0);

    let fiber = metric_pair::MetricSpec::from_tensor("sphere", gf).unwrap();
    let d = [0.0, 0.3, -0.7];
    let lhs = m.line_element(&[t, th, ph], &d).unwrap().re();
    let rhs = f2 * fiber.line_element(&[th, ph], &d[1..]).unwrap().re();
    assert!((lhs - rhs).abs() < 1e-12 * rhs.abs().max(1.0));
}
