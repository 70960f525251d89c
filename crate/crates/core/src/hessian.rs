//! Metrics built from potentials (Hessian structures) and warped products.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::chart::{Axis, Chart, Role};
use crate::error::{Error, Result};
use crate::expr::{Expr, Params};
use crate::sampling::{interior_point, rng};
use crate::scalar::{Scalar, Tag};
use crate::tensor::{arrangements, ComponentTable, MetricSpec, Symmetry, TensorField, TensorSpec};

/// Recorded with every Hessian result: the construction takes plain
/// coordinate derivatives and assumes, without checking, whatever flat
/// connection or bundle structure makes them meaningful.
pub const FLAT_CONNECTION_NOTE: &str =
    "coordinate derivatives assume a flat connection; no such structure is checked";

#[derive(Clone, Debug)]
pub struct Potential {
    pub phi: Expr,
    pub chart: Chart,
}

impl Potential {
    pub fn parse(src: &str, chart: Chart) -> Result<Self> {
        let phi = Expr::parse(src, &chart.scope())?;
        Ok(Potential { phi, chart })
    }

    fn eval(&self, x: &[f64]) -> Result<f64> {
        self.phi.eval_real(x, &Params::new())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HessianResult {
    pub order: usize,
    pub point: Vec<f64>,
    /// Per-axis finite-difference step.
    pub step: Vec<f64>,
    /// Largest difference between permuted entries before averaging.
    pub max_asymmetry: f64,
    pub table: ComponentTable,
    pub note: &'static str,
}

/// Default step `ε^{1/(L+2)}·(1 + |x|)` with `ε` the machine epsilon.
pub fn default_step(order: usize, x: f64) -> f64 {
    f64::EPSILON.powf(1.0 / (order as f64 + 2.0)) * (1.0 + x.abs())
}

fn check_order(order: usize) -> Result<()> {
    if !(2..=4).contains(&order) {
        return Err(Error::BadConfig(format!(
            "Hessian order must be 2, 3 or 4, got {order}"
        )));
    }
    Ok(())
}

/// Order-`L` partials of `φ` at `point` by nested central differences,
/// averaged over index permutations.
///
/// `fd_step` scales the default step when given as a relative factor;
/// `None` uses [`default_step`] on every axis.
pub fn hessian_metric(
    p: &Potential,
    order: usize,
    point: &[f64],
    fd_step: Option<f64>,
) -> Result<HessianResult> {
    check_order(order)?;
    p.chart.check_point(point)?;
    let d = p.chart.dim();
    let step: Vec<f64> = point
        .iter()
        .map(|&x| match fd_step {
            Some(h) => h * (1.0 + x.abs()),
            None => default_step(order, x),
        })
        .collect();
    if step.iter().any(|h| !(*h > 0.0 && h.is_finite())) {
        return Err(Error::BadConfig(
            "finite-difference step must be positive".into(),
        ));
    }

    let mut raw: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
    let mut idx = vec![0usize; order];
    let mut x = point.to_vec();
    loop {
        let mut acc = 0.0;
        for signs in 0u32..(1 << order) {
            x.copy_from_slice(point);
            let mut sign = 1.0;
            for (k, &i) in idx.iter().enumerate() {
                let s = if signs >> k & 1 == 1 { -1.0 } else { 1.0 };
                sign *= s;
                x[i] += s * step[i];
            }
            acc += sign * p.eval(&x)?;
        }
        let denom: f64 = idx.iter().map(|&i| 2.0 * step[i]).product();
        let v = acc / denom;
        if !v.is_finite() {
            return Err(Error::NonFinite(format!("derivative {idx:?} at {point:?}")));
        }
        raw.insert(idx.clone(), v);
        if !next_tuple(&mut idx, d) {
            break;
        }
    }

    let mut asym = 0.0f64;
    let mut entries = BTreeMap::new();
    for (t, &v) in &raw {
        let mut sorted = t.clone();
        sorted.sort_unstable();
        let perms = arrangements(&sorted);
        let mean = perms.iter().map(|q| raw[q]).sum::<f64>() / perms.len() as f64;
        for q in &perms {
            asym = asym.max((raw[q] - v).abs());
        }
        if mean != 0.0 {
            entries.insert(t.clone(), Scalar::Real(mean));
        }
    }
    Ok(HessianResult {
        order,
        point: point.to_vec(),
        step,
        max_asymmetry: asym,
        table: ComponentTable {
            upper: 0,
            lower: order,
            codomain: Tag::Real,
            entries,
        },
        note: FLAT_CONNECTION_NOTE,
    })
}

/// Odometer over `{0..d}^L`.
fn next_tuple(idx: &mut [usize], d: usize) -> bool {
    for k in (0..idx.len()).rev() {
        idx[k] += 1;
        if idx[k] < d {
            return true;
        }
        idx[k] = 0;
    }
    false
}

/// Symbolic order-`L` Hessian as a fully-symmetric (0,L) tensor field.
pub fn hessian_field(p: &Potential, order: usize) -> Result<TensorField> {
    check_order(order)?;
    let d = p.chart.dim();
    let empty = Params::new();
    let mut spec = TensorSpec::new(p.chart.clone(), 0, order).symmetry(Symmetry::Full);
    let mut idx = vec![0usize; order];
    loop {
        if idx.windows(2).all(|w| w[0] <= w[1]) {
            let mut e = p.phi.clone();
            for &i in &idx {
                e = e.derivative(i, &empty)?;
            }
            if !matches!(e.as_const(), Some(s) if s.is_zero()) {
                for t in arrangements(&idx) {
                    spec.set(t, e.clone());
                }
            }
        }
        if !next_tuple(&mut idx, d) {
            break;
        }
    }
    spec.build()
}

/// Base and fiber (0,2) metrics joined by a warping function of the base.
#[derive(Clone, Debug)]
pub struct WarpSpec {
    pub base: TensorField,
    pub fiber: TensorField,
    /// Expression in the base coordinates.
    pub warp: Expr,
}

/// Number of seeded base points at which the warp is checked for positivity.
pub const WARP_SAMPLES: usize = 64;

/// `g = π*g_B + f² σ*g_F` on the product chart (base axes first).
///
/// The warp is checked positive at [`WARP_SAMPLES`] seeded base points; a
/// nonpositive value is reported with the offending point.
pub fn warped_product(w: &WarpSpec) -> Result<MetricSpec> {
    for (name, t) in [("base", &w.base), ("fiber", &w.fiber)] {
        if t.rank() != (0, 2) {
            return Err(Error::RankMismatch {
                required: "(0,2)".into(),
                found: crate::tensor::rank_str(t),
            });
        }
        if t.symmetry() != Symmetry::Full {
            return Err(Error::InvalidTensor(format!(
                "the {name} metric must be declared fully-symmetric"
            )));
        }
    }
    let db = w.base.dim();
    let mut used = std::collections::BTreeSet::new();
    w.warp.coords_used(&mut used);
    if used.iter().any(|&i| i >= db) {
        return Err(Error::InvalidTensor(
            "the warp may only depend on base coordinates".into(),
        ));
    }
    let empty = Params::new();
    let mut r = rng(0, 0);
    for _ in 0..WARP_SAMPLES {
        let pb = interior_point(w.base.chart(), &mut r);
        let f = w.warp.eval_real(&pb, &empty)?;
        if f <= 0.0 {
            return Err(Error::NonPositiveWarp {
                value: f,
                point: pb,
            });
        }
    }
    let chart = w.base.chart().product(w.fiber.chart())?;
    let codomain = w.base.codomain().max(w.fiber.codomain());
    let mut spec = TensorSpec::new(chart, 0, 2)
        .symmetry(Symmetry::Full)
        .codomain(codomain);
    for (idx, e) in w.base.components() {
        spec.set(idx.clone(), e.inline(w.base.params())?);
    }
    let f2 = Expr::powi(w.warp.clone(), 2);
    for (idx, e) in w.fiber.components() {
        let shifted = e
            .inline(w.fiber.params())?
            .map_coords(&|i, name| Expr::coord(i + db, name));
        spec.set(
            idx.iter().map(|i| i + db).collect(),
            Expr::mul(f2.clone(), shifted),
        );
    }
    MetricSpec::from_tensor("warped-product", spec.build()?)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WarpVerification {
    pub equivalent: bool,
    pub max_deviation: f64,
    pub samples: usize,
    pub tolerance: f64,
}

pub const WARP_TOL: f64 = 1e-14;

/// Builds FLRW from the catalog and as `(R, -c² dt²) ×_a (R³, δ)`, then
/// compares all components at `samples` seeded points with `t` in
/// `[t_lo, t_hi]`.
pub fn verify_flrw_warped(
    a: &str,
    c: f64,
    t_lo: f64,
    t_hi: f64,
    samples: usize,
    seed: u64,
) -> Result<WarpVerification> {
    let params = [
        ("a".to_string(), a.to_string()),
        ("c".to_string(), format!("{c:?}")),
    ]
    .into();
    let flrw = crate::catalog::build("flrw", &params)?;
    let base_chart = Chart::new(vec![Axis::new("t", Role::Time).bounded(t_lo, t_hi)])?;
    let warp = Expr::parse(a, &base_chart.scope())?;
    let base = TensorSpec::new(base_chart, 0, 2)
        .symmetry(Symmetry::Full)
        .with(vec![0, 0], Expr::c(-c * c))
        .build()?;
    let fiber_chart = Chart::new(
        (1..=3)
            .map(|i| Axis::new(format!("x{i}"), Role::Space))
            .collect(),
    )?;
    let mut fspec = TensorSpec::new(fiber_chart, 0, 2).symmetry(Symmetry::Full);
    for i in 0..3 {
        fspec.set(vec![i, i], Expr::c(1.0));
    }
    let warped = warped_product(&WarpSpec {
        base,
        fiber: fspec.build()?,
        warp,
    })?;

    let mut r = rng(seed, 0);
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let mut p = interior_point(warped.chart(), &mut r);
        p[0] = p[0].clamp(t_lo, t_hi);
        let x = flrw.tensor().table(&p)?;
        let y = warped.tensor().table(&p)?;
        for k in x.entries.keys().chain(y.entries.keys()) {
            worst = worst.max((x.get(k) - y.get(k)).norm());
        }
    }
    Ok(WarpVerification {
        equivalent: worst < WARP_TOL,
        max_deviation: worst,
        samples,
        tolerance: WARP_TOL,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plane() -> Chart {
        Chart::new(vec![
            Axis::new("x", Role::Space),
            Axis::new("y", Role::Space),
        ])
        .unwrap()
    }

    #[test]
    fn bilinear_potential() {
        let p = Potential::parse("x*y", plane()).unwrap();
        let h = hessian_metric(&p, 2, &[0.3, -0.8], None).unwrap();
        assert!((h.table.get(&[0, 1]).re() - 1.0).abs() < 1e-8);
        assert!(h.table.get(&[0, 0]).re().abs() < 1e-8);
    }

    #[test]
    fn symbolic_matches_numeric() {
        let p = Potential::parse("exp(x)*sin(y)", plane()).unwrap();
        let t = hessian_field(&p, 2).unwrap();
        let h = hessian_metric(&p, 2, &[0.2, 0.4], None).unwrap();
        let exact = t.table(&[0.2, 0.4]).unwrap();
        for k in [[0, 0], [0, 1], [1, 1]] {
            assert!((exact.get(&k) - h.table.get(&k)).norm() < 1e-7);
        }
    }

    #[test]
    fn order_is_limited() {
        let p = Potential::parse("x", plane()).unwrap();
        assert!(hessian_metric(&p, 5, &[0.0, 0.0], None).is_err());
        assert!(hessian_metric(&p, 1, &[0.0, 0.0], None).is_err());
    }

    #[test]
    fn nonpositive_warp_is_rejected() {
        let base_chart = Chart::new(vec![Axis::new("t", Role::Time)]).unwrap();
        let base = TensorSpec::new(base_chart.clone(), 0, 2)
            .symmetry(Symmetry::Full)
            .with(vec![0, 0], Expr::c(-1.0))
            .build()
            .unwrap();
        let fiber = TensorSpec::new(Chart::euclidean(1), 0, 2)
            .symmetry(Symmetry::Full)
            .with(vec![0, 0], Expr::c(1.0))
            .build()
            .unwrap();
        let warp = Expr::parse("t", &base_chart.scope()).unwrap();
        assert!(matches!(
            warped_product(&WarpSpec { base, fiber, warp }),
            Err(Error::NonPositiveWarp { .. })
        ));
    }
}
