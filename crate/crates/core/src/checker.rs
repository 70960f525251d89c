//! Sampled checks of metrizability conditions.
//!
//! Every sampled quantity is drawn from a seeded stream, and every failing
//! verdict carries the point, vector or index tuple that produced it, so a
//! report can be reproduced from its seed alone.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::chart::Chart;
use crate::error::{Error, Result};
use crate::expr::{Expr, Params};
use crate::geodesic::{self, SolverConfig};
use crate::maps::{
    pushforward, transformed_line_element, Affine, CartesianToSpherical, CoordinateMap, Map1D,
    PerAxis,
};
use crate::sampling::{axis_probes, interior_point, rng, unit_vector};
use crate::scalar::{Scalar, Tag};
use crate::tensor::{arrangements, MetricSpec, Symmetry, TensorField, TensorSpec};

/// Values below this magnitude count as zero.
pub const ZERO_TOL: f64 = 1e-12;

const STREAM_SYMMETRY: u64 = 1;
const STREAM_DEFINITE: u64 = 2;
const STREAM_INVARIANCE: u64 = 3;
const STREAM_DISTANCE: u64 = 4;
const STREAM_SMOOTH: u64 = 5;
const STREAM_BLEND: u64 = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Indeterminate,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub point: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub vector: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub tuple: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub partner: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub value: Option<Scalar>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub note: Option<String>,
}

// ---------------------------------------------------------------- symmetry

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymmetryCheck {
    pub verdict: Verdict,
    pub mode: Symmetry,
    pub max_deviation: f64,
    pub samples: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub witness: Option<Witness>,
}

/// Compares every stored component with all index rearrangements (upper and
/// lower groups separately when the tensor has upper indices) at sampled
/// points. Deviation is `|a − b| / max(1, |a|, |b|)`; pass below 1e−12.
pub fn check_symmetry(t: &TensorField, samples: usize, seed: u64) -> Result<SymmetryCheck> {
    let (u, _) = t.rank();
    let mode = if u > 0 {
        Symmetry::Separate
    } else {
        Symmetry::Full
    };
    let mut r = rng(seed, STREAM_SYMMETRY);
    let mut worst = 0.0f64;
    let mut witness = None;
    let tuples: Vec<Vec<usize>> = t.components().keys().cloned().collect();
    for _ in 0..samples {
        let p = interior_point(t.chart(), &mut r);
        let table = t.table(&p)?;
        for idx in &tuples {
            let a = table.get(idx);
            for other in rearrangements(idx, u) {
                let b = table.get(&other);
                let dev = (a - b).norm() / 1f64.max(a.norm()).max(b.norm());
                if dev > worst {
                    worst = dev;
                    if dev >= ZERO_TOL {
                        witness = Some(Witness {
                            point: p.clone(),
                            tuple: Some(idx.clone()),
                            partner: Some(other.clone()),
                            value: Some(a - b),
                            ..Witness::default()
                        });
                    }
                }
            }
        }
    }
    let verdict = if worst < ZERO_TOL {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(SymmetryCheck {
        verdict,
        mode,
        max_deviation: worst,
        samples,
        witness,
    })
}

fn rearrangements(idx: &[usize], upper: usize) -> Vec<Vec<usize>> {
    if upper == 0 {
        return arrangements(idx);
    }
    let (a, b) = idx.split_at(upper);
    let mut out = Vec::new();
    for x in arrangements(a) {
        for y in arrangements(b) {
            let mut t = x.clone();
            t.extend(y);
            out.push(t);
        }
    }
    out
}

// ------------------------------------------------------------ definiteness

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Classification {
    PositiveDefinite,
    PositiveSemidefinite,
    NegativeDefinite,
    NegativeSemidefinite,
    Indefinite,
    Degenerate,
    Indeterminate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Definiteness {
    pub classification: Classification,
    /// Some nonzero probe gave a line element of magnitude below 1e−12.
    pub has_null_directions: bool,
    pub points: usize,
    pub vectors: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub min: Option<Witness>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub max: Option<Witness>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub zero: Option<Witness>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub note: Option<String>,
}

impl Definiteness {
    /// Short label, e.g. `indefinite (degenerate directions)`.
    pub fn label(&self) -> String {
        let base = serde_json::to_value(self.classification)
            .ok()
            .and_then(|v| v.as_str().map(String::from))
            .unwrap_or_default();
        if self.has_null_directions && self.classification == Classification::Indefinite {
            format!("{base} (degenerate directions)")
        } else {
            base
        }
    }
}

/// Sign pattern of `ds^{U+L}(v)` over unit probes at sampled points.
///
/// Probes are `±e_i`, `(e_i ± e_j)/√2`, then seeded random unit vectors up
/// to `vectors` per point. Non-real codomains are not ordered, so they get
/// `indeterminate`.
pub fn classify_definiteness(
    m: &MetricSpec,
    points: usize,
    vectors: usize,
    seed: u64,
) -> Result<Definiteness> {
    if m.tensor().codomain() != Tag::Real {
        return Ok(Definiteness {
            classification: Classification::Indeterminate,
            has_null_directions: false,
            points: 0,
            vectors: 0,
            min: None,
            max: None,
            zero: None,
            note: Some(format!(
                "indeterminate: the {} codomain is not ordered",
                m.tensor().codomain()
            )),
        });
    }
    let d = m.dim();
    let mut r = rng(seed, STREAM_DEFINITE);
    let fixed = axis_probes(d);
    let mut min: Option<(f64, Witness)> = None;
    let mut max: Option<(f64, Witness)> = None;
    let mut zero: Option<Witness> = None;
    for _ in 0..points {
        let p = interior_point(m.chart(), &mut r);
        let extra = vectors.saturating_sub(fixed.len());
        let randoms: Vec<Vec<f64>> = (0..extra).map(|_| unit_vector(d, &mut r)).collect();
        for v in fixed.iter().chain(&randoms) {
            let val = m.line_element(&p, v)?.re();
            let w = || Witness {
                point: p.clone(),
                vector: Some(v.clone()),
                value: Some(Scalar::Real(val)),
                ..Witness::default()
            };
            if min.as_ref().is_none_or(|(x, _)| val < *x) {
                min = Some((val, w()));
            }
            if max.as_ref().is_none_or(|(x, _)| val > *x) {
                max = Some((val, w()));
            }
            if val.abs() < ZERO_TOL && zero.is_none() {
                zero = Some(w());
            }
        }
    }
    let lo = min.as_ref().map_or(0.0, |(v, _)| *v);
    let hi = max.as_ref().map_or(0.0, |(v, _)| *v);
    let (pos, neg, null) = (hi >= ZERO_TOL, lo <= -ZERO_TOL, zero.is_some());
    use Classification::*;
    let classification = match (pos, neg, null) {
        (true, true, _) => Indefinite,
        (true, false, false) => PositiveDefinite,
        (true, false, true) => PositiveSemidefinite,
        (false, true, false) => NegativeDefinite,
        (false, true, true) => NegativeSemidefinite,
        (false, false, _) => Degenerate,
    };
    Ok(Definiteness {
        classification,
        has_null_directions: null,
        points,
        vectors: vectors.max(fixed.len()),
        min: min.map(|x| x.1),
        max: max.map(|x| x.1),
        zero,
        note: None,
    })
}

/// Classification of a real (0,2) metric from eigenvalue signs at `p`.
pub fn eigen_classification(m: &MetricSpec, p: &[f64]) -> Result<Classification> {
    if m.tensor().rank() != (0, 2) || m.tensor().codomain() != Tag::Real {
        return Ok(Classification::Indeterminate);
    }
    let d = m.dim();
    let table = m.tensor().table(p)?;
    let mut g = nalgebra::DMatrix::<f64>::zeros(d, d);
    for (idx, v) in &table.entries {
        g[(idx[0], idx[1])] = v.re();
    }
    let sym = (&g + g.transpose()) * 0.5;
    let eig = nalgebra::SymmetricEigen::new(sym).eigenvalues;
    let pos = eig.iter().any(|&e| e >= ZERO_TOL);
    let neg = eig.iter().any(|&e| e <= -ZERO_TOL);
    let null = eig.iter().any(|&e| e.abs() < ZERO_TOL);
    use Classification::*;
    Ok(match (pos, neg, null) {
        (true, true, _) => Indefinite,
        (true, false, false) => PositiveDefinite,
        (true, false, true) => PositiveSemidefinite,
        (false, true, false) => NegativeDefinite,
        (false, true, true) => NegativeSemidefinite,
        (false, false, _) => Degenerate,
    })
}

// --------------------------------------------------------------- invariance

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvarianceCheck {
    pub verdict: Verdict,
    pub samples: usize,
    pub max_relative_deviation: f64,
    pub tolerance_analytic: f64,
    pub tolerance_finite_difference: f64,
    /// Map descriptions with how often each was drawn.
    pub maps_used: BTreeMap<String, usize>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub skipped: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub witness: Option<Witness>,
}

pub const INVARIANCE_TOL_ANALYTIC: f64 = 1e-8;
pub const INVARIANCE_TOL_FD: f64 = 1e-5;

/// One draw from the built-in family of coordinate changes with analytic
/// Jacobians: plane rotations, shears, per-axis affine, `x + α sin x`,
/// `sinh`, and a Cartesian-to-spherical block.
pub fn random_map(dim: usize, r: &mut impl Rng) -> Result<Box<dyn CoordinateMap>> {
    let kinds = if dim >= 2 { 6 } else { 3 };
    let pick = r.random_range(0..kinds);
    let axis = r.random_range(0..dim);
    Ok(match pick {
        0 => {
            let scale = r.random_range(0.5..2.0) * if r.random_bool(0.5) { 1.0 } else { -1.0 };
            let shift = r.random_range(-1.0..1.0);
            Box::new(PerAxis::single(dim, axis, Map1D::Linear { scale, shift }))
        }
        1 => Box::new(PerAxis::single(
            dim,
            axis,
            Map1D::sin_shift(r.random_range(-0.9..0.9))?,
        )),
        2 => Box::new(PerAxis::single(dim, axis, Map1D::Sinh)),
        3 | 4 => {
            let i = r.random_range(0..dim - 1);
            let j = r.random_range(i + 1..dim);
            if pick == 3 {
                Box::new(Affine::givens(dim, i, j, r.random_range(-3.0..3.0))?)
            } else {
                Box::new(Affine::shear(dim, i, j, r.random_range(-1.0..1.0))?)
            }
        }
        _ => {
            let n = r.random_range(2..=dim.min(3));
            let offset = r.random_range(0..=dim - n);
            Box::new(CartesianToSpherical::new(dim, offset, n)?)
        }
    })
}

/// Compares `ds` at an old-chart point and displacement against the
/// transformed components evaluated at the mapped point and pushed-forward
/// displacement. Relative deviation is measured against the sum of term
/// magnitudes of the contraction.
pub fn check_invariance(m: &MetricSpec, samples: usize, seed: u64) -> Result<InvarianceCheck> {
    let d = m.dim();
    let mut r = rng(seed, STREAM_INVARIANCE);
    let mut worst = 0.0f64;
    let mut witness = None;
    let mut used = BTreeMap::new();
    let mut skipped = Vec::new();
    let mut fail = false;
    for _ in 0..samples {
        let map = random_map(d, &mut r)?;
        let p = interior_point(m.chart(), &mut r);
        let dc = unit_vector(d, &mut r);
        let tol = if map.analytic() {
            INVARIANCE_TOL_ANALYTIC
        } else {
            INVARIANCE_TOL_FD
        };
        let attempt = || -> Result<(Scalar, Scalar, f64)> {
            let p_new = map.forward(&p)?;
            let dc_new = pushforward(map.as_ref(), &p, &dc)?;
            let (ds_new, scale) = transformed_line_element(m, map.as_ref(), &p_new, &dc_new)?;
            let ds_old = m.line_element(&p, &dc)?;
            Ok((ds_old, ds_new, scale))
        };
        match attempt() {
            Ok((old, new, scale)) => {
                *used.entry(map.describe()).or_insert(0) += 1;
                let denom = scale.max(old.norm()).max(f64::MIN_POSITIVE);
                let dev = (old - new).norm() / denom;
                if dev > worst || !dev.is_finite() {
                    worst = if dev.is_finite() { dev } else { f64::INFINITY };
                    if !(dev < tol) {
                        fail = true;
                        witness = Some(Witness {
                            point: p.clone(),
                            vector: Some(dc.clone()),
                            value: Some(new - old),
                            note: Some(map.describe()),
                            ..Witness::default()
                        });
                    }
                }
            }
            Err(Error::SingularJacobian(_)) | Err(Error::MapFailure(_)) => {
                skipped.push(format!(
                    "{} at {p:?}: singular or failed map",
                    map.describe()
                ));
            }
            Err(e) => return Err(e),
        }
    }
    Ok(InvarianceCheck {
        verdict: if fail { Verdict::Fail } else { Verdict::Pass },
        samples,
        max_relative_deviation: worst,
        tolerance_analytic: INVARIANCE_TOL_ANALYTIC,
        tolerance_finite_difference: INVARIANCE_TOL_FD,
        maps_used: used,
        skipped,
        witness,
    })
}

// --------------------------------------------------------------- smoothness

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmoothnessProbe {
    pub verdict: Verdict,
    pub samples: usize,
    /// Largest ratio of successive derivative-estimate changes; values well
    /// below 1 mean the estimates settle as the step shrinks.
    pub worst_contraction: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub witness: Option<Witness>,
    pub note: String,
}

/// Central-difference first derivatives of every component along every
/// axis at steps `h, h/2, h/4` (`h = 1e-2·(1 + |x|)`). A component passes
/// when the change between the last two estimates is at most 0.5× the
/// change between the first two (plus a rounding floor). Components that
/// do not settle make the verdict indeterminate; smoothness can only be
/// probed from samples, never proven.
pub fn probe_smoothness(t: &TensorField, samples: usize, seed: u64) -> Result<SmoothnessProbe> {
    let mut r = rng(seed, STREAM_SMOOTH);
    let chart = t.chart();
    let mut worst = 0.0f64;
    let mut witness = None;
    let tuples: Vec<Vec<usize>> = t.components().keys().cloned().collect();
    for _ in 0..samples {
        let p = interior_point(chart, &mut r);
        for axis in 0..t.dim() {
            let h0 = 1e-2 * (1.0 + p[axis].abs());
            let ax = &chart.axes()[axis];
            let room = (p[axis] - ax.lower).min(ax.upper - p[axis]);
            let h0 = h0.min(0.5 * room);
            if !(h0 > 0.0) {
                continue;
            }
            let mut est: Vec<Vec<Scalar>> = Vec::new();
            for k in 0..3 {
                let h = h0 / f64::from(1u32 << k);
                let mut a = p.clone();
                let mut b = p.clone();
                a[axis] += h;
                b[axis] -= h;
                let (ta, tb) = (t.table(&a)?, t.table(&b)?);
                est.push(
                    tuples
                        .iter()
                        .map(|i| (ta.get(i) - tb.get(i)).scale(0.5 / h))
                        .collect(),
                );
            }
            for (c, idx) in tuples.iter().enumerate() {
                let d1 = (est[1][c] - est[0][c]).norm();
                let d2 = (est[2][c] - est[1][c]).norm();
                let floor = 1e-7 * (1.0 + est[2][c].norm());
                if d2 <= floor {
                    continue;
                }
                let ratio = d2 / d1.max(f64::MIN_POSITIVE);
                if ratio > worst {
                    worst = ratio;
                    witness = Some(Witness {
                        point: p.clone(),
                        tuple: Some(idx.clone()),
                        note: Some(format!("axis {axis}")),
                        ..Witness::default()
                    });
                }
            }
        }
    }
    let settled = worst <= 0.5;
    Ok(SmoothnessProbe {
        verdict: if settled {
            Verdict::Pass
        } else {
            Verdict::Indeterminate
        },
        samples,
        worst_contraction: worst,
        witness: if settled { None } else { witness },
        note: "probed by finite differences at shrinking steps; not a proof".into(),
    })
}

// ---------------------------------------------------------- distance axioms

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxiomCheck {
    pub verdict: Verdict,
    pub margin: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub witness: Option<Witness>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistanceAxioms {
    pub epsilon: f64,
    pub pairs: usize,
    pub triples: usize,
    pub nonnegativity: AxiomCheck,
    pub symmetry: AxiomCheck,
    pub triangle: AxiomCheck,
    pub identity_of_indiscernibles: AxiomCheck,
    /// Shrinking chords `p → p + 2^{-k} v`: lengths must go to zero.
    pub topology: AxiomCheck,
    /// `metric` or `pseudo-metric`.
    pub kind: String,
}

/// Runs the distance solver on seeded pairs and triples.
///
/// Identity of indiscernibles is probed on the random pairs and on pairs
/// `(p, p + v/2)` for every null direction `v` the definiteness probe finds;
/// a distinct pair at distance within ε makes the distance a pseudo-metric.
pub fn check_distance_axioms(
    m: &MetricSpec,
    cfg: &SolverConfig,
    pairs: usize,
    triples: usize,
    seed: u64,
) -> Result<DistanceAxioms> {
    let eps = cfg.epsilon();
    let chart = m.chart();
    let mut r = rng(seed, STREAM_DISTANCE);
    let cfg = SolverConfig {
        seed,
        ..cfg.clone()
    };

    let mut min_value = f64::INFINITY;
    let mut neg_witness = None;
    let mut asym = 0.0f64;
    let mut asym_witness = None;
    let mut zero_pair: Option<Witness> = None;
    let note = |p: &[f64], q: &[f64], v: f64, zero_pair: &mut Option<Witness>| {
        if v <= eps && zero_pair.is_none() {
            *zero_pair = Some(Witness {
                point: p.to_vec(),
                vector: Some(q.iter().zip(p).map(|(a, b)| a - b).collect()),
                value: Some(Scalar::Real(v)),
                note: Some(format!("d({p:?}, {q:?}) = {v:e}")),
                ..Witness::default()
            });
        }
    };
    for _ in 0..pairs {
        let p = interior_point(chart, &mut r);
        let q = interior_point(chart, &mut r);
        let pq = geodesic::distance(m, &p, &q, &cfg)?.value;
        let qp = geodesic::distance(m, &q, &p, &cfg)?.value;
        for v in [pq, qp] {
            if v < min_value {
                min_value = v;
                if v < 0.0 {
                    neg_witness = Some(Witness {
                        point: p.clone(),
                        vector: Some(q.clone()),
                        ..Witness::default()
                    });
                }
            }
        }
        if (pq - qp).abs() > asym {
            asym = (pq - qp).abs();
            asym_witness = Some(Witness {
                point: p.clone(),
                vector: Some(q.clone()),
                value: Some(Scalar::Real(pq - qp)),
                note: Some("vector holds the second point".into()),
                ..Witness::default()
            });
        }
        if p != q {
            note(&p, &q, pq, &mut zero_pair);
        }
    }

    // null directions from the sign probe
    if m.tensor().codomain() == Tag::Real {
        let def = classify_definiteness(m, 4, 0, seed)?;
        if let Some(z) = def.zero {
            let v = z.vector.clone().unwrap_or_default();
            let p = z.point.clone();
            let mut q: Vec<f64> = p.iter().zip(&v).map(|(a, b)| a + 0.5 * b).collect();
            chart.project(&mut q);
            if q != p {
                let d = geodesic::distance(m, &p, &q, &cfg)?.value;
                note(&p, &q, d, &mut zero_pair);
            }
        }
    }

    let triple_pts: Vec<[Vec<f64>; 3]> = (0..triples)
        .map(|_| {
            [
                interior_point(chart, &mut r),
                interior_point(chart, &mut r),
                interior_point(chart, &mut r),
            ]
        })
        .collect();
    let tri = geodesic::triangle_probe(m, &triple_pts, &cfg)?;

    // shrinking chords
    let p = interior_point(chart, &mut r);
    let v = unit_vector(m.dim(), &mut r);
    let mut lengths = Vec::new();
    for k in 1..=8 {
        let s = 0.5f64.powi(k);
        let mut q: Vec<f64> = p.iter().zip(&v).map(|(a, b)| a + s * b).collect();
        chart.project(&mut q);
        let c = geodesic::Curve::chord(&p, &q, cfg.segments);
        lengths.push(geodesic::curve_length(m, &c, cfg.quadrature)?);
    }
    let shrinks = lengths[7] <= lengths[0] * 0.5f64.powi(5) + ZERO_TOL;

    let pseudo = zero_pair.is_some();
    Ok(DistanceAxioms {
        epsilon: eps,
        pairs,
        triples,
        nonnegativity: AxiomCheck {
            verdict: if min_value >= 0.0 || pairs == 0 {
                Verdict::Pass
            } else {
                Verdict::Fail
            },
            margin: if pairs == 0 { 0.0 } else { min_value },
            witness: neg_witness,
            note: None,
        },
        symmetry: AxiomCheck {
            verdict: if asym <= eps {
                Verdict::Pass
            } else {
                Verdict::Fail
            },
            margin: asym,
            witness: if asym > eps { asym_witness } else { None },
            note: None,
        },
        triangle: AxiomCheck {
            verdict: if tri.violations.is_empty() {
                Verdict::Pass
            } else {
                Verdict::Fail
            },
            margin: if triples == 0 { 0.0 } else { tri.worst_margin },
            witness: tri.violations.first().map(|v| Witness {
                point: v.p.clone(),
                vector: Some(v.q.clone()),
                value: Some(Scalar::Real(v.margin)),
                note: Some(format!("third point {:?}", v.r)),
                ..Witness::default()
            }),
            note: None,
        },
        identity_of_indiscernibles: AxiomCheck {
            verdict: if pseudo { Verdict::Fail } else { Verdict::Pass },
            margin: zero_pair
                .as_ref()
                .and_then(|w| w.value.map(|s| s.re()))
                .unwrap_or(f64::NAN),
            witness: zero_pair,
            note: pseudo.then(|| "identity of indiscernibles fails: pseudo-metric".to_string()),
        },
        topology: AxiomCheck {
            verdict: if shrinks {
                Verdict::Pass
            } else {
                Verdict::Fail
            },
            margin: lengths[7],
            witness: (!shrinks).then(|| Witness {
                point: p.clone(),
                vector: Some(v.clone()),
                ..Witness::default()
            }),
            note: Some("chord lengths at steps 2^-1 .. 2^-8".into()),
        },
        kind: if pseudo { "pseudo-metric" } else { "metric" }.into(),
    })
}

// ---------------------------------------------------------------- blending

/// Partition-of-unity blend `Σ ψ_i g_i` of (0,2) metrics sharing a chart.
///
/// Weights are expressions in the chart coordinates. They are validated on
/// `samples` seeded points: nonnegative and summing to 1 within 1e−12. Each
/// local metric must be symmetric and positive-definite wherever its weight
/// is positive at the samples.
pub fn blend_metrics(
    parts: &[(Expr, TensorField)],
    samples: usize,
    seed: u64,
) -> Result<TensorField> {
    let (_, first) = parts
        .first()
        .ok_or_else(|| Error::PartitionOfUnity("no local metrics".into()))?;
    let chart: &Chart = first.chart();
    for (_, g) in parts {
        if g.rank() != (0, 2) || g.codomain() != Tag::Real {
            return Err(Error::RankMismatch {
                required: "(0,2) real".into(),
                found: crate::tensor::rank_str(g),
            });
        }
        if g.chart() != chart {
            return Err(Error::InvalidChart(
                "local metrics must share one chart".into(),
            ));
        }
    }
    let empty = Params::new();
    let mut r = rng(seed, STREAM_BLEND);
    for _ in 0..samples {
        let p = interior_point(chart, &mut r);
        let mut total = 0.0;
        for (k, (w, g)) in parts.iter().enumerate() {
            let psi = w.eval_real(&p, &empty)?;
            if psi < 0.0 {
                return Err(Error::PartitionOfUnity(format!(
                    "weight {k} is {psi} at {p:?}"
                )));
            }
            total += psi;
            if psi > 0.0 {
                let spec = MetricSpec::from_tensor(format!("local {k}"), g.clone())?;
                if eigen_classification(&spec, &p)? != Classification::PositiveDefinite {
                    return Err(Error::PartitionOfUnity(format!(
                        "local metric {k} is not positive-definite at {p:?}"
                    )));
                }
                if check_symmetry(g, 1, seed)?.verdict != Verdict::Pass {
                    return Err(Error::PartitionOfUnity(format!(
                        "local metric {k} is not symmetric"
                    )));
                }
            }
        }
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::PartitionOfUnity(format!(
                "weights sum to {total} at {p:?}"
            )));
        }
    }
    let mut comps: BTreeMap<Vec<usize>, Vec<Expr>> = BTreeMap::new();
    for (w, g) in parts {
        for (idx, e) in g.components() {
            let e = e.inline(g.params())?;
            comps
                .entry(idx.clone())
                .or_default()
                .push(Expr::mul(w.clone(), e));
        }
    }
    let mut spec = TensorSpec::new(chart.clone(), 0, 2).symmetry(Symmetry::Full);
    for (idx, terms) in comps {
        spec.set(idx, Expr::sum(terms));
    }
    spec.build()
}

// ------------------------------------------------------- point-set topology

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StaticCondition {
    pub name: String,
    pub verdict: Verdict,
    pub basis: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointSetReport {
    pub status: String,
    pub conditions: Vec<StaticCondition>,
    pub reference: String,
}

/// Constant verdicts for box subsets of `R^D` with the subspace topology.
pub fn point_set_conditions(chart: &Chart) -> PointSetReport {
    let d = chart.dim();
    let basis = format!("box subset of R^{d} with the subspace topology");
    let conditions = [
        "Hausdorff",
        "Second-countable",
        "Locally Euclidean",
        "Paracompact",
    ]
    .into_iter()
    .map(|name| StaticCondition {
        name: name.into(),
        verdict: Verdict::Pass,
        basis: basis.clone(),
    })
    .collect();
    PointSetReport {
        status: "asserted, not computed".into(),
        conditions,
        reference:
            "Urysohn metrization theorem: a second-countable regular Hausdorff space is metrizable"
                .into(),
    }
}

// ------------------------------------------------------------------ report

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckOptions {
    pub points: usize,
    pub vectors: usize,
    pub invariance_samples: usize,
    pub smoothness_samples: usize,
    pub pairs: usize,
    pub triples: usize,
    pub seed: u64,
    pub solver: SolverConfig,
}

impl CheckOptions {
    pub fn new(seed: u64) -> Self {
        CheckOptions {
            points: 256,
            vectors: 256,
            invariance_samples: 100,
            smoothness_samples: 8,
            pairs: 4,
            triples: 4,
            seed,
            solver: SolverConfig::with_seed(seed),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropertyReport {
    pub metric: String,
    pub seed: u64,
    pub options: CheckOptions,
    pub symmetry: SymmetryCheck,
    pub definiteness: Definiteness,
    /// Pass only for positive-definite; a fail here records that the
    /// sign condition does not hold, which is informative for indefinite
    /// and higher-order line elements.
    pub positive_definite: Verdict,
    pub smoothness: SmoothnessProbe,
    pub invariance: InvarianceCheck,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub distance_axioms: Option<DistanceAxioms>,
    pub point_set: PointSetReport,
}

impl PropertyReport {
    /// True when a hard condition failed: index symmetry or invariance.
    pub fn has_failures(&self) -> bool {
        self.symmetry.verdict == Verdict::Fail || self.invariance.verdict == Verdict::Fail
    }
}

pub fn check_metric(m: &MetricSpec, opts: &CheckOptions) -> Result<PropertyReport> {
    let seed = opts.seed;
    let symmetry = check_symmetry(m.tensor(), opts.points.min(32), seed)?;
    let definiteness = classify_definiteness(m, opts.points, opts.vectors, seed)?;
    let positive_definite = match definiteness.classification {
        Classification::PositiveDefinite => Verdict::Pass,
        Classification::Indeterminate => Verdict::Indeterminate,
        _ => Verdict::Fail,
    };
    let smoothness = probe_smoothness(m.tensor(), opts.smoothness_samples, seed)?;
    let invariance = check_invariance(m, opts.invariance_samples, seed)?;
    let distance_axioms = if opts.pairs + opts.triples > 0 {
        Some(check_distance_axioms(
            m,
            &SolverConfig {
                seed,
                ..opts.solver.clone()
            },
            opts.pairs,
            opts.triples,
            seed,
        )?)
    } else {
        None
    };
    Ok(PropertyReport {
        metric: m.name.clone(),
        seed,
        options: opts.clone(),
        symmetry,
        definiteness,
        positive_definite,
        smoothness,
        invariance,
        distance_axioms,
        point_set: point_set_conditions(m.chart()),
    })
}
