//! Distance functionals `d(p, q) = inf ∫ |ds^{U+L}(γ̇)|^{1/(U+L)} dt` over
//! discretized curves.
//!
//! A curve has `N + 1` uniformly parameterized nodes on `[0, 1]`.
//! Velocities are centered differences at interior nodes and one-sided at
//! the endpoints. The infimum estimate is the minimum of the straight chord,
//! a set of seeded restarts (noisy chords minimized over their interior
//! nodes), and a seeded search over two-leg polygons.
//!
//! With Simpson weights, even- and odd-indexed nodes enter the sum as two
//! independent chains, so for a constant metric the discrete length is
//! `(2/3)·L_even + (1/3)·L_odd` with each `L` a polygon length. The polygon
//! search exploits this to reach zig-zag infima through null directions.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::chart::Chart;
use crate::error::{Error, Result};
use crate::tensor::MetricSpec;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Quadrature {
    /// One evaluation per segment at its midpoint.
    Midpoint,
    /// Composite Simpson over the nodes; needs an even segment count.
    #[default]
    Simpson,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Steepest descent.
    GradientDescent,
    /// Limited-memory BFGS directions on the same gradients.
    #[default]
    Lbfgs,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub segments: usize,
    pub quadrature: Quadrature,
    pub restarts: usize,
    pub max_iters: usize,
    /// Stop when a step moves no node coordinate by more than this
    /// (relative to `1 + |x|`).
    pub step_tol: f64,
    /// Stop when an iteration lowers the length by less than this
    /// (relative to the current length).
    pub value_tol: f64,
    /// Restart noise standard deviation as a fraction of the chord length.
    pub noise: f64,
    pub method: Method,
    /// Seeded starts for the two-leg polygon search; 0 disables it.
    pub corner_starts: usize,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            segments: 64,
            quadrature: Quadrature::Simpson,
            restarts: 8,
            max_iters: 300,
            step_tol: 1e-10,
            value_tol: 1e-9,
            noise: 0.1,
            method: Method::Lbfgs,
            corner_starts: 8,
            seed: 0,
        }
    }
}

impl SolverConfig {
    pub fn with_seed(seed: u64) -> Self {
        SolverConfig {
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.segments < 2 {
            return Err(Error::BadConfig("segments must be at least 2".into()));
        }
        if self.quadrature == Quadrature::Simpson && self.segments % 2 == 1 {
            return Err(Error::BadConfig(
                "Simpson quadrature needs an even segment count".into(),
            ));
        }
        if self.restarts < 1 {
            return Err(Error::BadConfig("restarts must be at least 1".into()));
        }
        for (name, v) in [("step_tol", self.step_tol), ("value_tol", self.value_tol)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::BadConfig(format!("{name} must be positive")));
            }
        }
        if !(self.noise >= 0.0 && self.noise.is_finite()) {
            return Err(Error::BadConfig("noise must be nonnegative".into()));
        }
        Ok(())
    }

    /// Slack allowed when comparing solver outputs: twice the value tolerance.
    pub fn epsilon(&self) -> f64 {
        2.0 * self.value_tol
    }
}

/// Discrete curve with `N + 1` nodes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    pub nodes: Vec<Vec<f64>>,
}

impl Curve {
    pub fn chord(p: &[f64], q: &[f64], segments: usize) -> Curve {
        let nodes = (0..=segments)
            .map(|j| {
                let t = j as f64 / segments as f64;
                p.iter().zip(q).map(|(a, b)| a + t * (b - a)).collect()
            })
            .collect();
        Curve { nodes }
    }

    pub fn segments(&self) -> usize {
        self.nodes.len().saturating_sub(1)
    }

    fn flat(&self) -> Vec<f64> {
        self.nodes.iter().flatten().copied().collect()
    }

    fn from_flat(x: &[f64], d: usize) -> Curve {
        Curve {
            nodes: x.chunks(d).map(<[f64]>::to_vec).collect(),
        }
    }
}

/// Length integrand evaluation on flat node arrays.
struct Functional<'a> {
    m: &'a MetricSpec,
    d: usize,
    n: usize,
    root: u32,
    quad: Quadrature,
    evals: std::cell::Cell<u64>,
}

impl<'a> Functional<'a> {
    fn new(m: &'a MetricSpec, n: usize, quad: Quadrature) -> Self {
        Functional {
            m,
            d: m.dim(),
            n,
            root: m.order() as u32,
            quad,
            evals: std::cell::Cell::new(0),
        }
    }

    fn integrand(&self, x: &[f64], v: &[f64]) -> f64 {
        self.evals.set(self.evals.get() + 1);
        match self.m.line_element_unchecked(x, v) {
            Ok(s) => {
                let a = s.norm();
                if !a.is_finite() {
                    return f64::INFINITY;
                }
                match self.root {
                    1 => a,
                    2 => a.sqrt(),
                    3 => a.cbrt(),
                    k => a.powf(1.0 / k as f64),
                }
            }
            Err(_) => f64::INFINITY,
        }
    }

    fn node<'x>(&self, x: &'x [f64], j: usize) -> &'x [f64] {
        &x[j * self.d..(j + 1) * self.d]
    }

    /// Weighted term `j` of the quadrature sum.
    fn term(&self, x: &[f64], j: usize, buf: &mut [f64]) -> f64 {
        let n = self.n;
        let nf = n as f64;
        match self.quad {
            Quadrature::Simpson => {
                let (a, b, scale) = if j == 0 {
                    (0, 1, nf)
                } else if j == n {
                    (n - 1, n, nf)
                } else {
                    (j - 1, j + 1, 0.5 * nf)
                };
                let (xa, xb) = (self.node(x, a), self.node(x, b));
                for i in 0..self.d {
                    buf[i] = (xb[i] - xa[i]) * scale;
                }
                let w = if j == 0 || j == n {
                    1.0
                } else if j % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                w / (3.0 * nf) * self.integrand(self.node(x, j), buf)
            }
            Quadrature::Midpoint => {
                // segment j spans nodes j and j + 1
                let (xa, xb) = (self.node(x, j), self.node(x, j + 1));
                let mut mid = vec![0.0; self.d];
                for i in 0..self.d {
                    buf[i] = (xb[i] - xa[i]) * nf;
                    mid[i] = 0.5 * (xa[i] + xb[i]);
                }
                self.integrand(&mid, buf) / nf
            }
        }
    }

    fn terms(&self) -> usize {
        match self.quad {
            Quadrature::Simpson => self.n + 1,
            Quadrature::Midpoint => self.n,
        }
    }

    /// Terms that depend on node `k`.
    fn affected(&self, k: usize) -> std::ops::RangeInclusive<usize> {
        match self.quad {
            Quadrature::Simpson => k.saturating_sub(1)..=(k + 1).min(self.n),
            Quadrature::Midpoint => k.saturating_sub(1)..=k.min(self.n - 1),
        }
    }

    fn length(&self, x: &[f64]) -> f64 {
        let mut buf = vec![0.0; self.d];
        let mut total = 0.0;
        for j in 0..self.terms() {
            total += self.term(x, j, &mut buf);
        }
        total
    }

    /// Central-difference gradient with respect to interior nodes, using
    /// only the terms each node touches. Step `1e-6·(1 + |x|)`.
    fn gradient(&self, x: &mut [f64], chart: &Chart, g: &mut [f64]) {
        let mut buf = vec![0.0; self.d];
        let constant = self.m.is_constant();
        g.iter_mut().for_each(|v| *v = 0.0);
        for k in 1..self.n {
            for a in 0..self.d {
                let i = k * self.d + a;
                let x0 = x[i];
                let h = 1e-6 * (1.0 + x0.abs());
                let ax = &chart.axes()[a];
                let hi = (x0 + h).min(ax.upper);
                let lo = (x0 - h).max(ax.lower);
                if hi <= lo {
                    continue;
                }
                // with a constant table, the Simpson term at node k does not
                // depend on the position of node k
                let skip = constant && self.quad == Quadrature::Simpson;
                let terms = || self.affected(k).filter(move |&j| !(skip && j == k));
                x[i] = hi;
                let fp: f64 = terms().map(|j| self.term(x, j, &mut buf)).sum();
                x[i] = lo;
                let fm: f64 = terms().map(|j| self.term(x, j, &mut buf)).sum();
                x[i] = x0;
                let d = (fp - fm) / (hi - lo);
                g[i] = if d.is_finite() { d } else { 0.0 };
            }
        }
    }
}

fn project(x: &mut [f64], chart: &Chart) {
    for node in x.chunks_mut(chart.dim()) {
        chart.project(node);
    }
}

/// Length of a curve under the metric's distance integrand.
pub fn curve_length(m: &MetricSpec, c: &Curve, quad: Quadrature) -> Result<f64> {
    let n = c.segments();
    if n < 2 {
        return Err(Error::BadConfig(
            "a curve needs at least two segments".into(),
        ));
    }
    if quad == Quadrature::Simpson && n % 2 == 1 {
        return Err(Error::BadConfig(
            "Simpson quadrature needs an even segment count".into(),
        ));
    }
    for node in &c.nodes {
        m.chart().check_point(node)?;
    }
    if m.tensor().rank().0 > 0 && m.aux_lowering().is_none() {
        return Err(Error::MissingLowering);
    }
    let f = Functional::new(m, n, quad);
    let v = f.length(&c.flat());
    if !v.is_finite() {
        return Err(Error::NonFinite("curve length".into()));
    }
    Ok(v)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RestartOutcome {
    pub index: usize,
    /// `None` when the perturbed start evaluated to a non-finite length.
    pub value: Option<f64>,
    pub iterations: usize,
    pub converged: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub note: Option<String>,
}

/// Which candidate produced the reported value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "index", rename_all = "lowercase")]
pub enum Source {
    Chord,
    Restart(usize),
    Corner(usize),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistanceResult {
    pub value: f64,
    pub chord: f64,
    pub source: Source,
    /// True when every finite restart stopped on a tolerance.
    pub converged: bool,
    pub restarts: Vec<RestartOutcome>,
    /// Best length found from each polygon-search start.
    pub corners: Vec<Option<f64>>,
    pub evaluations: u64,
    pub curve: Vec<Vec<f64>>,
    pub config: SolverConfig,
}

impl DistanceResult {
    pub fn best_curve(&self) -> Curve {
        Curve {
            nodes: self.curve.clone(),
        }
    }
}

struct RestartRun {
    outcome: RestartOutcome,
    x: Vec<f64>,
    evals: u64,
}

struct CornerRun {
    value: Option<f64>,
    x: Vec<f64>,
    evals: u64,
}

enum Job {
    Restart(usize),
    Corner(usize),
}

enum Run {
    Restart(RestartRun),
    Corner(CornerRun),
}

/// Infimum estimate of the induced distance between `p` and `q`.
///
/// Candidates are the chord, `restarts` noisy chords refined by local
/// descent, and `corner_starts` searches over two-leg polygons `p → w → q`.
/// The polygon search is what finds zig-zag paths through null or
/// degenerate directions, which local descent from a chord cannot reach.
pub fn distance(
    m: &MetricSpec,
    p: &[f64],
    q: &[f64],
    cfg: &SolverConfig,
) -> Result<DistanceResult> {
    cfg.validate()?;
    let chart = m.chart();
    chart.check_point(p)?;
    chart.check_point(q)?;
    if m.tensor().rank().0 > 0 && m.aux_lowering().is_none() {
        return Err(Error::MissingLowering);
    }
    let chord_curve = Curve::chord(p, q, cfg.segments);
    let f = Functional::new(m, cfg.segments, cfg.quadrature);
    let x0 = chord_curve.flat();
    let chord = f.length(&x0);
    if !chord.is_finite() {
        return Err(Error::NonFinite(format!(
            "chord length between {p:?} and {q:?}"
        )));
    }
    let span = p
        .iter()
        .zip(q)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();

    let jobs: Vec<Job> = (0..cfg.restarts)
        .map(Job::Restart)
        .chain((0..cfg.corner_starts).map(Job::Corner))
        .collect();
    let work = |job: &Job| match *job {
        Job::Restart(i) => Run::Restart(restart(m, &x0, span * cfg.noise, i, cfg)),
        Job::Corner(i) => Run::Corner(corner_search(m, p, q, span, i, cfg)),
    };
    #[cfg(feature = "parallel")]
    let runs: Vec<Run> = {
        use rayon::prelude::*;
        jobs.par_iter().map(work).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let runs: Vec<Run> = jobs.iter().map(work).collect();

    let mut value = chord;
    let mut source = Source::Chord;
    let mut best_x = &x0;
    let mut evals = f.evals.get();
    let mut restarts = Vec::new();
    let mut corners = Vec::new();
    let mut converged = true;
    for run in &runs {
        let (v, x, src) = match run {
            Run::Restart(r) => {
                evals += r.evals;
                restarts.push(r.outcome.clone());
                if r.outcome.value.is_some() && !r.outcome.converged {
                    converged = false;
                }
                (r.outcome.value, &r.x, Source::Restart(r.outcome.index))
            }
            Run::Corner(c) => {
                evals += c.evals;
                corners.push(c.value);
                (c.value, &c.x, Source::Corner(corners.len() - 1))
            }
        };
        if let Some(v) = v {
            if v < value {
                value = v;
                source = src;
                best_x = x;
            }
        }
    }
    Ok(DistanceResult {
        value,
        chord,
        source,
        converged,
        restarts,
        corners,
        evaluations: evals,
        curve: Curve::from_flat(best_x, m.dim()).nodes,
        config: cfg.clone(),
    })
}

/// Corner node index for a polygon corner at parameter `phi`, restricted
/// to nodes of the given parity when `parity` is set.
fn corner_index(phi: f64, n: usize, parity: Option<usize>) -> usize {
    let target = phi * n as f64;
    let mut best = 1;
    let mut gap = f64::INFINITY;
    for c in 1..n {
        if parity.is_some_and(|par| c % 2 != par) {
            continue;
        }
        let g = (c as f64 - target).abs();
        if g < gap {
            gap = g;
            best = c;
        }
    }
    best
}

/// Writes the nodes of the polygon `p → w → q` into `out`.
///
/// Under Simpson quadrature the even-indexed and odd-indexed nodes enter
/// the length as two separate chains, so each chain gets its own corner on
/// a node of matching parity; both chains then trace the polygon exactly.
///
/// The corner sits at the fraction of the polygon's metric length spent on
/// the first leg (coordinate length when the polygon is nearly null), so a
/// null leg collapses to a single segment per chain.
fn polygon_nodes(f: &Functional, p: &[f64], w: &[f64], q: &[f64], out: &mut [f64]) {
    let (n, quad, d) = (f.n, f.quad, p.len());
    let leg = |a: &[f64], b: &[f64]| -> Vec<f64> { a.iter().zip(b).map(|(x, y)| y - x).collect() };
    let (u1, u2) = (leg(p, w), leg(w, q));
    let (c1, c2) = (f.integrand(p, &u1), f.integrand(w, &u2));
    let l1 = u1.iter().map(|v| v * v).sum::<f64>().sqrt();
    let l2 = u2.iter().map(|v| v * v).sum::<f64>().sqrt();
    let nearly_null = !(c1 + c2 > 1e-6 * (l1 + l2) && (c1 + c2).is_finite());
    // [corner, end] per chain parity
    let plan: [[usize; 2]; 2] = if nearly_null && n >= 4 {
        // one segment per leg, then stationary at q
        match quad {
            Quadrature::Simpson => [[2, 4], [1, 3]],
            Quadrature::Midpoint => [[1, 2], [1, 2]],
        }
    } else {
        let phi = if nearly_null {
            l1 / (l1 + l2).max(f64::MIN_POSITIVE)
        } else {
            c1 / (c1 + c2)
        };
        match quad {
            Quadrature::Simpson if n >= 4 => [
                [corner_index(phi, n, Some(0)), n],
                [corner_index(phi, n, Some(1)), n],
            ],
            _ => {
                let c = corner_index(phi, n, None);
                [[c, n], [c, n]]
            }
        }
    };
    for j in 0..=n {
        let [c, e] = plan[j % 2];
        let node = &mut out[j * d..(j + 1) * d];
        if j <= c {
            let t = j as f64 / c as f64;
            for i in 0..d {
                node[i] = p[i] + t * (w[i] - p[i]);
            }
        } else if j < e {
            let t = (j - c) as f64 / (e - c) as f64;
            for i in 0..d {
                node[i] = w[i] + t * (q[i] - w[i]);
            }
        } else {
            node.copy_from_slice(q);
        }
    }
    out[..d].copy_from_slice(p);
    out[n * d..].copy_from_slice(q);
}

/// Searches two-leg polygons `p → w → q` from one seeded start.
///
/// The start puts `w` on a ray from `p` (even `index`) or `q` (odd) along
/// the cheapest direction found from a random seed direction, with the
/// distance along the ray chosen by a 1-D search. On metrics with null or
/// degenerate directions this lands in the zig-zag basin that a search
/// near the chord cannot reach. Nelder–Mead over `w` then polishes.
fn corner_search(
    m: &MetricSpec,
    p: &[f64],
    q: &[f64],
    span: f64,
    index: usize,
    cfg: &SolverConfig,
) -> CornerRun {
    let chart = m.chart();
    let d = m.dim();
    let n = cfg.segments;
    let f = Functional::new(m, n, cfg.quadrature);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(CORNER_STREAM + index as u64);
    let scale = if span > 0.0 { span } else { 1.0 };
    let anchor = if index % 2 == 0 { p } else { q };

    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let seed_dir: Vec<f64> = (0..d).map(|_| normal.sample(&mut rng)).collect();
    let mut unit = vec![0.0; d];
    let mut cost = |u: &[f64]| {
        let len = u.iter().map(|v| v * v).sum::<f64>().sqrt();
        if len == 0.0 {
            return f64::INFINITY;
        }
        unit.iter_mut().zip(u).for_each(|(a, b)| *a = b / len);
        f.integrand(anchor, &unit)
    };
    let (dir, _) = nelder_mead(&mut cost, &seed_dir, 0.5, cfg);
    let len = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
    let dir: Vec<f64> = if len > 0.0 {
        dir.iter().map(|v| v / len).collect()
    } else {
        seed_dir
    };

    let mut buf = vec![0.0; (n + 1) * d];
    let mut w = vec![0.0; d];
    let mut objective = |x: &[f64]| {
        w.copy_from_slice(x);
        chart.project(&mut w);
        polygon_nodes(&f, p, &w, q, &mut buf);
        f.length(&buf)
    };
    let on_ray = |lambda: f64| -> Vec<f64> {
        anchor
            .iter()
            .zip(&dir)
            .map(|(a, u)| a + lambda * u)
            .collect()
    };
    let (lambda, _) = line_search(
        &mut |t| objective(&on_ray(t)),
        -2.0 * scale,
        2.0 * scale,
        32,
    );
    let (best, v) = nelder_mead(&mut objective, &on_ray(lambda), 0.05 * scale, cfg);
    let (best, v) = ulp_polish(&mut objective, best, v);
    let mut w = best;
    chart.project(&mut w);
    polygon_nodes(&f, p, &w, q, &mut buf);
    CornerRun {
        value: v.is_finite().then_some(v),
        x: buf,
        evals: f.evals.get(),
    }
}

/// Compass search at steps of 2^k ulps (k from 20 down to 0). Near a
/// null direction the length has a cusp whose floor is set by rounding in
/// the leg differences; stepping through representable neighbours can land
/// on differences that are exactly null.
fn ulp_polish(g: &mut dyn FnMut(&[f64]) -> f64, mut x: Vec<f64>, mut v: f64) -> (Vec<f64>, f64) {
    if !v.is_finite() {
        return (x, v);
    }
    for k in (0..=20).rev() {
        if v == 0.0 {
            break;
        }
        let mut improved = true;
        let mut rounds = 0;
        while improved && rounds < 8 {
            improved = false;
            rounds += 1;
            for i in 0..x.len() {
                let step = ulp(x[i]) * f64::from(1u32 << k);
                for sgn in [1.0, -1.0] {
                    let old = x[i];
                    x[i] = old + sgn * step;
                    let t = g(&x);
                    if t < v {
                        v = t;
                        improved = true;
                    } else {
                        x[i] = old;
                    }
                }
            }
        }
    }
    (x, v)
}

fn ulp(x: f64) -> f64 {
    let a = x.abs().max(f64::MIN_POSITIVE);
    f64::from_bits(a.to_bits() + 1) - a
}

/// Grid scan of `[lo, hi]` followed by golden-section refinement around
/// the best grid point. Returns the argument and value.
fn line_search(g: &mut dyn FnMut(f64) -> f64, lo: f64, hi: f64, grid: usize) -> (f64, f64) {
    let step = (hi - lo) / grid as f64;
    let (mut bt, mut bv) = (lo, f64::INFINITY);
    for i in 0..=grid {
        let t = lo + i as f64 * step;
        let v = g(t);
        if v < bv {
            bt = t;
            bv = v;
        }
    }
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (bt - step, bt + step);
    let mut c = b - inv_phi * (b - a);
    let mut e = a + inv_phi * (b - a);
    let (mut fc, mut fe) = (g(c), g(e));
    for _ in 0..80 {
        if (b - a).abs() <= 1e-15 * (1.0 + bt.abs()) {
            break;
        }
        if fc < fe {
            b = e;
            e = c;
            fe = fc;
            c = b - inv_phi * (b - a);
            fc = g(c);
        } else {
            a = c;
            c = e;
            fc = fe;
            e = a + inv_phi * (b - a);
            fe = g(e);
        }
    }
    for (t, v) in [(c, fc), (e, fe)] {
        if v < bv {
            bt = t;
            bv = v;
        }
    }
    (bt, bv)
}

const CORNER_STREAM: u64 = 1 << 32;

/// Nelder–Mead with standard coefficients, restarted around the incumbent
/// until a restart no longer improves it. Returns the best point and value.
fn nelder_mead(
    f: &mut dyn FnMut(&[f64]) -> f64,
    start: &[f64],
    size: f64,
    cfg: &SolverConfig,
) -> (Vec<f64>, f64) {
    let d = start.len();
    let budget = cfg.max_iters * (d + 1);
    let mut best = start.to_vec();
    let mut best_v = f(start);
    let mut size = size;
    for _cycle in 0..4 {
        let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(d + 1);
        simplex.push((best.clone(), best_v));
        for i in 0..d {
            let mut v = best.clone();
            v[i] += size.max(1e-12 * (1.0 + v[i].abs()));
            let fv = f(&v);
            simplex.push((v, fv));
        }
        for _ in 0..budget {
            simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
            let lo = simplex[0].1;
            let hi = simplex[d].1;
            let diam = simplex[1..]
                .iter()
                .map(|(v, _)| {
                    v.iter()
                        .zip(&simplex[0].0)
                        .map(|(a, b)| (a - b).abs())
                        .fold(0.0, f64::max)
                })
                .fold(0.0, f64::max);
            if (hi - lo).abs() <= cfg.value_tol * lo.abs() && diam <= cfg.step_tol {
                break;
            }
            if diam <= 1e-15 * (1.0 + simplex[0].0.iter().map(|v| v.abs()).fold(0.0, f64::max)) {
                break;
            }
            let mut centroid = vec![0.0; d];
            for (v, _) in &simplex[..d] {
                for i in 0..d {
                    centroid[i] += v[i] / d as f64;
                }
            }
            let along = |t: f64| -> Vec<f64> {
                centroid
                    .iter()
                    .zip(&simplex[d].0)
                    .map(|(c, w)| c + t * (w - c))
                    .collect()
            };
            let xr = along(-1.0);
            let fr = f(&xr);
            if fr < lo {
                let xe = along(-2.0);
                let fe = f(&xe);
                simplex[d] = if fe < fr { (xe, fe) } else { (xr, fr) };
            } else if fr < simplex[d - 1].1 {
                simplex[d] = (xr, fr);
            } else {
                let (xc, fc) = if fr < hi {
                    let xc = along(-0.5);
                    let fc = f(&xc);
                    (xc, fc)
                } else {
                    let xc = along(0.5);
                    let fc = f(&xc);
                    (xc, fc)
                };
                if fc < fr.min(hi) {
                    simplex[d] = (xc, fc);
                } else {
                    let x0 = simplex[0].0.clone();
                    for (v, fv) in simplex.iter_mut().skip(1) {
                        for i in 0..d {
                            v[i] = x0[i] + 0.5 * (v[i] - x0[i]);
                        }
                        *fv = f(v);
                    }
                }
            }
        }
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let (x, v) = simplex.swap_remove(0);
        let improved = v < best_v;
        if v <= best_v {
            best = x;
            best_v = v;
        }
        if !improved {
            break;
        }
        size *= 0.1;
    }
    (best, best_v)
}

fn restart(m: &MetricSpec, x0: &[f64], scale: f64, index: usize, cfg: &SolverConfig) -> RestartRun {
    let chart = m.chart();
    let d = m.dim();
    let n = cfg.segments;
    let f = Functional::new(m, n, cfg.quadrature);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(index as u64);
    let mut x = x0.to_vec();
    if scale > 0.0 {
        let normal = Normal::new(0.0, scale).expect("positive scale");
        for v in &mut x[d..n * d] {
            *v += normal.sample(&mut rng);
        }
        project(&mut x, chart);
    }
    let start = f.length(&x);
    if !start.is_finite() {
        return RestartRun {
            outcome: RestartOutcome {
                index,
                value: None,
                iterations: 0,
                converged: false,
                note: Some("perturbed start has a non-finite length; discarded".into()),
            },
            x,
            evals: f.evals.get(),
        };
    }
    let (value, iterations, converged) = minimize(&f, chart, &mut x, start, cfg);
    RestartRun {
        outcome: RestartOutcome {
            index,
            value: Some(value),
            iterations,
            converged,
            note: None,
        },
        x,
        evals: f.evals.get(),
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Projected descent with Armijo backtracking. Returns (value, iterations, converged).
fn minimize(
    f: &Functional,
    chart: &Chart,
    x: &mut [f64],
    start: f64,
    cfg: &SolverConfig,
) -> (f64, usize, bool) {
    const MEMORY: usize = 8;
    let len = x.len();
    let mut fx = start;
    let mut g = vec![0.0; len];
    f.gradient(x, chart, &mut g);
    let mut s_hist: Vec<Vec<f64>> = Vec::new();
    let mut y_hist: Vec<Vec<f64>> = Vec::new();
    let mut alpha_gd = 1e-2;
    let mut trial = vec![0.0; len];
    let mut g_new = vec![0.0; len];
    for iter in 0..cfg.max_iters {
        let gnorm = dot(&g, &g).sqrt();
        if gnorm == 0.0 {
            return (fx, iter, true);
        }
        // search direction
        let mut dir: Vec<f64> = g.iter().map(|v| -v).collect();
        let mut quasi_newton = false;
        if cfg.method == Method::Lbfgs && !s_hist.is_empty() {
            let k = s_hist.len();
            let mut rho = vec![0.0; k];
            let mut a = vec![0.0; k];
            for i in (0..k).rev() {
                rho[i] = 1.0 / dot(&y_hist[i], &s_hist[i]);
                a[i] = rho[i] * dot(&s_hist[i], &dir);
                for (dv, yv) in dir.iter_mut().zip(&y_hist[i]) {
                    *dv -= a[i] * yv;
                }
            }
            let gamma = dot(&s_hist[k - 1], &y_hist[k - 1]) / dot(&y_hist[k - 1], &y_hist[k - 1]);
            dir.iter_mut().for_each(|v| *v *= gamma);
            for i in 0..k {
                let b = rho[i] * dot(&y_hist[i], &dir);
                for (dv, sv) in dir.iter_mut().zip(&s_hist[i]) {
                    *dv += (a[i] - b) * sv;
                }
            }
            if dot(&dir, &g) < 0.0 && dir.iter().all(|v| v.is_finite()) {
                quasi_newton = true;
            } else {
                s_hist.clear();
                y_hist.clear();
                dir = g.iter().map(|v| -v).collect();
            }
        }
        let mut alpha = if quasi_newton {
            1.0
        } else {
            alpha_gd / gnorm.max(1e-300)
        };
        let mut accepted = false;
        let mut fnew = fx;
        for _ in 0..60 {
            for i in 0..len {
                trial[i] = x[i] + alpha * dir[i];
            }
            project(&mut trial, chart);
            let moved: f64 = dot(
                &g,
                &trial
                    .iter()
                    .zip(x.iter())
                    .map(|(a, b)| a - b)
                    .collect::<Vec<_>>(),
            );
            fnew = f.length(&trial);
            if fnew.is_finite() && fnew <= fx + 1e-4 * moved && fnew < fx {
                accepted = true;
                break;
            }
            alpha *= 0.5;
            let max_move = trial
                .iter()
                .zip(x.iter())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            if max_move < cfg.step_tol {
                break;
            }
        }
        if !accepted {
            if quasi_newton {
                // retry once from steepest descent before giving up
                s_hist.clear();
                y_hist.clear();
                continue;
            }
            return (fx, iter, true);
        }
        if !quasi_newton {
            alpha_gd = (alpha * gnorm * 2.0).min(1.0);
        }
        let max_step = trial
            .iter()
            .zip(x.iter())
            .map(|(a, b)| (a - b).abs() / (1.0 + b.abs()))
            .fold(0.0, f64::max);
        let decrease = fx - fnew;
        f.gradient(&mut trial, chart, &mut g_new);
        let s: Vec<f64> = trial.iter().zip(x.iter()).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        if cfg.method == Method::Lbfgs
            && dot(&s, &y) > 1e-12 * dot(&s, &s).sqrt() * dot(&y, &y).sqrt()
        {
            if s_hist.len() == MEMORY {
                s_hist.remove(0);
                y_hist.remove(0);
            }
            s_hist.push(s);
            y_hist.push(y);
        }
        x.copy_from_slice(&trial);
        g.copy_from_slice(&g_new);
        fx = fnew;
        if max_step < cfg.step_tol || decrease <= cfg.value_tol * fx.max(f64::MIN_POSITIVE) {
            return (fx, iter + 1, true);
        }
    }
    (fx, cfg.max_iters, false)
}

/// Result of probing the triangle inequality on point triples.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TriangleReport {
    pub triples: usize,
    pub violations: Vec<TriangleViolation>,
    /// Largest `d(p,r) − d(p,q) − d(q,r)` seen (negative means slack).
    pub worst_margin: f64,
    pub epsilon: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TriangleViolation {
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    pub r: Vec<f64>,
    pub margin: f64,
}

/// Flags triples with `d(p,r) > d(p,q) + d(q,r) + 2·value_tol`.
pub fn triangle_probe(
    m: &MetricSpec,
    triples: &[[Vec<f64>; 3]],
    cfg: &SolverConfig,
) -> Result<TriangleReport> {
    let eps = cfg.epsilon();
    let mut worst = f64::NEG_INFINITY;
    let mut violations = Vec::new();
    for [p, q, r] in triples {
        let pq = distance(m, p, q, cfg)?.value;
        let qr = distance(m, q, r, cfg)?.value;
        let pr = distance(m, p, r, cfg)?.value;
        let margin = pr - pq - qr;
        worst = worst.max(margin);
        if margin > eps {
            violations.push(TriangleViolation {
                p: p.clone(),
                q: q.clone(),
                r: r.clone(),
                margin,
            });
        }
    }
    Ok(TriangleReport {
        triples: triples.len(),
        violations,
        worst_margin: worst,
        epsilon: eps,
    })
}
