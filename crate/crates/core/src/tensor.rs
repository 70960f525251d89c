//! (U,L)-rank functional tensor fields and the generalized line element.
//!
//! Index tuples list the U upper indices first, then the L lower ones.
//! Indices are zero-based.

use std::borrow::Cow;
use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::chart::{Axis, Chart, Role};
use crate::error::{Error, Result};
use crate::expr::{Expr, Params};
use crate::scalar::{Scalar, Tag};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Symmetry {
    #[default]
    #[serde(rename = "none")]
    None,
    /// Upper and lower index groups are each symmetric.
    #[serde(rename = "separately-symmetric")]
    Separate,
    #[serde(rename = "fully-symmetric")]
    Full,
}

/// Mutable description of a tensor field; `build` validates and compiles it.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorSpec {
    pub upper: usize,
    pub lower: usize,
    pub chart: Chart,
    pub codomain: Tag,
    pub components: BTreeMap<Vec<usize>, Expr>,
    pub symmetry: Symmetry,
    pub params: Params,
}

impl TensorSpec {
    pub fn new(chart: Chart, upper: usize, lower: usize) -> Self {
        TensorSpec {
            upper,
            lower,
            chart,
            codomain: Tag::Real,
            components: BTreeMap::new(),
            symmetry: Symmetry::None,
            params: Params::new(),
        }
    }

    pub fn codomain(mut self, tag: Tag) -> Self {
        self.codomain = tag;
        self
    }

    pub fn symmetry(mut self, s: Symmetry) -> Self {
        self.symmetry = s;
        self
    }

    pub fn set(&mut self, idx: Vec<usize>, expr: Expr) {
        self.components.insert(idx, expr);
    }

    pub fn with(mut self, idx: Vec<usize>, expr: Expr) -> Self {
        self.set(idx, expr);
        self
    }

    pub fn param(mut self, name: impl Into<String>, expr: Expr) -> Self {
        self.params.insert(name.into(), expr);
        self
    }

    pub fn build(self) -> Result<TensorField> {
        TensorField::from_spec(self)
    }
}

#[derive(Clone, Debug)]
struct Compiled {
    rank: usize,
    /// Flattened index tuples, `rank` entries each.
    idx: Vec<usize>,
    exprs: Vec<Expr>,
    constants: Option<Vec<Scalar>>,
    /// Real parts of `constants` for the real-codomain fast path.
    real_constants: Option<Vec<f64>>,
}

impl Compiled {
    fn len(&self) -> usize {
        self.exprs.len()
    }

    fn tuple(&self, k: usize) -> &[usize] {
        &self.idx[k * self.rank..(k + 1) * self.rank]
    }
}

/// Immutable, validated (U,L)-rank functional tensor field.
#[derive(Clone, Debug)]
pub struct TensorField {
    spec: TensorSpec,
    compiled: Compiled,
}

impl PartialEq for TensorField {
    fn eq(&self, other: &Self) -> bool {
        self.spec == other.spec
    }
}

impl TensorField {
    pub fn from_spec(spec: TensorSpec) -> Result<Self> {
        let dim = spec.chart.dim();
        let rank = spec.upper + spec.lower;
        for (idx, e) in &spec.components {
            if idx.len() != rank || idx.iter().any(|&i| i >= dim) {
                return Err(Error::BadIndex(idx.clone()));
            }
            let mut used = BTreeSet::new();
            e.coords_used(&mut used);
            if let Some(&bad) = used.iter().find(|&&i| i >= dim) {
                return Err(Error::InvalidTensor(format!(
                    "component {idx:?} references axis {bad} of a {dim}-D chart"
                )));
            }
        }
        for (name, e) in &spec.params {
            let mut used = BTreeSet::new();
            e.coords_used(&mut used);
            if used.iter().any(|&i| i >= dim) {
                return Err(Error::InvalidTensor(format!(
                    "parameter `{name}` references a missing axis"
                )));
            }
        }
        let mut flat = Vec::new();
        let mut exprs = Vec::new();
        for (idx, e) in &spec.components {
            let folded = e.inline(&spec.params)?;
            if matches!(folded, Expr::Const(s) if s.is_zero()) {
                continue;
            }
            flat.extend_from_slice(idx);
            exprs.push(folded);
        }
        let constants: Option<Vec<Scalar>> = exprs.iter().map(Expr::as_const).collect();
        if let Some(cs) = &constants {
            for (k, c) in cs.iter().enumerate() {
                if c.tag() > spec.codomain {
                    let idx = flat[k * rank..(k + 1) * rank].to_vec();
                    return Err(Error::InvalidTensor(format!(
                        "component {idx:?} = {c} does not fit the {} codomain",
                        spec.codomain
                    )));
                }
            }
        }
        let constants: Option<Vec<Scalar>> =
            constants.map(|cs| cs.into_iter().map(|c| c.promote(spec.codomain)).collect());
        let real_constants = match &constants {
            Some(cs) if spec.codomain == Tag::Real => Some(cs.iter().map(Scalar::re).collect()),
            _ => None,
        };
        Ok(TensorField {
            compiled: Compiled {
                rank,
                idx: flat,
                exprs,
                constants,
                real_constants,
            },
            spec,
        })
    }

    pub fn spec(&self) -> &TensorSpec {
        &self.spec
    }

    pub fn into_spec(self) -> TensorSpec {
        self.spec
    }

    pub fn rank(&self) -> (usize, usize) {
        (self.spec.upper, self.spec.lower)
    }

    pub fn order(&self) -> usize {
        self.spec.upper + self.spec.lower
    }

    pub fn dim(&self) -> usize {
        self.spec.chart.dim()
    }

    pub fn chart(&self) -> &Chart {
        &self.spec.chart
    }

    pub fn codomain(&self) -> Tag {
        self.spec.codomain
    }

    pub fn symmetry(&self) -> Symmetry {
        self.spec.symmetry
    }

    pub fn params(&self) -> &Params {
        &self.spec.params
    }

    pub fn components(&self) -> &BTreeMap<Vec<usize>, Expr> {
        &self.spec.components
    }

    /// True when no component depends on the point.
    pub fn is_constant(&self) -> bool {
        self.compiled.constants.is_some()
    }

    fn finish(&self, v: Scalar, idx: &[usize], p: &[f64]) -> Result<Scalar> {
        if v.tag() > self.spec.codomain {
            return Err(Error::InvalidTensor(format!(
                "component {idx:?} = {v} at {p:?} does not fit the {} codomain",
                self.spec.codomain
            )));
        }
        if !v.is_finite() {
            return Err(Error::NonFinite(format!("component {idx:?} at {p:?}")));
        }
        Ok(v.promote(self.spec.codomain))
    }

    pub fn eval_component(&self, idx: &[usize], p: &[f64]) -> Result<Scalar> {
        self.spec.chart.check_point(p)?;
        if idx.len() != self.order() || idx.iter().any(|&i| i >= self.dim()) {
            return Err(Error::BadIndex(idx.to_vec()));
        }
        match self.spec.components.get(idx) {
            None => Ok(Scalar::zero(self.spec.codomain)),
            Some(e) => self.finish(e.eval(p, &self.spec.params)?, idx, p),
        }
    }

    /// Values of the stored nonzero components, aligned with the compiled order.
    fn values(&self, p: &[f64]) -> Result<Cow<'_, [Scalar]>> {
        if let Some(cs) = &self.compiled.constants {
            return Ok(Cow::Borrowed(cs));
        }
        let empty = Params::new();
        let mut out = Vec::with_capacity(self.compiled.len());
        for (k, e) in self.compiled.exprs.iter().enumerate() {
            let v = e.eval(p, &empty)?;
            out.push(self.finish(v, self.compiled.tuple(k), p)?);
        }
        Ok(Cow::Owned(out))
    }

    /// All stored components at `p` (absent tuples are zero and omitted).
    pub fn table(&self, p: &[f64]) -> Result<ComponentTable> {
        self.spec.chart.check_point(p)?;
        let values = self.values(p)?;
        let mut entries = BTreeMap::new();
        for (k, v) in values.iter().enumerate() {
            entries.insert(self.compiled.tuple(k).to_vec(), *v);
        }
        Ok(ComponentTable {
            upper: self.spec.upper,
            lower: self.spec.lower,
            codomain: self.spec.codomain,
            entries,
        })
    }

    /// Full contraction against `dc` (lower slots) and `w` (upper slots).
    /// Products run left to right over each tuple.
    fn contract(&self, values: &[Scalar], dc: &[f64], w: &[f64]) -> Scalar {
        let u = self.spec.upper;
        if self.spec.codomain == Tag::Real {
            let mut acc = 0.0;
            for (k, v) in values.iter().enumerate() {
                acc += v.re() * factor(self.compiled.tuple(k), u, dc, w);
            }
            return Scalar::Real(acc);
        }
        let mut acc = Scalar::zero(self.spec.codomain);
        for (k, v) in values.iter().enumerate() {
            acc = acc + v.scale(factor(self.compiled.tuple(k), u, dc, w));
        }
        acc
    }

    /// Contraction with a covector for the upper slots (U > 0) or the plain
    /// displacement (U = 0), without the chart bounds check.
    pub(crate) fn contract_at(&self, p: &[f64], dc: &[f64], w: &[f64]) -> Result<Scalar> {
        if let Some(cs) = &self.compiled.real_constants {
            let (u, r) = (self.spec.upper, self.compiled.rank);
            let mut acc = 0.0;
            for (c, idx) in cs.iter().zip(self.compiled.idx.chunks_exact(r.max(1))) {
                acc += c * factor(idx, u, dc, w);
            }
            return Ok(Scalar::Real(acc));
        }
        let values = self.values(p)?;
        Ok(self.contract(&values, dc, w))
    }

    /// Symmetrized copy: each component becomes the mean over all
    /// arrangements of its index multiset (per group for `Separate`).
    pub fn symmetrized(&self, mode: Symmetry) -> Result<TensorField> {
        if mode == Symmetry::None {
            return Ok(self.clone());
        }
        let u = self.spec.upper;
        let key = |idx: &[usize]| -> (Vec<usize>, Vec<usize>) {
            let mut a = idx.to_vec();
            if mode == Symmetry::Full {
                a.sort_unstable();
                (a, vec![])
            } else {
                let mut lo = a.split_off(u);
                a.sort_unstable();
                lo.sort_unstable();
                (a, lo)
            }
        };
        let mut groups: BTreeMap<(Vec<usize>, Vec<usize>), Vec<Expr>> = BTreeMap::new();
        for (idx, e) in &self.spec.components {
            groups.entry(key(idx)).or_default().push(e.clone());
        }
        let mut spec = self.spec.clone();
        spec.components.clear();
        spec.symmetry = mode;
        for ((a, b), exprs) in groups {
            let arrangements: Vec<Vec<usize>> = if mode == Symmetry::Full {
                arrangements(&a)
            } else {
                let mut out = Vec::new();
                for x in arrangements(&a) {
                    for y in arrangements(&b) {
                        let mut t = x.clone();
                        t.extend(y);
                        out.push(t);
                    }
                }
                out
            };
            let n = arrangements.len() as f64;
            let mean = if exprs.len() == 1 && n == 1.0 {
                exprs.into_iter().next().expect("one element")
            } else {
                Expr::div(Expr::sum(exprs), Expr::c(n))
            };
            for t in arrangements {
                spec.components.insert(t, mean.clone());
            }
        }
        spec.build()
    }

    /// Same tensor on a chart whose axis `axis` got a new role and name.
    pub fn relabel_axis(&self, axis: usize, role: Role, name: &str) -> Result<TensorField> {
        let chart = self.spec.chart.with_role(axis, role, Some(name))?;
        let rename = |i: usize, n: &str| Expr::coord(i, if i == axis { name } else { n });
        let mut spec = self.spec.clone();
        spec.chart = chart;
        for e in spec.components.values_mut() {
            *e = e.map_coords(&rename);
        }
        for e in spec.params.values_mut() {
            *e = e.map_coords(&rename);
        }
        spec.build()
    }
}

fn factor(idx: &[usize], u: usize, dc: &[f64], w: &[f64]) -> f64 {
    let mut f = 1.0;
    for (pos, &i) in idx.iter().enumerate() {
        f *= if pos < u { w[i] } else { dc[i] };
    }
    f
}

/// Distinct arrangements of a sorted multiset, in lexicographic order.
pub(crate) fn arrangements(sorted: &[usize]) -> Vec<Vec<usize>> {
    let mut cur = sorted.to_vec();
    cur.sort_unstable();
    let mut out = vec![cur.clone()];
    loop {
        // next lexicographic permutation
        let n = cur.len();
        if n < 2 {
            return out;
        }
        let mut i = n - 1;
        while i > 0 && cur[i - 1] >= cur[i] {
            i -= 1;
        }
        if i == 0 {
            return out;
        }
        let mut j = n - 1;
        while cur[j] <= cur[i - 1] {
            j -= 1;
        }
        cur.swap(i - 1, j);
        cur[i..].reverse();
        out.push(cur.clone());
    }
}

/// Component values at a single point.
#[derive(Clone, Debug, PartialEq)]
pub struct ComponentTable {
    pub upper: usize,
    pub lower: usize,
    pub codomain: Tag,
    pub entries: BTreeMap<Vec<usize>, Scalar>,
}

impl ComponentTable {
    pub fn get(&self, idx: &[usize]) -> Scalar {
        self.entries
            .get(idx)
            .copied()
            .unwrap_or(Scalar::zero(self.codomain))
    }

    /// Contraction with `dc` in lower slots and `w` in upper slots.
    pub fn contract(&self, dc: &[f64], w: &[f64]) -> Scalar {
        let mut acc = Scalar::zero(self.codomain);
        for (idx, v) in &self.entries {
            acc = acc + v.scale(factor(idx, self.upper, dc, w));
        }
        acc
    }

    /// Sum of the magnitudes of the individual contraction terms; the
    /// natural scale for relative comparisons of contractions.
    pub fn contract_abs(&self, dc: &[f64], w: &[f64]) -> f64 {
        self.entries
            .iter()
            .map(|(idx, v)| v.norm() * factor(idx, self.upper, dc, w).abs())
            .sum()
    }

    /// `w_a = Σ_b g_ab v^b` for a (0,2) table.
    pub fn lower(&self, v: &[f64]) -> Vec<f64> {
        let mut w = vec![0.0; v.len()];
        for (idx, g) in &self.entries {
            w[idx[0]] += g.re() * v[idx[1]];
        }
        w
    }
}

/// Tensor plus optional auxiliary (0,2) lowering tensor.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricSpec {
    pub name: String,
    pub notes: String,
    tensor: TensorField,
    aux_lowering: Option<TensorField>,
}

impl MetricSpec {
    pub fn new(
        name: impl Into<String>,
        notes: impl Into<String>,
        tensor: TensorField,
        aux_lowering: Option<TensorField>,
    ) -> Result<Self> {
        if tensor.rank().0 > 0 && aux_lowering.is_none() {
            return Err(Error::MissingLowering);
        }
        if let Some(g) = &aux_lowering {
            if g.rank() != (0, 2) {
                return Err(Error::RankMismatch {
                    required: "(0,2)".into(),
                    found: rank_str(g),
                });
            }
            if g.symmetry() != Symmetry::Full {
                return Err(Error::InvalidTensor(
                    "the lowering tensor must be declared fully-symmetric".into(),
                ));
            }
            if g.codomain() != Tag::Real {
                return Err(Error::InvalidTensor(
                    "the lowering tensor must be real".into(),
                ));
            }
            if g.dim() != tensor.dim() {
                return Err(Error::DimensionMismatch {
                    expected: tensor.dim(),
                    found: g.dim(),
                });
            }
        }
        Ok(MetricSpec {
            name: name.into(),
            notes: notes.into(),
            tensor,
            aux_lowering,
        })
    }

    pub fn from_tensor(name: impl Into<String>, tensor: TensorField) -> Result<Self> {
        MetricSpec::new(name, "", tensor, None)
    }

    pub fn tensor(&self) -> &TensorField {
        &self.tensor
    }

    pub fn aux_lowering(&self) -> Option<&TensorField> {
        self.aux_lowering.as_ref()
    }

    pub fn chart(&self) -> &Chart {
        self.tensor.chart()
    }

    pub fn dim(&self) -> usize {
        self.tensor.dim()
    }

    /// U + L, the degree of the line element.
    pub fn order(&self) -> usize {
        self.tensor.order()
    }

    /// `ds^{U+L}` for displacement `dc` at `p`.
    pub fn line_element(&self, p: &[f64], dc: &[f64]) -> Result<Scalar> {
        self.tensor.chart().check_point(p)?;
        if dc.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: dc.len(),
            });
        }
        self.line_element_unchecked(p, dc)
    }

    /// Line element without the bounds check; used on solver curves that
    /// are already projected onto the chart.
    pub(crate) fn line_element_unchecked(&self, p: &[f64], dc: &[f64]) -> Result<Scalar> {
        match &self.aux_lowering {
            Some(g) if self.tensor.rank().0 > 0 => {
                let w = lower_unchecked(g, p, dc)?;
                self.tensor.contract_at(p, dc, &w)
            }
            _ => self.tensor.contract_at(p, dc, &[]),
        }
    }

    /// Covector `dc_ν = g_νλ dc^λ`, or `None` when no lowering is needed.
    pub fn lowered(&self, p: &[f64], dc: &[f64]) -> Result<Option<Vec<f64>>> {
        match &self.aux_lowering {
            Some(g) if self.tensor.rank().0 > 0 => Ok(Some(lower_vector(g, p, dc)?)),
            _ => Ok(None),
        }
    }

    /// True when neither the tensor nor the lowering depends on the point.
    pub fn is_constant(&self) -> bool {
        self.tensor.is_constant()
            && self
                .aux_lowering
                .as_ref()
                .is_none_or(TensorField::is_constant)
    }

    pub fn with_tensor(&self, tensor: TensorField) -> Result<MetricSpec> {
        MetricSpec::new(
            self.name.clone(),
            self.notes.clone(),
            tensor,
            self.aux_lowering.clone(),
        )
    }
}

pub(crate) fn rank_str(t: &TensorField) -> String {
    let (u, l) = t.rank();
    format!("({u},{l})")
}

fn lower_unchecked(g: &TensorField, p: &[f64], v: &[f64]) -> Result<Vec<f64>> {
    let values = g.values(p)?;
    let mut w = vec![0.0; v.len()];
    for (k, val) in values.iter().enumerate() {
        let t = g.compiled.tuple(k);
        w[t[0]] += val.re() * v[t[1]];
    }
    Ok(w)
}

/// `w_ν = Σ_λ g_νλ(p) v^λ`.
pub fn lower_vector(g: &TensorField, p: &[f64], v: &[f64]) -> Result<Vec<f64>> {
    if g.rank() != (0, 2) {
        return Err(Error::RankMismatch {
            required: "(0,2)".into(),
            found: rank_str(g),
        });
    }
    if g.codomain() != Tag::Real {
        return Err(Error::InvalidTensor(
            "index lowering needs a real tensor".into(),
        ));
    }
    if v.len() != g.dim() {
        return Err(Error::DimensionMismatch {
            expected: g.dim(),
            found: v.len(),
        });
    }
    g.chart().check_point(p)?;
    lower_unchecked(g, p, v)
}

/// Contracts a (0,L) tensor with L−2 vector fields into a (0,2) tensor:
/// `g_ij = m_{ij k1..k_{L-2}} v1^{k1} .. v_{L-2}^{k_{L-2}}`.
pub fn reduce_to_bilinear(t: &TensorField, fields: &[Vec<Expr>]) -> Result<TensorField> {
    let (u, l) = t.rank();
    if u != 0 || l < 2 {
        return Err(Error::RankMismatch {
            required: "(0,L) with L >= 2".into(),
            found: rank_str(t),
        });
    }
    if fields.len() != l - 2 {
        return Err(Error::InvalidTensor(format!(
            "a (0,{l}) tensor needs {} vector fields, got {}",
            l - 2,
            fields.len()
        )));
    }
    let d = t.dim();
    if let Some(f) = fields.iter().find(|f| f.len() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: f.len(),
        });
    }
    let mut sums: BTreeMap<Vec<usize>, Vec<Expr>> = BTreeMap::new();
    for (idx, e) in t.components() {
        let mut term = e.clone();
        for (slot, field) in fields.iter().enumerate() {
            term = Expr::mul(term, field[idx[2 + slot]].clone());
        }
        sums.entry(idx[..2].to_vec()).or_default().push(term);
    }
    let mut spec = TensorSpec::new(t.chart().clone(), 0, 2).codomain(t.codomain());
    spec.params = t.params().clone();
    spec.symmetry = if t.symmetry() == Symmetry::Full {
        Symmetry::Full
    } else {
        Symmetry::None
    };
    for (idx, terms) in sums {
        let e = Expr::sum(terms);
        if !matches!(e, Expr::Const(s) if s.is_zero()) {
            spec.set(idx, e);
        }
    }
    spec.build()
}

// JSON wire format.

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TensorJson {
    rank: [usize; 2],
    dim: usize,
    #[serde(default = "real_tag")]
    codomain: Tag,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    axes: Option<Vec<Axis>>,
    components: Vec<ComponentJson>,
    #[serde(default)]
    symmetry: Symmetry,
    #[serde(default)]
    params: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    symmetrize: bool,
}

fn real_tag() -> Tag {
    Tag::Real
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ComponentJson {
    idx: Vec<usize>,
    expr: String,
}

impl TryFrom<TensorJson> for TensorField {
    type Error = Error;

    fn try_from(j: TensorJson) -> Result<Self> {
        let chart = match j.axes {
            Some(axes) => {
                let c = Chart::new(axes)?;
                if c.dim() != j.dim {
                    return Err(Error::DimensionMismatch {
                        expected: j.dim,
                        found: c.dim(),
                    });
                }
                c
            }
            None => Chart::euclidean(j.dim),
        };
        let scope = chart.scope().with_params(j.params.keys().cloned());
        let mut spec = TensorSpec::new(chart, j.rank[0], j.rank[1])
            .codomain(j.codomain)
            .symmetry(j.symmetry);
        for (name, src) in &j.params {
            if scope.coords.contains(name) {
                return Err(Error::BadParameter {
                    name: name.clone(),
                    msg: "shadows a coordinate".into(),
                });
            }
            spec.params.insert(name.clone(), Expr::parse(src, &scope)?);
        }
        for c in j.components {
            let e = Expr::parse(&c.expr, &scope)?;
            if spec.components.insert(c.idx.clone(), e).is_some() {
                return Err(Error::InvalidTensor(format!(
                    "duplicate component {:?}",
                    c.idx
                )));
            }
        }
        let field = spec.build()?;
        if j.symmetrize {
            let mode = if j.symmetry == Symmetry::None {
                Symmetry::Full
            } else {
                j.symmetry
            };
            return field.symmetrized(mode);
        }
        Ok(field)
    }
}

impl From<&TensorField> for TensorJson {
    fn from(t: &TensorField) -> Self {
        let s = &t.spec;
        TensorJson {
            rank: [s.upper, s.lower],
            dim: s.chart.dim(),
            codomain: s.codomain,
            axes: Some(s.chart.axes().to_vec()),
            components: s
                .components
                .iter()
                .map(|(idx, e)| ComponentJson {
                    idx: idx.clone(),
                    expr: e.to_string(),
                })
                .collect(),
            symmetry: s.symmetry,
            params: s
                .params
                .iter()
                .map(|(k, v)| (k.clone(), v.to_string()))
                .collect(),
            symmetrize: false,
        }
    }
}

impl Serialize for ComponentTable {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Entry<'a> {
            index: &'a [usize],
            value: Scalar,
        }
        #[derive(Serialize)]
        struct Table<'a> {
            rank: [usize; 2],
            codomain: &'static str,
            components: Vec<Entry<'a>>,
        }
        Table {
            rank: [self.upper, self.lower],
            codomain: self.codomain.name(),
            components: self
                .entries
                .iter()
                .map(|(k, v)| Entry {
                    index: k,
                    value: *v,
                })
                .collect(),
        }
        .serialize(ser)
    }
}

impl Serialize for TensorField {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        TensorJson::from(self).serialize(ser)
    }
}

impl<'de> Deserialize<'de> for TensorField {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let j = TensorJson::deserialize(de)?;
        TensorField::try_from(j).map_err(serde::de::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MetricJson {
    name: String,
    #[serde(default)]
    notes: String,
    tensor: TensorField,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    aux_lowering: Option<TensorField>,
}

impl Serialize for MetricSpec {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        MetricJson {
            name: self.name.clone(),
            notes: self.notes.clone(),
            tensor: self.tensor.clone(),
            aux_lowering: self.aux_lowering.clone(),
        }
        .serialize(ser)
    }
}

impl<'de> Deserialize<'de> for MetricSpec {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let j = MetricJson::deserialize(de)?;
        MetricSpec::new(j.name, j.notes, j.tensor, j.aux_lowering).map_err(serde::de::Error::custom)
    }
}
