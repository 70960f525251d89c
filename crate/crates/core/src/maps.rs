//! Coordinate maps and the tensor transformation law.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::expr::{Expr, Params};
use crate::scalar::Scalar;
use crate::tensor::{ComponentTable, MetricSpec, TensorField};

/// Diffeomorphism `c' = f(c)` between charts of equal dimension.
pub trait CoordinateMap: Send + Sync {
    fn dim(&self) -> usize;
    fn forward(&self, c: &[f64]) -> Result<Vec<f64>>;
    fn inverse(&self, c_new: &[f64]) -> Result<Vec<f64>>;
    /// `∂c'^a/∂c^b` at an old-chart point.
    fn jacobian(&self, c: &[f64]) -> Result<DMatrix<f64>>;
    /// `∂c^a/∂c'^b` at a new-chart point.
    fn inverse_jacobian(&self, c_new: &[f64]) -> Result<DMatrix<f64>> {
        let c = self.inverse(c_new)?;
        invert(self.jacobian(&c)?, &c)
    }
    /// True when the Jacobians are closed-form rather than differenced.
    fn analytic(&self) -> bool {
        true
    }
    fn describe(&self) -> String;
}

fn invert(m: DMatrix<f64>, at: &[f64]) -> Result<DMatrix<f64>> {
    let scale = m.amax().max(1e-300);
    let inv = m
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::SingularJacobian(at.to_vec()))?;
    if !inv.iter().all(|v| v.is_finite())
        || m.determinant().abs() < 1e-14 * scale.powi(m.nrows() as i32)
    {
        return Err(Error::SingularJacobian(at.to_vec()));
    }
    Ok(inv)
}

fn check_dim(expected: usize, p: &[f64]) -> Result<()> {
    if p.len() == expected {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            expected,
            found: p.len(),
        })
    }
}

/// `c' = A c + b`.
#[derive(Clone, Debug)]
pub struct Affine {
    a: DMatrix<f64>,
    a_inv: DMatrix<f64>,
    b: DVector<f64>,
    label: String,
}

impl Affine {
    pub fn new(a: DMatrix<f64>, b: DVector<f64>) -> Result<Self> {
        if !a.is_square() || a.nrows() != b.len() {
            return Err(Error::MapFailure(
                "affine map needs a square matrix and matching shift".into(),
            ));
        }
        let a_inv = invert(a.clone(), &[])?;
        Ok(Affine {
            label: format!("affine (dim {})", a.nrows()),
            a,
            a_inv,
            b,
        })
    }

    pub fn identity(dim: usize) -> Self {
        Affine::new(DMatrix::identity(dim, dim), DVector::zeros(dim))
            .expect("identity is invertible")
            .labeled("identity")
    }

    pub fn scaling(dim: usize, s: f64) -> Result<Self> {
        Ok(
            Affine::new(DMatrix::identity(dim, dim) * s, DVector::zeros(dim))?
                .labeled(&format!("scale by {s}")),
        )
    }

    /// Planar rotation by `theta` in the (i, j) coordinate plane.
    pub fn givens(dim: usize, i: usize, j: usize, theta: f64) -> Result<Self> {
        if i == j || i >= dim || j >= dim {
            return Err(Error::MapFailure(format!("bad rotation plane ({i}, {j})")));
        }
        let mut a = DMatrix::identity(dim, dim);
        let (s, c) = theta.sin_cos();
        a[(i, i)] = c;
        a[(i, j)] = -s;
        a[(j, i)] = s;
        a[(j, j)] = c;
        Ok(Affine::new(a, DVector::zeros(dim))?
            .labeled(&format!("rotation by {theta} in plane ({i}, {j})")))
    }

    /// `c'^i = c^i + s c^j`.
    pub fn shear(dim: usize, i: usize, j: usize, s: f64) -> Result<Self> {
        if i == j || i >= dim || j >= dim {
            return Err(Error::MapFailure(format!("bad shear axes ({i}, {j})")));
        }
        let mut a = DMatrix::identity(dim, dim);
        a[(i, j)] = s;
        Ok(Affine::new(a, DVector::zeros(dim))?.labeled(&format!("shear {i} += {s}*{j}")))
    }

    pub fn labeled(mut self, label: &str) -> Self {
        self.label = label.to_string();
        self
    }
}

impl CoordinateMap for Affine {
    fn dim(&self) -> usize {
        self.b.len()
    }

    fn forward(&self, c: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim(), c)?;
        Ok((&self.a * DVector::from_column_slice(c) + &self.b)
            .iter()
            .copied()
            .collect())
    }

    fn inverse(&self, c_new: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim(), c_new)?;
        Ok(
            (&self.a_inv * (DVector::from_column_slice(c_new) - &self.b))
                .iter()
                .copied()
                .collect(),
        )
    }

    fn jacobian(&self, _c: &[f64]) -> Result<DMatrix<f64>> {
        Ok(self.a.clone())
    }

    fn inverse_jacobian(&self, _c_new: &[f64]) -> Result<DMatrix<f64>> {
        Ok(self.a_inv.clone())
    }

    fn describe(&self) -> String {
        self.label.clone()
    }
}

/// Strictly monotone one-dimensional map.
#[derive(Clone, Debug)]
pub enum Map1D {
    Identity,
    /// `y = scale·x + shift`
    Linear {
        scale: f64,
        shift: f64,
    },
    /// `y = x + alpha·sin(x)`, `|alpha| < 1`
    SinShift {
        alpha: f64,
    },
    /// `y = sinh(x)`
    Sinh,
    /// Expression pair in the variable of axis 0, with its derivative.
    Expr {
        forward: Expr,
        inverse: Expr,
        derivative: Expr,
    },
}

impl Map1D {
    pub fn sin_shift(alpha: f64) -> Result<Self> {
        if alpha.abs() >= 1.0 {
            return Err(Error::MapFailure(format!(
                "x + {alpha} sin x is not monotone"
            )));
        }
        Ok(Map1D::SinShift { alpha })
    }

    /// Expression-defined map; both expressions use coordinate index 0.
    pub fn from_exprs(forward: Expr, inverse: Expr) -> Result<Self> {
        let derivative = forward.derivative(0, &Params::new())?;
        Ok(Map1D::Expr {
            forward,
            inverse,
            derivative,
        })
    }

    fn eval(e: &Expr, x: f64) -> Result<f64> {
        e.eval_real(&[x], &Params::new())
    }

    pub fn apply(&self, x: f64) -> Result<f64> {
        Ok(match self {
            Map1D::Identity => x,
            Map1D::Linear { scale, shift } => scale * x + shift,
            Map1D::SinShift { alpha } => x + alpha * x.sin(),
            Map1D::Sinh => x.sinh(),
            Map1D::Expr { forward, .. } => Self::eval(forward, x)?,
        })
    }

    pub fn invert(&self, y: f64) -> Result<f64> {
        Ok(match self {
            Map1D::Identity => y,
            Map1D::Linear { scale, shift } => (y - shift) / scale,
            Map1D::SinShift { alpha } => {
                // Newton from x = y; the map is a contraction-friendly perturbation of identity.
                let mut x = y;
                for _ in 0..100 {
                    let f = x + alpha * x.sin() - y;
                    let step = f / (1.0 + alpha * x.cos());
                    x -= step;
                    if step.abs() <= 1e-16 * (1.0 + x.abs()) {
                        break;
                    }
                }
                x
            }
            Map1D::Sinh => y.asinh(),
            Map1D::Expr { inverse, .. } => Self::eval(inverse, y)?,
        })
    }

    pub fn derivative(&self, x: f64) -> Result<f64> {
        Ok(match self {
            Map1D::Identity => 1.0,
            Map1D::Linear { scale, .. } => *scale,
            Map1D::SinShift { alpha } => 1.0 + alpha * x.cos(),
            Map1D::Sinh => x.cosh(),
            Map1D::Expr { derivative, .. } => Self::eval(derivative, x)?,
        })
    }

    fn label(&self) -> String {
        match self {
            Map1D::Identity => "id".into(),
            Map1D::Linear { scale, shift } => format!("{scale}*x + {shift}"),
            Map1D::SinShift { alpha } => format!("x + {alpha}*sin(x)"),
            Map1D::Sinh => "sinh(x)".into(),
            Map1D::Expr { forward, .. } => forward.to_string(),
        }
    }
}

/// Independent monotone map on each axis.
#[derive(Clone, Debug)]
pub struct PerAxis {
    pub maps: Vec<Map1D>,
}

impl PerAxis {
    pub fn single(dim: usize, axis: usize, m: Map1D) -> Self {
        let mut maps = vec![Map1D::Identity; dim];
        maps[axis] = m;
        PerAxis { maps }
    }
}

impl CoordinateMap for PerAxis {
    fn dim(&self) -> usize {
        self.maps.len()
    }

    fn forward(&self, c: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim(), c)?;
        self.maps.iter().zip(c).map(|(m, &x)| m.apply(x)).collect()
    }

    fn inverse(&self, c_new: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim(), c_new)?;
        self.maps
            .iter()
            .zip(c_new)
            .map(|(m, &y)| m.invert(y))
            .collect()
    }

    fn jacobian(&self, c: &[f64]) -> Result<DMatrix<f64>> {
        check_dim(self.dim(), c)?;
        let d: Vec<f64> = self
            .maps
            .iter()
            .zip(c)
            .map(|(m, &x)| m.derivative(x))
            .collect::<Result<_>>()?;
        if d.iter().any(|v| *v == 0.0 || !v.is_finite()) {
            return Err(Error::SingularJacobian(c.to_vec()));
        }
        Ok(DMatrix::from_diagonal(&DVector::from_vec(d)))
    }

    fn inverse_jacobian(&self, c_new: &[f64]) -> Result<DMatrix<f64>> {
        let c = self.inverse(c_new)?;
        let j = self.jacobian(&c)?;
        Ok(DMatrix::from_diagonal(&j.diagonal().map(|v| 1.0 / v)))
    }

    fn describe(&self) -> String {
        let parts: Vec<String> = self.maps.iter().map(Map1D::label).collect();
        format!("per-axis [{}]", parts.join(", "))
    }
}

/// Cartesian block `(x1..xn)` starting at `offset` mapped to hyperspherical
/// coordinates `(r, θ1..θ_{n-1})`, with θ_i ∈ [0, π] and the last angle in
/// [0, 2π). Other axes pass through.
#[derive(Clone, Debug)]
pub struct CartesianToSpherical {
    pub dim: usize,
    pub offset: usize,
    pub n: usize,
}

impl CartesianToSpherical {
    pub fn new(dim: usize, offset: usize, n: usize) -> Result<Self> {
        if n < 2 || offset + n > dim {
            return Err(Error::MapFailure(format!(
                "no {n}-axis block at offset {offset} in {dim} dimensions"
            )));
        }
        Ok(CartesianToSpherical { dim, offset, n })
    }

    /// `∂x/∂(r, θ)` at spherical coordinates `s`.
    fn block_inverse_jacobian(s: &[f64]) -> DMatrix<f64> {
        let n = s.len();
        let r = s[0];
        let th = &s[1..];
        let mut m = DMatrix::zeros(n, n);
        // x_i = r · Π_{a<i} sin θ_a · (cos θ_i | 1 for the last)
        for i in 0..n {
            let tail = |k: usize, diff: bool| -> f64 {
                if i == n - 1 {
                    if diff {
                        0.0
                    } else {
                        1.0
                    }
                } else if diff {
                    -th[k].sin()
                } else {
                    th[k].cos()
                }
            };
            let sines = |skip: Option<usize>| -> f64 {
                (0..i)
                    .map(|a| {
                        if Some(a) == skip {
                            th[a].cos()
                        } else {
                            th[a].sin()
                        }
                    })
                    .product()
            };
            m[(i, 0)] = sines(None) * tail(i.min(n - 2), false);
            for a in 0..i {
                m[(i, a + 1)] = r * sines(Some(a)) * tail(i.min(n - 2), false);
            }
            if i < n - 1 {
                m[(i, i + 1)] = r * sines(None) * tail(i, true);
            }
        }
        m
    }

    fn to_cartesian(s: &[f64]) -> Vec<f64> {
        let n = s.len();
        let mut out = Vec::with_capacity(n);
        let mut prod = s[0];
        for i in 0..n - 1 {
            out.push(prod * s[i + 1].cos());
            prod *= s[i + 1].sin();
        }
        out.push(prod);
        out
    }

    fn to_spherical(x: &[f64]) -> Vec<f64> {
        let n = x.len();
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let mut out = vec![r];
        for i in 0..n - 1 {
            let rest = x[i..].iter().map(|v| v * v).sum::<f64>().sqrt();
            if i == n - 2 {
                let phi = x[n - 1].atan2(x[n - 2]);
                out.push(if phi < 0.0 { phi + 2.0 * PI } else { phi });
            } else if rest == 0.0 {
                out.push(0.0);
            } else {
                out.push((x[i] / rest).clamp(-1.0, 1.0).acos());
            }
        }
        out
    }
}

impl CoordinateMap for CartesianToSpherical {
    fn dim(&self) -> usize {
        self.dim
    }

    fn forward(&self, c: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim, c)?;
        let mut out = c.to_vec();
        let s = Self::to_spherical(&c[self.offset..self.offset + self.n]);
        out[self.offset..self.offset + self.n].copy_from_slice(&s);
        Ok(out)
    }

    fn inverse(&self, c_new: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim, c_new)?;
        let mut out = c_new.to_vec();
        let x = Self::to_cartesian(&c_new[self.offset..self.offset + self.n]);
        out[self.offset..self.offset + self.n].copy_from_slice(&x);
        Ok(out)
    }

    fn jacobian(&self, c: &[f64]) -> Result<DMatrix<f64>> {
        let s = self.forward(c)?;
        invert(self.inverse_jacobian(&s)?, c)
    }

    fn inverse_jacobian(&self, c_new: &[f64]) -> Result<DMatrix<f64>> {
        check_dim(self.dim, c_new)?;
        let mut m = DMatrix::identity(self.dim, self.dim);
        let b = Self::block_inverse_jacobian(&c_new[self.offset..self.offset + self.n]);
        m.view_mut((self.offset, self.offset), (self.n, self.n))
            .copy_from(&b);
        Ok(m)
    }

    fn describe(&self) -> String {
        format!(
            "cartesian to spherical on axes {}..{}",
            self.offset,
            self.offset + self.n
        )
    }
}

type PointFn = Box<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// Arbitrary user map with central-difference Jacobians,
/// step `h = 1e-6·(1 + |c|)` per coordinate.
pub struct FiniteDifference {
    dim: usize,
    forward: PointFn,
    inverse: PointFn,
    label: String,
}

impl FiniteDifference {
    pub fn new(dim: usize, forward: PointFn, inverse: PointFn, label: &str) -> Self {
        FiniteDifference {
            dim,
            forward,
            inverse,
            label: label.to_string(),
        }
    }

    fn diff(f: &PointFn, c: &[f64]) -> Result<DMatrix<f64>> {
        let n = c.len();
        let mut m = DMatrix::zeros(n, n);
        let mut p = c.to_vec();
        for b in 0..n {
            let h = 1e-6 * (1.0 + c[b].abs());
            p[b] = c[b] + h;
            let plus = f(&p);
            p[b] = c[b] - h;
            let minus = f(&p);
            p[b] = c[b];
            if plus.len() != n || minus.len() != n {
                return Err(Error::MapFailure("user map changed dimension".into()));
            }
            for a in 0..n {
                m[(a, b)] = (plus[a] - minus[a]) / (2.0 * h);
            }
        }
        Ok(m)
    }
}

impl CoordinateMap for FiniteDifference {
    fn dim(&self) -> usize {
        self.dim
    }

    fn forward(&self, c: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim, c)?;
        Ok((self.forward)(c))
    }

    fn inverse(&self, c_new: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim, c_new)?;
        Ok((self.inverse)(c_new))
    }

    fn jacobian(&self, c: &[f64]) -> Result<DMatrix<f64>> {
        Self::diff(&self.forward, c)
    }

    fn inverse_jacobian(&self, c_new: &[f64]) -> Result<DMatrix<f64>> {
        Self::diff(&self.inverse, c_new)
    }

    fn analytic(&self) -> bool {
        false
    }

    fn describe(&self) -> String {
        format!("{} (finite-difference Jacobian)", self.label)
    }
}

/// Components of `t` in the new chart at `p_new`: upper slots pick up
/// `∂c'/∂c`, lower slots `∂c/∂c'`, and old components are evaluated at the
/// preimage of `p_new`.
pub fn transform_tensor(
    t: &TensorField,
    map: &dyn CoordinateMap,
    p_new: &[f64],
) -> Result<ComponentTable> {
    if map.dim() != t.dim() {
        return Err(Error::DimensionMismatch {
            expected: t.dim(),
            found: map.dim(),
        });
    }
    let p_old = map.inverse(p_new)?;
    let old = t.table(&p_old)?;
    let jinv = map.inverse_jacobian(p_new)?;
    let (u, _) = t.rank();
    let jac = if u > 0 {
        map.jacobian(&p_old)?
    } else {
        DMatrix::zeros(0, 0)
    };
    let d = t.dim();
    // Sparse rows: for old index a, the new indices with a nonzero factor.
    let lower_opts: Vec<Vec<(usize, f64)>> = (0..d)
        .map(|a| {
            (0..d)
                .filter_map(|b| nz(jinv[(a, b)]).map(|v| (b, v)))
                .collect()
        })
        .collect();
    let upper_opts: Vec<Vec<(usize, f64)>> = if u > 0 {
        (0..d)
            .map(|a| {
                (0..d)
                    .filter_map(|b| nz(jac[(b, a)]).map(|v| (b, v)))
                    .collect()
            })
            .collect()
    } else {
        Vec::new()
    };
    let mut entries: BTreeMap<Vec<usize>, Scalar> = BTreeMap::new();
    let mut new_idx = Vec::with_capacity(t.order());
    for (idx, val) in &old.entries {
        let opts: Vec<&Vec<(usize, f64)>> = idx
            .iter()
            .enumerate()
            .map(|(pos, &a)| {
                if pos < u {
                    &upper_opts[a]
                } else {
                    &lower_opts[a]
                }
            })
            .collect();
        expand(&opts, 0, 1.0, &mut new_idx, &mut |ix, w| {
            let e = entries
                .entry(ix.to_vec())
                .or_insert(Scalar::zero(t.codomain()));
            *e = *e + val.scale(w);
        });
    }
    Ok(ComponentTable {
        upper: u,
        lower: t.rank().1,
        codomain: t.codomain(),
        entries,
    })
}

fn nz(v: f64) -> Option<f64> {
    (v != 0.0).then_some(v)
}

fn expand(
    opts: &[&Vec<(usize, f64)>],
    pos: usize,
    weight: f64,
    idx: &mut Vec<usize>,
    sink: &mut dyn FnMut(&[usize], f64),
) {
    if pos == opts.len() {
        sink(idx, weight);
        return;
    }
    for &(b, w) in opts[pos].iter() {
        idx.push(b);
        expand(opts, pos + 1, weight * w, idx, sink);
        idx.pop();
    }
}

/// Pushforward `J dc` of a displacement at an old-chart point.
pub fn pushforward(map: &dyn CoordinateMap, p_old: &[f64], dc: &[f64]) -> Result<Vec<f64>> {
    let j = map.jacobian(p_old)?;
    Ok((j * DVector::from_column_slice(dc))
        .iter()
        .copied()
        .collect())
}

/// Line element in the new chart from transformed component tables.
pub fn transformed_line_element(
    m: &MetricSpec,
    map: &dyn CoordinateMap,
    p_new: &[f64],
    dc_new: &[f64],
) -> Result<(Scalar, f64)> {
    let table = transform_tensor(m.tensor(), map, p_new)?;
    let w = match m.aux_lowering() {
        Some(g) if m.tensor().rank().0 > 0 => transform_tensor(g, map, p_new)?.lower(dc_new),
        _ => Vec::new(),
    };
    Ok((table.contract(dc_new, &w), table.contract_abs(dc_new, &w)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::Chart;
    use crate::tensor::{Symmetry, TensorSpec};

    fn euclid2() -> TensorField {
        TensorSpec::new(Chart::euclidean(2), 0, 2)
            .symmetry(Symmetry::Full)
            .with(vec![0, 0], Expr::c(1.0))
            .with(vec![1, 1], Expr::c(1.0))
            .build()
            .unwrap()
    }

    #[test]
    fn identity_leaves_components() {
        let t = euclid2();
        let tab = transform_tensor(&t, &Affine::identity(2), &[0.3, 0.7]).unwrap();
        assert_eq!(tab, t.table(&[0.3, 0.7]).unwrap());
    }

    #[test]
    fn doubling_quarters_components() {
        let t = euclid2();
        let tab = transform_tensor(&t, &Affine::scaling(2, 2.0).unwrap(), &[1.0, 1.0]).unwrap();
        assert_eq!(tab.get(&[0, 0]), Scalar::Real(0.25));
        assert_eq!(tab.get(&[1, 1]), Scalar::Real(0.25));
    }

    #[test]
    fn spherical_jacobians_agree() {
        let m = CartesianToSpherical::new(4, 1, 3).unwrap();
        let p = [0.2, 0.3, -0.4, 0.5];
        let s = m.forward(&p).unwrap();
        let back = m.inverse(&s).unwrap();
        for (a, b) in p.iter().zip(&back) {
            assert!((a - b).abs() < 1e-14);
        }
        let fd = FiniteDifference::new(
            4,
            Box::new(|c: &[f64]| {
                CartesianToSpherical::new(4, 1, 3)
                    .unwrap()
                    .inverse(c)
                    .unwrap()
            }),
            Box::new(|c: &[f64]| c.to_vec()),
            "probe",
        );
        let exact = m.inverse_jacobian(&s).unwrap();
        let approx = fd.jacobian(&s).unwrap();
        assert!((exact - approx).amax() < 1e-8);
    }

    #[test]
    fn sin_shift_inverts() {
        let m = Map1D::sin_shift(0.5).unwrap();
        for x in [-3.0, -0.1, 0.0, 1.0, 7.5] {
            let y = m.apply(x).unwrap();
            assert!((m.invert(y).unwrap() - x).abs() < 1e-14);
        }
        assert!(Map1D::sin_shift(1.0).is_err());
    }

    #[test]
    fn singular_affine_rejected() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        assert!(Affine::new(a, DVector::zeros(2)).is_err());
    }
}
