//! The scalar tower ℝ ⊂ ℂ ⊂ ℍ used as metric codomains.
//!
//! Mixed-tag arithmetic always promotes to the wider tag and never demotes,
//! even when the imaginary parts vanish. Quaternion components are ordered
//! `(w, i, j, k)` everywhere, including the JSON encoding
//! `{"tag": "quaternion", "c": [w, x, y, z]}`.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Codomain tag. Ordered by inclusion, so `max` gives the promotion target.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tag {
    Real,
    Complex,
    Quaternion,
}

impl Tag {
    pub fn width(self) -> usize {
        match self {
            Tag::Real => 1,
            Tag::Complex => 2,
            Tag::Quaternion => 4,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Tag::Real => "real",
            Tag::Complex => "complex",
            Tag::Quaternion => "quaternion",
        }
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Hamilton quaternion `w + x i + y j + z k`.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Quaternion {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Quaternion {
    pub const fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        Self { w, x, y, z }
    }

    pub fn conj(self) -> Self {
        Self::new(self.w, -self.x, -self.y, -self.z)
    }

    pub fn norm_sqr(self) -> f64 {
        self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z
    }

    pub fn norm(self) -> f64 {
        hypot4(self.w, self.x, self.y, self.z)
    }

    pub fn scale(self, s: f64) -> Self {
        Self::new(self.w * s, self.x * s, self.y * s, self.z * s)
    }

    pub fn inverse(self) -> Self {
        let n2 = self.norm_sqr();
        self.conj().scale(1.0 / n2)
    }

    fn vector_norm(self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn exp(self) -> Self {
        let v = self.vector_norm();
        let ew = self.w.exp();
        if v == 0.0 {
            return Self::new(ew, 0.0, 0.0, 0.0);
        }
        let s = ew * v.sin() / v;
        Self::new(ew * v.cos(), self.x * s, self.y * s, self.z * s)
    }

    pub fn ln(self) -> Self {
        let n = self.norm();
        let v = self.vector_norm();
        if v == 0.0 {
            // Real axis; negative reals pick the i-branch.
            if self.w >= 0.0 {
                return Self::new(n.ln(), 0.0, 0.0, 0.0);
            }
            return Self::new(n.ln(), std::f64::consts::PI, 0.0, 0.0);
        }
        let theta = v.atan2(self.w) / v;
        Self::new(n.ln(), self.x * theta, self.y * theta, self.z * theta)
    }
}

impl Mul for Quaternion {
    type Output = Quaternion;

    fn mul(self, r: Quaternion) -> Quaternion {
        let l = self;
        Quaternion::new(
            l.w * r.w - l.x * r.x - l.y * r.y - l.z * r.z,
            l.w * r.x + l.x * r.w + l.y * r.z - l.z * r.y,
            l.w * r.y - l.x * r.z + l.y * r.w + l.z * r.x,
            l.w * r.z + l.x * r.y - l.y * r.x + l.z * r.w,
        )
    }
}

fn hypot4(a: f64, b: f64, c: f64, d: f64) -> f64 {
    let m = a.abs().max(b.abs()).max(c.abs()).max(d.abs());
    if m == 0.0 || !m.is_finite() {
        return m;
    }
    let (a, b, c, d) = (a / m, b / m, c / m, d / m);
    m * (a * a + b * b + c * c + d * d).sqrt()
}

/// A value in ℝ, ℂ or ℍ.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Scalar {
    Real(f64),
    Complex(Complex64),
    Quaternion(Quaternion),
}

impl Default for Scalar {
    fn default() -> Self {
        Scalar::Real(0.0)
    }
}

impl From<f64> for Scalar {
    fn from(v: f64) -> Self {
        Scalar::Real(v)
    }
}

impl From<Complex64> for Scalar {
    fn from(v: Complex64) -> Self {
        Scalar::Complex(v)
    }
}

impl From<Quaternion> for Scalar {
    fn from(v: Quaternion) -> Self {
        Scalar::Quaternion(v)
    }
}

impl Scalar {
    pub const I: Scalar = Scalar::Complex(Complex64::new(0.0, 1.0));
    pub const J: Scalar = Scalar::Quaternion(Quaternion::new(0.0, 0.0, 1.0, 0.0));
    pub const K: Scalar = Scalar::Quaternion(Quaternion::new(0.0, 0.0, 0.0, 1.0));

    pub fn zero(tag: Tag) -> Self {
        Scalar::Real(0.0).promote(tag)
    }

    pub fn one(tag: Tag) -> Self {
        Scalar::Real(1.0).promote(tag)
    }

    pub fn tag(&self) -> Tag {
        match self {
            Scalar::Real(_) => Tag::Real,
            Scalar::Complex(_) => Tag::Complex,
            Scalar::Quaternion(_) => Tag::Quaternion,
        }
    }

    /// Components in `(w, i, j, k)` order, truncated to the tag width.
    pub fn components(&self) -> Vec<f64> {
        match *self {
            Scalar::Real(r) => vec![r],
            Scalar::Complex(c) => vec![c.re, c.im],
            Scalar::Quaternion(q) => vec![q.w, q.x, q.y, q.z],
        }
    }

    pub fn from_components(tag: Tag, c: &[f64]) -> Result<Self> {
        if c.len() != tag.width() {
            return Err(Error::Json(format!(
                "{tag} scalar needs {} components, got {}",
                tag.width(),
                c.len()
            )));
        }
        Ok(match tag {
            Tag::Real => Scalar::Real(c[0]),
            Tag::Complex => Scalar::Complex(Complex64::new(c[0], c[1])),
            Tag::Quaternion => Scalar::Quaternion(Quaternion::new(c[0], c[1], c[2], c[3])),
        })
    }

    /// Embeds into a wider tag. Requests for a narrower tag return `self`.
    pub fn promote(self, tag: Tag) -> Self {
        if tag <= self.tag() {
            return self;
        }
        match (self, tag) {
            (Scalar::Real(r), Tag::Complex) => Scalar::Complex(Complex64::new(r, 0.0)),
            (Scalar::Real(r), Tag::Quaternion) => {
                Scalar::Quaternion(Quaternion::new(r, 0.0, 0.0, 0.0))
            }
            (Scalar::Complex(c), Tag::Quaternion) => {
                Scalar::Quaternion(Quaternion::new(c.re, c.im, 0.0, 0.0))
            }
            _ => self,
        }
    }

    /// Projects onto a narrower tag by dropping the extra components.
    pub fn project(self, tag: Tag) -> Self {
        let c = self.components();
        Scalar::from_components(tag, &c[..tag.width().min(c.len())]).unwrap_or(self)
    }

    pub fn as_real(&self) -> Option<f64> {
        match *self {
            Scalar::Real(r) => Some(r),
            _ => None,
        }
    }

    /// Real part (the `w` component).
    pub fn re(&self) -> f64 {
        match *self {
            Scalar::Real(r) => r,
            Scalar::Complex(c) => c.re,
            Scalar::Quaternion(q) => q.w,
        }
    }

    pub fn is_zero(&self) -> bool {
        match *self {
            Scalar::Real(r) => r == 0.0,
            Scalar::Complex(c) => c.re == 0.0 && c.im == 0.0,
            Scalar::Quaternion(q) => q.w == 0.0 && q.x == 0.0 && q.y == 0.0 && q.z == 0.0,
        }
    }

    pub fn is_finite(&self) -> bool {
        match *self {
            Scalar::Real(r) => r.is_finite(),
            Scalar::Complex(c) => c.is_finite(),
            Scalar::Quaternion(q) => {
                q.w.is_finite() && q.x.is_finite() && q.y.is_finite() && q.z.is_finite()
            }
        }
    }

    /// Euclidean norm of the component vector.
    pub fn norm(&self) -> f64 {
        match *self {
            Scalar::Real(r) => r.abs(),
            Scalar::Complex(c) => c.norm(),
            Scalar::Quaternion(q) => q.norm(),
        }
    }

    pub fn scale(self, s: f64) -> Self {
        match self {
            Scalar::Real(r) => Scalar::Real(r * s),
            Scalar::Complex(c) => Scalar::Complex(c * s),
            Scalar::Quaternion(q) => Scalar::Quaternion(q.scale(s)),
        }
    }

    fn as_quaternion(&self) -> Quaternion {
        match self.promote(Tag::Quaternion) {
            Scalar::Quaternion(q) => q,
            _ => unreachable!(),
        }
    }

    fn as_complex(&self) -> Option<Complex64> {
        match self.promote(Tag::Complex) {
            Scalar::Complex(c) => Some(c),
            _ => None,
        }
    }

    pub fn inverse(self) -> Self {
        match self {
            Scalar::Real(r) => Scalar::Real(1.0 / r),
            Scalar::Complex(c) => Scalar::Complex(c.inv()),
            Scalar::Quaternion(q) => Scalar::Quaternion(q.inverse()),
        }
    }

    /// Integer power by repeated squaring; negative exponents invert first.
    pub fn powi(self, n: i32) -> Self {
        if n < 0 {
            return self.inverse().powi(-n);
        }
        let mut base = self;
        let mut acc = Scalar::one(self.tag());
        let mut e = n as u32;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            e >>= 1;
        }
        acc
    }

    /// General power. A real base with a real exponent stays real.
    pub fn pow(self, exponent: Scalar) -> Result<Self> {
        if let Some(e) = exponent.as_real() {
            if e.fract() == 0.0 && e.abs() <= 64.0 {
                return Ok(self.powi(e as i32));
            }
            return match self {
                Scalar::Real(b) => Ok(Scalar::Real(b.powf(e))),
                Scalar::Complex(c) => Ok(Scalar::Complex(c.powf(e))),
                Scalar::Quaternion(q) => Ok(Scalar::Quaternion((q.ln().scale(e)).exp())),
            };
        }
        match (self.as_complex(), exponent.as_complex()) {
            (Some(b), Some(e)) if exponent.tag() == Tag::Complex => Ok(Scalar::Complex(b.powc(e))),
            _ => Err(Error::Eval("quaternion exponents are not supported".into())),
        }
    }

    pub fn exp(self) -> Self {
        match self {
            Scalar::Real(r) => Scalar::Real(r.exp()),
            Scalar::Complex(c) => Scalar::Complex(c.exp()),
            Scalar::Quaternion(q) => Scalar::Quaternion(q.exp()),
        }
    }

    pub fn ln(self) -> Self {
        match self {
            Scalar::Real(r) => Scalar::Real(r.ln()),
            Scalar::Complex(c) => Scalar::Complex(c.ln()),
            Scalar::Quaternion(q) => Scalar::Quaternion(q.ln()),
        }
    }

    pub fn sqrt(self) -> Result<Self> {
        Ok(match self {
            Scalar::Real(r) => Scalar::Real(r.sqrt()),
            Scalar::Complex(c) => Scalar::Complex(c.sqrt()),
            Scalar::Quaternion(q) => Scalar::Quaternion(q.ln().scale(0.5).exp()),
        })
    }

    /// Applies a complex-analytic function; quaternion arguments are rejected.
    pub fn analytic(
        self,
        name: &str,
        real: fn(f64) -> f64,
        complex: fn(Complex64) -> Complex64,
    ) -> Result<Self> {
        match self {
            Scalar::Real(r) => Ok(Scalar::Real(real(r))),
            Scalar::Complex(c) => Ok(Scalar::Complex(complex(c))),
            Scalar::Quaternion(_) => Err(Error::Eval(format!(
                "{name} of a quaternion is not supported"
            ))),
        }
    }
}

fn binop(
    a: Scalar,
    b: Scalar,
    real: fn(f64, f64) -> f64,
    complex: fn(Complex64, Complex64) -> Complex64,
    quat: fn(Quaternion, Quaternion) -> Quaternion,
) -> Scalar {
    match a.tag().max(b.tag()) {
        Tag::Real => Scalar::Real(real(a.re(), b.re())),
        Tag::Complex => Scalar::Complex(complex(a.as_complex().unwrap(), b.as_complex().unwrap())),
        Tag::Quaternion => Scalar::Quaternion(quat(a.as_quaternion(), b.as_quaternion())),
    }
}

impl Add for Scalar {
    type Output = Scalar;
    fn add(self, rhs: Scalar) -> Scalar {
        binop(
            self,
            rhs,
            |a, b| a + b,
            |a, b| a + b,
            |a, b| Quaternion::new(a.w + b.w, a.x + b.x, a.y + b.y, a.z + b.z),
        )
    }
}

impl Sub for Scalar {
    type Output = Scalar;
    fn sub(self, rhs: Scalar) -> Scalar {
        binop(
            self,
            rhs,
            |a, b| a - b,
            |a, b| a - b,
            |a, b| Quaternion::new(a.w - b.w, a.x - b.x, a.y - b.y, a.z - b.z),
        )
    }
}

impl Mul for Scalar {
    type Output = Scalar;
    fn mul(self, rhs: Scalar) -> Scalar {
        binop(self, rhs, |a, b| a * b, |a, b| a * b, |a, b| a * b)
    }
}

/// Right division `a · b⁻¹`.
impl Div for Scalar {
    type Output = Scalar;
    fn div(self, rhs: Scalar) -> Scalar {
        binop(
            self,
            rhs,
            |a, b| a / b,
            |a, b| a / b,
            |a, b| a * b.inverse(),
        )
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        self.scale(-1.0)
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Scalar::Real(r) => write!(f, "{r}"),
            Scalar::Complex(c) => write!(f, "{}{}i", c.re, signed(c.im)),
            Scalar::Quaternion(q) => {
                write!(f, "{}{}i{}j{}k", q.w, signed(q.x), signed(q.y), signed(q.z))
            }
        }
    }
}

fn signed(v: f64) -> String {
    if v.is_sign_negative() {
        format!("{v}")
    } else {
        format!("+{v}")
    }
}

#[derive(Serialize, Deserialize)]
struct ScalarRepr {
    tag: Tag,
    c: Vec<f64>,
}

impl Serialize for Scalar {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ScalarRepr {
            tag: self.tag(),
            c: self.components(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Scalar {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = ScalarRepr::deserialize(d)?;
        Scalar::from_components(repr.tag, &repr.c).map_err(serde::de::Error::custom)
    }
}

/// The unique nonnegative `y` with `y^k = x`.
pub fn real_root(x: f64, k: u32) -> Result<f64> {
    if k == 0 {
        return Err(Error::ZeroRootOrder);
    }
    if !(x >= 0.0) {
        return Err(Error::NegativeRadicand(x));
    }
    let y = match k {
        1 => return Ok(x),
        2 => return Ok(x.sqrt()),
        3 => x.cbrt(),
        _ => x.powf(1.0 / k as f64),
    };
    if y == 0.0 || !y.is_finite() {
        return Ok(y);
    }
    // One Newton polish step on y^k - x.
    let kf = k as f64;
    let yk1 = y.powi(k as i32 - 1);
    let refined = y - (yk1 * y - x) / (kf * yk1);
    Ok(if refined.is_finite() && refined > 0.0 {
        refined
    } else {
        y
    })
}

/// Default tolerance for [`projective_equiv`].
pub const PROJECTIVE_TOL: f64 = 1e-9;

/// Decides `b = λ a` for some nonzero complex `λ`.
///
/// Both tuples are normalized by the entry at the first index where `a` is
/// nonzero (relative to its largest entry); the representatives are then
/// compared entrywise with a tolerance scaled by their size.
pub fn projective_equiv(a: &[Complex64], b: &[Complex64], tol: f64) -> Result<bool> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch(a.len(), b.len()));
    }
    if a.is_empty() {
        return Err(Error::ZeroTuple);
    }
    let max_a = a.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let max_b = b.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if max_a == 0.0 || max_b == 0.0 {
        return Err(Error::ZeroTuple);
    }
    let pivot = a
        .iter()
        .position(|z| z.norm() > f64::EPSILON * max_a)
        .expect("nonzero tuple has a pivot");
    if b[pivot].norm() <= f64::EPSILON * max_b {
        return Ok(false);
    }
    let (pa, pb) = (a[pivot], b[pivot]);
    let mut scale: f64 = 1.0;
    let mut worst: f64 = 0.0;
    for (za, zb) in a.iter().zip(b) {
        let ra = za / pa;
        let rb = zb / pb;
        scale = scale.max(ra.norm()).max(rb.norm());
        worst = worst.max((ra - rb).norm());
    }
    Ok(worst <= tol * scale)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn identity_and_basis_products() {
        let q = Scalar::Quaternion(Quaternion::new(0.5, -1.0, 2.0, 3.0));
        assert_eq!(Scalar::Real(1.0) * q, q);
        let i = Scalar::I.promote(Tag::Quaternion);
        assert_eq!((i * Scalar::J).components(), vec![0.0, 0.0, 0.0, 1.0]);
        assert_eq!((Scalar::J * i).components(), vec![0.0, 0.0, 0.0, -1.0]);
        assert_eq!(
            (Scalar::K * Scalar::K).components(),
            vec![-1.0, 0.0, 0.0, 0.0]
        );
    }

    #[test]
    fn conjugate_pair_product() {
        // (1+i)(1-i) = 1 - i + i - i² = 2
        let p = Scalar::Complex(c(1.0, 1.0)) * Scalar::Complex(c(1.0, -1.0));
        assert_eq!(p, Scalar::Complex(c(2.0, 0.0)));
        assert_eq!(p.tag(), Tag::Complex);
    }

    #[test]
    fn norms() {
        assert_eq!(Scalar::Real(0.0).norm(), 0.0);
        assert_eq!(Scalar::Real(-3.0).norm(), 3.0);
        assert_eq!(
            Scalar::Quaternion(Quaternion::new(1.0, 1.0, 1.0, 1.0)).norm(),
            2.0
        );
    }

    #[test]
    fn roots() {
        assert_eq!(real_root(1.0, 5).unwrap(), 1.0);
        assert_eq!(real_root(8.0, 3).unwrap(), 2.0);
        let y = real_root(2.0, 3).unwrap();
        assert!((y * y * y - 2.0).abs() < 1e-12);
        assert!((y - 1.259921).abs() < 1e-6);
        assert_eq!(real_root(-1.0, 3), Err(Error::NegativeRadicand(-1.0)));
        assert_eq!(real_root(1.0, 0), Err(Error::ZeroRootOrder));
    }

    #[test]
    fn projective_examples() {
        let t = PROJECTIVE_TOL;
        assert!(projective_equiv(&[c(1., 0.), c(2., 0.)], &[c(2., 0.), c(4., 0.)], t).unwrap());
        assert!(!projective_equiv(&[c(1., 0.), c(0., 0.)], &[c(0., 0.), c(1., 0.)], t).unwrap());
        // λ = 1+i: (1+i)(1+i) = 2i, (1+i)·2 = 2+2i
        assert!(projective_equiv(&[c(1., 1.), c(2., 0.)], &[c(0., 2.), c(2., 2.)], t).unwrap());
        assert_eq!(
            projective_equiv(&[c(0., 0.)], &[c(1., 0.)], t),
            Err(Error::ZeroTuple)
        );
    }

    #[test]
    fn promotion_round_trip_and_no_demotion() {
        let r = Scalar::Real(-2.5);
        assert_eq!(r.promote(Tag::Complex).project(Tag::Real), r);
        assert_eq!(r.promote(Tag::Quaternion).project(Tag::Real), r);
        let z = Scalar::Complex(c(3.0, 0.0));
        assert_eq!((z * Scalar::Real(2.0)).tag(), Tag::Complex);
    }

    #[test]
    fn json_encoding() {
        let q = Scalar::Quaternion(Quaternion::new(1.0, 2.0, 3.0, 4.0));
        let s = serde_json::to_string(&q).unwrap();
        assert_eq!(s, r#"{"tag":"quaternion","c":[1.0,2.0,3.0,4.0]}"#);
        let back: Scalar = serde_json::from_str(&s).unwrap();
        assert_eq!(back, q);
        assert!(serde_json::from_str::<Scalar>(r#"{"tag":"complex","c":[1.0]}"#).is_err());
    }

    #[test]
    fn quaternion_exp_ln_inverse() {
        let q = Quaternion::new(0.3, -0.2, 0.5, 0.1);
        let back = q.ln().exp();
        assert!((back.w - q.w).abs() < 1e-14 && (back.z - q.z).abs() < 1e-14);
        let one = q * q.inverse();
        assert!((one.w - 1.0).abs() < 1e-14 && one.x.abs() < 1e-14);
    }
}
