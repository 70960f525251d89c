//! Closed-form component expressions.
//!
//! Grammar (whitespace is insignificant between tokens):
//!
//! ```text
//! expr   = term , { ("+" | "-") , term } ;
//! term   = unary , { ("*" | "/") , unary } ;
//! unary  = ("-" | "+") , unary | power ;
//! power  = atom , [ "^" , unary ] ;                 (* right associative *)
//! atom   = number | imag | ident | func , "(" , expr , ")" | "(" , expr , ")" ;
//! number = digit , { digit } , [ "." , { digit } ] , [ ("e" | "E") , [ "+" | "-" ] , digit , { digit } ] ;
//! imag   = number , ( "i" | "j" | "k" ) ;            (* no space before the unit *)
//! func   = "exp" | "ln" | "log" | "sin" | "cos" | "sinh" | "cosh" | "sqrt" ;
//! ident  = letter , { letter | digit | "_" } ;
//! ```
//!
//! Identifiers resolve in order: chart coordinate names, functional
//! parameter names, then the constants `pi`, `e`, `i`, `j`, `k`. `log` is
//! the natural logarithm and prints back as `ln`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Named functional parameters `f(c)` referenced by component expressions.
pub type Params = BTreeMap<String, Expr>;

const MAX_PARAM_DEPTH: usize = 32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Func {
    Exp,
    Ln,
    Sin,
    Cos,
    Sinh,
    Cosh,
    Sqrt,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Sqrt => "sqrt",
        }
    }

    fn from_name(s: &str) -> Option<Func> {
        Some(match s {
            "exp" => Func::Exp,
            "ln" | "log" => Func::Ln,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "sinh" => Func::Sinh,
            "cosh" => Func::Cosh,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }

    fn apply(self, x: Scalar) -> Result<Scalar> {
        match self {
            Func::Exp => Ok(x.exp()),
            Func::Ln => Ok(x.ln()),
            Func::Sqrt => x.sqrt(),
            Func::Sin => x.analytic("sin", f64::sin, |z| z.sin()),
            Func::Cos => x.analytic("cos", f64::cos, |z| z.cos()),
            Func::Sinh => x.analytic("sinh", f64::sinh, |z| z.sinh()),
            Func::Cosh => x.analytic("cosh", f64::cosh, |z| z.cosh()),
        }
    }
}

/// Expression tree over coordinates, parameters and scalar constants.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Const(Scalar),
    /// Chart coordinate by axis index; the name is kept for printing.
    Coord(usize, String),
    Param(String),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Func(Func, Box<Expr>),
}

/// Names visible to the parser.
#[derive(Clone, Debug, Default)]
pub struct Scope {
    pub coords: Vec<String>,
    pub params: BTreeSet<String>,
}

impl Scope {
    pub fn new<S: AsRef<str>>(coords: &[S]) -> Self {
        Self {
            coords: coords.iter().map(|s| s.as_ref().to_string()).collect(),
            params: BTreeSet::new(),
        }
    }

    pub fn with_params<I, S>(mut self, params: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.params.extend(params.into_iter().map(Into::into));
        self
    }
}

impl Expr {
    pub fn parse(src: &str, scope: &Scope) -> Result<Expr> {
        let tokens = lex(src)?;
        let mut p = Parser {
            tokens,
            pos: 0,
            scope,
        };
        let e = p.expr()?;
        if let Some(t) = p.tokens.get(p.pos) {
            return Err(Error::Parse {
                pos: t.pos,
                msg: format!("unexpected {:?}", t.kind),
            });
        }
        Ok(e)
    }

    /// Parses a constant expression (no coordinates or parameters).
    pub fn parse_scalar(src: &str) -> Result<Scalar> {
        Expr::parse(src, &Scope::default())?.eval(&[], &Params::new())
    }

    pub fn c(v: f64) -> Expr {
        Expr::Const(Scalar::Real(v))
    }

    pub fn scalar(v: Scalar) -> Expr {
        Expr::Const(v)
    }

    pub fn coord(index: usize, name: impl Into<String>) -> Expr {
        Expr::Coord(index, name.into())
    }

    pub fn param(name: impl Into<String>) -> Expr {
        Expr::Param(name.into())
    }

    pub fn as_const(&self) -> Option<Scalar> {
        match self {
            Expr::Const(s) => Some(*s),
            _ => None,
        }
    }

    fn is_real(&self, v: f64) -> bool {
        matches!(self, Expr::Const(Scalar::Real(r)) if *r == v)
    }

    // Smart constructors fold constants and drop neutral elements. Folding
    // never changes the result tag: only real neutral elements are dropped.

    pub fn add(a: Expr, b: Expr) -> Expr {
        match (&a, &b) {
            (Expr::Const(x), Expr::Const(y)) => Expr::Const(*x + *y),
            _ if a.is_real(0.0) && b.as_const().is_none() => b,
            _ if b.is_real(0.0) && a.as_const().is_none() => a,
            _ => Expr::Add(Box::new(a), Box::new(b)),
        }
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        match (&a, &b) {
            (Expr::Const(x), Expr::Const(y)) => Expr::Const(*x - *y),
            _ if b.is_real(0.0) && a.as_const().is_none() => a,
            _ if a.is_real(0.0) && b.as_const().is_none() => Expr::neg(b),
            _ => Expr::Sub(Box::new(a), Box::new(b)),
        }
    }

    pub fn mul(a: Expr, b: Expr) -> Expr {
        match (&a, &b) {
            (Expr::Const(x), Expr::Const(y)) => Expr::Const(*x * *y),
            _ if a.is_real(1.0) && b.as_const().is_none() => b,
            _ if b.is_real(1.0) && a.as_const().is_none() => a,
            _ => Expr::Mul(Box::new(a), Box::new(b)),
        }
    }

    pub fn div(a: Expr, b: Expr) -> Expr {
        match (&a, &b) {
            (Expr::Const(x), Expr::Const(y)) if !y.is_zero() => Expr::Const(*x / *y),
            _ if b.is_real(1.0) && a.as_const().is_none() => a,
            _ => Expr::Div(Box::new(a), Box::new(b)),
        }
    }

    pub fn pow(a: Expr, b: Expr) -> Expr {
        match (&a, &b) {
            (Expr::Const(x), Expr::Const(y)) => match x.pow(*y) {
                Ok(v) if v.is_finite() => Expr::Const(v),
                _ => Expr::Pow(Box::new(a), Box::new(b)),
            },
            _ if b.is_real(1.0) => a,
            _ => Expr::Pow(Box::new(a), Box::new(b)),
        }
    }

    pub fn powi(a: Expr, n: i32) -> Expr {
        Expr::pow(a, Expr::c(n as f64))
    }

    pub fn neg(a: Expr) -> Expr {
        match a {
            Expr::Const(x) => Expr::Const(-x),
            Expr::Neg(inner) => *inner,
            other => Expr::Neg(Box::new(other)),
        }
    }

    pub fn func(f: Func, a: Expr) -> Expr {
        if let Expr::Const(x) = &a {
            if let Ok(v) = f.apply(*x) {
                if v.is_finite() {
                    return Expr::Const(v);
                }
            }
        }
        Expr::Func(f, Box::new(a))
    }

    pub fn exp(a: Expr) -> Expr {
        Expr::func(Func::Exp, a)
    }

    pub fn ln(a: Expr) -> Expr {
        Expr::func(Func::Ln, a)
    }

    pub fn sin(a: Expr) -> Expr {
        Expr::func(Func::Sin, a)
    }

    pub fn sinh(a: Expr) -> Expr {
        Expr::func(Func::Sinh, a)
    }

    pub fn sqrt(a: Expr) -> Expr {
        Expr::func(Func::Sqrt, a)
    }

    /// Sum of terms; empty sums are zero.
    pub fn sum<I: IntoIterator<Item = Expr>>(terms: I) -> Expr {
        terms.into_iter().fold(Expr::c(0.0), Expr::add)
    }

    pub fn product<I: IntoIterator<Item = Expr>>(factors: I) -> Expr {
        factors.into_iter().fold(Expr::c(1.0), Expr::mul)
    }

    pub fn eval(&self, point: &[f64], params: &Params) -> Result<Scalar> {
        self.eval_depth(point, params, 0)
    }

    /// Evaluates and requires a real, finite result.
    pub fn eval_real(&self, point: &[f64], params: &Params) -> Result<f64> {
        let v = self.eval(point, params)?;
        match v {
            Scalar::Real(r) if r.is_finite() => Ok(r),
            Scalar::Real(r) => Err(Error::NonFinite(format!("{self} = {r} at {point:?}"))),
            other => Err(Error::Eval(format!(
                "{self} is not real ({other}) at {point:?}"
            ))),
        }
    }

    fn eval_depth(&self, point: &[f64], params: &Params, depth: usize) -> Result<Scalar> {
        let ev = |e: &Expr| e.eval_depth(point, params, depth);
        Ok(match self {
            Expr::Const(s) => *s,
            Expr::Coord(i, name) => Scalar::Real(*point.get(*i).ok_or_else(|| {
                Error::Eval(format!("coordinate `{name}` (axis {i}) missing from point"))
            })?),
            Expr::Param(name) => {
                if depth >= MAX_PARAM_DEPTH {
                    return Err(Error::Eval(format!(
                        "parameter `{name}` is defined cyclically"
                    )));
                }
                let def = params
                    .get(name)
                    .ok_or_else(|| Error::UnknownIdentifier(name.clone()))?;
                def.eval_depth(point, params, depth + 1)?
            }
            Expr::Neg(a) => -ev(a)?,
            Expr::Add(a, b) => ev(a)? + ev(b)?,
            Expr::Sub(a, b) => ev(a)? - ev(b)?,
            Expr::Mul(a, b) => ev(a)? * ev(b)?,
            Expr::Div(a, b) => ev(a)? / ev(b)?,
            Expr::Pow(a, b) => ev(a)?.pow(ev(b)?)?,
            Expr::Func(f, a) => f.apply(ev(a)?)?,
        })
    }

    /// Rebuilds the tree, replacing every coordinate leaf with `f(index, name)`.
    pub fn map_coords(&self, f: &dyn Fn(usize, &str) -> Expr) -> Expr {
        let m = |e: &Expr| e.map_coords(f);
        match self {
            Expr::Const(_) | Expr::Param(_) => self.clone(),
            Expr::Coord(i, name) => f(*i, name),
            Expr::Neg(a) => Expr::Neg(Box::new(m(a))),
            Expr::Add(a, b) => Expr::Add(Box::new(m(a)), Box::new(m(b))),
            Expr::Sub(a, b) => Expr::Sub(Box::new(m(a)), Box::new(m(b))),
            Expr::Mul(a, b) => Expr::Mul(Box::new(m(a)), Box::new(m(b))),
            Expr::Div(a, b) => Expr::Div(Box::new(m(a)), Box::new(m(b))),
            Expr::Pow(a, b) => Expr::Pow(Box::new(m(a)), Box::new(m(b))),
            Expr::Func(g, a) => Expr::Func(*g, Box::new(m(a))),
        }
    }

    /// Renames parameter references.
    pub fn map_params(&self, f: &dyn Fn(&str) -> Expr) -> Expr {
        let m = |e: &Expr| e.map_params(f);
        match self {
            Expr::Const(_) | Expr::Coord(..) => self.clone(),
            Expr::Param(name) => f(name),
            Expr::Neg(a) => Expr::Neg(Box::new(m(a))),
            Expr::Add(a, b) => Expr::Add(Box::new(m(a)), Box::new(m(b))),
            Expr::Sub(a, b) => Expr::Sub(Box::new(m(a)), Box::new(m(b))),
            Expr::Mul(a, b) => Expr::Mul(Box::new(m(a)), Box::new(m(b))),
            Expr::Div(a, b) => Expr::Div(Box::new(m(a)), Box::new(m(b))),
            Expr::Pow(a, b) => Expr::Pow(Box::new(m(a)), Box::new(m(b))),
            Expr::Func(g, a) => Expr::Func(*g, Box::new(m(a))),
        }
    }

    /// Replaces parameter references by their definitions and folds constants.
    pub fn inline(&self, params: &Params) -> Result<Expr> {
        self.inline_depth(params, 0)
    }

    fn inline_depth(&self, params: &Params, depth: usize) -> Result<Expr> {
        let m = |e: &Expr| e.inline_depth(params, depth);
        Ok(match self {
            Expr::Const(_) | Expr::Coord(..) => self.clone(),
            Expr::Param(name) => {
                if depth >= MAX_PARAM_DEPTH {
                    return Err(Error::Eval(format!(
                        "parameter `{name}` is defined cyclically"
                    )));
                }
                let def = params
                    .get(name)
                    .ok_or_else(|| Error::UnknownIdentifier(name.clone()))?;
                def.inline_depth(params, depth + 1)?
            }
            Expr::Neg(a) => Expr::neg(m(a)?),
            Expr::Add(a, b) => Expr::add(m(a)?, m(b)?),
            Expr::Sub(a, b) => Expr::sub(m(a)?, m(b)?),
            Expr::Mul(a, b) => Expr::mul(m(a)?, m(b)?),
            Expr::Div(a, b) => Expr::div(m(a)?, m(b)?),
            Expr::Pow(a, b) => Expr::pow(m(a)?, m(b)?),
            Expr::Func(g, a) => Expr::func(*g, m(a)?),
        })
    }

    /// Symbolic partial derivative with respect to coordinate `axis`.
    /// Parameters are inlined first.
    pub fn derivative(&self, axis: usize, params: &Params) -> Result<Expr> {
        Ok(self.inline(params)?.diff(axis))
    }

    fn diff(&self, axis: usize) -> Expr {
        match self {
            Expr::Const(_) | Expr::Param(_) => Expr::c(0.0),
            Expr::Coord(i, _) => Expr::c(if *i == axis { 1.0 } else { 0.0 }),
            Expr::Neg(a) => Expr::neg(a.diff(axis)),
            Expr::Add(a, b) => Expr::add(a.diff(axis), b.diff(axis)),
            Expr::Sub(a, b) => Expr::sub(a.diff(axis), b.diff(axis)),
            Expr::Mul(a, b) => zero_aware_add(
                zero_aware_mul(a.diff(axis), (**b).clone()),
                zero_aware_mul((**a).clone(), b.diff(axis)),
            ),
            Expr::Div(a, b) => {
                // (a' b - a b') / b²
                let num = zero_aware_sub(
                    zero_aware_mul(a.diff(axis), (**b).clone()),
                    zero_aware_mul((**a).clone(), b.diff(axis)),
                );
                if num.is_real(0.0) {
                    return Expr::c(0.0);
                }
                Expr::div(num, Expr::powi((**b).clone(), 2))
            }
            Expr::Pow(a, b) => {
                let db = b.diff(axis);
                if db.is_real(0.0) {
                    // b · a^(b-1) · a'
                    let da = a.diff(axis);
                    if da.is_real(0.0) {
                        return Expr::c(0.0);
                    }
                    let lowered = Expr::pow((**a).clone(), Expr::sub((**b).clone(), Expr::c(1.0)));
                    return zero_aware_mul(zero_aware_mul((**b).clone(), lowered), da);
                }
                // a^b · (b' ln a + b a'/a)
                let term = zero_aware_add(
                    zero_aware_mul(db, Expr::ln((**a).clone())),
                    zero_aware_mul((**b).clone(), Expr::div(a.diff(axis), (**a).clone())),
                );
                zero_aware_mul(self.clone(), term)
            }
            Expr::Func(f, a) => {
                let da = a.diff(axis);
                if da.is_real(0.0) {
                    return Expr::c(0.0);
                }
                let inner = (**a).clone();
                let outer = match f {
                    Func::Exp => Expr::exp(inner),
                    Func::Ln => Expr::div(Expr::c(1.0), inner),
                    Func::Sin => Expr::func(Func::Cos, inner),
                    Func::Cos => Expr::neg(Expr::sin(inner)),
                    Func::Sinh => Expr::func(Func::Cosh, inner),
                    Func::Cosh => Expr::sinh(inner),
                    Func::Sqrt => Expr::div(Expr::c(0.5), Expr::sqrt(inner)),
                };
                zero_aware_mul(outer, da)
            }
        }
    }

    pub fn coords_used(&self, out: &mut BTreeSet<usize>) {
        self.visit(&mut |e| {
            if let Expr::Coord(i, _) = e {
                out.insert(*i);
            }
        });
    }

    pub fn params_used(&self, out: &mut BTreeSet<String>) {
        self.visit(&mut |e| {
            if let Expr::Param(p) = e {
                out.insert(p.clone());
            }
        });
    }

    fn visit(&self, f: &mut dyn FnMut(&Expr)) {
        f(self);
        match self {
            Expr::Const(_) | Expr::Coord(..) | Expr::Param(_) => {}
            Expr::Neg(a) | Expr::Func(_, a) => a.visit(f),
            Expr::Add(a, b)
            | Expr::Sub(a, b)
            | Expr::Mul(a, b)
            | Expr::Div(a, b)
            | Expr::Pow(a, b) => {
                a.visit(f);
                b.visit(f);
            }
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Neg(_) => 3,
            Expr::Pow(..) => 4,
            Expr::Const(s) => match s {
                Scalar::Real(r) if r.is_sign_negative() => 3,
                Scalar::Real(_) => 5,
                other if is_pure_unit_multiple(other).is_some() => 5,
                _ => 1,
            },
            _ => 5,
        }
    }
}

// Product-rule helpers that keep derivative trees small.
fn zero_aware_mul(a: Expr, b: Expr) -> Expr {
    if a.is_real(0.0) || b.is_real(0.0) {
        Expr::c(0.0)
    } else {
        Expr::mul(a, b)
    }
}

fn zero_aware_add(a: Expr, b: Expr) -> Expr {
    if a.is_real(0.0) {
        b
    } else if b.is_real(0.0) {
        a
    } else {
        Expr::add(a, b)
    }
}

fn zero_aware_sub(a: Expr, b: Expr) -> Expr {
    if b.is_real(0.0) {
        a
    } else if a.is_real(0.0) {
        Expr::neg(b)
    } else {
        Expr::sub(a, b)
    }
}

/// `Some((coefficient, unit))` when the scalar is `c·i`, `c·j` or `c·k`.
fn is_pure_unit_multiple(s: &Scalar) -> Option<(f64, char)> {
    let c = s.components();
    let nonzero: Vec<usize> = (0..c.len()).filter(|&i| c[i] != 0.0).collect();
    match nonzero.as_slice() {
        [i] if *i > 0 && c[*i] > 0.0 => Some((c[*i], ['_', 'i', 'j', 'k'][*i])),
        _ => None,
    }
}

fn fmt_real(v: f64) -> String {
    format!("{v:?}")
}

fn fmt_const(s: &Scalar, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if let Scalar::Real(r) = s {
        return f.write_str(&fmt_real(*r));
    }
    if let Some((coef, unit)) = is_pure_unit_multiple(s) {
        return write!(f, "{}{unit}", fmt_real(coef));
    }
    // General constant as a sum of unit multiples.
    let c = s.components();
    let mut first = true;
    for (i, v) in c.iter().enumerate() {
        if *v == 0.0 && !(first && i + 1 == c.len()) {
            continue;
        }
        let unit = ["", "i", "j", "k"][i];
        let mag = fmt_real(v.abs());
        if first {
            if v.is_sign_negative() {
                f.write_str("-")?;
            }
        } else {
            f.write_str(if v.is_sign_negative() { "-" } else { "+" })?;
        }
        write!(f, "{mag}{unit}")?;
        first = false;
    }
    if first {
        f.write_str("0.0")?;
    }
    Ok(())
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let wrap = |e: &Expr, min: u8, f: &mut fmt::Formatter<'_>| -> fmt::Result {
            if e.precedence() < min {
                write!(f, "({e})")
            } else {
                write!(f, "{e}")
            }
        };
        match self {
            Expr::Const(s) => fmt_const(s, f),
            Expr::Coord(_, name) => f.write_str(name),
            Expr::Param(name) => f.write_str(name),
            Expr::Neg(a) => {
                f.write_str("-")?;
                wrap(a, 3, f)
            }
            Expr::Add(a, b) => {
                wrap(a, 1, f)?;
                f.write_str(" + ")?;
                wrap(b, 2, f)
            }
            Expr::Sub(a, b) => {
                wrap(a, 1, f)?;
                f.write_str(" - ")?;
                wrap(b, 2, f)
            }
            Expr::Mul(a, b) => {
                wrap(a, 2, f)?;
                f.write_str("*")?;
                wrap(b, 3, f)
            }
            Expr::Div(a, b) => {
                wrap(a, 2, f)?;
                f.write_str("/")?;
                wrap(b, 4, f)
            }
            Expr::Pow(a, b) => {
                wrap(a, 5, f)?;
                f.write_str("^")?;
                wrap(b, 5, f)
            }
            Expr::Func(g, a) => write!(f, "{}({a})", g.name()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum TokenKind {
    Num(f64),
    Imag(f64, char),
    Ident(String),
    Op(char),
}

#[derive(Clone, Debug)]
struct Token {
    kind: TokenKind,
    pos: usize,
}

fn lex(src: &str) -> Result<Vec<Token>> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let ch = bytes[i] as char;
        if ch.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        if ch.is_ascii_digit()
            || (ch == '.' && bytes.get(i + 1).is_some_and(|b| b.is_ascii_digit()))
        {
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    while j < bytes.len() && bytes[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            let text = &src[start..i];
            let v: f64 = text.parse().map_err(|_| Error::Parse {
                pos: start,
                msg: format!("bad number `{text}`"),
            })?;
            // Imaginary suffix: a lone i/j/k glued to the number.
            if i < bytes.len() && matches!(bytes[i], b'i' | b'j' | b'k') {
                let next_is_ident = bytes
                    .get(i + 1)
                    .is_some_and(|b| b.is_ascii_alphanumeric() || *b == b'_');
                if !next_is_ident {
                    out.push(Token {
                        kind: TokenKind::Imag(v, bytes[i] as char),
                        pos: start,
                    });
                    i += 1;
                    continue;
                }
            }
            out.push(Token {
                kind: TokenKind::Num(v),
                pos: start,
            });
            continue;
        }
        if ch.is_ascii_alphabetic() || ch == '_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push(Token {
                kind: TokenKind::Ident(src[start..i].to_string()),
                pos: start,
            });
            continue;
        }
        if "+-*/^()".contains(ch) {
            out.push(Token {
                kind: TokenKind::Op(ch),
                pos: start,
            });
            i += 1;
            continue;
        }
        return Err(Error::Parse {
            pos: start,
            msg: format!("unexpected character `{ch}`"),
        });
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    scope: &'a Scope,
}

impl Parser<'_> {
    fn peek_op(&self) -> Option<char> {
        match self.tokens.get(self.pos) {
            Some(Token {
                kind: TokenKind::Op(c),
                ..
            }) => Some(*c),
            _ => None,
        }
    }

    fn end_pos(&self) -> usize {
        self.tokens
            .get(self.pos)
            .map(|t| t.pos)
            .unwrap_or(usize::MAX)
    }

    fn expect(&mut self, op: char) -> Result<()> {
        if self.peek_op() == Some(op) {
            self.pos += 1;
            Ok(())
        } else {
            Err(Error::Parse {
                pos: self.end_pos(),
                msg: format!("expected `{op}`"),
            })
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        while let Some(op @ ('+' | '-')) = self.peek_op() {
            self.pos += 1;
            let rhs = self.term()?;
            lhs = if op == '+' {
                Expr::Add(Box::new(lhs), Box::new(rhs))
            } else {
                Expr::Sub(Box::new(lhs), Box::new(rhs))
            };
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        while let Some(op @ ('*' | '/')) = self.peek_op() {
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = if op == '*' {
                Expr::Mul(Box::new(lhs), Box::new(rhs))
            } else {
                Expr::Div(Box::new(lhs), Box::new(rhs))
            };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr> {
        match self.peek_op() {
            Some('-') => {
                self.pos += 1;
                Ok(Expr::Neg(Box::new(self.unary()?)))
            }
            Some('+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.peek_op() == Some('^') {
            self.pos += 1;
            let exponent = self.unary()?;
            return Ok(Expr::Pow(Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        let Some(tok) = self.tokens.get(self.pos).cloned() else {
            return Err(Error::Parse {
                pos: usize::MAX,
                msg: "unexpected end of input".into(),
            });
        };
        self.pos += 1;
        match tok.kind {
            TokenKind::Num(v) => Ok(Expr::c(v)),
            TokenKind::Imag(v, unit) => {
                let u = match unit {
                    'i' => Scalar::I,
                    'j' => Scalar::J,
                    _ => Scalar::K,
                };
                Ok(Expr::Const(u.scale(v)))
            }
            TokenKind::Op('(') => {
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            TokenKind::Op(c) => Err(Error::Parse {
                pos: tok.pos,
                msg: format!("unexpected `{c}`"),
            }),
            TokenKind::Ident(name) => {
                if let Some(f) = Func::from_name(&name) {
                    if self.peek_op() == Some('(') {
                        self.pos += 1;
                        let arg = self.expr()?;
                        self.expect(')')?;
                        return Ok(Expr::Func(f, Box::new(arg)));
                    }
                }
                if let Some(i) = self.scope.coords.iter().position(|c| *c == name) {
                    return Ok(Expr::Coord(i, name));
                }
                if self.scope.params.contains(&name) {
                    return Ok(Expr::Param(name));
                }
                match name.as_str() {
                    "pi" => Ok(Expr::c(std::f64::consts::PI)),
                    "e" => Ok(Expr::c(std::f64::consts::E)),
                    "i" => Ok(Expr::Const(Scalar::I)),
                    "j" => Ok(Expr::Const(Scalar::J)),
                    "k" => Ok(Expr::Const(Scalar::K)),
                    _ => Err(Error::UnknownIdentifier(name)),
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn scope() -> Scope {
        Scope::new(&["t", "x"]).with_params(["a"])
    }

    fn ev(src: &str, p: &[f64]) -> Scalar {
        let mut params = Params::new();
        params.insert("a".into(), Expr::parse("exp(t)", &scope()).unwrap());
        Expr::parse(src, &scope())
            .unwrap()
            .eval(p, &params)
            .unwrap()
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(ev("1 + 2*3", &[0., 0.]), Scalar::Real(7.0));
        assert_eq!(ev("-2^2", &[0., 0.]), Scalar::Real(-4.0));
        assert_eq!(ev("2^3^2", &[0., 0.]), Scalar::Real(512.0));
        assert_eq!(ev("8/2/2", &[0., 0.]), Scalar::Real(2.0));
        assert_eq!(ev("x^-1", &[0., 4.]), Scalar::Real(0.25));
    }

    #[test]
    fn params_and_coordinates() {
        assert!((ev("a^2", &[1.0, 0.0]).re() - (2.0f64).exp()).abs() < 1e-12);
        assert_eq!(ev("t*x", &[2.0, 3.0]), Scalar::Real(6.0));
    }

    #[test]
    fn imaginary_literals() {
        assert_eq!(
            ev("-i", &[0., 0.]),
            Scalar::Complex(Complex64::new(0.0, -1.0))
        );
        assert_eq!(
            ev("2i*2", &[0., 0.]),
            Scalar::Complex(Complex64::new(0.0, 4.0))
        );
        assert_eq!(ev("i*j", &[0., 0.]).components(), vec![0.0, 0.0, 0.0, 1.0]);
        assert_eq!(
            Expr::parse_scalar("1+2i").unwrap(),
            Scalar::Complex(Complex64::new(1.0, 2.0))
        );
    }

    #[test]
    fn errors_are_positioned() {
        assert!(matches!(
            Expr::parse("1 +", &scope()),
            Err(Error::Parse { .. })
        ));
        assert!(matches!(
            Expr::parse("(1", &scope()),
            Err(Error::Parse { .. })
        ));
        assert!(matches!(
            Expr::parse("1 $ 2", &scope()),
            Err(Error::Parse { pos: 2, .. })
        ));
        assert_eq!(
            Expr::parse("zz", &scope()),
            Err(Error::UnknownIdentifier("zz".into()))
        );
    }

    #[test]
    fn cyclic_params_rejected() {
        let s = Scope::new(&["t"]).with_params(["p", "q"]);
        let mut params = Params::new();
        params.insert("p".into(), Expr::parse("q", &s).unwrap());
        params.insert("q".into(), Expr::parse("p", &s).unwrap());
        assert!(Expr::parse("p", &s).unwrap().eval(&[0.0], &params).is_err());
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let s = scope();
        let mut params = Params::new();
        params.insert("a".into(), Expr::parse("exp(t)", &s).unwrap());
        for src in [
            "a^2*sin(x)",
            "sinh(t*x)/(1 + x^2)",
            "ln(2 + cos(t)) - sqrt(1 + t^2)",
            "x^t",
        ] {
            let e = Expr::parse(src, &s).unwrap();
            let d = e.derivative(0, &params).unwrap();
            let p = [0.7, 1.3];
            let h = 1e-6;
            let fd = (e.eval_real(&[p[0] + h, p[1]], &params).unwrap()
                - e.eval_real(&[p[0] - h, p[1]], &params).unwrap())
                / (2.0 * h);
            let exact = d.eval_real(&p, &params).unwrap();
            assert!((fd - exact).abs() < 1e-7, "{src}: {fd} vs {exact}");
        }
    }

    #[test]
    fn display_parses_back() {
        let s = scope();
        for src in [
            "-(t + x)^2",
            "a*(x - (t - 1))",
            "2/(t*x)",
            "-i*x^7",
            "exp(-0.5*((x - 1)/2)^2)",
            "(-2)^3",
        ] {
            let e = Expr::parse(src, &s).unwrap();
            let printed = e.to_string();
            let back = Expr::parse(&printed, &s).unwrap();
            assert_eq!(
                ev(src, &[0.3, 0.4]),
                ev(&printed, &[0.3, 0.4]),
                "{src} -> {printed}"
            );
            assert_eq!(back.to_string(), printed);
        }
    }
}
