use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::Scope;

/// Physical role of a coordinate axis. Decides the sign a block takes in
/// catalog line elements (time is negative, everything else positive).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Time,
    Space,
    Probability,
    Entropy,
    Information,
    Generic,
}

impl Role {
    pub fn sign(self) -> f64 {
        if self == Role::Time {
            -1.0
        } else {
            1.0
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "AxisRepr", into = "AxisRepr")]
pub struct Axis {
    pub name: String,
    pub role: Role,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Serialize, Deserialize)]
struct AxisRepr {
    name: String,
    #[serde(default = "generic_role")]
    role: Role,
    #[serde(default)]
    bounds: [Option<f64>; 2],
}

fn generic_role() -> Role {
    Role::Generic
}

impl From<AxisRepr> for Axis {
    fn from(r: AxisRepr) -> Self {
        Axis {
            name: r.name,
            role: r.role,
            lower: r.bounds[0].unwrap_or(f64::NEG_INFINITY),
            upper: r.bounds[1].unwrap_or(f64::INFINITY),
        }
    }
}

impl From<Axis> for AxisRepr {
    fn from(a: Axis) -> Self {
        let fin = |v: f64| v.is_finite().then_some(v);
        AxisRepr {
            name: a.name,
            role: a.role,
            bounds: [fin(a.lower), fin(a.upper)],
        }
    }
}

impl Axis {
    pub fn new(name: impl Into<String>, role: Role) -> Self {
        Axis {
            name: name.into(),
            role,
            lower: f64::NEG_INFINITY,
            upper: f64::INFINITY,
        }
    }

    pub fn bounded(mut self, lower: f64, upper: f64) -> Self {
        self.lower = lower;
        self.upper = upper;
        self
    }

    pub fn contains(&self, v: f64) -> bool {
        v >= self.lower && v <= self.upper
    }
}

/// Box-bounded coordinate domain with named axes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Axis>", into = "Vec<Axis>")]
pub struct Chart {
    axes: Vec<Axis>,
}

impl TryFrom<Vec<Axis>> for Chart {
    type Error = Error;

    fn try_from(axes: Vec<Axis>) -> Result<Self> {
        Chart::new(axes)
    }
}

impl From<Chart> for Vec<Axis> {
    fn from(c: Chart) -> Self {
        c.axes
    }
}

fn valid_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

const RESERVED: [&str; 13] = [
    "pi", "e", "i", "j", "k", "exp", "ln", "log", "sin", "cos", "sinh", "cosh", "sqrt",
];

impl Chart {
    pub fn new(axes: Vec<Axis>) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::InvalidChart(
                "a chart needs at least one axis".into(),
            ));
        }
        let mut seen = BTreeSet::new();
        for a in &axes {
            if !valid_ident(&a.name) || RESERVED.contains(&a.name.as_str()) {
                return Err(Error::InvalidChart(format!(
                    "`{}` is not a usable axis name",
                    a.name
                )));
            }
            if !seen.insert(a.name.as_str()) {
                return Err(Error::InvalidChart(format!(
                    "duplicate axis name `{}`",
                    a.name
                )));
            }
            if a.lower.is_nan() || a.upper.is_nan() || a.lower > a.upper {
                return Err(Error::InvalidChart(format!(
                    "empty bounds on axis `{}`",
                    a.name
                )));
            }
        }
        Ok(Chart { axes })
    }

    /// Unbounded chart with axes `x1..xD`.
    pub fn euclidean(dim: usize) -> Self {
        Chart::new(
            (1..=dim)
                .map(|i| Axis::new(format!("x{i}"), Role::Space))
                .collect(),
        )
        .expect("generated names are valid")
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn names(&self) -> Vec<String> {
        self.axes.iter().map(|a| a.name.clone()).collect()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.axes.iter().position(|a| a.name == name)
    }

    pub fn scope(&self) -> Scope {
        Scope::new(&self.names())
    }

    pub fn check_point(&self, p: &[f64]) -> Result<()> {
        if p.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: p.len(),
            });
        }
        for (a, &v) in self.axes.iter().zip(p) {
            if !a.contains(v) {
                return Err(Error::OutOfBounds {
                    point: p.to_vec(),
                    axis: a.name.clone(),
                });
            }
        }
        Ok(())
    }

    /// Clamps a point onto the bounds box.
    pub fn project(&self, p: &mut [f64]) {
        for (a, v) in self.axes.iter().zip(p.iter_mut()) {
            *v = v.clamp(a.lower, a.upper);
        }
    }

    /// Concatenation of two charts (base axes first).
    pub fn product(&self, other: &Chart) -> Result<Chart> {
        let mut axes = self.axes.clone();
        axes.extend(other.axes.iter().cloned());
        Chart::new(axes)
    }

    pub fn with_role(&self, axis: usize, role: Role, name: Option<&str>) -> Result<Chart> {
        let mut axes = self.axes.clone();
        let a = axes.get_mut(axis).ok_or(Error::BadIndex(vec![axis]))?;
        a.role = role;
        if let Some(n) = name {
            a.name = n.to_string();
        }
        Chart::new(axes)
    }

    pub fn first_axis_with_role(&self, role: Role) -> Option<usize> {
        self.axes.iter().position(|a| a.role == role)
    }
}
