//! Named metric constructors.
//!
//! Blocks follow one rule: probability, entropy, temporal and radial
//! blocks of dimension n > 1 use the curved form
//! `dρ² + S_k(ρ)² dΩ²_{n-1}` (radial coordinate plus angles), while `x`
//! and information blocks are Cartesian. Each block's sign comes from its
//! axis role: time is negative, everything else positive.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::Serialize;

use crate::chart::{Axis, Chart, Role};
use crate::entropy::{gaussian_expr, GaussianParams};
use crate::error::{Error, Result};
use crate::expr::{Expr, Scope};
use crate::scalar::{Scalar, Tag};
use crate::tensor::{MetricSpec, Symmetry, TensorSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ParamKind {
    /// Block dimension (integer ≥ 1).
    Dimension,
    /// Curvature index in {-1, 0, 1}.
    Curvature,
    /// Real constant.
    Real,
    /// Strictly positive real constant.
    Positive,
    /// Field: an expression over the chart coordinates.
    Field,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ParamDoc {
    pub name: &'static str,
    pub kind: ParamKind,
    pub default: &'static str,
    pub doc: &'static str,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CatalogEntry {
    pub id: &'static str,
    pub title: &'static str,
    pub line_element: &'static str,
    pub rank: [usize; 2],
    pub codomain: Tag,
    pub doc: &'static str,
    pub params: Vec<ParamDoc>,
}

/// Builder parameter overrides, as strings (numbers or expressions).
pub type BuildParams = BTreeMap<String, String>;

const fn p(
    name: &'static str,
    kind: ParamKind,
    default: &'static str,
    doc: &'static str,
) -> ParamDoc {
    ParamDoc {
        name,
        kind,
        default,
        doc,
    }
}

use ParamKind::*;

const A: ParamDoc = p("a", Field, "1", "scale factor a(c)");
const C: ParamDoc = p("c", Positive, "1", "speed of light");
const PSI: ParamDoc = p("psi", Field, "0", "temporal perturbation Psi(c)");
const PHI: ParamDoc = p("phi", Field, "0", "spatial perturbation Phi(c)");
const K: ParamDoc = p("k", Curvature, "0", "spatial curvature index");
const K_TAU: ParamDoc = p("k_tau", Curvature, "0", "temporal curvature index");
const K_P: ParamDoc = p("k_p", Curvature, "0", "probabilistic curvature index");
const K_S: ParamDoc = p("k_s", Curvature, "0", "entropic curvature index");
const D_TAU: ParamDoc = p("d_tau", Dimension, "1", "number of temporal dimensions");
const D_R: ParamDoc = p(
    "d_r",
    Dimension,
    "3",
    "number of radial-block spatial dimensions",
);
const D_X: ParamDoc = p(
    "d_x",
    Dimension,
    "3",
    "number of Cartesian spatial dimensions",
);
const D_P: ParamDoc = p("d_p", Dimension, "1", "number of probabilistic dimensions");
const D_S: ParamDoc = p("d_s", Dimension, "1", "number of entropic dimensions");

type Builder = fn(&Args) -> Result<MetricSpec>;

struct Def {
    id: &'static str,
    title: &'static str,
    line_element: &'static str,
    rank: [usize; 2],
    codomain: Tag,
    doc: &'static str,
    params: &'static [ParamDoc],
    build: Builder,
}

static DEFS: &[Def] = &[
    Def {
        id: "euclidean",
        title: "Euclidean space",
        line_element: "ds^2 = dx1^2 + ... + dxD^2",
        rank: [0, 2],
        codomain: Tag::Real,
        doc: "Flat positive-definite (0,2) metric.",
        params: &[p("dim", Dimension, "3", "dimension D")],
        build: build_euclidean,
    },
    Def {
        id: "minkowski",
        title: "Minkowski spacetime",
        line_element: "ds^2 = -c^2 dt^2 + dx1^2 + ... + dxn^2",
        rank: [0, 2],
        codomain: Tag::Real,
        doc: "Flat Lorentzian metric with signature (-,+,+,+).",
        params: &[C, D_X],
        build: build_minkowski,
    },
    Def {
        id: "cubic2d",
        title: "Two-dimensional cubic metric",
        line_element: "ds^3 = dx^3 + dy^3",
        rank: [0, 3],
        codomain: Tag::Real,
        doc: "Symmetric (0,3) tensor with m_xxx = m_yyy = 1 and all other components 0. \
              Its cubic form takes positive, negative and zero values.",
        params: &[],
        build: build_cubic2d,
    },
    Def {
        id: "complex_cubic3d",
        title: "Complex three-dimensional cubic metric",
        line_element: "ds^3 = -i dx^3 + dy^3 + dz^3",
        rank: [0, 3],
        codomain: Tag::Complex,
        doc: "Complex-valued symmetric (0,3) tensor.",
        params: &[],
        build: build_complex_cubic3d,
    },
    Def {
        id: "functional7d",
        title: "Seven-dimensional functional metric",
        line_element: "ds^7 = a^7 [ -i dtau^7 + b^7 dt^7 + f^7 (dx1^7 + ... + dx5^7) ]",
        rank: [0, 7],
        codomain: Tag::Complex,
        doc: "Complex (0,7) tensor on coordinates (tau, t, x1..x5). The spatial profile f \
              defaults to the curvature profile S_k applied to x1.",
        params: &[
            p("a", Field, "1", "scale factor a(tau)"),
            p("b", Field, "1", "temporal scaling b(tau, t, x1)"),
            p("f", Field, "S_k(x1)", "spatial curvature profile f(x; k)"),
            K,
        ],
        build: build_functional7d,
    },
    Def {
        id: "flrw",
        title: "FLRW spacetime",
        line_element: "ds^2 = -c^2 dt^2 + a(t)^2 (dx1^2 + dx2^2 + dx3^2)",
        rank: [0, 2],
        codomain: Tag::Real,
        doc: "Homogeneous isotropic expanding spacetime with signature (-,+,+,+). \
              Reduces to Minkowski for a = 1.",
        params: &[p("a", Field, "1", "scale factor a(t)"), C],
        build: build_flrw,
    },
    Def {
        id: "pflrw",
        title: "Perturbed FLRW spacetime",
        line_element: "ds^2 = -e^{2 psi} c^2 dt^2 + a^2 e^{-2 phi} (dx1^2 + dx2^2 + dx3^2)",
        rank: [0, 2],
        codomain: Tag::Real,
        doc: "FLRW with scalar potentials psi and phi; the starting point of the \
              Gaussian and probabilistic extensions.",
        params: &[p("a", Field, "1", "scale factor a(t)"), C, PSI, PHI],
        build: build_pflrw,
    },
    Def {
        id: "perturbed_ads",
        title: "Perturbed anti-de Sitter manifold",
        line_element: "ds^2 = a^2 [ -e^{2 psi} dtau_{D_tau}^2 + e^{-2 phi} dr_{D_r}^2 ], \
                       dr^2 = dr^2 + S_k(r)^2 dOmega^2",
        rank: [0, 2],
        codomain: Tag::Real,
        doc: "Temporal block (tau, phi1..) and radial block (r, theta1..) in curved form with \
              angular metric diag(1, sin^2 th1, sin^2 th1 sin^2 th2, ...). Leading angles lie \
              in [0, pi] and the last angle of each block in [0, 2 pi]. With k = 0, no \
              perturbation, a = 1 and (d_tau, d_r) = (1, 3) it is Minkowski space in \
              spherical coordinates.",
        params: &[D_TAU, D_R, K, K_TAU, A, PSI, PHI],
        build: build_perturbed_ads,
    },
    Def {
        id: "gpflrw",
        title: "Gaussianly perturbed FLRW spacetime",
        line_element: "ds^2 = -G(psi_field; psi_mean, psi_sigma) c^2 dt^2 + a^2 G(phi_field; phi_mean, phi_sigma) dx^2",
        rank: [0, 2],
        codomain: Tag::Real,
        doc: "The exponentials e^{2 psi} and e^{-2 phi} are replaced by Gaussian densities \
              G(x; mean, sigma) = exp(-((x - mean)/sigma)^2 / 2) / (sqrt(2 pi) sigma), used \
              as dimensionless factors without normalization. With sigma = 1/sqrt(2 pi) and \
              fields at their means the factors equal 1 and the metric is FLRW.",
        params: &[
            p("a", Field, "1", "scale factor a(t)"),
            C,
            p("psi_field", Field, "psi_mean", "Gaussian variable for the temporal factor"),
            p("psi_mean", Real, "0", "mean of the temporal Gaussian"),
            p("psi_sigma", Positive, "1/sqrt(2*pi)", "standard deviation of the temporal Gaussian"),
            p("phi_field", Field, "phi_mean", "Gaussian variable for the spatial factor"),
            p("phi_mean", Real, "0", "mean of the spatial Gaussian"),
            p("phi_sigma", Positive, "1/sqrt(2*pi)", "standard deviation of the spatial Gaussian"),
        ],
        build: build_gpflrw,
    },
    Def {
        id: "epflrw",
        title: "Extended probabilistic FLRW spacetime",
        line_element: "ds^2 = -e^{2 psi} c^2 dt^2 + a^2 e^{-2 phi} dx^2 + dP1^2 + ... + dP_{D_P}^2",
        rank: [0, 2],
        codomain: Tag::Real,
        doc: "Perturbed FLRW block plus an identity block of probabilistic dimensions.",
        params: &[p("a", Field, "1", "scale factor a(t)"), C, PSI, PHI, D_P],
        build: build_epflrw,
    },
    Def {
        id: "hipest",
        title: "Homogeneous isotropic probabilistic expanding spacetime",
        line_element: "ds^2 = a^2 prob^2 [ dP^2 - dtau^2 + dx^2 ]",
        rank: [0, 2],
        codomain: Tag::Real,
        doc: "Block-diagonal metric on (P1.., tau1.., x1..) with signs (+, -, +) by axis role, \
              all scaled by a(tau)^2 P(tau)^2.",
        params: &[
            D_P,
            D_TAU,
            p("d_x", Dimension, "1", "number of spatial dimensions"),
            p("a", Field, "1", "scale factor a(tau)"),
            p("prob", Field, "1", "probability function P(tau)"),
        ],
        build: build_hipest,
    },
    Def {
        id: "fscpst",
        title: "First special curved probabilistic spacetime",
        line_element: "ds^2 = a^2 [ e^{2 Y} dP_{D_P}^2 - e^{2 psi} dtau_{D_tau}^2 + e^{-2 phi} dr_{D_r}^2 ]",
        rank: [0, 2],
        codomain: Tag::Real,
        doc: "Probabilistic (P, alpha1..), temporal (tau, phi1..) and radial (r, theta1..) \
              blocks, each in curved form with its own curvature index.",
        params: &[D_P, D_TAU, D_R, K_P, K_TAU, K, A, p("Y", Field, "0", "probabilistic perturbation Y(c)"), PSI, PHI],
        build: build_fscpst,
    },
    Def {
        id: "fssgcpst",
        title: "First simple second generalized curved probabilistic spacetime",
        line_element: "ds^2 = O_Pf a^2 [ -e^{2 psi} dtau^2 + e^{-2 phi} dx^2 ]",
        rank: [0, 2],
        codomain: Tag::Real,
        doc: "Perturbed expanding spacetime on (tau, x1..) scaled by the observable O_Pf.",
        params: &[p("O_Pf", Field, "1", "probabilistic scaling factor"), A, PSI, PHI, D_X],
        build: build_fssgcpst,
    },
    Def {
        id: "sssgcpst",
        title: "Second simple second generalized curved probabilistic spacetime",
        line_element: "ds^2 = O_Ps a^2 [ -e^{2 psi} dtau^2 + e^{-2 phi} dx^2 ]",
        rank: [0, 2],
        codomain: Tag::Real,
        doc: "Reduced closed form of the double integral over continuous indices, scaled by \
              the observable O_Ps. The unreduced integral is not evaluated.",
        params: &[p("O_Ps", Field, "1", "probabilistic scaling observable"), A, PSI, PHI, D_X],
        build: build_sssgcpst,
    },
    Def {
        id: "entropic_replacing",
        title: "Special entropic manifold replacing conformal time",
        line_element: "ds^2 = a^2 [ -e^{2 psi} grad_s^2 dS_{D_S}^2 + e^{-2 phi} dr_{D_r}^2 ]",
        rank: [0, 2],
        codomain: Tag::Real,
        doc: "Entropy coordinates (S, beta1..) take the place of time and keep its negative \
              sign; grad_s is the time gradient of the entropy functional, applied squared as \
              written in the displayed line element.",
        params: &[D_S, D_R, K_S, K, A, PSI, PHI, p("grad_s", Field, "1", "time gradient of the entropy functional")],
        build: build_entropic_replacing,
    },
    Def {
        id: "sest",
        title: "Special entropic spacetime",
        line_element: "ds^2 = a^2 [ e^{2 Xi} dS_{D_S}^2 - e^{2 psi} dtau_{D_tau}^2 + e^{-2 phi} dr_{D_r}^2 ]",
        rank: [0, 2],
        codomain: Tag::Real,
        doc: "Entropy as an independent dimension next to time and space.",
        params: &[D_S, D_TAU, D_R, K_S, K_TAU, K, A, p("Xi", Field, "0", "entropic perturbation Xi(c)"), PSI, PHI],
        build: build_sest,
    },
    Def {
        id: "gistm",
        title: "Special generalized informatic spacetime",
        line_element: "ds^2 = a^2 [ e^{2 Lambda} dI_{D_I}^2 - e^{2 psi} dtau_{D_tau}^2 + e^{-2 phi} dx_{D_x}^2 ]",
        rank: [0, 2],
        codomain: Tag::Real,
        doc: "Information dimensions (Cartesian, I1..) next to time and space. Information \
              values relate to probabilities through I = -ln P.",
        params: &[
            p("d_i", Dimension, "1", "number of information dimensions"),
            D_TAU,
            D_X,
            K_TAU,
            A,
            p("Lambda", Field, "0", "information perturbation Lambda(c)"),
            PSI,
            PHI,
        ],
        build: build_gistm,
    },
    Def {
        id: "pestmmp",
        title: "Special probabilistic entropic spacetime",
        line_element: "ds^2 = a^2 [ e^{2 Theta} dP^2 + e^{2 Xi} dS^2 - e^{2 psi} dtau^2 + e^{-2 phi} dx^2 ]",
        rank: [0, 2],
        codomain: Tag::Real,
        doc: "Probabilistic, entropic, temporal and spatial blocks combined.",
        params: &[
            D_P,
            D_S,
            D_TAU,
            D_X,
            K_P,
            K_S,
            K_TAU,
            A,
            p("Theta", Field, "0", "probabilistic perturbation Theta(c)"),
            p("Xi", Field, "0", "entropic perturbation Xi(c)"),
            PSI,
            PHI,
        ],
        build: build_pestmmp,
    },
];

/// All entries in their stable order.
pub fn list() -> Vec<CatalogEntry> {
    DEFS.iter()
        .map(|d| CatalogEntry {
            id: d.id,
            title: d.title,
            line_element: d.line_element,
            rank: d.rank,
            codomain: d.codomain,
            doc: d.doc,
            params: d.params.to_vec(),
        })
        .collect()
}

pub fn ids() -> Vec<&'static str> {
    DEFS.iter().map(|d| d.id).collect()
}

/// Pretty JSON listing; identical to the shipped `catalog.json`.
pub fn catalog_json() -> String {
    let mut s = serde_json::to_string_pretty(&list()).expect("catalog serializes");
    s.push('\n');
    s
}

pub fn build(id: &str, params: &BuildParams) -> Result<MetricSpec> {
    let def = DEFS
        .iter()
        .find(|d| d.id == id)
        .ok_or_else(|| Error::UnknownEntry(id.to_string()))?;
    for key in params.keys() {
        if !def.params.iter().any(|p| p.name == key) {
            let known: Vec<&str> = def.params.iter().map(|p| p.name).collect();
            return Err(Error::BadParameter {
                name: key.clone(),
                msg: format!("not a parameter of `{id}` (known: {})", known.join(", ")),
            });
        }
    }
    (def.build)(&Args { id, given: params })
}

pub fn build_default(id: &str) -> Result<MetricSpec> {
    build(id, &BuildParams::new())
}

/// Curvature profile `S_k(r)`: sin for k > 0, identity for k = 0, sinh for k < 0.
pub fn curvature_profile(k: i32, r: f64) -> f64 {
    let kf = k as f64;
    match k.signum() {
        1 => kf.abs().powf(-0.5) * (r * kf.sqrt()).sin(),
        0 => r,
        _ => kf.abs().powf(-0.5) * (r * kf.abs().sqrt()).sinh(),
    }
}

/// Symbolic `S_k(r)` for k in {-1, 0, 1}.
pub fn curvature_profile_expr(k: i32, r: Expr) -> Expr {
    match k {
        0 => r,
        1 => Expr::sin(r),
        _ => Expr::sinh(r),
    }
}

struct Args<'a> {
    id: &'a str,
    given: &'a BuildParams,
}

impl Args<'_> {
    fn raw(&self, name: &str) -> Option<&str> {
        self.given.get(name).map(String::as_str)
    }

    fn bad(&self, name: &str, msg: impl Into<String>) -> Error {
        Error::BadParameter {
            name: name.to_string(),
            msg: format!("{} ({})", msg.into(), self.id),
        }
    }

    fn constant(&self, name: &str, default: f64) -> Result<f64> {
        match self.raw(name) {
            None => Ok(default),
            Some(s) => match Expr::parse_scalar(s) {
                Ok(Scalar::Real(v)) if v.is_finite() => Ok(v),
                Ok(other) => {
                    Err(self.bad(name, format!("expected a finite real number, got {other}")))
                }
                Err(e) => Err(self.bad(name, e.to_string())),
            },
        }
    }

    fn positive(&self, name: &str, default: f64) -> Result<f64> {
        let v = self.constant(name, default)?;
        if v > 0.0 {
            Ok(v)
        } else {
            Err(self.bad(name, format!("must be positive, got {v}")))
        }
    }

    fn dimension(&self, name: &str, default: usize) -> Result<usize> {
        let v = self.constant(name, default as f64)?;
        if v >= 1.0 && v.fract() == 0.0 && v <= 64.0 {
            Ok(v as usize)
        } else {
            Err(self.bad(name, format!("must be an integer in 1..=64, got {v}")))
        }
    }

    fn curvature(&self, name: &str) -> Result<i32> {
        let v = self.constant(name, 0.0)?;
        if [-1.0, 0.0, 1.0].contains(&v) {
            Ok(v as i32)
        } else {
            Err(self.bad(name, format!("curvature index must be -1, 0 or 1, got {v}")))
        }
    }

    fn field(&self, name: &str, default: &str, scope: &Scope) -> Result<Expr> {
        let src = self.raw(name).unwrap_or(default);
        let e = Expr::parse(src, scope).map_err(|e| self.bad(name, e.to_string()))?;
        if let Some(v) = e
            .inline(&Default::default())
            .ok()
            .and_then(|f| f.as_const())
        {
            if v.tag() != Tag::Real || !v.is_finite() {
                return Err(self.bad(name, format!("field must be real, got {v}")));
            }
        }
        Ok(e)
    }
}

/// Accumulates axes and diagonal entries block by block.
struct Layout {
    axes: Vec<Axis>,
    diag: Vec<Expr>,
}

impl Layout {
    fn new() -> Self {
        Layout {
            axes: Vec::new(),
            diag: Vec::new(),
        }
    }

    fn scope(&self) -> Scope {
        Scope::new(&self.axes.iter().map(|a| a.name.clone()).collect::<Vec<_>>())
    }

    /// Cartesian block `prefix1..prefixn` (or just `prefix` if `plain` and n = 1).
    fn cartesian(&mut self, prefix: &str, n: usize, role: Role, plain: bool, coeff: &Expr) {
        for i in 0..n {
            let name = if plain && n == 1 {
                prefix.to_string()
            } else {
                format!("{prefix}{}", i + 1)
            };
            self.axes.push(Axis::new(name, role));
            self.diag.push(coeff.clone());
        }
    }

    /// Curved block: radial coordinate `radial` and angles `angle1..`,
    /// metric `dρ² + S_k(ρ)² dΩ²` times `coeff`.
    fn curved(&mut self, radial: &str, angle: &str, n: usize, k: i32, role: Role, coeff: &Expr) {
        let start = self.axes.len();
        let mut ax = Axis::new(radial, role);
        if n > 1 {
            ax = ax.bounded(0.0, f64::INFINITY);
        }
        self.axes.push(ax);
        self.diag.push(coeff.clone());
        let rho = Expr::coord(start, radial);
        let s = curvature_profile_expr(k, rho);
        let mut factor = Expr::powi(s, 2);
        for i in 1..n {
            let name = format!("{angle}{i}");
            let upper = if i == n - 1 { 2.0 * PI } else { PI };
            self.axes
                .push(Axis::new(name.clone(), role).bounded(0.0, upper));
            self.diag.push(Expr::mul(coeff.clone(), factor.clone()));
            let th = Expr::coord(start + i, name);
            factor = Expr::mul(factor, Expr::powi(Expr::sin(th), 2));
        }
    }

    fn finish(self, name: &str, notes: &str, params: Vec<(&str, Expr)>) -> Result<MetricSpec> {
        let chart = Chart::new(self.axes)?;
        let mut spec = TensorSpec::new(chart, 0, 2).symmetry(Symmetry::Full);
        for (i, e) in self.diag.into_iter().enumerate() {
            spec.set(vec![i, i], e);
        }
        for (k, v) in params {
            spec.params.insert(k.to_string(), v);
        }
        MetricSpec::new(name, notes, spec.build()?, None)
    }
}

fn par(name: &str) -> Expr {
    Expr::param(name)
}

/// `sign · pre · e^{±2 field}`
fn weighted(sign: f64, pre: Expr, field: Option<(&str, f64)>) -> Expr {
    let mut e = pre;
    if let Some((f, s)) = field {
        e = Expr::mul(e, Expr::exp(Expr::mul(Expr::c(2.0 * s), par(f))));
    }
    if sign < 0.0 {
        Expr::neg(e)
    } else {
        e
    }
}

fn a2() -> Expr {
    Expr::powi(par("a"), 2)
}

fn fields(
    args: &Args,
    layout: &Layout,
    names: &[(&'static str, &'static str)],
) -> Result<Vec<(&'static str, Expr)>> {
    let scope = layout.scope();
    names
        .iter()
        .map(|(n, d)| Ok((*n, args.field(n, d, &scope)?)))
        .collect()
}

fn build_euclidean(args: &Args) -> Result<MetricSpec> {
    let d = args.dimension("dim", 3)?;
    let mut l = Layout::new();
    l.cartesian("x", d, Role::Space, false, &Expr::c(1.0));
    l.finish("euclidean", "", vec![])
}

fn build_minkowski(args: &Args) -> Result<MetricSpec> {
    let c = args.positive("c", 1.0)?;
    let d = args.dimension("d_x", 3)?;
    let mut l = Layout::new();
    l.cartesian(
        "t",
        1,
        Role::Time,
        true,
        &Expr::neg(Expr::powi(Expr::c(c), 2)),
    );
    l.cartesian("x", d, Role::Space, false, &Expr::c(1.0));
    l.finish("minkowski", "", vec![])
}

fn build_cubic2d(_: &Args) -> Result<MetricSpec> {
    let chart = Chart::new(vec![
        Axis::new("x", Role::Space),
        Axis::new("y", Role::Space),
    ])?;
    let t = TensorSpec::new(chart, 0, 3)
        .symmetry(Symmetry::Full)
        .with(vec![0, 0, 0], Expr::c(1.0))
        .with(vec![1, 1, 1], Expr::c(1.0))
        .build()?;
    MetricSpec::new("cubic2d", "", t, None)
}

fn build_complex_cubic3d(_: &Args) -> Result<MetricSpec> {
    let chart = Chart::new(
        ["x", "y", "z"]
            .iter()
            .map(|n| Axis::new(*n, Role::Space))
            .collect(),
    )?;
    let t = TensorSpec::new(chart, 0, 3)
        .codomain(Tag::Complex)
        .symmetry(Symmetry::Full)
        .with(vec![0, 0, 0], Expr::scalar(-Scalar::I))
        .with(vec![1, 1, 1], Expr::c(1.0))
        .with(vec![2, 2, 2], Expr::c(1.0))
        .build()?;
    MetricSpec::new("complex_cubic3d", "", t, None)
}

fn build_functional7d(args: &Args) -> Result<MetricSpec> {
    let k = args.curvature("k")?;
    let mut axes = vec![Axis::new("tau", Role::Time), Axis::new("t", Role::Time)];
    axes.extend((1..=5).map(|i| Axis::new(format!("x{i}"), Role::Space)));
    let chart = Chart::new(axes)?;
    let scope = chart.scope();
    let f_default = match k {
        0 => "x1",
        1 => "sin(x1)",
        _ => "sinh(x1)",
    };
    let a = args.field("a", "1", &scope)?;
    let b = args.field("b", "1", &scope)?;
    let f = args.field("f", f_default, &scope)?;
    let a7 = Expr::powi(par("a"), 7);
    let mut spec = TensorSpec::new(chart, 0, 7)
        .codomain(Tag::Complex)
        .symmetry(Symmetry::Full)
        .param("a", a)
        .param("b", b)
        .param("f", f);
    spec.set(vec![0; 7], Expr::mul(Expr::scalar(-Scalar::I), a7.clone()));
    spec.set(vec![1; 7], Expr::mul(a7.clone(), Expr::powi(par("b"), 7)));
    for j in 2..7 {
        spec.set(vec![j; 7], Expr::mul(a7.clone(), Expr::powi(par("f"), 7)));
    }
    MetricSpec::new("functional7d", "", spec.build()?, None)
}

fn flrw_layout(args: &Args, perturbed: bool) -> Result<(Layout, f64)> {
    let c = args.positive("c", 1.0)?;
    let mut l = Layout::new();
    let c2 = Expr::powi(Expr::c(c), 2);
    let time = if perturbed {
        weighted(-1.0, c2, Some(("psi", 1.0)))
    } else {
        Expr::neg(c2)
    };
    let space = if perturbed {
        weighted(1.0, a2(), Some(("phi", -1.0)))
    } else {
        a2()
    };
    l.cartesian("t", 1, Role::Time, true, &time);
    l.cartesian("x", 3, Role::Space, false, &space);
    Ok((l, c))
}

fn build_flrw(args: &Args) -> Result<MetricSpec> {
    let (l, _) = flrw_layout(args, false)?;
    let f = fields(args, &l, &[("a", "1")])?;
    l.finish("flrw", "", f)
}

fn build_pflrw(args: &Args) -> Result<MetricSpec> {
    let (l, _) = flrw_layout(args, true)?;
    let f = fields(args, &l, &[("a", "1"), ("psi", "0"), ("phi", "0")])?;
    l.finish("pflrw", "", f)
}

fn build_epflrw(args: &Args) -> Result<MetricSpec> {
    let dp = args.dimension("d_p", 1)?;
    let (mut l, _) = flrw_layout(args, true)?;
    l.cartesian("P", dp, Role::Probability, false, &Expr::c(1.0));
    let f = fields(args, &l, &[("a", "1"), ("psi", "0"), ("phi", "0")])?;
    l.finish("epflrw", "", f)
}

fn build_gpflrw(args: &Args) -> Result<MetricSpec> {
    let c = args.positive("c", 1.0)?;
    let s0 = 1.0 / (2.0 * PI).sqrt();
    let gp = GaussianParams::new(
        args.constant("psi_mean", 0.0)?,
        args.positive("psi_sigma", s0)?,
    )?;
    let gf = GaussianParams::new(
        args.constant("phi_mean", 0.0)?,
        args.positive("phi_sigma", s0)?,
    )?;
    let mut l = Layout::new();
    let time = Expr::neg(Expr::mul(
        gaussian_expr(par("psi_field"), &gp),
        Expr::powi(Expr::c(c), 2),
    ));
    let space = Expr::mul(a2(), gaussian_expr(par("phi_field"), &gf));
    l.cartesian("t", 1, Role::Time, true, &time);
    l.cartesian("x", 3, Role::Space, false, &space);
    let scope = l.scope();
    let psi_default = format!("{:?}", gp.mean);
    let phi_default = format!("{:?}", gf.mean);
    let f = vec![
        ("a", args.field("a", "1", &scope)?),
        ("psi_field", args.field("psi_field", &psi_default, &scope)?),
        ("phi_field", args.field("phi_field", &phi_default, &scope)?),
    ];
    l.finish("gpflrw", "", f)
}

fn build_perturbed_ads(args: &Args) -> Result<MetricSpec> {
    let (dt, dr) = (args.dimension("d_tau", 1)?, args.dimension("d_r", 3)?);
    let (k, kt) = (args.curvature("k")?, args.curvature("k_tau")?);
    let mut l = Layout::new();
    l.curved(
        "tau",
        "phi",
        dt,
        kt,
        Role::Time,
        &weighted(-1.0, a2(), Some(("psi", 1.0))),
    );
    l.curved(
        "r",
        "theta",
        dr,
        k,
        Role::Space,
        &weighted(1.0, a2(), Some(("phi", -1.0))),
    );
    let f = fields(args, &l, &[("a", "1"), ("psi", "0"), ("phi", "0")])?;
    l.finish("perturbed_ads", "", f)
}

fn build_hipest(args: &Args) -> Result<MetricSpec> {
    let (dp, dt, dx) = (
        args.dimension("d_p", 1)?,
        args.dimension("d_tau", 1)?,
        args.dimension("d_x", 1)?,
    );
    let pre = Expr::mul(a2(), Expr::powi(par("prob"), 2));
    let mut l = Layout::new();
    l.cartesian("P", dp, Role::Probability, false, &pre);
    l.cartesian("tau", dt, Role::Time, false, &Expr::neg(pre.clone()));
    l.cartesian("x", dx, Role::Space, false, &pre);
    let f = fields(args, &l, &[("a", "1"), ("prob", "1")])?;
    l.finish("hipest", "", f)
}

fn build_fscpst(args: &Args) -> Result<MetricSpec> {
    let (dp, dt, dr) = (
        args.dimension("d_p", 1)?,
        args.dimension("d_tau", 1)?,
        args.dimension("d_r", 3)?,
    );
    let mut l = Layout::new();
    l.curved(
        "P",
        "alpha",
        dp,
        args.curvature("k_p")?,
        Role::Probability,
        &weighted(1.0, a2(), Some(("Y", 1.0))),
    );
    l.curved(
        "tau",
        "phi",
        dt,
        args.curvature("k_tau")?,
        Role::Time,
        &weighted(-1.0, a2(), Some(("psi", 1.0))),
    );
    l.curved(
        "r",
        "theta",
        dr,
        args.curvature("k")?,
        Role::Space,
        &weighted(1.0, a2(), Some(("phi", -1.0))),
    );
    let f = fields(
        args,
        &l,
        &[("a", "1"), ("Y", "0"), ("psi", "0"), ("phi", "0")],
    )?;
    l.finish("fscpst", "", f)
}

fn scaled_spacetime(args: &Args, id: &str, observable: &'static str) -> Result<MetricSpec> {
    let dx = args.dimension("d_x", 3)?;
    let pre = Expr::mul(par(observable), a2());
    let mut l = Layout::new();
    l.cartesian(
        "tau",
        1,
        Role::Time,
        true,
        &weighted(-1.0, pre.clone(), Some(("psi", 1.0))),
    );
    l.cartesian(
        "x",
        dx,
        Role::Space,
        false,
        &weighted(1.0, pre, Some(("phi", -1.0))),
    );
    let f = fields(
        args,
        &l,
        &[(observable, "1"), ("a", "1"), ("psi", "0"), ("phi", "0")],
    )?;
    l.finish(id, "", f)
}

fn build_fssgcpst(args: &Args) -> Result<MetricSpec> {
    scaled_spacetime(args, "fssgcpst", "O_Pf")
}

fn build_sssgcpst(args: &Args) -> Result<MetricSpec> {
    scaled_spacetime(args, "sssgcpst", "O_Ps")
}

fn build_entropic_replacing(args: &Args) -> Result<MetricSpec> {
    let (ds, dr) = (args.dimension("d_s", 1)?, args.dimension("d_r", 3)?);
    let time = Expr::mul(
        weighted(-1.0, a2(), Some(("psi", 1.0))),
        Expr::powi(par("grad_s"), 2),
    );
    let mut l = Layout::new();
    l.curved(
        "S",
        "beta",
        ds,
        args.curvature("k_s")?,
        Role::Entropy,
        &time,
    );
    l.curved(
        "r",
        "theta",
        dr,
        args.curvature("k")?,
        Role::Space,
        &weighted(1.0, a2(), Some(("phi", -1.0))),
    );
    let f = fields(
        args,
        &l,
        &[("a", "1"), ("psi", "0"), ("phi", "0"), ("grad_s", "1")],
    )?;
    l.finish(
        "entropic_replacing",
        "entropy axes take the place of time and keep its negative sign",
        f,
    )
}

fn build_sest(args: &Args) -> Result<MetricSpec> {
    let (ds, dt, dr) = (
        args.dimension("d_s", 1)?,
        args.dimension("d_tau", 1)?,
        args.dimension("d_r", 3)?,
    );
    let mut l = Layout::new();
    l.curved(
        "S",
        "beta",
        ds,
        args.curvature("k_s")?,
        Role::Entropy,
        &weighted(1.0, a2(), Some(("Xi", 1.0))),
    );
    l.curved(
        "tau",
        "phi",
        dt,
        args.curvature("k_tau")?,
        Role::Time,
        &weighted(-1.0, a2(), Some(("psi", 1.0))),
    );
    l.curved(
        "r",
        "theta",
        dr,
        args.curvature("k")?,
        Role::Space,
        &weighted(1.0, a2(), Some(("phi", -1.0))),
    );
    let f = fields(
        args,
        &l,
        &[("a", "1"), ("Xi", "0"), ("psi", "0"), ("phi", "0")],
    )?;
    l.finish("sest", "", f)
}

fn build_gistm(args: &Args) -> Result<MetricSpec> {
    let (di, dt, dx) = (
        args.dimension("d_i", 1)?,
        args.dimension("d_tau", 1)?,
        args.dimension("d_x", 3)?,
    );
    let mut l = Layout::new();
    l.cartesian(
        "I",
        di,
        Role::Information,
        false,
        &weighted(1.0, a2(), Some(("Lambda", 1.0))),
    );
    l.curved(
        "tau",
        "phi",
        dt,
        args.curvature("k_tau")?,
        Role::Time,
        &weighted(-1.0, a2(), Some(("psi", 1.0))),
    );
    l.cartesian(
        "x",
        dx,
        Role::Space,
        false,
        &weighted(1.0, a2(), Some(("phi", -1.0))),
    );
    let f = fields(
        args,
        &l,
        &[("a", "1"), ("Lambda", "0"), ("psi", "0"), ("phi", "0")],
    )?;
    l.finish("gistm", "", f)
}

fn build_pestmmp(args: &Args) -> Result<MetricSpec> {
    let (dp, ds) = (args.dimension("d_p", 1)?, args.dimension("d_s", 1)?);
    let (dt, dx) = (args.dimension("d_tau", 1)?, args.dimension("d_x", 3)?);
    let mut l = Layout::new();
    l.curved(
        "P",
        "alpha",
        dp,
        args.curvature("k_p")?,
        Role::Probability,
        &weighted(1.0, a2(), Some(("Theta", 1.0))),
    );
    l.curved(
        "S",
        "beta",
        ds,
        args.curvature("k_s")?,
        Role::Entropy,
        &weighted(1.0, a2(), Some(("Xi", 1.0))),
    );
    l.curved(
        "tau",
        "phi",
        dt,
        args.curvature("k_tau")?,
        Role::Time,
        &weighted(-1.0, a2(), Some(("psi", 1.0))),
    );
    l.cartesian(
        "x",
        dx,
        Role::Space,
        false,
        &weighted(1.0, a2(), Some(("phi", -1.0))),
    );
    let f = fields(
        args,
        &l,
        &[
            ("a", "1"),
            ("Theta", "0"),
            ("Xi", "0"),
            ("psi", "0"),
            ("phi", "0"),
        ],
    )?;
    l.finish("pestmmp", "", f)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(kv: &[(&str, &str)]) -> BuildParams {
        kv.iter()
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect()
    }

    #[test]
    fn every_entry_builds_with_defaults() {
        assert!(ids().len() >= 17);
        for id in ids() {
            let m = build_default(id).unwrap_or_else(|e| panic!("{id}: {e}"));
            assert_eq!(m.name, id);
        }
    }

    #[test]
    fn shipped_listing_is_current() {
        assert_eq!(include_str!("../catalog.json"), catalog_json());
    }

    #[test]
    fn flrw_scale_factor() {
        let m = build("flrw", &params(&[("a", "2")])).unwrap();
        assert_eq!(
            m.tensor()
                .eval_component(&[1, 1], &[0.3, 0.0, 0.0, 0.0])
                .unwrap(),
            Scalar::Real(4.0)
        );
        let m = build_default("flrw").unwrap();
        assert_eq!(
            m.line_element(&[5.0, 0.0, 0.0, 0.0], &[1.0, 0.0, 0.0, 0.0])
                .unwrap(),
            Scalar::Real(-1.0)
        );
    }

    #[test]
    fn hipest_signs() {
        let m = build_default("hipest").unwrap();
        assert_eq!(
            m.line_element(&[0.5, 0.5, 0.5], &[1.0, 1.0, 1.0]).unwrap(),
            Scalar::Real(1.0)
        );
    }

    #[test]
    fn curvature_profiles() {
        assert!((curvature_profile(1, PI / 2.0) - 1.0).abs() < 1e-15);
        assert_eq!(curvature_profile(0, 0.7), 0.7);
        assert!((curvature_profile(-1, 0.7) - 0.7f64.sinh()).abs() < 1e-15);
        let m = build("perturbed_ads", &params(&[("k", "1")])).unwrap();
        // g_theta1 = S_k(r)^2 = 1 at r = pi/2
        let v = m
            .tensor()
            .eval_component(&[2, 2], &[1.0, PI / 2.0, 1.0, 1.0])
            .unwrap();
        assert!((v.re() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn parameter_domains() {
        assert!(matches!(
            build("flrw", &params(&[("k", "0")])),
            Err(Error::BadParameter { .. })
        ));
        assert!(build("perturbed_ads", &params(&[("k", "2")])).is_err());
        assert!(build("gpflrw", &params(&[("psi_sigma", "0")])).is_err());
        assert!(build("gpflrw", &params(&[("psi_sigma", "-1")])).is_err());
        assert!(matches!(build_default("nope"), Err(Error::UnknownEntry(_))));
        assert!(build("minkowski", &params(&[("d_x", "1.5")])).is_err());
    }

    #[test]
    fn complex_cubic_line_element() {
        let m = build_default("complex_cubic3d").unwrap();
        assert_eq!(
            m.line_element(&[0.0; 3], &[1.0, 0.0, 0.0]).unwrap(),
            -Scalar::I
        );
    }
}
