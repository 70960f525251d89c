//! Gaussian perturbation factors, Shannon information and entropy, and
//! entropy-coordinate substitution. Logarithms are natural.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::chart::Role;
use crate::error::{Error, Result};
use crate::expr::{Expr, Params, Scope};
use crate::tensor::{MetricSpec, TensorField, TensorSpec};

/// Base of every logarithm in this module.
pub const LOG_BASE: &str = "e";

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianParams {
    pub mean: f64,
    pub sigma: f64,
}

impl GaussianParams {
    pub fn new(mean: f64, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) || !mean.is_finite() {
            return Err(Error::BadSigma(sigma));
        }
        Ok(GaussianParams { mean, sigma })
    }

    /// The standard deviation for which the peak density equals 1.
    pub fn unit_peak(mean: f64) -> Self {
        GaussianParams {
            mean,
            sigma: 1.0 / (2.0 * PI).sqrt(),
        }
    }
}

/// Normal density `exp(-((x-mean)/σ)²/2) / (√(2π) σ)`.
pub fn gaussian_factor(x: f64, g: &GaussianParams) -> f64 {
    let z = (x - g.mean) / g.sigma;
    (-0.5 * z * z).exp() / ((2.0 * PI).sqrt() * g.sigma)
}

/// Symbolic Gaussian factor of an expression.
pub fn gaussian_expr(x: Expr, g: &GaussianParams) -> Expr {
    let z = Expr::div(Expr::sub(x, Expr::c(g.mean)), Expr::c(g.sigma));
    let peak = 1.0 / ((2.0 * PI).sqrt() * g.sigma);
    Expr::mul(
        Expr::c(peak),
        Expr::exp(Expr::mul(Expr::c(-0.5), Expr::powi(z, 2))),
    )
}

/// `sign · ½ ln G(x)`; `sign = +1` gives Ψ, `-1` gives Φ (since −Φ = ½ ln G).
pub fn potential_from_gaussian(g: &GaussianParams, x: f64, sign: f64) -> f64 {
    let z = (x - g.mean) / g.sigma;
    // ln G computed directly to avoid underflow in the tails.
    let ln_g = -0.5 * z * z - ((2.0 * PI).sqrt() * g.sigma).ln();
    sign.signum() * 0.5 * ln_g
}

/// `I = -ln p` for `p ∈ (0, 1]`.
pub fn shannon_information(p: f64) -> Result<f64> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::BadProbability(p));
    }
    Ok(-p.ln())
}

/// Composite Simpson rule with `n` subintervals (rounded up to even).
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = n.max(2).next_multiple_of(2);
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + i as f64 * h);
    }
    acc * h / 3.0
}

/// Density on a closed interval.
#[derive(Clone, Debug)]
pub struct DensitySpec {
    /// Density expression in coordinate 0.
    pub density: Expr,
    pub lower: f64,
    pub upper: f64,
    /// Number of quadrature subintervals.
    pub nodes: usize,
}

impl DensitySpec {
    pub fn parse(src: &str, var: &str, lower: f64, upper: f64, nodes: usize) -> Result<Self> {
        Ok(DensitySpec {
            density: Expr::parse(src, &Scope::new(&[var]))?,
            lower,
            upper,
            nodes,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EntropyReport {
    pub entropy: f64,
    /// `∫ P` over the interval, for judging normalization.
    pub total_mass: f64,
    pub nodes: usize,
    pub interval: [f64; 2],
    pub log_base: &'static str,
}

/// `S = -∫ P ln P` by composite Simpson, with `0 ln 0 = 0`.
pub fn shannon_entropy(d: &DensitySpec) -> Result<EntropyReport> {
    if !(d.lower.is_finite() && d.upper.is_finite() && d.lower < d.upper) {
        return Err(Error::BadConfig(format!(
            "bad interval [{}, {}]",
            d.lower, d.upper
        )));
    }
    let n = d.nodes.max(2).next_multiple_of(2);
    let h = (d.upper - d.lower) / n as f64;
    let params = Params::new();
    let mut values = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let x = d.lower + i as f64 * h;
        let v = d.density.eval_real(&[x], &params)?;
        if v < 0.0 {
            return Err(Error::NegativeDensity { value: v, at: x });
        }
        values.push(v);
    }
    let weights = |i: usize| {
        if i == 0 || i == n {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        }
    };
    let mut ent = 0.0;
    let mut mass = 0.0;
    for (i, &v) in values.iter().enumerate() {
        let plogp = if v == 0.0 { 0.0 } else { v * v.ln() };
        ent -= weights(i) * plogp;
        mass += weights(i) * v;
    }
    ent *= h / 3.0;
    mass *= h / 3.0;
    if !ent.is_finite() {
        return Err(Error::NonFinite("entropy integrand".into()));
    }
    Ok(EntropyReport {
        entropy: ent,
        total_mass: mass,
        nodes: n,
        interval: [d.lower, d.upper],
        log_base: LOG_BASE,
    })
}

/// Which way the derivative factor enters the substituted metric.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SubstitutionMode {
    /// Time-block components gain `(S')^n` for n time slots, matching the
    /// displayed line element.
    #[default]
    AsPrinted,
    /// Components gain `(S')^{-n}` so that `dS = S' dτ` recovers the
    /// original line element.
    ChainRule,
}

/// Strictly monotone `S(τ)` with its inverse, both in coordinate 0.
#[derive(Clone, Debug)]
pub struct EntropyMap {
    pub forward: Expr,
    pub inverse: Expr,
    derivative: Expr,
}

impl EntropyMap {
    pub fn new(forward: Expr, inverse: Expr) -> Result<Self> {
        let derivative = forward.derivative(0, &Params::new())?;
        Ok(EntropyMap {
            forward,
            inverse,
            derivative,
        })
    }

    pub fn parse(forward: &str, inverse: &str, var: &str) -> Result<Self> {
        let scope = Scope::new(&[var]);
        EntropyMap::new(Expr::parse(forward, &scope)?, Expr::parse(inverse, &scope)?)
    }

    pub fn inverted(&self) -> Result<Self> {
        EntropyMap::new(self.inverse.clone(), self.forward.clone())
    }

    pub fn eval(&self, tau: f64) -> Result<f64> {
        self.forward.eval_real(&[tau], &Params::new())
    }

    pub fn slope(&self, tau: f64) -> Result<f64> {
        self.derivative.eval_real(&[tau], &Params::new())
    }

    /// Samples `S'` and the inverse on `[lo, hi]`.
    fn validate(&self, lo: f64, hi: f64) -> Result<()> {
        let n = 256;
        let taus: Vec<f64> = (0..=n)
            .map(|i| lo + (hi - lo) * i as f64 / n as f64)
            .collect();
        let mut sign = 0.0;
        for &tau in &taus {
            let d = self.slope(tau)?;
            if d == 0.0 || !d.is_finite() || (sign != 0.0 && d.signum() != sign) {
                return Err(Error::NotMonotone(format!("S'({tau}) = {d}")));
            }
            sign = d.signum();
        }
        for &tau in &taus {
            let s = self.eval(tau)?;
            let back = self.inverse.eval_real(&[s], &Params::new())?;
            if (back - tau).abs() > 1e-9 * (1.0 + tau.abs()) {
                return Err(Error::MapFailure(format!(
                    "inverse gives {back} for tau = {tau}"
                )));
            }
        }
        Ok(())
    }
}

/// Substitutes the first time axis by an entropy coordinate `S`.
pub fn entropy_substitute(
    m: &MetricSpec,
    s: &EntropyMap,
    mode: SubstitutionMode,
) -> Result<MetricSpec> {
    let axis = m
        .chart()
        .first_axis_with_role(Role::Time)
        .ok_or_else(|| Error::InvalidChart("no time axis to replace".into()))?;
    let taken = m.chart().index_of("S").is_some();
    substitute_axis(
        m,
        axis,
        s,
        mode,
        if taken { "S_time" } else { "S" },
        Role::Entropy,
    )
}

/// Replaces coordinate `axis` by `S(axis)`, renaming it and setting its role.
pub fn substitute_axis(
    m: &MetricSpec,
    axis: usize,
    s: &EntropyMap,
    mode: SubstitutionMode,
    name: &str,
    role: Role,
) -> Result<MetricSpec> {
    let ax = m
        .chart()
        .axes()
        .get(axis)
        .ok_or(Error::BadIndex(vec![axis]))?;
    let lo = ax.lower.max(-10.0);
    let hi = ax.upper.min(10.0);
    s.validate(lo.min(hi), hi.max(lo))?;
    let tensor = substitute_tensor(m.tensor(), axis, s, mode, name, role)?;
    let aux = m
        .aux_lowering()
        .map(|g| substitute_tensor(g, axis, s, mode, name, role))
        .transpose()?;
    MetricSpec::new(m.name.clone(), m.notes.clone(), tensor, aux)
}

fn substitute_tensor(
    t: &TensorField,
    axis: usize,
    s: &EntropyMap,
    mode: SubstitutionMode,
    name: &str,
    role: Role,
) -> Result<TensorField> {
    let relabeled = t.relabel_axis(axis, role, name)?;
    let new_coord = Expr::coord(axis, name);
    let at_new = |e: &Expr| e.map_coords(&|_, _| new_coord.clone());
    // τ = S⁻¹(S), and S'(τ) expressed in the new coordinate.
    let tau = at_new(&s.inverse);
    let slope = s.derivative.map_coords(&|_, _| tau.clone());
    let replace = |e: &Expr| {
        e.map_coords(&|i, n| {
            if i == axis {
                tau.clone()
            } else {
                Expr::coord(i, n)
            }
        })
    };
    let spec = relabeled.spec();
    let u = spec.upper;
    let mut out = TensorSpec::new(spec.chart.clone(), spec.upper, spec.lower)
        .codomain(spec.codomain)
        .symmetry(spec.symmetry);
    for (name, e) in &spec.params {
        out.params.insert(name.clone(), replace(e));
    }
    for (idx, e) in &spec.components {
        // chain rule: lower slots carry dτ/dS = 1/S', upper slots dS/dτ = S'
        let n_lower = idx[u..].iter().filter(|&&i| i == axis).count() as i32;
        let n_upper = idx[..u].iter().filter(|&&i| i == axis).count() as i32;
        let power = match mode {
            SubstitutionMode::ChainRule => n_upper - n_lower,
            SubstitutionMode::AsPrinted => n_lower - n_upper,
        };
        let base = replace(e);
        let new = if power == 0 {
            base
        } else {
            Expr::mul(base, Expr::powi(slope.clone(), power))
        };
        out.set(idx.clone(), new);
    }
    out.build()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::build_default;
    use crate::scalar::Scalar;

    #[test]
    fn gaussian_peak_values() {
        let g = GaussianParams::new(0.3, 1.0).unwrap();
        assert!((gaussian_factor(0.3, &g) - 0.398_942_280_401_432_7).abs() < 1e-15);
        let u = GaussianParams::unit_peak(0.3);
        assert!((gaussian_factor(0.3, &u) - 1.0).abs() < 1e-15);
        assert!(GaussianParams::new(0.0, 0.0).is_err());
    }

    #[test]
    fn potentials() {
        let u = GaussianParams::unit_peak(1.0);
        assert!(potential_from_gaussian(&u, 1.0, 1.0).abs() < 1e-15);
        let g = GaussianParams::new(0.0, 1.0).unwrap();
        let v = potential_from_gaussian(&g, 0.0, 1.0);
        assert!((v - (-(2.0 * PI).ln() / 4.0)).abs() < 1e-15);
        assert!((v + 0.459_469).abs() < 1e-6);
        let x = 0.7;
        assert!(
            ((2.0 * potential_from_gaussian(&g, x, 1.0)).exp() - gaussian_factor(x, &g)).abs()
                < 1e-15
        );
    }

    #[test]
    fn information_values() {
        assert_eq!(shannon_information(1.0).unwrap(), 0.0);
        assert!((shannon_information(0.5).unwrap() - std::f64::consts::LN_2).abs() < 1e-15);
        assert!((shannon_information(1.0 / std::f64::consts::E).unwrap() - 1.0).abs() < 1e-15);
        assert!(shannon_information(0.0).is_err());
        assert!(shannon_information(1.5).is_err());
    }

    #[test]
    fn entropy_of_uniform_and_normal() {
        let u = DensitySpec::parse("1", "x", 0.0, 1.0, 100).unwrap();
        assert!(shannon_entropy(&u).unwrap().entropy.abs() < 1e-15);
        let u2 = DensitySpec::parse("0.5", "x", 0.0, 2.0, 100).unwrap();
        assert!((shannon_entropy(&u2).unwrap().entropy - std::f64::consts::LN_2).abs() < 1e-12);
        let n = DensitySpec::parse("exp(-x^2/2)/sqrt(2*pi)", "x", -10.0, 10.0, 4000).unwrap();
        let target = 0.5 * (2.0 * PI * std::f64::consts::E).ln();
        assert!((shannon_entropy(&n).unwrap().entropy - target).abs() < 1e-8);
        let neg = DensitySpec::parse("x", "x", -1.0, 1.0, 10).unwrap();
        assert!(matches!(
            shannon_entropy(&neg),
            Err(Error::NegativeDensity { .. })
        ));
        let zero = DensitySpec::parse("0", "x", 0.0, 1.0, 10).unwrap();
        assert_eq!(shannon_entropy(&zero).unwrap().entropy, 0.0);
    }

    #[test]
    fn substitution_modes() {
        let m = build_default("minkowski").unwrap();
        let p = [0.2, 0.0, 0.0, 0.0];
        let id = EntropyMap::parse("tau", "tau", "tau").unwrap();
        for mode in [SubstitutionMode::AsPrinted, SubstitutionMode::ChainRule] {
            let out = entropy_substitute(&m, &id, mode).unwrap();
            assert_eq!(
                out.tensor().eval_component(&[0, 0], &p).unwrap(),
                Scalar::Real(-1.0)
            );
            assert_eq!(out.chart().axes()[0].role, Role::Entropy);
        }
        let double = EntropyMap::parse("2*tau", "tau/2", "tau").unwrap();
        let chain = entropy_substitute(&m, &double, SubstitutionMode::ChainRule).unwrap();
        assert_eq!(
            chain.tensor().eval_component(&[0, 0], &p).unwrap(),
            Scalar::Real(-0.25)
        );
        // dS = 2 dτ recovers -dτ²
        assert_eq!(
            chain.line_element(&p, &[2.0, 0.0, 0.0, 0.0]).unwrap(),
            Scalar::Real(-1.0)
        );
        let printed = entropy_substitute(&m, &double, SubstitutionMode::AsPrinted).unwrap();
        assert_eq!(
            printed.tensor().eval_component(&[0, 0], &p).unwrap(),
            Scalar::Real(-4.0)
        );
    }

    #[test]
    fn non_monotone_map_rejected() {
        let m = build_default("minkowski").unwrap();
        let s = EntropyMap::parse("tau^2", "sqrt(tau)", "tau").unwrap();
        assert!(matches!(
            entropy_substitute(&m, &s, SubstitutionMode::ChainRule),
            Err(Error::NotMonotone(_))
        ));
    }
}
