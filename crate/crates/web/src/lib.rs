//! Browser bindings. Every export takes plain strings and numbers and
//! returns a JSON string, so the page needs no generated TypeScript types.

use std::collections::BTreeMap;

use metric_pair::catalog::{self, BuildParams};
use metric_pair::entropy::{gaussian_factor, shannon_entropy, DensitySpec, GaussianParams};
use metric_pair::geodesic::{distance, SolverConfig};
use metric_pair::MetricSpec;
use serde::Serialize;
use wasm_bindgen::prelude::*;

type Out = Result<String, String>;

fn parse_point(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| format!("`{t}` is not a number"))
        })
        .collect()
}

fn metric(id: &str, params_json: &str) -> Result<MetricSpec, String> {
    let params: BuildParams = if params_json.trim().is_empty() {
        BTreeMap::new()
    } else {
        serde_json::from_str(params_json).map_err(|e| format!("parameters: {e}"))?
    };
    catalog::build(id, &params).map_err(|e| e.to_string())
}

fn json<T: Serialize>(v: &T) -> Out {
    serde_json::to_string(v).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct Entry {
    id: &'static str,
    title: &'static str,
    line_element: &'static str,
    dim: usize,
}

pub fn list_entries() -> Out {
    let mut out = Vec::new();
    for e in catalog::list() {
        let dim = catalog::build_default(e.id).map(|m| m.dim()).unwrap_or(0);
        out.push(Entry {
            id: e.id,
            title: e.title,
            line_element: e.line_element,
            dim,
        });
    }
    json(&out)
}

#[derive(Serialize)]
struct CurveOut {
    value: f64,
    chord: f64,
    converged: bool,
    axes: Vec<String>,
    curve: Vec<Vec<f64>>,
}

/// Shortest-curve estimate between two points.
pub fn distance_curve(
    id: &str,
    params_json: &str,
    from: &str,
    to: &str,
    seed: u64,
    restarts: usize,
) -> Out {
    let m = metric(id, params_json)?;
    let cfg = SolverConfig {
        restarts: restarts.max(1),
        ..SolverConfig::with_seed(seed)
    };
    let r =
        distance(&m, &parse_point(from)?, &parse_point(to)?, &cfg).map_err(|e| e.to_string())?;
    json(&CurveOut {
        value: r.value,
        chord: r.chord,
        converged: r.converged,
        axes: m.chart().names(),
        curve: r.curve,
    })
}

#[derive(Serialize)]
struct Indicatrix {
    axes: [usize; 2],
    /// Boundary points of `{v : |ds(v)|^{1/n} <= 1}` in the chosen plane;
    /// `null` where the direction is null (the set is unbounded there).
    boundary: Vec<Option<[f64; 2]>>,
    signs: Vec<i8>,
}

/// Unit set of the line element at `point`, restricted to the plane of
/// axes `i` and `j`.
pub fn indicatrix(
    id: &str,
    params_json: &str,
    point: &str,
    i: usize,
    j: usize,
    samples: usize,
) -> Out {
    let m = metric(id, params_json)?;
    let p = parse_point(point)?;
    let d = m.dim();
    if i >= d || j >= d || i == j {
        return Err(format!("axes must be two distinct indices below {d}"));
    }
    let n = m.order() as f64;
    let samples = samples.clamp(8, 4096);
    let mut boundary = Vec::with_capacity(samples);
    let mut signs = Vec::with_capacity(samples);
    for k in 0..samples {
        let th = std::f64::consts::TAU * k as f64 / samples as f64;
        let mut v = vec![0.0; d];
        v[i] = th.cos();
        v[j] = th.sin();
        let s = m.line_element(&p, &v).map_err(|e| e.to_string())?;
        let re = s.re();
        let mag = s.norm();
        signs.push(if re > 1e-12 {
            1
        } else if re < -1e-12 {
            -1
        } else {
            0
        });
        if mag > 1e-12 {
            let r = mag.powf(-1.0 / n);
            boundary.push(Some([r * th.cos(), r * th.sin()]));
        } else {
            boundary.push(None);
        }
    }
    json(&Indicatrix {
        axes: [i, j],
        boundary,
        signs,
    })
}

#[derive(Serialize)]
struct GaussianOut {
    xs: Vec<f64>,
    density: Vec<f64>,
    entropy: f64,
    closed_form: f64,
    total_mass: f64,
}

/// Gaussian factor samples and its Shannon entropy on `mean ± 10σ`.
pub fn gaussian_entropy(mean: f64, sigma: f64, points: usize) -> Out {
    let g = GaussianParams::new(mean, sigma).map_err(|e| e.to_string())?;
    let (lo, hi) = (mean - 10.0 * sigma, mean + 10.0 * sigma);
    let src = format!("exp(-((x - ({mean:?}))/{sigma:?})^2/2)/(sqrt(2*pi)*{sigma:?})");
    let rep =
        shannon_entropy(&DensitySpec::parse(&src, "x", lo, hi, 4000).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
    let points = points.clamp(16, 2048);
    let (a, b) = (mean - 4.0 * sigma, mean + 4.0 * sigma);
    let xs: Vec<f64> = (0..points)
        .map(|k| a + (b - a) * k as f64 / (points - 1) as f64)
        .collect();
    let density = xs.iter().map(|&x| gaussian_factor(x, &g)).collect();
    let closed_form = 0.5 * (2.0 * std::f64::consts::PI * std::f64::consts::E * sigma * sigma).ln();
    json(&GaussianOut {
        xs,
        density,
        entropy: rep.entropy,
        closed_form,
        total_mass: rep.total_mass,
    })
}

#[wasm_bindgen(js_name = listEntries)]
pub fn list_entries_js() -> Result<String, JsError> {
    list_entries().map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = distanceCurve)]
pub fn distance_curve_js(
    id: &str,
    params_json: &str,
    from: &str,
    to: &str,
    seed: u32,
    restarts: u32,
) -> Result<String, JsError> {
    distance_curve(id, params_json, from, to, seed as u64, restarts as usize)
        .map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = indicatrix)]
pub fn indicatrix_js(
    id: &str,
    params_json: &str,
    point: &str,
    i: u32,
    j: u32,
    samples: u32,
) -> Result<String, JsError> {
    indicatrix(
        id,
        params_json,
        point,
        i as usize,
        j as usize,
        samples as usize,
    )
    .map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = gaussianEntropy)]
pub fn gaussian_entropy_js(mean: f64, sigma: f64, points: u32) -> Result<String, JsError> {
    gaussian_entropy(mean, sigma, points as usize).map_err(|e| JsError::new(&e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    #[test]
    fn curve_between_points() {
        let v: Value = serde_json::from_str(
            &distance_curve("euclidean", r#"{"dim":"2"}"#, "0,0", "3,4", 1, 2).unwrap(),
        )
        .unwrap();
        assert!((v["value"].as_f64().unwrap() - 5.0).abs() < 1e-6);
        assert_eq!(v["curve"].as_array().unwrap().len(), 65);
    }

    #[test]
    fn cubic_indicatrix_has_null_gaps() {
        let v: Value =
            serde_json::from_str(&indicatrix("cubic2d", "", "0,0", 0, 1, 8).unwrap()).unwrap();
        let b = v["boundary"].as_array().unwrap();
        // directions at 135 and 315 degrees are null for x^3 + y^3
        assert!(b[3].is_null() && b[7].is_null());
        assert!((b[0][0].as_f64().unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gaussian_entropy_matches_closed_form() {
        let v: Value = serde_json::from_str(&gaussian_entropy(0.5, 2.0, 64).unwrap()).unwrap();
        let (s, c) = (
            v["entropy"].as_f64().unwrap(),
            v["closed_form"].as_f64().unwrap(),
        );
        assert!((s - c).abs() < 1e-6);
    }

    #[test]
    fn errors_are_messages() {
        assert!(distance_curve("nosuch", "", "0", "1", 0, 1).is_err());
        assert!(indicatrix("cubic2d", "", "0,0", 0, 0, 8).is_err());
        assert!(list_entries().unwrap().contains("cubic2d"));
    }
}
