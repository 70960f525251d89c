//! Seeded sampling of chart points and directions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::chart::Chart;

/// Stream-separated generator: `stream` picks an independent sequence for
/// the same seed, so sample `i` does not depend on how many came before.
pub fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

/// Sampling interval of one axis: its bounds intersected with `[-1, 1]`,
/// shifted to start at a finite bound when they miss that window, then
/// shrunk by 5% at each end so finite-difference probes stay inside.
pub fn axis_window(lower: f64, upper: f64) -> (f64, f64) {
    let (mut a, mut b) = (lower.max(-1.0), upper.min(1.0));
    if a >= b {
        if lower.is_finite() {
            a = lower;
            b = if upper.is_finite() {
                upper
            } else {
                lower + 2.0
            };
        } else {
            b = upper;
            a = upper - 2.0;
        }
    }
    let pad = 0.05 * (b - a);
    (a + pad, b - pad)
}

pub fn interior_point(chart: &Chart, rng: &mut impl Rng) -> Vec<f64> {
    chart
        .axes()
        .iter()
        .map(|ax| {
            let (a, b) = axis_window(ax.lower, ax.upper);
            if a < b {
                rng.random_range(a..b)
            } else {
                a
            }
        })
        .collect()
}

pub fn unit_vector(dim: usize, rng: &mut impl Rng) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-8 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

/// `±e_i` and `(e_i ± e_j)/√2`, in a fixed order.
pub fn axis_probes(dim: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    for i in 0..dim {
        for s in [1.0, -1.0] {
            let mut v = vec![0.0; dim];
            v[i] = s;
            out.push(v);
        }
    }
    let h = std::f64::consts::FRAC_1_SQRT_2;
    for i in 0..dim {
        for j in i + 1..dim {
            for s in [1.0, -1.0] {
                let mut v = vec![0.0; dim];
                v[i] = h;
                v[j] = s * h;
                out.push(v);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::{Axis, Role};

    #[test]
    fn windows_stay_inside_bounds() {
        let chart = Chart::new(vec![
            Axis::new("t", Role::Time).bounded(0.0, f64::INFINITY),
            Axis::new("r", Role::Space).bounded(2.0, f64::INFINITY),
            Axis::new("x", Role::Space),
            Axis::new("th", Role::Space).bounded(0.0, std::f64::consts::PI),
        ])
        .unwrap();
        let mut r = rng(3, 0);
        for _ in 0..200 {
            let p = interior_point(&chart, &mut r);
            chart.check_point(&p).unwrap();
            assert!(p[0] > 0.0 && p[1] > 2.0);
        }
    }

    #[test]
    fn streams_are_reproducible() {
        let a: f64 = rng(9, 4).random();
        let b: f64 = rng(9, 4).random();
        let c: f64 = rng(9, 5).random();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }
}
