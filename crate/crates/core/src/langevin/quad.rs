//! Globally adaptive Gauss–Kronrod (7/15) quadrature over the whole real line.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] =
    [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Quadrature {
    pub value: f64,
    pub error: f64,
    pub intervals: usize,
}

#[derive(Debug, Clone, Copy)]
enum Chart {
    Finite,
    /// x = p + L·t/(1−t), t ∈ [0, 1).
    Upper {
        p: f64,
        scale: f64,
    },
    /// x = p − L·t/(1−t), t ∈ [0, 1).
    Lower {
        p: f64,
        scale: f64,
    },
}

impl Chart {
    fn eval(&self, f: &impl Fn(f64) -> f64, t: f64) -> f64 {
        match *self {
            Chart::Finite => f(t),
            Chart::Upper { p, scale } => {
                let u = 1.0 - t;
                f(p + scale * t / u) * scale / (u * u)
            }
            Chart::Lower { p, scale } => {
                let u = 1.0 - t;
                f(p - scale * t / u) * scale / (u * u)
            }
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Piece {
    a: f64,
    b: f64,
    chart: Chart,
    value: f64,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error).then(other.a.total_cmp(&self.a))
    }
}

fn kronrod(f: &impl Fn(f64) -> f64, a: f64, b: f64, chart: Chart) -> Piece {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = chart.eval(f, c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for j in 0..7 {
        let x = h * XGK[j];
        let s = chart.eval(f, c - x) + chart.eval(f, c + x);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    Piece { a, b, chart, value: k * h, error: ((k - g) * h).abs() }
}

/// Integrates `f` over ℝ. `breakpoints` seed the initial partition (order and
/// duplicates do not matter) and `scale` sets the width of the tail maps.
///
/// Returns `Err` with the best estimate when `max_intervals` is exhausted.
pub(crate) fn integrate_real_line(
    f: impl Fn(f64) -> f64,
    breakpoints: &[f64],
    scale: f64,
    rel_tol: f64,
    abs_tol: f64,
    max_intervals: usize,
) -> Result<Quadrature, Quadrature> {
    let mut pts: Vec<f64> = breakpoints.iter().copied().filter(|x| x.is_finite()).collect();
    if pts.is_empty() {
        pts.push(0.0);
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup();

    let mut heap = BinaryHeap::new();
    heap.push(kronrod(&f, 0.0, 1.0, Chart::Lower { p: pts[0], scale }));
    heap.push(kronrod(&f, 0.0, 1.0, Chart::Upper { p: pts[pts.len() - 1], scale }));
    for w in pts.windows(2) {
        heap.push(kronrod(&f, w[0], w[1], Chart::Finite));
    }

    let totals = |heap: &BinaryHeap<Piece>| {
        let mut v: Vec<&Piece> = heap.iter().collect();
        v.sort_by(|x, y| x.a.total_cmp(&y.a));
        v.iter().fold((0.0, 0.0), |(s, e), p| (s + p.value, e + p.error))
    };
    let (mut value, mut error) = totals(&heap);
    loop {
        if error <= abs_tol.max(rel_tol * value.abs()) {
            let (value, error) = totals(&heap);
            return Ok(Quadrature { value, error, intervals: heap.len() });
        }
        if heap.len() >= max_intervals {
            let (value, error) = totals(&heap);
            return Err(Quadrature { value, error, intervals: heap.len() });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        let left = kronrod(&f, worst.a, mid, worst.chart);
        let right = kronrod(&f, mid, worst.b, worst.chart);
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn lorentzian_total_weight() {
        let w = 1e-6;
        let f = |x: f64| (w / 2.0) / ((x - 3.0).powi(2) + w * w / 4.0);
        let q = integrate_real_line(f, &[3.0, 3.0 - w, 3.0 + w], 1.0, 1e-10, 0.0, 2000).unwrap();
        assert!((q.value - PI).abs() < 1e-8, "{}", q.value);
    }

    #[test]
    fn gaussian_with_large_scale() {
        let s = 6e7;
        let f = |x: f64| (-(x / s).powi(2)).exp();
        let q = integrate_real_line(f, &[0.0], s, 1e-12, 0.0, 2000).unwrap();
        assert!((q.value / (s * PI.sqrt()) - 1.0).abs() < 1e-11);
    }

    #[test]
    fn exhaustion_is_reported() {
        let f = |x: f64| 1.0 / (1.0 + x * x).sqrt();
        assert!(integrate_real_line(f, &[0.0], 1.0, 1e-10, 0.0, 50).is_err());
    }
}
