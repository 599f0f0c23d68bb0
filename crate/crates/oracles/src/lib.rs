//! Reference computations used as test oracles: finite differences, adaptive
//! quadrature, exhaustive grid search and a few summary statistics.
//!
//! Nothing in here knows about the Ising model; callers pass closures.

/// Central difference of `f` at `x` along coordinate `k`.
pub fn central_diff<const D: usize>(f: impl Fn([f64; D]) -> f64, x: [f64; D], k: usize, h: f64) -> f64 {
    let mut hi = x;
    let mut lo = x;
    hi[k] += h;
    lo[k] -= h;
    (f(hi) - f(lo)) / (2.0 * h)
}

pub fn gradient_fd<const D: usize>(f: impl Fn([f64; D]) -> f64, x: [f64; D], h: f64) -> [f64; D] {
    std::array::from_fn(|k| central_diff(&f, x, k, h))
}

/// Jacobian of a vector-valued `g` by central differences; row `k` is `d g / d x_k`.
pub fn jacobian_fd<const D: usize, const M: usize>(
    g: impl Fn([f64; D]) -> [f64; M],
    x: [f64; D],
    h: f64,
) -> [[f64; M]; D] {
    std::array::from_fn(|k| {
        let mut hi = x;
        let mut lo = x;
        hi[k] += h;
        lo[k] -= h;
        let (a, b) = (g(hi), g(lo));
        std::array::from_fn(|j| (a[j] - b[j]) / (2.0 * h))
    })
}

/// Relative error `|a - b| / max(|b|, floor)`.
pub fn rel_err(a: f64, b: f64, floor: f64) -> f64 {
    (a - b).abs() / b.abs().max(floor)
}

const GK_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const K15_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728,
];
const G7_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = K15_WEIGHTS[7] * fc;
    let mut g = G7_WEIGHTS[3] * fc;
    for i in 0..7 {
        let dx = h * GK_NODES[i];
        let s = f(c - dx) + f(c + dx);
        k += K15_WEIGHTS[i] * s;
        if i % 2 == 1 {
            g += G7_WEIGHTS[i / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Adaptive Gauss-Kronrod (7/15) quadrature of `f` over `[a, b]`.
///
/// Intervals are bisected until each local error estimate falls below its
/// share of `tol`, or the depth limit is reached.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn recurse(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
        let (val, err) = gk15(f, a, b);
        if err <= tol || depth == 0 {
            return val;
        }
        let m = 0.5 * (a + b);
        recurse(f, a, m, 0.5 * tol, depth - 1) + recurse(f, m, b, 0.5 * tol, depth - 1)
    }
    recurse(&f, a, b, tol, 30)
}

/// Nested adaptive quadrature of `f(x, y)` over a rectangle.
pub fn integrate_2d(f: impl Fn(f64, f64) -> f64, x: (f64, f64), y: (f64, f64), tol: f64) -> f64 {
    let width = (y.1 - y.0).abs().max(1.0);
    integrate(
        |xv| integrate(|yv| f(xv, yv), y.0, y.1, tol / (4.0 * width)),
        x.0,
        x.1,
        tol,
    )
}

/// Maximiser of `f` over a `nx x ny` grid of cell centres on `[x0,x1] x [y0,y1]`.
///
/// Returns `(x, y, f(x, y), cell width in x, cell width in y)`.
pub fn grid_argmax(
    f: impl Fn(f64, f64) -> f64,
    x: (f64, f64),
    y: (f64, f64),
    nx: usize,
    ny: usize,
) -> (f64, f64, f64, f64, f64) {
    let dx = (x.1 - x.0) / nx as f64;
    let dy = (y.1 - y.0) / ny as f64;
    let mut best = (f64::NAN, f64::NAN, f64::NEG_INFINITY);
    for i in 0..nx {
        let xv = x.0 + (i as f64 + 0.5) * dx;
        for j in 0..ny {
            let yv = y.0 + (j as f64 + 0.5) * dy;
            let v = f(xv, yv);
            if v > best.2 {
                best = (xv, yv, v);
            }
        }
    }
    (best.0, best.1, best.2, dx, dy)
}

/// Total-variation distance between two probability vectors.
pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    assert_eq!(p.len(), q.len());
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

/// Empirical frequencies of integer labels in `0..k`.
pub fn histogram(labels: impl IntoIterator<Item = usize>, k: usize) -> Vec<f64> {
    let mut counts = vec![0.0; k];
    let mut total = 0.0;
    for l in labels {
        counts[l] += 1.0;
        total += 1.0;
    }
    counts.iter_mut().for_each(|c| *c /= total);
    counts
}

/// Sample mean and standard error of the mean.
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}
