//! Gauss–Legendre rules on [a, b].

const GL5_NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683,
    0.0,
    0.538_469_310_105_683,
    0.906_179_845_938_664,
];
const GL5_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189_1,
    0.478_628_670_499_366_5,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
];

/// Five-point Gauss–Legendre on a single interval.
pub fn gauss5<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    let m = 0.5 * (a + b);
    let r = 0.5 * (b - a);
    let mut s = 0.0;
    for k in 0..5 {
        s += GL5_WEIGHTS[k] * f(m + r * GL5_NODES[k]);
    }
    s * r
}

/// Composite five-point rule with `n` equal panels.
pub fn composite_gauss5<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let n = n.max(1);
    let h = (b - a) / n as f64;
    (0..n)
        .map(|i| {
            let x0 = a + h * i as f64;
            gauss5(&f, x0, x0 + h)
        })
        .sum()
}

/// Adaptive bisection of the five-point rule until the two halves agree
/// with the whole to `tol` (absolute), or `depth` levels are used.
pub fn adaptive_gauss5<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    fn rec<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let l = gauss5(f, a, m);
        let r = gauss5(f, m, b);
        if depth == 0 || (l + r - whole).abs() <= tol {
            return l + r;
        }
        rec(f, a, m, l, 0.5 * tol, depth - 1) + rec(f, m, b, r, 0.5 * tol, depth - 1)
    }
    let whole = gauss5(&f, a, b);
    rec(&f, a, b, whole, tol, 30)
}
