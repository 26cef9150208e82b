//! Fixed Gauss-Legendre rules used by the cell-wise quadratures.

/// Nodes of the 8-point Gauss-Legendre rule on [-1, 1] (positive half).
const GL8_X: [f64; 4] = [
    0.183_434_642_495_649_8,
    0.525_532_409_916_329_0,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL8_W: [f64; 4] = [
    0.362_683_783_378_362_0,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

/// Integrates `f` over [a, b] with the 8-point Gauss-Legendre rule.
pub fn gauss8(a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = 0.0;
    for (x, w) in GL8_X.iter().zip(GL8_W.iter()) {
        acc += w * (f(mid - half * x) + f(mid + half * x));
    }
    acc * half
}

/// Nodes and weights of the 8-point rule mapped to [a, b].
pub fn gauss8_points(a: f64, b: f64) -> [(f64, f64); 8] {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut out = [(0.0, 0.0); 8];
    for i in 0..4 {
        out[2 * i] = (mid - half * GL8_X[i], half * GL8_W[i]);
        out[2 * i + 1] = (mid + half * GL8_X[i], half * GL8_W[i]);
    }
    out
}

/// Composite Gauss-Legendre over `pieces` equal sub-intervals.
pub fn gauss8_composite(a: f64, b: f64, pieces: usize, mut f: impl FnMut(f64) -> f64) -> f64 {
    let pieces = pieces.max(1);
    let h = (b - a) / pieces as f64;
    (0..pieces)
        .map(|i| {
            let lo = a + h * i as f64;
            let hi = if i + 1 == pieces { b } else { lo + h };
            gauss8(lo, hi, &mut f)
        })
        .sum()
}

/// Gauss-Legendre on sub-intervals halving towards one end, for integrands
/// with an endpoint singularity in their derivatives.
pub fn graded_gauss(a: f64, b: f64, toward_a: bool, mut f: impl FnMut(f64) -> f64) -> f64 {
    let mut acc = 0.0;
    let mut d = b - a;
    for _ in 0..60 {
        let half = 0.5 * d;
        acc += if toward_a {
            gauss8(a + half, a + d, &mut f)
        } else {
            gauss8(b - d, b - half, &mut f)
        };
        d = half;
    }
    acc + if toward_a { gauss8(a, a + d, &mut f) } else { gauss8(b - d, b, &mut f) }
}
