#![allow(dead_code)]

use krein::string::{DensityFamily, DensitySegment, KreinString};

pub fn rel(a: f64, b: f64) -> f64 {
    (a / b - 1.0).abs()
}

pub fn classical() -> KreinString {
    KreinString::single(DensityFamily::Constant { c: 1.0 }, f64::INFINITY, None).unwrap()
}

/// Density `c1` on `[0, l)` and `c2` beyond.
pub fn two_layer(c1: f64, l: f64, c2: f64) -> KreinString {
    KreinString::new(
        vec![
            DensitySegment::constant(0.0, l, c1).unwrap(),
            DensitySegment::constant(l, f64::INFINITY, c2).unwrap(),
        ],
        vec![],
        f64::INFINITY,
        None,
    )
    .unwrap()
}

/// Closed form of ψ for [`two_layer`]: match `φ'/φ = -k2` at `l`.
pub fn two_layer_psi(c1: f64, l: f64, c2: f64, lambda: f64) -> f64 {
    let (k1, k2) = ((lambda * c1).sqrt(), (lambda * c2).sqrt());
    let (c, s) = ((k1 * l).cosh(), (k1 * l).sinh());
    k1 * (k1 * s + k2 * c) / (k1 * c + k2 * s)
}
