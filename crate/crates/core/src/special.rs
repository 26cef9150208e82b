//! Modified Bessel functions of real order and the Gamma function.
//!
//! `I_ν` uses the power series up to `x = 50` and the large-argument
//! expansion beyond. `K_ν` uses the integral `∫_0^∞ e^{-x cosh t} cosh(νt) dt`
//! evaluated by the trapezoid rule, which converges geometrically for this
//! analytic, doubly-exponentially decaying integrand.

pub use statrs::function::gamma::{gamma, ln_gamma};

const SERIES_LIMIT: f64 = 50.0;

fn is_negative_integer(nu: f64) -> bool {
    nu < 0.0 && nu == nu.round()
}

/// `e^{-x} I_ν(x)` for `x ≥ 0`.
pub fn bessel_i_scaled(nu: f64, x: f64) -> f64 {
    assert!(x >= 0.0 && nu.is_finite(), "bessel_i_scaled: x = {x}, ν = {nu}");
    let nu = if is_negative_integer(nu) { -nu } else { nu };
    if x == 0.0 {
        return if nu == 0.0 {
            1.0
        } else if nu > 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
    }
    if x <= SERIES_LIMIT {
        i_series_scaled(nu, x)
    } else {
        i_asymptotic_scaled(nu, x)
    }
}

fn i_series_scaled(nu: f64, x: f64) -> f64 {
    let q = 0.25 * x * x;
    let g = gamma(nu + 1.0);
    let mut term = (nu * (0.5 * x).ln() - x).exp() / g;
    let mut sum = term;
    for k in 1..2000 {
        let kf = k as f64;
        term *= q / (kf * (kf + nu));
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() && kf > q.sqrt() {
            break;
        }
    }
    sum
}

fn i_asymptotic_scaled(nu: f64, x: f64) -> f64 {
    let mu = 4.0 * nu * nu;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..60 {
        let odd = (2 * k - 1) as f64;
        let next = -term * (mu - odd * odd) / (8.0 * k as f64 * x);
        if next.abs() > term.abs() {
            break;
        }
        term = next;
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum / (2.0 * std::f64::consts::PI * x).sqrt()
}

/// `I_ν(x)`; overflows to +∞ past `x ≈ 700`, where the scaled form should be used.
pub fn bessel_i(nu: f64, x: f64) -> f64 {
    bessel_i_scaled(nu, x) * x.exp()
}

/// `e^{x} K_ν(x)` for `x > 0`.
pub fn bessel_k_scaled(nu: f64, x: f64) -> f64 {
    assert!(x > 0.0 && nu.is_finite(), "bessel_k_scaled: x = {x}, ν = {nu}");
    let nu = nu.abs();
    // e^{-x(cosh t - 1)} = e^{-2x sinh²(t/2)}, summed until the tail is negligible
    // the peak at t = 0 has width ~ x^{-1/2}
    let h = 0.05f64.min(0.3 / x.sqrt());
    let f = |t: f64| {
        let sh = (0.5 * t).sinh();
        (-2.0 * x * sh * sh).exp() * (nu * t).cosh()
    };
    let mut sum = 0.5 * f(0.0);
    let mut k = 1;
    loop {
        let v = f(k as f64 * h);
        sum += v;
        if v < 1e-18 * sum || k > 20_000 {
            break;
        }
        k += 1;
    }
    sum * h
}

/// `K_ν(x)`; underflows to 0 past `x ≈ 700`.
pub fn bessel_k(nu: f64, x: f64) -> f64 {
    bessel_k_scaled(nu, x) * (-x).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn rel(a: f64, b: f64) -> f64 {
        (a / b - 1.0).abs()
    }

    #[test]
    fn half_integer_closed_forms() {
        assert!((bessel_k(0.5, 1.0) - 0.4610685).abs() < 1e-7);
        assert!((bessel_i(0.5, 1.0) - 0.9376748).abs() < 1e-7);
        for &x in &[1e-6, 1e-3, 0.3, 1.0, 7.5, 30.0, 49.9, 50.1, 120.0] {
            let pre = (2.0 / (PI * x)).sqrt();
            // e^{-x} sinh x and e^{-x} cosh x without cancellation
            let sinh_s = 0.5 * (-(-2.0 * x).exp_m1());
            let cosh_s = 0.5 * (1.0 + (-2.0 * x).exp());
            assert!(rel(bessel_i_scaled(0.5, x), pre * sinh_s) < 1e-12, "I_1/2({x})");
            assert!(rel(bessel_i_scaled(-0.5, x), pre * cosh_s) < 1e-12, "I_-1/2({x})");
            let k_half = (PI / (2.0 * x)).sqrt();
            assert!(rel(bessel_k_scaled(0.5, x), k_half) < 1e-12, "K_1/2({x})");
            assert!(rel(bessel_k_scaled(1.5, x), k_half * (1.0 + 1.0 / x)) < 1e-12, "K_3/2({x})");
        }
    }

    #[test]
    fn wronskian_across_crossover() {
        // I_ν K_{ν+1} + I_{ν+1} K_ν = 1/x
        for &nu in &[0.0, 0.3, 0.75, 1.0] {
            for &x in &[1e-4, 0.2, 2.0, 20.0, 49.0, 51.0, 300.0] {
                let w = bessel_i_scaled(nu, x) * bessel_k_scaled(nu + 1.0, x)
                    + bessel_i_scaled(nu + 1.0, x) * bessel_k_scaled(nu, x);
                assert!(rel(w * x, 1.0) < 1e-12, "ν = {nu}, x = {x}: {}", w * x);
            }
        }
    }

    #[test]
    fn small_argument_limit_and_symmetry() {
        for &nu in &[0.25, 0.5, 0.9] {
            let x: f64 = 1e-6;
            let lead = 2f64.powf(nu - 1.0) * gamma(nu);
            // next correction is O(x^{2ν})
            assert!(rel(x.powf(nu) * bessel_k(nu, x), lead) < 4.0 * x.powf(2.0 * nu), "ν = {nu}");
        }
        assert_eq!(bessel_i_scaled(-2.0, 3.0), bessel_i_scaled(2.0, 3.0));
        assert_eq!(bessel_k_scaled(-0.3, 3.0), bessel_k_scaled(0.3, 3.0));
        assert!(rel(gamma(-0.5), -2.0 * PI.sqrt()) < 1e-14);
    }

    #[test]
    fn integer_order_reference_values() {
        // I_0(1), I_1(1), K_0(1), K_1(1)
        assert!(rel(bessel_i(0.0, 1.0), 1.2660658777520082) < 1e-14);
        assert!(rel(bessel_i(1.0, 1.0), 0.5651591039924851) < 1e-14);
        assert!(rel(bessel_k(0.0, 1.0), 0.42102443824070834) < 1e-13);
        assert!(rel(bessel_k(1.0, 1.0), 0.6019072301972346) < 1e-13);
    }
}
