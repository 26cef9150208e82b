//! Shifted strings: the coefficient `b(t) = a(t) φ_μ(σ(t))²` whose
//! characteristic is `ψ(μ + λ) - ψ(μ)`.

use super::coefficient::mixed_knots;
use super::{from_coefficient_a, CoefficientA, DensityFamily, DensitySegment, EndCondition};
use crate::error::{domain, Result};
use crate::ode;

/// Tabulates `b(t)` on `n_knots` knots. The result has finite length and a
/// Neumann end (beyond the last knot `b` is negligible).
pub fn shift_string(coeff: &CoefficientA, mu: f64, n_knots: usize) -> Result<CoefficientA> {
    if !(mu >= 0.0) || !mu.is_finite() {
        return domain(format!("shift μ = {mu} must be nonnegative"));
    }
    let string = from_coefficient_a(coeff, n_knots)?;
    if mu == 0.0 && string.end() != EndCondition::DirichletAtR {
        return Ok(coeff.clone());
    }
    let phi_at = |sol: Option<&ode::Solution>, s: f64| -> f64 {
        match sol {
            Some(sol) => sol.eval(s).0,
            None => 1.0 - ode::psi_at_zero(&string) * s,
        }
    };
    let sol = if mu > 0.0 { Some(ode::solve(&string, mu)?) } else { None };
    let t_max = if coeff.length().is_finite() {
        coeff.length()
    } else {
        // σ(t_max) reaches the end of the computed solution
        let target = sol.as_ref().map(|s| s.reach(1e-12)).unwrap_or(string.length()).min(string.length());
        let mut hi = 1.0;
        while coeff.sigma(hi) < target && hi < 1e12 {
            hi *= 2.0;
        }
        let mut lo = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if coeff.sigma(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    };
    let ts = mixed_knots(0.0, t_max, n_knots);
    let mut knots: Vec<(f64, f64)> = ts
        .iter()
        .map(|&t| {
            let p = phi_at(sol.as_ref(), coeff.sigma(t).min(string.length()));
            (t, coeff.value(t) * p * p)
        })
        .collect();
    if !knots[0].1.is_finite() {
        knots[0].1 = knots[1].1;
    }
    let last = knots.len() - 1;
    if !knots[last].1.is_finite() {
        knots[last].1 = 0.0;
    }
    let seg = DensitySegment::new(0.0, t_max, DensityFamily::Tabulated { knots })?;
    CoefficientA::new(vec![seg], t_max, Some(EndCondition::NeumannAtR))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classical_shift_by_one() {
        let a = CoefficientA::single(DensityFamily::Constant { c: 1.0 }, f64::INFINITY, None).unwrap();
        let b = shift_string(&a, 1.0, 2000).unwrap();
        let DensityFamily::Tabulated { knots } = &b.segments()[0].family else { panic!() };
        for &(t, v) in knots.iter().step_by(7) {
            assert!((v - (-2.0 * t).exp()).abs() < 1e-9, "{t}: {v}");
        }
        let s = from_coefficient_a(&b, 2000).unwrap();
        for &l in &[0.5, 3.0] {
            let got = ode::psi_default(&s, l).unwrap();
            let expect = (1.0f64 + l).sqrt() - 1.0;
            assert!((got / expect - 1.0).abs() < 2e-4, "{l}: {got} vs {expect}");
        }
    }

    #[test]
    fn zero_shift_is_identity() {
        let a = CoefficientA::single(DensityFamily::Constant { c: 1.0 }, f64::INFINITY, None).unwrap();
        assert_eq!(shift_string(&a, 0.0, 10).unwrap(), a);
        assert!(shift_string(&a, -1.0, 10).is_err());
    }
}
