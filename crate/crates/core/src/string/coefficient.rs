//! The change of variable `a(t) ↔ A(s)` with `s = σ(t) = ∫_0^t 1/a`.

use super::{DensityFamily, DensitySegment, EndCondition, KreinString};
use crate::error::{KreinError, Result};

/// Coefficient `a(t) ≥ 0` on `[0, r)`, stored as segments in the `t` variable.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientA {
    segments: Vec<DensitySegment>,
    length: f64,
    end: Option<EndCondition>,
}

impl CoefficientA {
    /// `end` overrides the inferred end condition of the pushed-forward string
    /// (used to impose Dirichlet on an integrable coefficient).
    pub fn new(mut segments: Vec<DensitySegment>, length: f64, end: Option<EndCondition>) -> Result<Self> {
        let bad = |m: String| Err(KreinError::InvalidCoefficient(m));
        if !(length > 0.0) {
            return bad(format!("coefficient length {length} must be positive"));
        }
        if segments.is_empty() {
            return bad("coefficient needs at least one segment".into());
        }
        segments.sort_by(|a, b| a.lo.total_cmp(&b.lo));
        let mut cursor = 0.0;
        for seg in &segments {
            seg.validate().map_err(|e| KreinError::InvalidCoefficient(e.to_string()))?;
            if (seg.lo - cursor).abs() > 1e-12 * (1.0 + cursor) {
                return bad(format!("coefficient segments must tile [0, r); gap or overlap at t = {}", seg.lo));
            }
            cursor = seg.hi;
        }
        if (cursor - length).abs() > 1e-12 * (1.0 + length.min(1e300)) && cursor != length {
            return bad(format!("segments end at {cursor}, expected r = {length}"));
        }
        let n = segments.len();
        for (i, seg) in segments.iter().enumerate() {
            // 1/a must be integrable on every [0, T] with T < r
            let top = if i + 1 < n {
                seg.hi
            } else if seg.hi.is_finite() {
                0.5 * (seg.lo + seg.hi)
            } else {
                seg.lo + 1.0
            };
            let inv = seg.power_mass(seg.lo, top, -1.0);
            if !inv.is_finite() || seg.vanishes_on_interval() {
                return bad(format!("1/a is not integrable near t = {}", seg.lo));
            }
        }
        Ok(Self { segments, length, end })
    }

    pub fn single(family: DensityFamily, length: f64, end: Option<EndCondition>) -> Result<Self> {
        Self::new(vec![DensitySegment::new(0.0, length, family)?], length, end)
    }

    pub fn segments(&self) -> &[DensitySegment] {
        &self.segments
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn end_override(&self) -> Option<EndCondition> {
        self.end
    }

    fn segment_index(&self, t: f64) -> usize {
        self.segments.partition_point(|s| s.hi <= t).min(self.segments.len() - 1)
    }

    pub fn value(&self, t: f64) -> f64 {
        self.segments[self.segment_index(t)].density(t)
    }

    /// `σ(t) = ∫_0^t du / a(u)`.
    pub fn sigma(&self, t: f64) -> f64 {
        let mut acc = 0.0;
        for seg in &self.segments {
            if seg.lo >= t {
                break;
            }
            acc += seg.power_mass(seg.lo, seg.hi.min(t), -1.0);
        }
        acc
    }

    fn integrable(&self) -> bool {
        self.segments.iter().map(|s| s.mass(s.lo, s.hi)).sum::<f64>().is_finite()
    }
}

/// Knots on `[t0, t1]`: half uniform, half geometric towards `t0`.
pub(crate) fn mixed_knots(t0: f64, t1: f64, n: usize) -> Vec<f64> {
    let n = n.max(4);
    let len = t1 - t0;
    let half = n / 2;
    let mut pts = Vec::with_capacity(n + 2);
    pts.push(t0);
    for i in 1..=half {
        pts.push(t0 + len * i as f64 / half as f64);
    }
    let geo = n - half;
    let ratio = 1e-6f64.powf(1.0 / geo as f64);
    let mut d = len;
    for _ in 0..geo {
        d *= ratio;
        pts.push(t0 + d);
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * (1.0 + b.abs()));
    *pts.last_mut().unwrap() = t1;
    pts
}

/// Push-forward of one coefficient segment starting at `sigma0`.
fn push_forward(seg: &DensitySegment, sigma0: f64, n_knots: usize) -> Result<DensitySegment> {
    let t0 = seg.lo;
    let sigma1 = sigma0 + seg.power_mass(seg.lo, seg.hi, -1.0);
    let closed = match seg.family {
        DensityFamily::Constant { c } => Some(DensityFamily::Constant { c: c * c }),
        DensityFamily::Power { c, p } if p == 0.0 => Some(DensityFamily::Constant { c: c * c }),
        DensityFamily::Power { c, p } => {
            let e = 2.0 * p / (1.0 - p);
            Some(DensityFamily::Power { c: c * c * (c * (1.0 - p)).powf(e), p: e })
        }
        DensityFamily::RationalPower { c, q, r } if q == 0.0 || r == 0.0 => {
            Some(DensityFamily::Constant { c: c * c * (1.0 + q * t0).powf(2.0 * r) })
        }
        DensityFamily::RationalPower { c, q, r } if r == 1.0 => {
            let w0 = 1.0 + q * t0;
            let rate = c * q;
            Some(DensityFamily::Exponential { c: c * c * w0 * w0 * (-2.0 * rate * sigma0).exp(), q: 2.0 * rate })
        }
        DensityFamily::RationalPower { c, q, r } => {
            let w0 = 1.0 + q * t0;
            let kappa = c * q * (1.0 - r);
            let k = w0.powf(1.0 - r) - kappa * sigma0;
            let rp = 2.0 * r / (1.0 - r);
            (k > 0.0 && k.is_finite()).then(|| DensityFamily::RationalPower { c: c * c * k.powf(rp), q: kappa / k, r: rp })
        }
        DensityFamily::Exponential { c, q } if q == 0.0 => Some(DensityFamily::Constant { c: c * c }),
        DensityFamily::Exponential { c, q } => {
            let k = (-q * t0).exp() + c * q * sigma0;
            (k > 0.0 && k.is_finite()).then(|| DensityFamily::RationalPower { c: c * c / (k * k), q: -c * q / k, r: -2.0 })
        }
        DensityFamily::Tabulated { .. } => None,
    };
    if let Some(family) = closed {
        return DensitySegment::new(sigma0, sigma1, family);
    }
    // numeric push-forward on refined t-knots
    let t_knots: Vec<f64> = match &seg.family {
        DensityFamily::Tabulated { knots } => {
            let pieces = knots.len() - 1;
            let m = (n_knots / pieces).max(1);
            let mut v = vec![knots[0].0];
            for w in knots.windows(2) {
                for j in 1..=m {
                    v.push(w[0].0 + (w[1].0 - w[0].0) * j as f64 / m as f64);
                }
            }
            v
        }
        _ => {
            if !seg.hi.is_finite() {
                return Err(KreinError::NotRepresentable(
                    "push-forward leaves the closed families on an infinite segment".into(),
                ));
            }
            mixed_knots(t0, seg.hi, n_knots)
        }
    };
    let mut knots = Vec::with_capacity(t_knots.len());
    let mut s = sigma0;
    let mut prev = t0;
    for &t in &t_knots {
        s += seg.power_mass(prev, t, -1.0);
        prev = t;
        let a = seg.density(t);
        knots.push((s, a * a));
    }
    if !s.is_finite() {
        return Err(KreinError::InvalidCoefficient("σ diverges inside the coefficient".into()));
    }
    knots.dedup_by(|a, b| a.0 <= b.0);
    DensitySegment::new(sigma0, sigma1.max(s), DensityFamily::Tabulated { knots })
}

/// String with density `A(σ(t)) = a(t)²` and length `R = σ(r⁻)`.
pub fn from_coefficient_a(coeff: &CoefficientA, n_knots: usize) -> Result<KreinString> {
    let mut segments = Vec::with_capacity(coeff.segments.len());
    let mut sigma = 0.0;
    for (i, seg) in coeff.segments.iter().enumerate() {
        let pushed = push_forward(seg, sigma, n_knots)?;
        sigma = pushed.hi;
        if !sigma.is_finite() && i + 1 < coeff.segments.len() {
            return Err(KreinError::InvalidCoefficient(format!("σ(t) infinite at t = {}", seg.hi)));
        }
        segments.push(pushed);
    }
    let length = sigma;
    let end = match coeff.end {
        Some(e) => e,
        None if length.is_infinite() => EndCondition::Natural,
        None if coeff.integrable() => EndCondition::NeumannAtR,
        None => EndCondition::DirichletAtR,
    };
    KreinString::new(segments, Vec::new(), length, Some(end))
}

/// Tabulated `a(t) = √A(σ(t))` obtained by bisection on `t(s) = ∫_0^s √A`.
pub fn to_coefficient_a(string: &KreinString, n_knots: usize) -> Result<CoefficientA> {
    if !string.atoms().is_empty() {
        return Err(KreinError::NotRepresentable("atoms have no coefficient counterpart".into()));
    }
    if string.segments().iter().any(|s| s.vanishes_on_interval()) {
        return Err(KreinError::NotRepresentable("density vanishes on an interval".into()));
    }
    let mut out = Vec::with_capacity(string.segments().len());
    let mut tau0 = 0.0;
    let nseg = string.segments().len();
    for (i, seg) in string.segments().iter().enumerate() {
        let tau1 = tau0 + seg.power_mass(seg.lo, seg.hi, 0.5);
        if !tau1.is_finite() && i + 1 < nseg {
            return Err(KreinError::NotRepresentable(format!("∫√A diverges before s = {}", seg.hi)));
        }
        // the tabulation stops short of singular or infinite ends and holds
        let s_cap = if seg.hi.is_infinite() {
            (seg.lo + 100.0).max(10.0 * seg.lo)
        } else if seg.singular_at_hi() || !tau1.is_finite() {
            seg.hi - 1e-6 * (seg.hi - seg.lo)
        } else {
            seg.hi
        };
        let t_top = tau0 + seg.power_mass(seg.lo, s_cap, 0.5);
        let ts = mixed_knots(tau0, t_top, n_knots);
        let mut knots = Vec::with_capacity(ts.len());
        for &t in &ts {
            let s = invert_sqrt_mass(seg, t - tau0, s_cap);
            knots.push((t, seg.density(s).sqrt()));
        }
        if !knots[0].1.is_finite() {
            knots[0].1 = knots[1].1;
        }
        out.push(DensitySegment::new(tau0, tau1, DensityFamily::Tabulated { knots })?);
        tau0 = tau1;
    }
    let end = string.length().is_finite().then(|| string.end());
    CoefficientA::new(out, tau0, end)
}

/// Solves `∫_lo^s √A = target` for `s ∈ [lo, s_cap]`.
fn invert_sqrt_mass(seg: &DensitySegment, target: f64, s_cap: f64) -> f64 {
    if target <= 0.0 {
        return seg.lo;
    }
    let (mut a, mut b) = (seg.lo, s_cap);
    for _ in 0..400 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b || b - a <= 1e-12 {
            break;
        }
        if seg.power_mass(seg.lo, mid, 0.5) < target {
            a = mid;
        } else {
            b = mid;
        }
    }
    0.5 * (a + b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_change_of_variable() {
        let a = CoefficientA::single(DensityFamily::Constant { c: 1.0 }, f64::INFINITY, None).unwrap();
        let s = from_coefficient_a(&a, 64).unwrap();
        assert!(s.length().is_infinite());
        assert_eq!(s.segments()[0].family, DensityFamily::Constant { c: 1.0 });
    }

    #[test]
    fn exponential_coefficient_gives_quasi_relativistic_density() {
        let a = CoefficientA::single(DensityFamily::Exponential { c: 1.0, q: -2.0 }, f64::INFINITY, None).unwrap();
        let s = from_coefficient_a(&a, 64).unwrap();
        assert!(s.length().is_infinite());
        for &x in &[0.0f64, 0.3, 1.0, 7.0] {
            let expect = (1.0 + 2.0 * x).powi(-2);
            assert!((s.density(x) / expect - 1.0).abs() < 1e-14, "{x}");
        }
    }

    #[test]
    fn fractional_power_push_forward() {
        let alpha: f64 = 0.6;
        let ca = 1.7;
        let a = CoefficientA::single(
            DensityFamily::Power { c: ca / alpha, p: 1.0 - alpha },
            f64::INFINITY,
            None,
        )
        .unwrap();
        let s = from_coefficient_a(&a, 64).unwrap();
        for &x in &[0.1f64, 1.0, 3.0] {
            let expect = alpha.powi(-2) * ca.powf(2.0 / alpha) * x.powf(2.0 / alpha - 2.0);
            assert!((s.density(x) / expect - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn finite_dual_coefficient() {
        let a = CoefficientA::single(DensityFamily::Exponential { c: 1.0, q: 2.0 }, f64::INFINITY, None).unwrap();
        let s = from_coefficient_a(&a, 64).unwrap();
        assert!((s.length() - 0.5).abs() < 1e-15);
        assert_eq!(s.end(), EndCondition::DirichletAtR);
        assert!((s.density(0.25) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn inverse_change_of_variable_tabulates_exponential() {
        let s = KreinString::single(DensityFamily::RationalPower { c: 1.0, q: 2.0, r: -2.0 }, f64::INFINITY, None).unwrap();
        let a = to_coefficient_a(&s, 200).unwrap();
        let DensityFamily::Tabulated { knots } = &a.segments()[0].family else { panic!() };
        let worst = knots.iter().map(|&(t, v)| (v / (-2.0 * t).exp() - 1.0).abs()).fold(0.0, f64::max);
        assert!(worst < 1e-6, "{worst}");

        let fd = KreinString::single(DensityFamily::RationalPower { c: 1.0, q: -2.0, r: -2.0 }, 0.5, None).unwrap();
        let b = to_coefficient_a(&fd, 200).unwrap();
        assert!(b.length().is_infinite());
        let DensityFamily::Tabulated { knots } = &b.segments()[0].family else { panic!() };
        let worst = knots.iter().map(|&(t, v)| (v / (2.0 * t).exp() - 1.0).abs()).fold(0.0, f64::max);
        assert!(worst < 1e-6, "{worst}");
    }

    #[test]
    fn atoms_are_not_representable() {
        let s = KreinString::new(vec![], vec![super::super::Atom { s: 1.0, mass: 1.0 }], f64::INFINITY, None).unwrap();
        assert!(matches!(to_coefficient_a(&s, 10), Err(KreinError::NotRepresentable(_))));
    }

    #[test]
    fn nonintegrable_reciprocal_rejected() {
        assert!(CoefficientA::single(DensityFamily::Power { c: 1.0, p: 1.0 }, 1.0, None).is_err());
    }
}
