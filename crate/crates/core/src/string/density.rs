//! Density families for the absolutely continuous part of a string.

use crate::error::{KreinError, Result};
use crate::quad::{gauss8, gauss8_composite};

/// Closed-form or tabulated density on one segment `[lo, hi)`.
#[derive(Debug, Clone, PartialEq)]
pub enum DensityFamily {
    /// `c`
    Constant { c: f64 },
    /// `c * (s - lo)^p`, `p > -1`
    Power { c: f64, p: f64 },
    /// `c * (1 + q s)^r`
    RationalPower { c: f64, q: f64, r: f64 },
    /// `c * exp(q s)`
    Exponential { c: f64, q: f64 },
    /// Linear interpolation between `(s, value)` knots; the first knot sits at
    /// `lo` and the last value is held constant up to `hi`.
    Tabulated { knots: Vec<(f64, f64)> },
}

/// One density piece of a Krein string.
#[derive(Debug, Clone, PartialEq)]
pub struct DensitySegment {
    pub lo: f64,
    /// Upper end; `f64::INFINITY` is allowed for the last segment.
    pub hi: f64,
    pub family: DensityFamily,
}

const SUBDIVISIONS: usize = 60;

impl DensitySegment {
    pub fn new(lo: f64, hi: f64, family: DensityFamily) -> Result<Self> {
        let seg = Self { lo, hi, family };
        seg.validate()?;
        Ok(seg)
    }

    pub fn constant(lo: f64, hi: f64, c: f64) -> Result<Self> {
        Self::new(lo, hi, DensityFamily::Constant { c })
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(KreinError::InvalidString(msg));
        if !(self.lo >= 0.0 && self.lo.is_finite()) {
            return bad(format!("segment lower end {} must be finite and >= 0", self.lo));
        }
        if !(self.hi > self.lo) {
            return bad(format!("segment [{}, {}) is empty", self.lo, self.hi));
        }
        let nonneg = |c: f64| c >= 0.0 && c.is_finite();
        match &self.family {
            DensityFamily::Constant { c } => {
                if !nonneg(*c) {
                    return bad(format!("constant density {c} must be >= 0"));
                }
            }
            DensityFamily::Power { c, p } => {
                if !nonneg(*c) || !(*p > -1.0) || !p.is_finite() {
                    return bad(format!("power density needs c >= 0 and p > -1 (c={c}, p={p})"));
                }
            }
            DensityFamily::RationalPower { c, q, r } => {
                if !nonneg(*c) || !q.is_finite() || !r.is_finite() {
                    return bad("rational-power parameters must be finite, c >= 0".into());
                }
                if 1.0 + q * self.lo <= 0.0 {
                    return bad("rational-power base 1 + q s must be positive at lo".into());
                }
                if self.hi.is_infinite() {
                    if *q < 0.0 {
                        return bad("rational-power base vanishes inside an infinite segment".into());
                    }
                } else if 1.0 + q * self.hi < -1e-12 * (1.0 + (q * self.hi).abs()) {
                    return bad("rational-power base 1 + q s becomes negative before hi".into());
                }
            }
            DensityFamily::Exponential { c, q } => {
                if !nonneg(*c) || !q.is_finite() {
                    return bad("exponential parameters must be finite, c >= 0".into());
                }
            }
            DensityFamily::Tabulated { knots } => {
                if knots.len() < 2 {
                    return bad("tabulated density needs at least two knots".into());
                }
                if (knots[0].0 - self.lo).abs() > 1e-12 * (1.0 + self.lo) {
                    return bad("first tabulated knot must sit at the segment start".into());
                }
                for w in knots.windows(2) {
                    if !(w[1].0 > w[0].0) {
                        return bad("tabulated knots must be strictly increasing".into());
                    }
                }
                if knots.iter().any(|k| !nonneg(k.1) || !k.0.is_finite()) {
                    return bad("tabulated values must be finite and >= 0".into());
                }
                if knots.last().unwrap().0 > self.hi * (1.0 + 1e-12) + 1e-300 {
                    return bad("tabulated knots extend past the segment end".into());
                }
            }
        }
        Ok(())
    }

    /// Density value at `s` (inside the segment).
    pub fn density(&self, s: f64) -> f64 {
        match &self.family {
            DensityFamily::Constant { c } => *c,
            DensityFamily::Power { c, p } => {
                let u = s - self.lo;
                if *p == 0.0 {
                    *c
                } else if u <= 0.0 {
                    if *p > 0.0 {
                        0.0
                    } else {
                        f64::INFINITY
                    }
                } else {
                    c * u.powf(*p)
                }
            }
            DensityFamily::RationalPower { c, q, r } => {
                if *r == 0.0 {
                    *c
                } else {
                    c * self.rational_base(*q, s).powf(*r)
                }
            }
            DensityFamily::Exponential { c, q } => c * (q * s).exp(),
            DensityFamily::Tabulated { knots } => tabulated_value(knots, s),
        }
    }

    /// `1 + q s`, measured from the upper end when that is closer so that the
    /// base keeps its relative accuracy next to a zero at `hi`.
    fn rational_base(&self, q: f64, s: f64) -> f64 {
        if self.hi.is_finite() && 2.0 * s > self.lo + self.hi {
            (1.0 + q * self.hi) - q * (self.hi - s)
        } else {
            1.0 + q * s
        }
    }

    /// Whether the density is infinite at the lower end.
    pub fn singular_at_lo(&self) -> bool {
        matches!(self.family, DensityFamily::Power { c, p } if p < 0.0 && c > 0.0)
    }

    /// Whether the density blows up at the (finite) upper end.
    pub fn singular_at_hi(&self) -> bool {
        match self.family {
            DensityFamily::RationalPower { c, q, r } => {
                c > 0.0 && r < 0.0 && self.hi.is_finite() && (1.0 + q * self.hi).abs() <= 1e-12
            }
            _ => false,
        }
    }

    /// True when the density vanishes identically.
    pub fn is_zero(&self) -> bool {
        match &self.family {
            DensityFamily::Constant { c }
            | DensityFamily::Power { c, .. }
            | DensityFamily::RationalPower { c, .. }
            | DensityFamily::Exponential { c, .. } => *c == 0.0,
            DensityFamily::Tabulated { knots } => knots.iter().all(|k| k.1 == 0.0),
        }
    }

    /// True if the density vanishes on a set of positive length.
    pub fn vanishes_on_interval(&self) -> bool {
        match &self.family {
            DensityFamily::Tabulated { knots } => knots.windows(2).any(|w| w[0].1 == 0.0 && w[1].1 == 0.0),
            _ => self.is_zero(),
        }
    }

    /// `∫_a^b A(s) ds`, closed form (trapezoid for tabulated data).
    pub fn mass(&self, a: f64, b: f64) -> f64 {
        self.power_mass(a, b, 1.0)
    }

    /// `∫_a^b A(s)^k ds` for `k` in {1, 1/2, -1} (any `k` for closed families).
    pub fn power_mass(&self, a: f64, b: f64, k: f64) -> f64 {
        if !(b > a) {
            return 0.0;
        }
        match &self.family {
            DensityFamily::Constant { c } => {
                let ck = if k == 1.0 { *c } else { c.powf(k) };
                if ck == 0.0 {
                    0.0
                } else {
                    ck * (b - a)
                }
            }
            DensityFamily::Power { c, p } => {
                let ck = c.powf(k);
                let e = p * k + 1.0;
                let (ua, ub) = ((a - self.lo).max(0.0), b - self.lo);
                if ck == 0.0 {
                    0.0
                } else if e <= 0.0 && ua == 0.0 {
                    f64::INFINITY
                } else if e == 0.0 {
                    ck * (ub / ua).ln()
                } else if ub.is_infinite() {
                    if e > 0.0 {
                        f64::INFINITY
                    } else {
                        -ck * ua.powf(e) / e
                    }
                } else {
                    ck * (ub.powf(e) - ua.powf(e)) / e
                }
            }
            DensityFamily::RationalPower { c, q, r } => {
                let wb = if b.is_finite() { self.rational_base(*q, b) } else { f64::INFINITY };
                rational_integral(c.powf(k), *q, r * k, a, b, self.rational_base(*q, a), wb)
            }
            DensityFamily::Exponential { c, q } => {
                let ck = c.powf(k);
                let qk = q * k;
                if ck == 0.0 {
                    0.0
                } else if qk == 0.0 {
                    ck * (b - a)
                } else if b.is_infinite() {
                    if qk < 0.0 {
                        ck * (qk * a).exp() / (-qk)
                    } else {
                        f64::INFINITY
                    }
                } else {
                    ck * (qk * a).exp() * (qk * (b - a)).exp_m1() / qk
                }
            }
            DensityFamily::Tabulated { knots } => tabulated_power_mass(knots, a, b, k),
        }
    }

    /// Cell moments `(∫ A, ∫ (s - mid) A)` over `[a, b]`.
    pub fn moments(&self, a: f64, b: f64) -> (f64, f64) {
        let h = b - a;
        let mid = 0.5 * (a + b);
        let m0 = self.mass(a, b);
        if let DensityFamily::Power { c, p } = self.family {
            let ua = (a - self.lo).max(0.0);
            if ua < h {
                let ub = b - self.lo;
                let first = c * (ub.powf(p + 2.0) - ua.powf(p + 2.0)) / (p + 2.0);
                let umid = mid - self.lo;
                return (m0, first - umid * m0);
            }
        }
        if let DensityFamily::Constant { .. } = self.family {
            return (m0, 0.0);
        }
        let m1 = self.integrate(a, b, |s| s - mid);
        (m0, m1)
    }

    /// `∫_a^b g(s) A(s) ds` with graded sub-cells near endpoint singularities.
    pub fn integrate(&self, a: f64, b: f64, mut g: impl FnMut(f64) -> f64) -> f64 {
        self.integrate_dyn(a, b, &mut g)
    }

    fn integrate_dyn(&self, a: f64, b: f64, g: &mut dyn FnMut(f64) -> f64) -> f64 {
        if !(b > a) || self.is_zero() {
            return 0.0;
        }
        if let DensityFamily::Tabulated { knots } = &self.family {
            // split at interior knots, where the interpolant has kinks
            let mut acc = 0.0;
            let mut lo = a;
            for &(x, _) in knots.iter() {
                if x > lo && x < b {
                    acc += gauss8(lo, x, |s| g(s) * self.density(s));
                    lo = x;
                }
            }
            return acc + gauss8(lo, b, |s| g(s) * self.density(s));
        }
        let h = b - a;
        let near_lo = self.singular_at_lo() && (a - self.lo) < 2.0 * h;
        let near_hi = self.singular_at_hi() && (self.hi - b) < 2.0 * h;
        match (near_lo, near_hi) {
            (false, false) => gauss8(a, b, |s| g(s) * self.density(s)),
            (true, true) => {
                let mid = 0.5 * (a + b);
                self.integrate_dyn(a, mid, g) + self.integrate_dyn(mid, b, g)
            }
            (true, false) => {
                let offset = a - self.lo;
                let mut acc = 0.0;
                let mut d = h;
                for _ in 0..SUBDIVISIONS {
                    let half = 0.5 * d;
                    // past this point rounded nodes cost more than the midpoint rule
                    if half < 1e-10 * a.abs() || a + half == a {
                        break;
                    }
                    acc += gauss8_composite(a + half, a + d, 2, |s| g(s) * self.density(s));
                    d = half;
                    if d < 0.5 * offset {
                        return acc + gauss8(a, a + d, |s| g(s) * self.density(s));
                    }
                }
                acc + g(a + 0.5 * d) * self.mass(a, a + d)
            }
            (false, true) => {
                let offset = self.hi - b;
                let mut acc = 0.0;
                let mut d = h;
                for _ in 0..SUBDIVISIONS {
                    let half = 0.5 * d;
                    if half < 1e-10 * b.abs() || b - half == b {
                        break;
                    }
                    acc += gauss8_composite(b - d, b - half, 2, |s| g(s) * self.density(s));
                    d = half;
                    if d < 0.5 * offset {
                        return acc + gauss8(b - d, b, |s| g(s) * self.density(s));
                    }
                }
                acc + g(b - 0.5 * d) * self.mass(b - d, b)
            }
        }
    }

    /// Tabulated knot positions strictly inside the segment.
    pub fn interior_knots(&self) -> Vec<f64> {
        match &self.family {
            DensityFamily::Tabulated { knots } => knots
                .iter()
                .map(|k| k.0)
                .filter(|&x| x > self.lo && x < self.hi)
                .collect(),
            _ => Vec::new(),
        }
    }
}

/// `∫_a^b c (1 + q s)^r ds` computed without cancellation; `wa`, `wb` are the
/// bases at the ends.
fn rational_integral(c: f64, q: f64, r: f64, a: f64, b: f64, wa: f64, wb: f64) -> f64 {
    if c == 0.0 {
        return 0.0;
    }
    if q == 0.0 || r == 0.0 {
        return c * (b - a);
    }
    if b.is_infinite() {
        // q > 0 guaranteed by validation
        return if r < -1.0 {
            c * wa.powf(r + 1.0) / (-q * (r + 1.0))
        } else {
            f64::INFINITY
        };
    }
    let ratio = wb / wa;
    let l = if ratio < 0.5 { ratio.max(0.0).ln() } else { (q * (b - a) / wa).ln_1p() };
    if r == -1.0 {
        c * l / q
    } else {
        c * wa.powf(r + 1.0) * ((r + 1.0) * l).exp_m1() / (q * (r + 1.0))
    }
}

pub(crate) fn tabulated_value(knots: &[(f64, f64)], s: f64) -> f64 {
    let last = knots[knots.len() - 1];
    if s >= last.0 {
        return last.1;
    }
    if s <= knots[0].0 {
        return knots[0].1;
    }
    let i = knots.partition_point(|k| k.0 <= s);
    let (x0, v0) = knots[i - 1];
    let (x1, v1) = knots[i];
    v0 + (v1 - v0) * (s - x0) / (x1 - x0)
}

/// `∫ v^k` over a piece where `v` is linear from `v0` to `v1`.
fn linear_power_integral(len: f64, v0: f64, v1: f64, k: f64) -> f64 {
    if len <= 0.0 {
        return 0.0;
    }
    if k == 1.0 {
        return 0.5 * len * (v0 + v1);
    }
    let scale = v0.abs().max(v1.abs());
    if (v1 - v0).abs() <= 1e-6 * scale {
        let m = 0.5 * (v0 + v1);
        return len * m.powf(k);
    }
    if k == -1.0 {
        len * (v1 / v0).ln() / (v1 - v0)
    } else {
        len * (v1.powf(k + 1.0) - v0.powf(k + 1.0)) / ((k + 1.0) * (v1 - v0))
    }
}

fn tabulated_power_mass(knots: &[(f64, f64)], a: f64, b: f64, k: f64) -> f64 {
    let mut acc = 0.0;
    for w in knots.windows(2) {
        let (x0, x1) = (w[0].0.max(a), w[1].0.min(b));
        if x1 > x0 {
            let v0 = tabulated_value(knots, x0);
            let v1 = tabulated_value(knots, x1);
            acc += linear_power_integral(x1 - x0, v0, v1, k);
        }
    }
    let last = knots[knots.len() - 1];
    if b > last.0 {
        let x0 = a.max(last.0);
        if last.1 == 0.0 {
            if k <= 0.0 {
                return f64::INFINITY;
            }
        } else if b.is_infinite() {
            return f64::INFINITY;
        } else {
            acc += (b - x0) * last.1.powf(k);
        }
    }
    acc
}
