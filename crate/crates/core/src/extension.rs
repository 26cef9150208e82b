//! Harmonic extension to the half-space, the Dirichlet-to-Neumann operator
//! and the two quadratic forms, on a periodic grid over `[-X, X)`.
//!
//! Transforms are unitary (`f̂ = DFT(f)/√n`). Forms carry the spacing `dx`,
//! so `‖f‖² = dx Σ|f_k|²` approximates the continuous L² norm.

use std::fmt::Write as _;
use std::sync::Arc;

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::catalog::CatalogEntry;
use crate::error::{domain, Result};
use crate::ode;
use crate::string::KreinString;

#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    pub half_length: f64,
    pub values: Vec<f64>,
}

fn check_grid(n: usize, half_length: f64) -> Result<()> {
    if n < 8 || !n.is_power_of_two() {
        return domain(format!("grid size {n} must be a power of two ≥ 8"));
    }
    if !(half_length > 0.0) || !half_length.is_finite() {
        return domain(format!("half-length {half_length} must be positive"));
    }
    Ok(())
}

fn fft(values: &[Complex64], inverse: bool) -> Vec<Complex64> {
    let mut planner = FftPlanner::new();
    let plan = if inverse { planner.plan_fft_inverse(values.len()) } else { planner.plan_fft_forward(values.len()) };
    let mut buf = values.to_vec();
    plan.process(&mut buf);
    let scale = 1.0 / (values.len() as f64).sqrt();
    buf.iter_mut().for_each(|z| *z *= scale);
    buf
}

impl GridFunction {
    pub fn new(half_length: f64, values: Vec<f64>) -> Result<Self> {
        check_grid(values.len(), half_length)?;
        if values.iter().any(|v| !v.is_finite()) {
            return domain("grid values must be finite");
        }
        Ok(Self { half_length, values })
    }

    pub fn from_fn(n: usize, half_length: f64, f: impl Fn(f64) -> f64) -> Result<Self> {
        check_grid(n, half_length)?;
        let dx = 2.0 * half_length / n as f64;
        Self::new(half_length, (0..n).map(|k| f(-half_length + k as f64 * dx)).collect())
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.half_length / self.n() as f64
    }

    pub fn x(&self, k: usize) -> f64 {
        -self.half_length + k as f64 * self.dx()
    }

    /// `ξ` for each DFT slot: `π k / X` with `k` in `[-n/2, n/2)`.
    pub fn frequencies(&self) -> Vec<f64> {
        frequencies(self.n(), self.half_length)
    }

    pub fn spectrum(&self) -> Vec<Complex64> {
        let c: Vec<Complex64> = self.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fft(&c, false)
    }

    /// Real part of the inverse unitary transform.
    pub fn from_spectrum(half_length: f64, spec: &[Complex64]) -> Result<Self> {
        Self::new(half_length, fft(spec, true).iter().map(|z| z.re).collect())
    }

    pub fn norm_sq(&self) -> f64 {
        self.dx() * self.values.iter().map(|v| v * v).sum::<f64>()
    }

    pub fn dot(&self, other: &GridFunction) -> f64 {
        self.dx() * self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum::<f64>()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,value\n");
        for (k, v) in self.values.iter().enumerate() {
            let _ = writeln!(out, "{:.16e},{v:.16e}", self.x(k));
        }
        out
    }
}

pub fn frequencies(n: usize, half_length: f64) -> Vec<f64> {
    (0..n)
        .map(|j| {
            let k = if j < n / 2 { j as f64 } else { j as f64 - n as f64 };
            std::f64::consts::PI * k / half_length
        })
        .collect()
}

/// Where the multiplier `ψ` comes from.
#[derive(Clone)]
pub enum PsiSource {
    String(KreinString),
    Catalog(CatalogEntry),
    /// `ψ(λ) = λ`, i.e. `-Δ` itself.
    Laplacian,
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl std::fmt::Debug for PsiSource {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PsiSource::String(_) => f.write_str("PsiSource::String"),
            PsiSource::Catalog(e) => write!(f, "PsiSource::Catalog({})", e.name),
            PsiSource::Laplacian => f.write_str("PsiSource::Laplacian"),
            PsiSource::Custom(_) => f.write_str("PsiSource::Custom"),
        }
    }
}

impl PsiSource {
    pub fn psi(&self, lambda: f64) -> Result<f64> {
        match self {
            PsiSource::String(s) => ode::psi_default(s, lambda),
            PsiSource::Catalog(e) if lambda == 0.0 => Ok(ode::psi_at_zero(&e.string)),
            PsiSource::Catalog(e) => Ok(e.psi(lambda)),
            PsiSource::Laplacian => Ok(lambda),
            PsiSource::Custom(f) => Ok(f(lambda)),
        }
    }

    /// `ψ(ξ²)` in DFT order, one evaluation per distinct `|ξ|`.
    pub fn multipliers(&self, n: usize, half_length: f64) -> Result<Vec<f64>> {
        let half: Vec<f64> = (0..=n / 2)
            .into_par_iter()
            .map(|k| self.psi(mode_lambda(k, half_length)))
            .collect::<Result<_>>()?;
        Ok((0..n).map(|j| half[mode_index(j, n)]).collect())
    }
}

/// `ξ²` of the mode `|k|`.
fn mode_lambda(k: usize, half_length: f64) -> f64 {
    let xi = std::f64::consts::PI * k as f64 / half_length;
    xi * xi
}

/// `|k|` for the DFT slot `j`.
fn mode_index(j: usize, n: usize) -> usize {
    if j <= n / 2 {
        j
    } else {
        n - j
    }
}

/// `ψ(-Δ) f`.
pub fn dtn_apply(source: &PsiSource, f: &GridFunction) -> Result<GridFunction> {
    let m = source.multipliers(f.n(), f.half_length)?;
    let spec: Vec<Complex64> = f.spectrum().iter().zip(&m).map(|(z, w)| z * *w).collect();
    GridFunction::from_spectrum(f.half_length, &spec)
}

/// `E(f, f) = ∫ ψ(ξ²) |F f(ξ)|² dξ`, as the discrete Parseval sum.
pub fn form_boundary(source: &PsiSource, f: &GridFunction) -> Result<f64> {
    let m = source.multipliers(f.n(), f.half_length)?;
    Ok(f.dx() * f.spectrum().iter().zip(&m).map(|(z, w)| w * z.norm_sqr()).sum::<f64>())
}

/// `u(s_j, x_k)`, one row per level.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfSpaceField {
    pub s_levels: Vec<f64>,
    pub half_length: f64,
    pub rows: Vec<Vec<f64>>,
}

fn check_levels(levels: &[f64]) -> Result<()> {
    if levels.first() != Some(&0.0) {
        return domain("s-levels must start at 0");
    }
    if levels.windows(2).any(|w| !(w[1] > w[0])) || levels.iter().any(|s| !s.is_finite()) {
        return domain("s-levels must be finite and strictly increasing");
    }
    Ok(())
}

/// `0` followed by `count - 1` geometric levels from `first` to `last`.
pub fn geometric_levels(first: f64, last: f64, count: usize) -> Vec<f64> {
    let mut out = vec![0.0];
    if count >= 2 {
        out.extend(crate::cbf::geometric_grid(first, last, count - 1));
    }
    out
}

impl HalfSpaceField {
    pub fn new(s_levels: Vec<f64>, half_length: f64, rows: Vec<Vec<f64>>) -> Result<Self> {
        check_levels(&s_levels)?;
        if rows.len() != s_levels.len() {
            return domain("one row per s-level is required");
        }
        let n = rows[0].len();
        check_grid(n, half_length)?;
        if rows.iter().any(|r| r.len() != n) {
            return domain("rows must have equal length");
        }
        Ok(Self { s_levels, half_length, rows })
    }

    pub fn from_fn(s_levels: Vec<f64>, n: usize, half_length: f64, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        check_grid(n, half_length)?;
        let dx = 2.0 * half_length / n as f64;
        let rows = s_levels
            .iter()
            .map(|&s| (0..n).map(|k| f(s, -half_length + k as f64 * dx)).collect())
            .collect();
        Self::new(s_levels, half_length, rows)
    }

    pub fn n(&self) -> usize {
        self.rows[0].len()
    }

    pub fn row(&self, j: usize) -> GridFunction {
        GridFunction { half_length: self.half_length, values: self.rows[j].clone() }
    }

    pub fn add(&self, other: &HalfSpaceField) -> Result<HalfSpaceField> {
        if other.s_levels != self.s_levels || other.n() != self.n() {
            return domain("fields live on different grids");
        }
        let rows = self
            .rows
            .iter()
            .zip(&other.rows)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x + y).collect())
            .collect();
        Ok(HalfSpaceField { rows, ..self.clone() })
    }

    /// Header `x\s,s_0,s_1,...`, then one line per grid point.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x\\s");
        for s in &self.s_levels {
            let _ = write!(out, ",{s:.16e}");
        }
        out.push('\n');
        let dx = 2.0 * self.half_length / self.n() as f64;
        for k in 0..self.n() {
            let _ = write!(out, "{:.16e}", -self.half_length + k as f64 * dx);
            for row in &self.rows {
                let _ = write!(out, ",{:.16e}", row[k]);
            }
            out.push('\n');
        }
        out
    }
}

/// `ext(f)`: each mode is multiplied by `φ(ξ², s)`.
pub fn harmonic_extension(string: &KreinString, f: &GridFunction, s_levels: &[f64]) -> Result<HalfSpaceField> {
    check_levels(s_levels)?;
    let n = f.n();
    let profiles: Vec<Vec<f64>> = (0..=n / 2)
        .into_par_iter()
        .map(|k| ode::phi(string, mode_lambda(k, f.half_length), s_levels).map(|p| p.phi))
        .collect::<Result<_>>()?;
    let spec = f.spectrum();
    let rows = (0..s_levels.len())
        .into_par_iter()
        .map(|j| {
            let level: Vec<Complex64> = spec.iter().enumerate().map(|(i, z)| z * profiles[mode_index(i, n)][j]).collect();
            fft(&level, true).iter().map(|z| z.re).collect()
        })
        .collect();
    let mut field = HalfSpaceField::new(s_levels.to_vec(), f.half_length, rows)?;
    field.rows[0] = f.values.clone();
    Ok(field)
}

/// Weights `(w_a, w_b)` with `∫_a^b A(ds) g = w_a g(a) + w_b g(b)` for linear `g`;
/// atoms in `[a, b)` are included.
fn cell_weights(string: &KreinString, a: f64, b: f64) -> (f64, f64) {
    let h = b - a;
    let c = 0.5 * (a + b);
    let (mut m0, mut m1) = (0.0, 0.0);
    for seg in string.segments() {
        let (lo, hi) = (seg.lo.max(a), seg.hi.min(b));
        if hi > lo {
            let (p0, p1) = seg.moments(lo, hi);
            m0 += p0;
            m1 += p1 + (0.5 * (lo + hi) - c) * p0;
        }
    }
    for atom in string.atoms() {
        if atom.s >= a && atom.s < b {
            m0 += atom.mass;
            m1 += (atom.s - c) * atom.mass;
        }
    }
    (0.5 * m0 - m1 / h, 0.5 * m0 + m1 / h)
}

/// Second-order `∂_s` on nonuniform levels, one row per level.
fn s_derivative(u: &HalfSpaceField) -> Vec<Vec<f64>> {
    let s = &u.s_levels;
    let m = s.len();
    let n = u.n();
    (0..m)
        .map(|j| {
            let (i0, i1, i2) = if j == 0 { (0, 1, 2) } else if j == m - 1 { (m - 3, m - 2, m - 1) } else { (j - 1, j, j + 1) };
            let (x0, x1, x2) = (s[i0], s[i1], s[i2]);
            let x = s[j];
            // derivative of the Lagrange basis at x
            let w0 = ((x - x1) + (x - x2)) / ((x0 - x1) * (x0 - x2));
            let w1 = ((x - x0) + (x - x2)) / ((x1 - x0) * (x1 - x2));
            let w2 = ((x - x0) + (x - x1)) / ((x2 - x0) * (x2 - x1));
            (0..n).map(|k| w0 * u.rows[i0][k] + w1 * u.rows[i1][k] + w2 * u.rows[i2][k]).collect()
        })
        .collect()
}

/// `E_H(u, v) = ∫∫ ∂_s u ∂_s v + ∫ A(ds) ∫ ∇_x u · ∇_x v` on the level grid.
pub fn form_halfspace_bilinear(string: &KreinString, u: &HalfSpaceField, v: &HalfSpaceField) -> Result<f64> {
    if u.s_levels.len() < 3 {
        return domain("the half-space form needs at least 3 s-levels");
    }
    if u.s_levels != v.s_levels || u.n() != v.n() || u.half_length != v.half_length {
        return domain("fields live on different grids");
    }
    if u.s_levels.last().copied().unwrap_or(0.0) >= string.length() {
        return domain("s-levels must lie in [0, R)");
    }
    let dx = 2.0 * u.half_length / u.n() as f64;
    let (du, dv) = (s_derivative(u), s_derivative(v));
    let xi = frequencies(u.n(), u.half_length);
    let levels = u.s_levels.len();
    let (d, g): (Vec<f64>, Vec<f64>) = (0..levels)
        .into_par_iter()
        .map(|j| {
            let d = dx * du[j].iter().zip(&dv[j]).map(|(a, b)| a * b).sum::<f64>();
            let (su, sv) = (u.row(j).spectrum(), v.row(j).spectrum());
            let g = dx * su.iter().zip(&sv).zip(&xi).map(|((a, b), x)| x * x * (a * b.conj()).re).sum::<f64>();
            (d, g)
        })
        .unzip();
    let mut total = 0.0;
    for j in 0..levels - 1 {
        let (a, b) = (u.s_levels[j], u.s_levels[j + 1]);
        total += 0.5 * (b - a) * (d[j] + d[j + 1]);
        let (wa, wb) = cell_weights(string, a, b);
        total += wa * g[j] + wb * g[j + 1];
    }
    Ok(total)
}

pub fn form_halfspace(string: &KreinString, u: &HalfSpaceField) -> Result<f64> {
    form_halfspace_bilinear(string, u, u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::string::{DensityFamily, EndCondition};
    use std::f64::consts::PI;

    fn classical() -> KreinString {
        KreinString::single(DensityFamily::Constant { c: 1.0 }, f64::INFINITY, None).unwrap()
    }

    #[test]
    fn single_mode_extension() {
        let x_half = 10.0;
        let xi1 = 3.0 * PI / x_half;
        let f = GridFunction::from_fn(64, x_half, |x| (xi1 * x).cos()).unwrap();
        let levels = [0.0, 0.5, 1.0, 2.0];
        let u = harmonic_extension(&classical(), &f, &levels).unwrap();
        assert_eq!(u.rows[0], f.values);
        for (j, &s) in levels.iter().enumerate() {
            for k in 0..64 {
                let want = (-xi1 * s).exp() * (xi1 * f.x(k)).cos();
                assert!((u.rows[j][k] - want).abs() < 1e-10, "s = {s}");
            }
        }
    }

    #[test]
    fn poisson_kernel_row() {
        // the classical extension of a spike is the periodized Poisson kernel
        let (n, x_half) = (128, PI);
        let mut vals = vec![0.0; n];
        vals[n / 2] = 1.0;
        let f = GridFunction::new(x_half, vals).unwrap();
        let u = harmonic_extension(&classical(), &f, &[0.0, 1.0]).unwrap();
        let r = (-1.0f64).exp();
        for k in 0..n {
            let theta = f.x(k);
            // Poisson kernel on the circle, truncated at the grid band
            let mut p = 1.0;
            for m in 1..n / 2 {
                p += 2.0 * r.powi(m as i32) * (m as f64 * theta).cos();
            }
            p += r.powi((n / 2) as i32) * ((n / 2) as f64 * theta).cos();
            assert!((u.rows[1][k] - p / n as f64).abs() < 1e-12, "{k}: {} vs {}", u.rows[1][k], p / n as f64);
        }
    }

    #[test]
    fn dtn_and_forms() {
        let x_half = 8.0;
        let xi1 = 2.0 * PI / x_half;
        let f = GridFunction::from_fn(32, x_half, |x| (xi1 * x).cos()).unwrap();
        let src = PsiSource::String(classical());
        let g = dtn_apply(&src, &f).unwrap();
        for k in 0..32 {
            assert!((g.values[k] - xi1 * f.values[k]).abs() < 1e-11);
        }
        let unit = GridFunction::new(x_half, f.values.iter().map(|v| v / f.norm_sq().sqrt()).collect()).unwrap();
        assert!((form_boundary(&src, &unit).unwrap() - xi1).abs() < 1e-11);
        let lap = form_boundary(&PsiSource::Laplacian, &unit).unwrap();
        assert!((lap - xi1 * xi1).abs() < 1e-11);
        let c = GridFunction::from_fn(32, x_half, |_| 2.0).unwrap();
        assert!(dtn_apply(&src, &c).unwrap().values.iter().all(|v| v.abs() < 1e-12));
        // Dirichlet end: ψ(0) = 1/R acts on constants
        let d = KreinString::single(DensityFamily::Constant { c: 1.0 }, 2.0, Some(EndCondition::DirichletAtR)).unwrap();
        let dc = dtn_apply(&PsiSource::String(d), &c).unwrap();
        assert!(dc.values.iter().all(|v| (v - 1.0).abs() < 1e-12));
    }

    #[test]
    fn halfspace_form_single_mode() {
        let x_half = 10.0;
        let xi1 = 2.0 * PI / x_half;
        let f = GridFunction::from_fn(32, x_half, |x| (xi1 * x).sin()).unwrap();
        let levels = geometric_levels(1e-3, 60.0, 400);
        let s = classical();
        let u = harmonic_extension(&s, &f, &levels).unwrap();
        let e = form_halfspace(&s, &u).unwrap();
        let b = form_boundary(&PsiSource::String(s.clone()), &f).unwrap();
        assert!((e / b - 1.0).abs() < 5e-3, "{e} vs {b}");
        let flat = HalfSpaceField::from_fn(levels.clone(), 32, x_half, |_, _| 3.0).unwrap();
        assert!(form_halfspace(&s, &flat).unwrap().abs() < 1e-20);
        assert!(form_halfspace(&s, &HalfSpaceField::from_fn(vec![0.0, 1.0], 32, x_half, |_, _| 0.0).unwrap()).is_err());
    }

    #[test]
    fn cell_weights_integrate_linear_exactly() {
        let s = KreinString::new(
            vec![crate::string::DensitySegment::new(0.0, f64::INFINITY, DensityFamily::Power { c: 1.0, p: -0.5 }).unwrap()],
            vec![crate::string::Atom { s: 0.3, mass: 2.0 }],
            f64::INFINITY,
            None,
        )
        .unwrap();
        let (wa, wb) = cell_weights(&s, 0.0, 1.0);
        // g(s) = 1 + s: ∫ s^{-1/2}(1+s) = 2 + 2/3, atom adds 2·1.3
        assert!((wa + 2.0 * wb - (2.0 + 2.0 / 3.0 + 2.6)).abs() < 1e-12);
    }
}
