//! Eigenpairs of `ψ(-Δ) + V` on the periodic grid and the eigenvalue
//! comparison with `-Δ + γV`.

use nalgebra::{DMatrix, SymmetricEigen};
use rustfft::num_complex::Complex64;
use serde::Serialize;

use crate::error::{domain, KreinError, Result};
use crate::extension::{GridFunction, PsiSource};
use crate::ode;
use crate::string::KreinString;

#[derive(Debug, Clone)]
pub struct SpectralProblem {
    pub source: PsiSource,
    pub potential: GridFunction,
}

impl SpectralProblem {
    pub fn new(source: PsiSource, potential: GridFunction) -> Self {
        Self { source, potential }
    }

    pub fn with_potential(source: PsiSource, n: usize, half_length: f64, v: impl Fn(f64) -> f64) -> Result<Self> {
        Ok(Self { source, potential: GridFunction::from_fn(n, half_length, v)? })
    }
}

/// `H = U* diag(ψ(ξ²)) U + diag(V)`; the multiplier part is the real
/// circulant with first column `U* ψ`.
pub fn build_operator(problem: &SpectralProblem) -> Result<DMatrix<f64>> {
    let v = &problem.potential;
    let n = v.n();
    let m = problem.source.multipliers(n, v.half_length)?;
    if m.iter().any(|x| !x.is_finite()) {
        return domain("ψ(ξ²) is not finite on the frequency set");
    }
    let spec: Vec<Complex64> = m.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    // U* applied to ψ gives √n · c, with c the circulant column
    let col = GridFunction::from_spectrum(v.half_length, &spec)?;
    let scale = 1.0 / (n as f64).sqrt();
    let c: Vec<f64> = col.values.iter().map(|x| x * scale).collect();
    let mut h = DMatrix::from_fn(n, n, |i, j| c[(i + n - j) % n]);
    for i in 0..n {
        h[(i, i)] += v.values[i];
    }
    let sym = (&h + h.transpose()) * 0.5;
    Ok(sym)
}

#[derive(Debug, Clone)]
pub struct EigenResult {
    pub eigenvalues: Vec<f64>,
    /// Normalized so that `dx Σ f² = 1`.
    pub eigenvectors: Vec<GridFunction>,
    /// `‖H v - μ v‖₂` for the ℓ²-unit vector `v`.
    pub residuals: Vec<f64>,
    pub norm_estimate: f64,
}

/// The `k` smallest eigenpairs by a dense symmetric eigensolver.
pub fn eigensolve(h: &DMatrix<f64>, k: usize, half_length: f64) -> Result<EigenResult> {
    let n = h.nrows();
    if h.ncols() != n || k == 0 || k > n {
        return domain(format!("need a square matrix and 1 ≤ k ≤ {n}, got k = {k}"));
    }
    let eig = SymmetricEigen::try_new(h.clone(), f64::EPSILON, 10_000)
        .ok_or_else(|| KreinError::Numerical("symmetric eigensolver did not converge".into()))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let norm_estimate = eig.eigenvalues.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let dx = 2.0 * half_length / n as f64;
    let mut values = Vec::with_capacity(k);
    let mut vectors = Vec::with_capacity(k);
    let mut residuals = Vec::with_capacity(k);
    for &i in order.iter().take(k) {
        let mu = eig.eigenvalues[i];
        let mut v = eig.eigenvectors.column(i).into_owned();
        // deterministic sign: first clearly nonzero entry positive
        let peak = v.amax();
        if let Some(first) = v.iter().find(|x| x.abs() > 1e-3 * peak) {
            if *first < 0.0 {
                v.neg_mut();
            }
        }
        residuals.push((h * &v - &v * mu).norm() / v.norm());
        values.push(mu);
        let s = 1.0 / dx.sqrt();
        vectors.push(GridFunction { half_length, values: v.iter().map(|x| x * s).collect() });
    }
    Ok(EigenResult { eigenvalues: values, eigenvectors: vectors, residuals, norm_estimate })
}

/// Convenience: build and solve.
pub fn solve_problem(problem: &SpectralProblem, k: usize) -> Result<EigenResult> {
    eigensolve(&build_operator(problem)?, k, problem.potential.half_length)
}

/// `γ = (∫ A φ_λ²)⁻¹`.
pub fn bound_gamma(string: &KreinString, lambda: f64) -> Result<f64> {
    if !(lambda > 0.0) {
        return domain(format!("λ = {lambda} must be positive"));
    }
    Ok(1.0 / ode::phi_mass_integral(string, lambda)?)
}

#[derive(Debug, Clone, Serialize)]
pub struct EstReport {
    pub lambda: f64,
    pub gamma: f64,
    /// Largest `n` with `λ_n(-Δ + γV) ≤ λ`; 0 when none.
    pub n: usize,
    pub lambda_n: Option<f64>,
    pub mu_n: Option<f64>,
    pub psi_lambda: f64,
    /// `ψ(λ) - μ_n`.
    pub slack: Option<f64>,
    pub rel_tol: f64,
    pub vacuous: bool,
    pub pass: bool,
}

/// Checks `μ_n ≤ ψ(λ)` for the largest `n` with `λ_n(-Δ + γV) ≤ λ`.
pub fn check_theorem_est(string: &KreinString, potential: &GridFunction, lambda: f64) -> Result<EstReport> {
    let rel_tol = 1e-6;
    let gamma = bound_gamma(string, lambda)?;
    let psi_lambda = ode::psi_default(string, lambda)?;
    let scaled = GridFunction { half_length: potential.half_length, values: potential.values.iter().map(|v| gamma * v).collect() };
    let lap = solve_problem(&SpectralProblem::new(PsiSource::Laplacian, scaled), potential.n())?;
    let n = lap.eigenvalues.iter().take_while(|&&l| l <= lambda).count();
    if n == 0 {
        return Ok(EstReport {
            lambda,
            gamma,
            n,
            lambda_n: None,
            mu_n: None,
            psi_lambda,
            slack: None,
            rel_tol,
            vacuous: true,
            pass: true,
        });
    }
    let op = solve_problem(&SpectralProblem::new(PsiSource::String(string.clone()), potential.clone()), n)?;
    let mu_n = op.eigenvalues[n - 1];
    Ok(EstReport {
        lambda,
        gamma,
        n,
        lambda_n: Some(lap.eigenvalues[n - 1]),
        mu_n: Some(mu_n),
        psi_lambda,
        slack: Some(psi_lambda - mu_n),
        rel_tol,
        vacuous: false,
        pass: mu_n <= psi_lambda * (1.0 + rel_tol),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct HomogeneousRow {
    pub n: usize,
    pub lambda_n: f64,
    pub mu_n: f64,
    /// `λ_n^{(2+p)α/(2α+2p)}`.
    pub plain_bound: f64,
    /// The same with `γ = (2/α) λ^{1-α/2}`, the exact value of `(∫Aφ²)⁻¹`.
    pub corrected_bound: f64,
    pub plain_holds: bool,
    pub corrected_holds: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct HomogeneousReport {
    pub alpha: f64,
    pub p: f64,
    pub exponent: f64,
    pub corrected_factor: f64,
    pub rows: Vec<HomogeneousRow>,
}

/// Compares `μ_n((-Δ)^{α/2} + |x|^p)` with the power of `λ_n(-Δ + |x|^p)`
/// predicted by the eigenvalue comparison, with the constant γ = λ^{1-α/2} and
/// with the corrected one. Informational: nothing is asserted.
pub fn homogeneous_bound_report(alpha: f64, p: f64, n_grid: usize, half_length: f64, count: usize) -> Result<HomogeneousReport> {
    if !(alpha > 0.0 && alpha <= 2.0) || !(p > 0.0) {
        return domain(format!("need α ∈ (0, 2] and p > 0, got α = {alpha}, p = {p}"));
    }
    let v = GridFunction::from_fn(n_grid, half_length, |x| x.abs().powf(p))?;
    let lap = solve_problem(&SpectralProblem::new(PsiSource::Laplacian, v.clone()), count)?;
    let frac = PsiSource::Custom(std::sync::Arc::new(move |l: f64| l.powf(0.5 * alpha)));
    let op = solve_problem(&SpectralProblem::new(frac, v), count)?;
    let exponent = (2.0 + p) * alpha / (2.0 * alpha + 2.0 * p);
    let corrected_factor = (2.0 / alpha).powf(alpha / (p + alpha));
    let rows = (0..count)
        .map(|i| {
            let (l, mu) = (lap.eigenvalues[i], op.eigenvalues[i]);
            let plain_bound = l.powf(exponent);
            let corrected_bound = corrected_factor * plain_bound;
            HomogeneousRow {
                n: i + 1,
                lambda_n: l,
                mu_n: mu,
                plain_bound,
                corrected_bound,
                plain_holds: mu <= plain_bound,
                corrected_holds: mu <= corrected_bound,
            }
        })
        .collect();
    Ok(HomogeneousReport { alpha, p, exponent, corrected_factor, rows })
}
