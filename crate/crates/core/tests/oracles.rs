//! Independent checks of values the library computes, each against a
//! closed form or a construction that does not share code with the solver.

mod common;

use common::{classical, rel, two_layer, two_layer_psi};
use krein::catalog;
use krein::extension::{dtn_apply, geometric_levels, harmonic_extension, GridFunction, PsiSource};
use krein::ode;
use krein::spectral::{bound_gamma, build_operator, solve_problem, SpectralProblem};
use krein::string::{complementary, Atom, DensitySegment, KreinString};

#[test]
fn two_layer_string_matches_transfer_formula() {
    for &(c1, l, c2) in &[(1.0, 0.5, 4.0), (3.0, 1.2, 0.25), (0.1, 2.0, 1.0)] {
        let s = two_layer(c1, l, c2);
        for &lam in &[0.01, 0.3, 1.0, 7.0, 90.0] {
            let got = ode::psi_default(&s, lam).unwrap();
            let want = two_layer_psi(c1, l, c2, lam);
            assert!(rel(got, want) < 1e-10, "({c1},{l},{c2}) λ={lam}: {got} vs {want}");
        }
    }
}

#[test]
fn bessel_phi_in_t_matches_the_ode_through_sigma() {
    // s = σ(t) = (1 - (1-t)^{2α}) / (2α)
    for &alpha in &[0.5, 1.0, 2.0] {
        let e = catalog::bessel(alpha).unwrap();
        for &lam in &[0.5f64, 4.0, 30.0] {
            let ts = [0.1f64, 0.4, 0.8, 0.95];
            let ss: Vec<f64> = ts.iter().map(|t| (1.0 - (1.0 - t).powf(2.0 * alpha)) / (2.0 * alpha)).collect();
            let prof = ode::phi(&e.string, lam, &ss).unwrap();
            for (i, &t) in ts.iter().enumerate() {
                let want = e.phi_t(lam, t).unwrap();
                assert!((prof.phi[i] - want).abs() < 1e-8 * (1.0 + want), "α={alpha} λ={lam} t={t}: {} vs {want}", prof.phi[i]);
            }
        }
    }
}

#[test]
fn gamma_is_inverse_derivative_of_psi() {
    // ∫Aφ² = ψ'(λ); for ψ = λ^{α/2} that gives γ = (2/α) λ^{1-α/2}
    assert!(rel(bound_gamma(&classical(), 4.0).unwrap(), 4.0) < 1e-9);
    assert!(rel(bound_gamma(&classical(), 1.0).unwrap(), 2.0) < 1e-9);
    for &alpha in &[0.5, 1.0, 1.5] {
        let e = catalog::caffarelli_silvestre(alpha).unwrap();
        for &lam in &[0.5f64, 3.0, 20.0] {
            let want = 2.0 / alpha * lam.powf(1.0 - alpha / 2.0);
            let tol = if alpha == 0.5 { 1e-4 } else { 1e-7 };
            assert!(rel(bound_gamma(&e.string, lam).unwrap(), want) < tol, "α={alpha} λ={lam}");
        }
    }
}

#[test]
fn eight_point_laplacian_circulant() {
    // X = π, n = 8: ξ = 0, ±1, ±2, ±3, 4 and c_j = (1/8) Σ_k ξ_k² cos(πjk/4)
    let v = GridFunction::new(std::f64::consts::PI, vec![0.0; 8]).unwrap();
    let h = build_operator(&SpectralProblem::new(PsiSource::Laplacian, v)).unwrap();
    let r2 = std::f64::consts::SQRT_2;
    let col = [5.5, -(2.0 + r2), 1.0, -(2.0 - r2), 0.5, -(2.0 - r2), 1.0, -(2.0 + r2)];
    for i in 0..8 {
        for j in 0..8 {
            assert!((h[(i, j)] - col[(i + 8 - j) % 8]).abs() < 1e-13, "({i},{j}): {}", h[(i, j)]);
        }
    }
}

#[test]
fn sqrt_laplacian_oscillator_tends_to_airy_values() {
    // in Fourier variables √(-Δ) + x² is |ξ| - d²/dξ²: even states sit at
    // zeros of Ai', odd ones at zeros of Ai. The periodic grid converges
    // like X⁻², so one Richardson step in X is taken.
    let mu = |n: usize, x: f64| {
        let p = SpectralProblem::with_potential(PsiSource::String(classical()), n, x, |y| y * y).unwrap();
        solve_problem(&p, 2).unwrap().eigenvalues
    };
    let (a, b) = (mu(512, 24.0), mu(1024, 48.0));
    let first = b[0] + (b[0] - a[0]) / 3.0;
    assert!((first - 1.018_792_971_6).abs() < 2e-5, "{first}");
    assert!((b[1] - 2.338_107_410_5).abs() < 1e-5, "{}", b[1]);
    // μ₁ exceeds 1, the value λ₁^{2/3} = 1 of the uncorrected homogeneous bound
    assert!(b[0] > 1.0);
}

#[test]
fn dirichlet_to_neumann_by_richardson_on_the_extension() {
    // -∂_s u(0) from two small levels against ψ(-Δ) f
    let strings = [classical(), catalog::quasi_relativistic(1.0).unwrap().string, two_layer(2.0, 0.3, 0.5)];
    let f = GridFunction::from_fn(64, 6.0, |x| (-(x * x)).exp() + 0.3 * (x * std::f64::consts::PI / 3.0).sin()).unwrap();
    for s in &strings {
        let h = 1e-3;
        let u = harmonic_extension(s, &f, &[0.0, h, 2.0 * h]).unwrap();
        let want = dtn_apply(&PsiSource::String(s.clone()), &f).unwrap();
        let scale = want.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for k in 0..64 {
            let d1 = (u.rows[0][k] - u.rows[1][k]) / h;
            let d2 = (u.rows[0][k] - u.rows[2][k]) / (2.0 * h);
            let rich = 2.0 * d1 - d2;
            assert!((rich - want.values[k]).abs() < 0.02 * scale, "k={k}: {rich} vs {}", want.values[k]);
        }
    }
}

#[test]
fn extension_never_increases_the_l2_norm() {
    // 0 ≤ φ ≤ 1 multiplies every mode
    let f = GridFunction::from_fn(128, 10.0, |x| (1.0 + x.sin()) * (-0.1 * x * x).exp()).unwrap();
    let levels = geometric_levels(1e-2, 10.0, 12);
    for seed in 0..10 {
        let s = krein::random::random_string(seed + 900);
        let lv: Vec<f64> = levels.iter().copied().filter(|&l| l < s.length()).collect();
        let u = harmonic_extension(&s, &f, &lv).unwrap();
        let base = f.norm_sq();
        for j in 0..lv.len() {
            assert!(u.row(j).norm_sq() <= base * (1.0 + 1e-12), "seed {seed} level {j}");
        }
    }
}

#[test]
fn complementary_caffarelli_silvestre_is_the_dual_power() {
    // λ^{α/2} λ^{1-α/2} = λ
    for &alpha in &[0.5, 1.0, 1.5] {
        let e = catalog::caffarelli_silvestre(alpha).unwrap();
        let b = complementary(&e.string).unwrap();
        for &lam in &[0.2f64, 1.0, 15.0] {
            assert!(rel(ode::psi_default(&b, lam).unwrap(), lam.powf(1.0 - alpha / 2.0)) < 1e-7, "α={alpha} λ={lam}");
        }
    }
}

#[test]
fn atom_inside_a_density_segment() {
    // unit density on [0, 1) plus mass m at 1, nothing beyond: Neumann
    // behaviour, φ constant past the atom. With f_N = cosh(k s) on [0,1],
    // then f_N' jumps by λ m f_N: ψ = 1 / (J_seg + 1/(f f'))
    let (m, lam) = (0.7, 2.0f64);
    let s = KreinString::new(
        vec![DensitySegment::constant(0.0, 1.0, 1.0).unwrap()],
        vec![Atom { s: 1.0, mass: m }],
        f64::INFINITY,
        None,
    )
    .unwrap();
    let k = lam.sqrt();
    let (c, sh) = (k.cosh(), k.sinh());
    let fp = k * sh + lam * m * c;
    let j_seg = sh / (k * c);
    let want = 1.0 / (j_seg + 1.0 / (c * fp));
    assert!(rel(ode::psi_default(&s, lam).unwrap(), want) < 1e-11);
}

#[test]
fn gaussian_trial_bounds_the_first_eigenvalue() {
    // g = (2a/π)^{1/4} e^{-a x²}: ⟨x²⟩ = 1/(4a) and ⟨|ξ|⟩ = √(2a/π)
    let rq = |a: f64| (2.0 * a / std::f64::consts::PI).sqrt() + 0.25 / a;
    let best = (1..400).map(|i| rq(0.005 * i as f64)).fold(f64::INFINITY, f64::min);
    assert!((best - 1.024_176).abs() < 1e-5);
    let p = SpectralProblem::with_potential(PsiSource::String(classical()), 512, 20.0, |y| y * y).unwrap();
    let mu = solve_problem(&p, 1).unwrap().eigenvalues[0];
    assert!(mu > 0.0 && mu < best, "{mu} vs {best}");
}

#[test]
fn eigenfunctions_attain_the_variational_infimum() {
    let (n, x_half) = (256, 12.0);
    let s = classical();
    let p = SpectralProblem::with_potential(PsiSource::String(s.clone()), n, x_half, |y| y * y).unwrap();
    let eig = solve_problem(&p, 4).unwrap();
    let levels = geometric_levels(1e-3, 20.0, 80);
    for (j, f) in eig.eigenvectors.iter().enumerate() {
        let mu = eig.eigenvalues[j];
        let pot: f64 = (0..n).map(|k| f.x(k).powi(2) * f.values[k].powi(2)).sum::<f64>() * f.dx();
        let boundary = krein::extension::form_boundary(&PsiSource::String(s.clone()), f).unwrap() + pot;
        assert!(rel(boundary, mu) < 1e-6, "n={}: {boundary} vs {mu}", j + 1);
        let u = harmonic_extension(&s, f, &levels).unwrap();
        let bulk = krein::extension::form_halfspace(&s, &u).unwrap() + pot;
        assert!(rel(bulk, mu) < 5e-3, "n={}: {bulk} vs {mu}", j + 1);
    }
}

#[test]
fn grid_sensitivity_of_the_oscillator() {
    // the local operator is converged at n = 512, X = 20; the nonlocal one
    // still carries the X⁻² periodisation error at the 1e-3 level
    let mu = |src: PsiSource, n: usize, x: f64| {
        let p = SpectralProblem::with_potential(src, n, x, |y| y * y).unwrap();
        solve_problem(&p, 6).unwrap().eigenvalues
    };
    let (a, b) = (mu(PsiSource::Laplacian, 512, 20.0), mu(PsiSource::Laplacian, 1024, 30.0));
    for i in 0..6 {
        assert!(rel(a[i], b[i]) < 1e-4, "μ_{}", i + 1);
    }
    let (a, b) = (mu(PsiSource::String(classical()), 512, 20.0), mu(PsiSource::String(classical()), 1024, 30.0));
    let moved = rel(a[0], b[0]);
    assert!(moved > 1e-4 && moved < 3e-3, "{moved}");
}
