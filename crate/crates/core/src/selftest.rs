//! The acceptance matrix: each criterion is a function returning a
//! [`CriterionOutcome`] with the tolerance it used and the worst error seen.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::catalog::{self, CatalogEntry};
use crate::cbf::{check_cbf, geometric_grid, sample_psi};
use crate::error::{KreinError, Result};
use crate::extension::{form_boundary, form_halfspace, form_halfspace_bilinear, geometric_levels, harmonic_extension, GridFunction, HalfSpaceField, PsiSource};
use crate::nodal::{boundary_nodal_count, courant_check, nodal_components};
use crate::ode;
use crate::quad::gauss8_composite;
use crate::random::random_string;
use crate::spectral::{check_theorem_est, homogeneous_bound_report, solve_problem, SpectralProblem};
use crate::string::{complementary, KreinString};

/// Seeds of the random strings used by the property criteria.
pub const RANDOM_BASE: u64 = 1;
pub const RANDOM_COUNT: u64 = 100;

#[derive(Debug, Clone, Serialize)]
pub struct CriterionOutcome {
    pub id: u32,
    pub name: String,
    pub gating: bool,
    pub pass: bool,
    pub tolerance: f64,
    /// Largest observed error in the units of `tolerance`.
    pub worst: f64,
    pub checks: usize,
    pub detail: String,
    #[serde(skip_serializing_if = "serde_json::Value::is_null")]
    pub data: serde_json::Value,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Golden,
    Energy,
    Complementary,
    Extension,
    Spectral,
    Nodal,
    Cbf,
    Report,
    All,
}

impl Suite {
    pub fn parse(name: &str) -> Result<Self> {
        Ok(match name {
            "golden" => Suite::Golden,
            "energy" => Suite::Energy,
            "complementary" => Suite::Complementary,
            "extension" => Suite::Extension,
            "spectral" => Suite::Spectral,
            "nodal" => Suite::Nodal,
            "cbf" => Suite::Cbf,
            "report" => Suite::Report,
            "all" => Suite::All,
            other => return Err(KreinError::Input(format!("unknown suite '{other}'"))),
        })
    }

    pub fn criteria(self) -> &'static [u32] {
        match self {
            Suite::Golden => &[1, 2],
            Suite::Energy => &[3],
            Suite::Complementary => &[4],
            Suite::Extension => &[5],
            Suite::Spectral => &[6, 7],
            Suite::Nodal => &[8],
            Suite::Cbf => &[9],
            Suite::Report => &[10],
            Suite::All => &[1, 2, 3, 4, 5, 6, 7, 8, 9, 10],
        }
    }
}

pub fn run_criterion(id: u32) -> Result<CriterionOutcome> {
    match id {
        1 => golden_psi(),
        2 => single_atom(),
        3 => energy_suite(),
        4 => complementary_identity(),
        5 => extension_forms(),
        6 => oscillator_spectrum(),
        7 => estimate_sweep(),
        8 => courant_hilbert(),
        9 => cbf_suite(),
        10 => homogeneous_report(),
        _ => Err(KreinError::Input(format!("no criterion {id}"))),
    }
}

/// Runs a suite; a criterion that errors is reported as failed.
pub fn run_suite(suite: Suite) -> Vec<CriterionOutcome> {
    suite
        .criteria()
        .iter()
        .map(|&id| {
            run_criterion(id).unwrap_or_else(|e| CriterionOutcome {
                id,
                name: format!("criterion {id}"),
                gating: id != 10,
                pass: false,
                tolerance: f64::NAN,
                worst: f64::NAN,
                checks: 0,
                detail: format!("error: {e}"),
                data: serde_json::Value::Null,
            })
        })
        .collect()
}

fn rel(a: f64, b: f64) -> f64 {
    (a / b - 1.0).abs()
}

/// Tracks the worst error and where it happened.
struct Worst {
    value: f64,
    at: String,
    checks: usize,
}

impl Worst {
    fn new() -> Self {
        Self { value: 0.0, at: String::new(), checks: 0 }
    }

    fn see(&mut self, err: f64, at: impl FnOnce() -> String) {
        self.checks += 1;
        // NaN counts as the worst possible and sticks
        if !self.value.is_nan() && (err.is_nan() || err > self.value) {
            self.value = err;
            self.at = at();
        }
    }

    fn merge(&mut self, other: Worst) {
        self.checks += other.checks;
        if !self.value.is_nan() && (other.value.is_nan() || other.value > self.value) {
            self.value = other.value;
            self.at = other.at;
        }
    }

    fn within(&self, tol: f64) -> bool {
        self.value <= tol
    }
}

fn outcome(id: u32, name: &str, tolerance: f64, w: &Worst, pass: bool) -> CriterionOutcome {
    CriterionOutcome {
        id,
        name: name.into(),
        gating: true,
        pass,
        tolerance,
        worst: w.value,
        checks: w.checks,
        detail: if w.at.is_empty() { String::new() } else { format!("worst at {}", w.at) },
        data: serde_json::Value::Null,
    }
}

fn golden_entries() -> Result<Vec<CatalogEntry>> {
    Ok(vec![
        catalog::classical(),
        catalog::quasi_relativistic(1.0)?,
        catalog::finite_dual(1.0)?,
        catalog::water_waves_neumann(1.0)?,
        catalog::water_waves_dirichlet(1.0)?,
        catalog::caffarelli_silvestre(0.5)?,
        catalog::caffarelli_silvestre(1.0)?,
        catalog::caffarelli_silvestre(1.5)?,
        catalog::bessel(0.5)?,
        catalog::bessel(1.0)?,
    ])
}

fn label(e: &CatalogEntry) -> String {
    let p: Vec<String> = e.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
    if p.is_empty() {
        e.name.clone()
    } else {
        format!("{}({})", e.name, p.join(","))
    }
}

/// ψ from the string against the closed form of each catalog entry.
pub fn golden_psi() -> Result<CriterionOutcome> {
    let tol = 1e-5;
    let loose = 1e-3;
    let lambdas = [0.1, 1.0, 10.0, 100.0];
    let entries = golden_entries()?;
    let mut strict = Worst::new();
    let mut cs_half = Worst::new();
    for e in &entries {
        let is_cs_half = e.name == "caffarelli_silvestre" && e.params.get("alpha") == Some(&0.5);
        let errs: Vec<Result<f64>> = lambdas.par_iter().map(|&l| Ok(rel(ode::psi_default(&e.string, l)?, e.psi(l)))).collect();
        for (l, err) in lambdas.iter().zip(errs) {
            let err = err?;
            let w = if is_cs_half { &mut cs_half } else { &mut strict };
            w.see(err, || format!("{} λ={l}", label(e)));
        }
    }
    let pass = strict.within(tol) && cs_half.within(loose);
    let mut o = outcome(1, "golden psi recovery", tol, &strict, pass);
    o.checks += cs_half.checks;
    o.detail = format!("{}; caffarelli_silvestre(alpha=0.5) worst {:.3e} (tolerance {loose:e})", o.detail, cs_half.value);
    Ok(o)
}

/// Mass 1 at s = 1 on an infinite string, checked against the closed form
/// and against a direct quadrature of `f_N⁻²`.
pub fn single_atom() -> Result<CriterionOutcome> {
    let tol = 1e-8;
    let e = catalog::atom(1.0, 1.0)?;
    let mut w = Worst::new();
    for &l in &[0.5, 1.0, 2.0, 10.0] {
        let numeric = ode::psi_default(&e.string, l)?;
        let closed = l / (1.0 + l);
        // f_N = 1 on [0, 1], then 1 + λ(s - 1); map u = t / (1 - t)
        let tail = gauss8_composite(0.0, 1.0, 64, |t| {
            let u = t / (1.0 - t);
            let f = 1.0 + l * u;
            1.0 / (f * f * (1.0 - t) * (1.0 - t))
        });
        let quad = 1.0 / (1.0 + tail);
        w.see(rel(numeric, closed), || format!("λ={l} vs closed form"));
        w.see(rel(numeric, quad), || format!("λ={l} vs quadrature"));
    }
    let pass = w.within(tol);
    Ok(outcome(2, "single atom", tol, &w, pass))
}

fn profile_grid(s: &KreinString, lambda: f64) -> Vec<f64> {
    let reach = 8.0 / lambda.sqrt() + s.support_end().min(10.0);
    let top = if s.length().is_finite() { 0.999 * s.length() } else { reach };
    let mut g = vec![0.0];
    g.extend(geometric_levels(1e-3 * top, top, 48).into_iter().skip(1));
    g
}

/// Shape of a profile: nonincreasing, convex, nonnegative and `-φ' ≤ 1/s`.
fn profile_violation(p: &ode::PhiProfile) -> f64 {
    let mut worst = 0.0f64;
    let n = p.s_grid.len();
    for i in 0..n {
        let (s, f, d) = (p.s_grid[i], p.phi[i], p.phi_prime[i]);
        worst = worst.max(-f.min(0.0) - 1e-14);
        worst = worst.max(d - 1e-14);
        if s > 0.0 {
            worst = worst.max(-d * s - 1.0 - 1e-12);
        }
        if i + 1 < n {
            worst = worst.max(p.phi[i + 1] - f - 1e-14);
            // convexity: the right derivative does not decrease
            worst = worst.max(d - p.phi_prime[i + 1] - 1e-12 * (1.0 + d.abs()));
        }
        if i + 2 < n {
            let (s1, s2) = (p.s_grid[i + 1], p.s_grid[i + 2]);
            let left = (p.phi[i + 1] - f) / (s1 - s);
            let right = (p.phi[i + 2] - p.phi[i + 1]) / (s2 - s1);
            worst = worst.max(left - right - 1e-10 * (1.0 + left.abs()) - 1e-14 * f.abs() / (s2 - s1).min(s1 - s));
        }
    }
    worst.max(0.0)
}

fn energy_checks(s: &KreinString, name: &str) -> Result<(Worst, Worst, Worst)> {
    let (mut shape, mut energy, mut hf) = (Worst::new(), Worst::new(), Worst::new());
    for &l in &[0.5, 2.0, 10.0] {
        let grid = profile_grid(s, l);
        let sol = ode::solve_with(s, l, &grid, ode::SolveOptions::default())?;
        let prof = sol.profile(&grid);
        shape.see(profile_violation(&prof), || format!("{name} λ={l}"));
        energy.see(rel(sol.energy(), sol.psi()), || format!("{name} λ={l}"));
        let h = 1e-5 * l;
        let slope = (ode::psi_default(s, l + h)? - ode::psi_default(s, l - h)?) / (2.0 * h);
        hf.see(rel(sol.phi_mass_integral(), slope), || format!("{name} λ={l}"));
    }
    Ok((shape, energy, hf))
}

/// Profile shape, the energy identity and the Hellmann–Feynman relation.
pub fn energy_suite() -> Result<CriterionOutcome> {
    let (tol_e, tol_hf) = (1e-5, 1e-4);
    let mut cases: Vec<(String, KreinString)> = catalog::standard_entries().into_iter().map(|e| (label(&e), e.string)).collect();
    cases.extend((RANDOM_BASE..RANDOM_BASE + RANDOM_COUNT).map(|i| (format!("random seed {i}"), random_string(i))));
    let results: Vec<Result<(Worst, Worst, Worst)>> = cases.par_iter().map(|(n, s)| energy_checks(s, n)).collect();
    let (mut shape, mut energy, mut hf) = (Worst::new(), Worst::new(), Worst::new());
    for r in results {
        let (a, b, c) = r?;
        shape.merge(a);
        energy.merge(b);
        hf.merge(c);
    }
    let pass = shape.value == 0.0 && energy.within(tol_e) && hf.within(tol_hf);
    let mut o = outcome(3, "energy identity and profile invariants", tol_e, &energy, pass);
    o.checks += shape.checks + hf.checks;
    o.detail = format!(
        "{} strings; energy worst {:.3e} ({}); Hellmann-Feynman worst {:.3e} (tolerance {tol_hf:e}, {}); profile shape violation {:.3e}{}",
        cases.len(),
        energy.value,
        energy.at,
        hf.value,
        hf.at,
        shape.value,
        if shape.at.is_empty() { String::new() } else { format!(" ({})", shape.at) }
    );
    Ok(o)
}

/// `ψ_A ψ_B = λ` for the complementary string `B`.
pub fn complementary_identity() -> Result<CriterionOutcome> {
    let tol = 1e-4;
    let lambdas = [0.5, 1.0, 2.0, 10.0];
    let wn = catalog::water_waves_neumann(1.0)?;
    let wd = catalog::water_waves_dirichlet(1.0)?;
    let mut pairs: Vec<(String, KreinString, KreinString)> = vec![
        ("classical".into(), catalog::classical().string.clone(), complementary(&catalog::classical().string)?),
        ("water waves N/D".into(), wn.string.clone(), wd.string.clone()),
        ("water waves N/comp".into(), wn.string.clone(), complementary(&wn.string)?),
    ];
    for i in RANDOM_BASE..RANDOM_BASE + 20 {
        let a = random_string(i);
        let b = complementary(&a)?;
        pairs.push((format!("random seed {i}"), a, b));
    }
    let errs: Vec<Result<Vec<(f64, f64)>>> = pairs
        .par_iter()
        .map(|(_, a, b)| {
            lambdas.iter().map(|&l| Ok((l, rel(ode::psi_default(a, l)? * ode::psi_default(b, l)?, l)))).collect()
        })
        .collect();
    let mut w = Worst::new();
    for ((name, _, _), r) in pairs.iter().zip(errs) {
        for (l, e) in r? {
            w.see(e, || format!("{name} λ={l}"));
        }
    }
    let pass = w.within(tol);
    Ok(outcome(4, "complementary identity", tol, &w, pass))
}

fn band_limited(rng: &mut ChaCha8Rng, n: usize, half_length: f64, kmax: usize) -> Result<GridFunction> {
    let coeffs: Vec<(f64, f64)> = (0..=kmax).map(|k| {
        let amp = 1.0 / (1.0 + k as f64);
        (amp * rng.gen_range(-1.0..1.0), amp * rng.gen_range(-1.0..1.0))
    }).collect();
    GridFunction::from_fn(n, half_length, |x| {
        coeffs
            .iter()
            .enumerate()
            .map(|(k, (a, b))| {
                let w = std::f64::consts::PI * k as f64 / half_length * x;
                a * w.cos() + b * w.sin()
            })
            .sum()
    })
}

/// The half-space form of `ext f` equals the boundary form, and zero-trace
/// perturbations are orthogonal to `ext f`.
pub fn extension_forms() -> Result<CriterionOutcome> {
    let tol = 5e-3;
    let cross_tol = 1e-3;
    let (n, x_half) = (256, 20.0);
    let levels = geometric_levels(1e-3, 100.0, 200);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let s = catalog::classical().string;
    let f = band_limited(&mut rng, n, x_half, 16)?;
    let u = harmonic_extension(&s, &f, &levels)?;
    let eh = form_halfspace(&s, &u)?;
    let eb = form_boundary(&PsiSource::String(s.clone()), &f)?;
    let mut w = Worst::new();
    w.see(rel(eh, eb), || "form ratio".into());
    let mut cross = Worst::new();
    let mut decreased = 0;
    for i in 0..20 {
        let h = band_limited(&mut rng, n, x_half, 4 + i % 12)?;
        let width = rng.gen_range(0.3..3.0);
        let amp = rng.gen_range(0.2..2.0);
        let v = HalfSpaceField::from_fn(levels.clone(), n, x_half, |sv, x| {
            let hx = h.values[((x + x_half) / h.dx()).round() as usize % n];
            amp * (sv / width) * (-sv / width).exp() * hx
        })?;
        let ev = form_halfspace(&s, &v)?;
        let c = form_halfspace_bilinear(&s, &u, &v)?;
        cross.see(c.abs() / (eh * ev).sqrt(), || format!("perturbation {i}"));
        if form_halfspace(&s, &u.add(&v)?)? < eh {
            decreased += 1;
        }
    }
    let pass = w.within(tol) && cross.within(cross_tol) && decreased == 0;
    let mut o = outcome(5, "extension form equality", tol, &w, pass);
    o.checks += cross.checks;
    o.detail = format!(
        "E_H = {eh:.12e}, E = {eb:.12e}; cross-form worst {:.3e} (tolerance {cross_tol:e}, {}); perturbations that decreased the form: {decreased}",
        cross.value, cross.at
    );
    Ok(o)
}

fn oscillator(n: usize) -> Result<Vec<f64>> {
    let p = SpectralProblem::with_potential(PsiSource::Laplacian, n, 20.0, |x| x * x)?;
    Ok(solve_problem(&p, 10)?.eigenvalues)
}

/// `-Δ + x²` against `2n - 1`, and its stability under grid doubling.
pub fn oscillator_spectrum() -> Result<CriterionOutcome> {
    let (tol, tol_grid) = (1e-3, 1e-4);
    let coarse = oscillator(512)?;
    let fine = oscillator(1024)?;
    let mut w = Worst::new();
    let mut g = Worst::new();
    for (i, (a, b)) in coarse.iter().zip(&fine).enumerate() {
        w.see(rel(*a, 2.0 * i as f64 + 1.0), || format!("μ_{}", i + 1));
        g.see(rel(*a, *b), || format!("μ_{}", i + 1));
    }
    let pass = w.within(tol) && g.within(tol_grid);
    let mut o = outcome(6, "oscillator spectrum", tol, &w, pass);
    o.checks += g.checks;
    o.detail = format!("{}; grid doubling worst {:.3e} (tolerance {tol_grid:e}, {})", o.detail, g.value, g.at);
    Ok(o)
}

/// `μ_n ≤ ψ(λ)` with `γ = (∫ A φ_λ²)⁻¹`, for two strings and potentials.
pub fn estimate_sweep() -> Result<CriterionOutcome> {
    let tol = 1e-6;
    let (n, x_half) = (256, 12.0);
    let quad = GridFunction::from_fn(n, x_half, |x| x * x)?;
    let quartic = GridFunction::from_fn(n, x_half, |x| x.powi(4))?;
    let classical = catalog::classical().string;
    let quasi = catalog::quasi_relativistic(1.0)?.string;
    let cases: Vec<(&str, &KreinString, &GridFunction, f64)> = vec![
        ("classical x^2", &classical, &quad, 2.0),
        ("classical x^2", &classical, &quad, 5.0),
        ("classical x^2", &classical, &quad, 9.0),
        ("quasi_relativistic x^4", &quasi, &quartic, 5.0),
        ("quasi_relativistic x^4", &quasi, &quartic, 10.0),
    ];
    let reports = cases.iter().map(|(_, s, v, l)| check_theorem_est(s, v, *l)).collect::<Result<Vec<_>>>()?;
    let mut w = Worst::new();
    let mut rows = Vec::new();
    for ((name, _, _, l), r) in cases.iter().zip(&reports) {
        // violation relative to ψ(λ); zero when the slack is nonnegative
        let excess = r.mu_n.map_or(0.0, |mu| ((mu - r.psi_lambda) / r.psi_lambda).max(0.0));
        w.see(excess, || format!("{name} λ={l}"));
        rows.push(format!("{name} λ={l}: n={} slack={:.6e}", r.n, r.slack.unwrap_or(f64::NAN)));
    }
    let pass = reports.iter().all(|r| r.pass && !r.vacuous);
    let mut o = outcome(7, "eigenvalue estimate sweep", tol, &w, pass);
    o.detail = rows.join("; ");
    o.data = serde_json::to_value(&reports)?;
    Ok(o)
}

/// Nodal counts for the first eigenfunctions of `√(-Δ) + x²`.
pub fn courant_hilbert() -> Result<CriterionOutcome> {
    let (n, x_half, count) = (256, 12.0, 6);
    let sweep = [1e-6, 1e-5, 1e-4];
    let s = catalog::classical().string;
    let p = SpectralProblem::with_potential(PsiSource::String(s.clone()), n, x_half, |x| x * x)?;
    let eig = solve_problem(&p, count + 1)?;
    let levels = geometric_levels(1e-3, 20.0, 80);
    let mut rows = Vec::new();
    let mut pass = true;
    let mut w = Worst::new();
    for j in 1..=count {
        let f = &eig.eigenvectors[j - 1];
        let u = harmonic_extension(&s, f, &levels)?;
        let counts = sweep.iter().map(|&t| nodal_components(&u, t).map(|l| l.count())).collect::<Result<Vec<_>>>()?;
        let boundary = boundary_nodal_count(f, 1e-5)?;
        let verdict = courant_check(&eig.eigenvalues, j, counts[1], 1e-8, true)?;
        let stable = counts.iter().all(|&c| c == counts[0]);
        let ok = verdict.strong_pass == Some(true) && counts.iter().all(|&c| c <= j) && boundary < 2 * j && stable;
        pass &= ok;
        w.see(if ok { 0.0 } else { 1.0 }, || format!("n={j}"));
        rows.push(format!("n={j}: half-space {counts:?}, boundary {boundary}"));
    }
    let mut o = outcome(8, "Courant-Hilbert nodal bounds", 0.0, &w, pass);
    o.detail = rows.join("; ");
    Ok(o)
}

/// Necessary complete-Bernstein conditions on sampled ψ.
pub fn cbf_suite() -> Result<CriterionOutcome> {
    let tol = 1e-7;
    let grid = geometric_grid(1e-2, 1e4, 32);
    let mut cases: Vec<(String, KreinString)> = catalog::standard_entries().into_iter().map(|e| (label(&e), e.string)).collect();
    cases.extend((RANDOM_BASE..RANDOM_BASE + RANDOM_COUNT).map(|i| (format!("random seed {i}"), random_string(i))));
    let reports: Vec<Result<crate::cbf::CbfReport>> = cases.par_iter().map(|(_, s)| check_cbf(&sample_psi(s, &grid)?, tol)).collect();
    let mut w = Worst::new();
    for ((name, _), r) in cases.iter().zip(reports) {
        let r = r?;
        let excess = r.violations.iter().fold(0.0f64, |m, v| m.max(v.excess));
        let first = r.violations.first().map(|v| v.condition.as_str()).unwrap_or("");
        w.see(excess, || format!("{name} {first}"));
    }
    let pass = w.value == 0.0;
    let mut o = outcome(9, "complete Bernstein conditions", tol, &w, pass);
    o.detail = if o.detail.is_empty() {
        format!("{} strings on 32 points in [1e-2, 1e4]", cases.len())
    } else {
        format!("{} strings on 32 points in [1e-2, 1e4]; {}", cases.len(), o.detail)
    };
    Ok(o)
}

/// Homogeneous comparison `μ_n` against powers of `λ_n`; informational.
pub fn homogeneous_report() -> Result<CriterionOutcome> {
    let report = homogeneous_bound_report(1.0, 2.0, 512, 20.0, 8)?;
    let plain_fail: Vec<usize> = report.rows.iter().filter(|r| !r.plain_holds).map(|r| r.n).collect();
    let corrected_fail: Vec<usize> = report.rows.iter().filter(|r| !r.corrected_holds).map(|r| r.n).collect();
    Ok(CriterionOutcome {
        id: 10,
        name: "homogeneous bound report".into(),
        gating: false,
        pass: true,
        tolerance: 0.0,
        worst: 0.0,
        checks: report.rows.len(),
        detail: format!(
            "exponent {:.6}, corrected factor {:.6}; uncorrected constant fails at n = {plain_fail:?}; corrected constant fails at n = {corrected_fail:?}",
            report.exponent, report.corrected_factor
        ),
        data: serde_json::to_value(&report)?,
    })
}

/// One line per criterion.
pub fn summary_line(o: &CriterionOutcome) -> String {
    let verdict = match (o.gating, o.pass) {
        (false, _) => "INFO",
        (true, true) => "PASS",
        (true, false) => "FAIL",
    };
    format!("[{verdict}] C{} {}: worst {:.3e} (tolerance {:e}, {} checks) {}", o.id, o.name, o.worst, o.tolerance, o.checks, o.detail)
}

/// The JSON report emitted by `selftest`.
pub fn report_json(suite: &str, outcomes: &[CriterionOutcome]) -> serde_json::Value {
    serde_json::json!({
        "suite": suite,
        "pass": outcomes.iter().all(|o| o.pass || !o.gating),
        "criteria": outcomes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suites_cover_all_criteria() {
        let mut all: Vec<u32> = [Suite::Golden, Suite::Energy, Suite::Complementary, Suite::Extension, Suite::Spectral, Suite::Nodal, Suite::Cbf, Suite::Report]
            .iter()
            .flat_map(|s| s.criteria().to_vec())
            .collect();
        all.sort();
        assert_eq!(all, Suite::All.criteria());
        assert!(Suite::parse("nope").is_err());
    }

    #[test]
    fn worst_tracks_nan() {
        let mut w = Worst::new();
        w.see(1e-3, || "a".into());
        w.see(f64::NAN, || "b".into());
        w.see(5.0, || "c".into());
        assert!(w.value.is_nan() && w.at == "b");
        assert!(!w.within(1.0));
    }

    #[test]
    fn single_atom_passes() {
        let o = single_atom().unwrap();
        assert!(o.pass, "{}", summary_line(&o));
    }
}
