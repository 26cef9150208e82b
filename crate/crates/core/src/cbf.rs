//! Sampled characteristics and the necessary conditions a complete
//! Bernstein function must satisfy on a finite grid.

use rayon::prelude::*;

use crate::error::{domain, Result};
use crate::ode;
use crate::string::KreinString;

#[derive(Debug, Clone, PartialEq)]
pub struct PsiTable {
    pub lambda: Vec<f64>,
    pub psi: Vec<f64>,
    /// `"string"` or the catalog name of a closed form.
    pub source: String,
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() || grid.iter().any(|&l| !(l > 0.0) || !l.is_finite()) {
        return domain("λ-grid must be nonempty, positive and finite");
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return domain("λ-grid must be strictly increasing");
    }
    Ok(())
}

/// `n` geometrically spaced points in `[a, b]`.
pub fn geometric_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    let r = (b / a).ln() / (n - 1) as f64;
    (0..n).map(|i| if i + 1 == n { b } else { a * (r * i as f64).exp() }).collect()
}

/// Evaluates ψ of a string on the grid, one solve per point in parallel.
pub fn sample_psi(string: &KreinString, grid: &[f64]) -> Result<PsiTable> {
    check_grid(grid)?;
    let psi = grid.par_iter().map(|&l| ode::psi_default(string, l)).collect::<Result<Vec<_>>>()?;
    Ok(PsiTable { lambda: grid.to_vec(), psi, source: "string".into() })
}

impl PsiTable {
    pub fn from_fn(source: &str, grid: &[f64], f: impl Fn(f64) -> f64) -> Result<Self> {
        check_grid(grid)?;
        let psi: Vec<f64> = grid.iter().map(|&l| f(l)).collect();
        if psi.iter().any(|v| !v.is_finite()) {
            return domain(format!("closed form '{source}' is not finite on the grid"));
        }
        Ok(PsiTable { lambda: grid.to_vec(), psi, source: source.into() })
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("lambda,psi\n");
        for (l, p) in self.lambda.iter().zip(&self.psi) {
            out.push_str(&format!("{l:.16e},{p:.16e}\n"));
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Condition {
    Nonnegative,
    Nondecreasing,
    Concave,
    RatioNonincreasing,
}

impl Condition {
    pub fn as_str(self) -> &'static str {
        match self {
            Condition::Nonnegative => "nonnegative",
            Condition::Nondecreasing => "nondecreasing",
            Condition::Concave => "concave",
            Condition::RatioNonincreasing => "psi/lambda nonincreasing",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub condition: Condition,
    /// Grid index where the offending difference is centred.
    pub index: usize,
    pub lambda: f64,
    /// Size of the violation relative to the local scale.
    pub excess: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CbfReport {
    pub violations: Vec<Violation>,
}

impl CbfReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn violated(&self, c: Condition) -> bool {
        self.violations.iter().any(|v| v.condition == c)
    }
}

/// Checks ψ ≥ 0, ψ nondecreasing, ψ concave and ψ(λ)/λ nonincreasing.
/// Each difference is compared with `tol` times the size of the terms it
/// is built from, so the check is insensitive to the overall scale of ψ.
pub fn check_cbf(table: &PsiTable, tol: f64) -> Result<CbfReport> {
    let (l, p) = (&table.lambda, &table.psi);
    if l.len() < 4 || l.len() != p.len() {
        return domain("check_cbf needs at least 4 samples");
    }
    let mut report = CbfReport::default();
    let mut flag = |condition, index: usize, excess: f64| {
        report.violations.push(Violation { condition, index, lambda: l[index], excess });
    };
    let scale = p.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for i in 0..p.len() {
        if p[i] < -tol * scale {
            flag(Condition::Nonnegative, i, -p[i] / scale.max(f64::MIN_POSITIVE));
        }
    }
    for i in 0..p.len() - 1 {
        let d = p[i + 1] - p[i];
        let size = p[i + 1].abs().max(p[i].abs());
        if d < -tol * size {
            flag(Condition::Nondecreasing, i, -d / size);
        }
        let (r0, r1) = (p[i] / l[i], p[i + 1] / l[i + 1]);
        if r1 - r0 > tol * r0.abs().max(r1.abs()) {
            flag(Condition::RatioNonincreasing, i, (r1 - r0) / r0.abs().max(r1.abs()));
        }
    }
    for i in 1..p.len() - 1 {
        let s0 = (p[i] - p[i - 1]) / (l[i] - l[i - 1]);
        let s1 = (p[i + 1] - p[i]) / (l[i + 1] - l[i]);
        // rounding in ψ enters the slopes as |ψ|/Δλ
        let size = s0.abs().max(s1.abs()) + p[i].abs() / (l[i + 1] - l[i - 1]);
        if s1 - s0 > tol * size {
            flag(Condition::Concave, i, (s1 - s0) / size);
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::string::{DensityFamily, EndCondition};

    #[test]
    fn sample_classical_water_waves_and_zero() {
        let a = KreinString::single(DensityFamily::Constant { c: 1.0 }, f64::INFINITY, None).unwrap();
        let t = sample_psi(&a, &[1.0, 4.0, 9.0]).unwrap();
        for (got, want) in t.psi.iter().zip([1.0, 2.0, 3.0]) {
            assert!((got - want).abs() < 1e-12);
        }
        let w = KreinString::single(DensityFamily::Constant { c: 1.0 }, 1.0, Some(EndCondition::NeumannAtR)).unwrap();
        assert!((sample_psi(&w, &[1.0]).unwrap().psi[0] - 1f64.tanh()).abs() < 1e-12);
        let z = KreinString::new(vec![], vec![], f64::INFINITY, None).unwrap();
        assert_eq!(sample_psi(&z, &[1.0, 10.0]).unwrap().psi, vec![0.0, 0.0]);
        assert!(sample_psi(&a, &[2.0, 1.0]).is_err());
    }

    #[test]
    fn closed_form_checks() {
        let grid = geometric_grid(1e-2, 1e4, 32);
        let sqrt = PsiTable::from_fn("sqrt", &grid, f64::sqrt).unwrap();
        assert!(check_cbf(&sqrt, 1e-7).unwrap().passed());
        let sq = PsiTable::from_fn("square", &grid, |l| l * l).unwrap();
        let r = check_cbf(&sq, 1e-7).unwrap();
        assert!(r.violated(Condition::Concave) && r.violated(Condition::RatioNonincreasing));
        let dir = [0.25, 0.5, 1.0, 2.0, 4.0, 8.0];
        let coth = PsiTable::from_fn("dirichlet", &dir, |l: f64| l.sqrt() / l.sqrt().tanh()).unwrap();
        assert!(check_cbf(&coth, 1e-7).unwrap().passed());
        let neg = PsiTable::from_fn("neg", &dir, |l| -l.sqrt()).unwrap();
        let r = check_cbf(&neg, 1e-7).unwrap();
        assert!(r.violated(Condition::Nonnegative) && r.violated(Condition::Nondecreasing));
    }

    #[test]
    fn csv_has_seventeen_digits() {
        let t = PsiTable::from_fn("sqrt", &[2.0], f64::sqrt).unwrap();
        let csv = t.to_csv();
        let line = csv.lines().nth(1).unwrap();
        let back: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert_eq!(back, 2f64.sqrt());
        assert!(csv.starts_with("lambda,psi\n"));
    }
}
