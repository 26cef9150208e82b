//! Nodal parts of half-space fields and the Courant–Hilbert bounds.

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{domain, Result};
use crate::extension::{GridFunction, HalfSpaceField};

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // smaller root wins, so labels do not depend on visiting order
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Component {
    pub label: usize,
    pub sign: i8,
    pub cells: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodalLabeling {
    /// `labels[j][k]`: 0 for background, otherwise a component label from 1.
    pub labels: Vec<Vec<usize>>,
    pub components: Vec<Component>,
    pub rel_threshold: f64,
    pub threshold: f64,
}

impl NodalLabeling {
    pub fn count(&self) -> usize {
        self.components.len()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for row in &self.labels {
            let line: Vec<String> = row.iter().map(|l| l.to_string()).collect();
            let _ = writeln!(out, "{}", line.join(","));
        }
        out
    }
}

fn sign_of(v: f64, threshold: f64) -> i8 {
    if v > threshold {
        1
    } else if v < -threshold {
        -1
    } else {
        0
    }
}

/// Labels same-sign cells of `rows` above `rel_threshold · max|u|` with
/// 4-neighbour connectivity; `wrap_x` joins the first and last columns.
pub fn label_grid(rows: &[Vec<f64>], rel_threshold: f64, wrap_x: bool) -> Result<NodalLabeling> {
    if !(rel_threshold > 0.0 && rel_threshold < 0.1) {
        return domain(format!("relative threshold {rel_threshold} must lie in (0, 0.1)"));
    }
    let m = rows.len();
    let n = rows.first().map_or(0, |r| r.len());
    if m == 0 || n == 0 || rows.iter().any(|r| r.len() != n) {
        return domain("field must be a nonempty rectangular grid");
    }
    if rows.iter().flatten().any(|v| !v.is_finite()) {
        return domain("field values must be finite");
    }
    let peak = rows.iter().flatten().fold(0.0f64, |a, v| a.max(v.abs()));
    let threshold = rel_threshold * peak;
    let signs: Vec<Vec<i8>> = rows.iter().map(|r| r.iter().map(|&v| sign_of(v, threshold)).collect()).collect();
    let idx = |j: usize, k: usize| j * n + k;
    let mut uf = UnionFind::new(m * n);
    for j in 0..m {
        for k in 0..n {
            let s = signs[j][k];
            if s == 0 {
                continue;
            }
            if k + 1 < n && signs[j][k + 1] == s {
                uf.union(idx(j, k), idx(j, k + 1));
            }
            if wrap_x && k + 1 == n && n > 1 && signs[j][0] == s {
                uf.union(idx(j, k), idx(j, 0));
            }
            if j + 1 < m && signs[j + 1][k] == s {
                uf.union(idx(j, k), idx(j + 1, k));
            }
        }
    }
    let mut labels = vec![vec![0usize; n]; m];
    let mut root_label = std::collections::HashMap::new();
    let mut components: Vec<Component> = Vec::new();
    for j in 0..m {
        for k in 0..n {
            if signs[j][k] == 0 {
                continue;
            }
            let root = uf.find(idx(j, k));
            let next = components.len() + 1;
            let label = *root_label.entry(root).or_insert(next);
            if label == next {
                components.push(Component { label, sign: signs[j][k], cells: 0 });
            }
            components[label - 1].cells += 1;
            labels[j][k] = label;
        }
    }
    Ok(NodalLabeling { labels, components, rel_threshold, threshold })
}

/// Nodal parts of a half-space field (x is periodic).
pub fn nodal_components(u: &HalfSpaceField, rel_threshold: f64) -> Result<NodalLabeling> {
    label_grid(&u.rows, rel_threshold, true)
}

/// Sign runs of a periodic grid function above the threshold.
pub fn boundary_nodal_count(f: &GridFunction, rel_threshold: f64) -> Result<usize> {
    Ok(label_grid(std::slice::from_ref(&f.values), rel_threshold, true)?.count())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CourantVerdict {
    pub n: usize,
    pub count: usize,
    /// `max{j : μ_j = μ_n}`.
    pub weak_bound: usize,
    /// `min{j : μ_j = μ_n}`.
    pub strong_bound: usize,
    pub weak_pass: bool,
    /// `None` when the density is not known to be positive and locally Lipschitz.
    pub strong_pass: Option<bool>,
}

/// Compares a nodal count of the `n`-th eigenfunction (1-based) with the
/// weak and strong Courant–Hilbert bounds; eigenvalues within `tol_mult`
/// (relative) of `μ_n` form its multiplicity cluster.
pub fn courant_check(eigenvalues: &[f64], n: usize, count: usize, tol_mult: f64, strong_applies: bool) -> Result<CourantVerdict> {
    if n == 0 || n > eigenvalues.len() {
        return domain(format!("eigenvalue index {n} out of range 1..={}", eigenvalues.len()));
    }
    let mu = eigenvalues[n - 1];
    let same = |x: f64| (x - mu).abs() <= tol_mult * mu.abs().max(1e-300);
    let cluster: Vec<usize> = (1..=eigenvalues.len()).filter(|&j| same(eigenvalues[j - 1])).collect();
    let weak_bound = *cluster.last().expect("cluster contains n");
    let strong_bound = cluster[0];
    Ok(CourantVerdict {
        n,
        count,
        weak_bound,
        strong_bound,
        weak_pass: count <= weak_bound,
        strong_pass: strong_applies.then_some(count <= strong_bound),
    })
}

/// Component counts over a sweep of thresholds.
pub fn threshold_sweep(u: &HalfSpaceField, thresholds: &[f64]) -> Result<Vec<(f64, usize)>> {
    thresholds.iter().map(|&t| Ok((t, nodal_components(u, t)?.count()))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn hand_examples() {
        let pos = vec![vec![1.0, 2.0, 0.5], vec![0.3, 0.2, 0.9]];
        assert_eq!(label_grid(&pos, 1e-5, true).unwrap().count(), 1);
        let checker = vec![vec![1.0, -1.0], vec![-1.0, 1.0]];
        let l = label_grid(&checker, 1e-5, false).unwrap();
        assert_eq!(l.count(), 4);
        assert_eq!(l.labels, vec![vec![1, 2], vec![3, 4]]);
        // wraparound joins columns 0 and 1 of each row; rows alternate in sign
        assert_eq!(label_grid(&checker, 1e-5, true).unwrap().count(), 4);
        let flipped: Vec<Vec<f64>> = checker.iter().map(|r| r.iter().map(|v| -v).collect()).collect();
        assert_eq!(label_grid(&flipped, 1e-5, false).unwrap().count(), 4);
        let zero = vec![vec![0.0; 3]; 2];
        assert_eq!(label_grid(&zero, 1e-5, true).unwrap().count(), 0);
        assert!(label_grid(&pos, 0.5, true).is_err());
    }

    #[test]
    fn wrap_merges_across_period() {
        let row = vec![vec![1.0, -1.0, -1.0, 1.0]];
        assert_eq!(label_grid(&row, 1e-5, false).unwrap().count(), 3);
        assert_eq!(label_grid(&row, 1e-5, true).unwrap().count(), 2);
    }

    #[test]
    fn boundary_counts() {
        let s = GridFunction::from_fn(64, PI, |x| (x + 0.01).sin()).unwrap();
        assert_eq!(boundary_nodal_count(&s, 1e-5).unwrap(), 2);
        let p = GridFunction::from_fn(64, PI, |x| 2.0 + x.cos()).unwrap();
        assert_eq!(boundary_nodal_count(&p, 1e-5).unwrap(), 1);
    }

    #[test]
    fn courant_arithmetic() {
        let simple = [1.0, 2.0, 3.0, 4.0];
        let v = courant_check(&simple, 3, 3, 1e-8, true).unwrap();
        assert!(v.weak_pass && v.strong_pass == Some(true));
        let double = [1.0, 2.0, 2.0, 4.0];
        let v = courant_check(&double, 3, 3, 1e-8, true).unwrap();
        assert_eq!((v.weak_bound, v.strong_bound), (3, 2));
        assert!(v.weak_pass && v.strong_pass == Some(false));
        assert_eq!(courant_check(&double, 3, 3, 1e-8, false).unwrap().strong_pass, None);
    }
}
