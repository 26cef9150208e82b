//! The measure ODE `f'' = λ f A(ds)` and the quantities built from its
//! fundamental pair: `ψ(λ)`, `φ_λ(s)` and `∫ A φ_λ²`.
//!
//! Each cell between breakpoints is advanced with a fourth-order Magnus step
//! that uses the exact moments `∫A` and `∫(s - mid) A` of the cell, so the
//! transfer matrix has determinant one and the Wronskian is preserved to
//! rounding. The integrals `∫ f_N⁻²` and `∫ λA / f_N'²` over a cell are read
//! off the matrix entries (`m12 / (f_N(a) f_N(b))` and `m21 / (f_N'(a) f_N'(b))`),
//! which gives `φ = ψ f_N J` and `φ' = -ψ f_N' K` without cancellation.

use crate::error::{domain, KreinError, Result};
use crate::quad::{gauss8, graded_gauss};
use crate::string::{DensitySegment, EndCondition, KreinString};

/// Step-control and termination settings.
#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    /// Local error per step.
    pub step_tol: f64,
    /// Relative size of the neglected `∫ f_N⁻²` tail at termination.
    pub tail_tol: f64,
    pub max_steps: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { step_tol: 1e-13, tail_tol: 1e-14, max_steps: 2_000_000 }
    }
}

const MAX_KAPPA: f64 = 2.0;
const OVERFLOW: f64 = 1e120;
const S_CAP: f64 = 1e15;

type Mat = [f64; 4];

/// Termination bookkeeping for the march.
struct TailState {
    /// `∫ f_N⁻²` up to the last profile point (NaN until it is passed).
    integral_ref: f64,
    /// `(s, f_N'(s))` at the last doubling of `s`.
    mark: Option<(f64, f64)>,
    /// Local exponent of `f_N'` in `s`, clamped to `[0, 1]`.
    growth: f64,
}

fn mat_mul(a: &Mat, b: &Mat) -> Mat {
    [
        a[0] * b[0] + a[1] * b[2],
        a[0] * b[1] + a[1] * b[3],
        a[2] * b[0] + a[3] * b[2],
        a[2] * b[1] + a[3] * b[3],
    ]
}

/// `exp(Ω)` with `Ω = [[d, h], [λ m0, -d]]`, `d = -λ m1`.
fn magnus(lambda: f64, h: f64, m0: f64, m1: f64) -> (Mat, f64) {
    let d = -lambda * m1;
    let lm = lambda * m0;
    let k2 = d * d + h * lm;
    let k = k2.max(0.0).sqrt();
    let (c, sk) = if k < 1e-4 {
        (1.0 + k2 / 2.0 * (1.0 + k2 / 12.0), 1.0 + k2 / 6.0 * (1.0 + k2 / 20.0))
    } else {
        (k.cosh(), k.sinh() / k)
    };
    ([c + sk * d, sk * h, sk * lm, c - sk * d], k)
}

/// Transfer matrix over `[a, b]` from the two half-cells, plus an error
/// estimate against the single full-cell step.
fn cell_step(seg: &DensitySegment, lambda: f64, a: f64, b: f64) -> (Mat, f64, f64) {
    let mid = 0.5 * (a + b);
    let (l0, l1) = seg.moments(a, mid);
    let (r0, r1) = seg.moments(mid, b);
    let m0 = l0 + r0;
    let m1 = l1 + l0 * (0.5 * (a + mid) - mid) + r1 + r0 * (0.5 * (mid + b) - mid);
    let h = b - a;
    let (full, kappa) = magnus(lambda, h, m0, m1);
    let (left, _) = magnus(lambda, mid - a, l0, l1);
    let (right, _) = magnus(lambda, b - mid, r0, r1);
    let fine = mat_mul(&right, &left);
    let scale = full[0].abs().max(full[3].abs()).max(1.0);
    let err = (full[0] - fine[0])
        .abs()
        .max((full[3] - fine[3]).abs())
        .max((full[1] - fine[1]).abs() / h)
        .max((full[2] - fine[2]).abs() * h)
        / scale;
    (fine, err, kappa)
}

/// Transfer matrix over a sub-interval of an accepted cell (no error control).
fn sub_matrix(seg: &DensitySegment, lambda: f64, a: f64, b: f64) -> Mat {
    if b <= a {
        return [1.0, 0.0, 0.0, 1.0];
    }
    let (m0, m1) = seg.moments(a, b);
    magnus(lambda, b - a, m0, m1).0
}

/// State after a cell and, if one sits at its right end, an atom.
#[derive(Debug, Clone, Copy)]
pub struct Node {
    pub s: f64,
    pub f_n: f64,
    /// Right derivative.
    pub f_n_prime: f64,
    pub f_d: f64,
    pub f_d_prime: f64,
    /// `f_N'` just left of `s` (differs from `f_n_prime` at atoms).
    f_n_prime_left: f64,
    /// Segment of the cell ending here.
    seg: usize,
    /// Cell transfer matrix from the previous node.
    m: Mat,
    /// `∫ f_N⁻²` over the cell.
    cj: f64,
    /// `∫ λ A / f_N'²` over the cell (without the atom).
    ck: f64,
    /// Atom mass at `s` (zero if none).
    atom: f64,
    /// The cell is the unresolved sliver before a singular end.
    remainder: bool,
}

/// Why the march stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stop {
    /// No mass beyond the last node; the tail is exact.
    NoMass,
    /// Reached the Dirichlet end.
    Dirichlet,
    /// The `∫ f_N⁻²` tail bound fell below tolerance.
    TailBound,
    /// `f_N` grew beyond the overflow guard.
    Overflow,
    /// Reached an explicit `s_max`.
    SMax,
}

/// Solution of the measure ODE for one λ, with `ψ` and suffix sums for `φ`.
#[derive(Debug, Clone)]
pub struct Solution<'a> {
    string: &'a KreinString,
    lambda: f64,
    psi: f64,
    nodes: Vec<Node>,
    /// `J(s_k) = ∫_{s_k}^{R_eff} f_N⁻²`.
    j: Vec<f64>,
    /// `K(s_k+)`, the `λA/f_N'²` integral right of `s_k`.
    k: Vec<f64>,
    stop: Stop,
}

fn events(string: &KreinString, extra: &[f64], upto: f64) -> Vec<f64> {
    let mut pts = string.breakpoints();
    pts.extend(extra.iter().copied());
    let se = string.support_end();
    if se.is_finite() {
        pts.push(se);
    }
    pts.push(upto);
    pts.retain(|&x| x >= 0.0 && x <= upto && x.is_finite());
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

struct Marcher<'a> {
    string: &'a KreinString,
    lambda: f64,
    opts: SolveOptions,
    /// Largest requested profile point; the tail criterion is measured
    /// against `∫ f_N⁻²` accumulated beyond it.
    tail_ref: f64,
    /// Growth exponent of `f_N'` when the march stopped on the tail bound.
    growth: std::cell::Cell<f64>,
}

impl<'a> Marcher<'a> {
    /// Marches from 0. `psi_mode` stops on tail/overflow criteria; otherwise the
    /// march runs to `upto` and renormalizes (`log_scale`) past 1e100.
    fn run(&self, extra: &[f64], upto: f64, psi_mode: bool) -> Result<(Vec<Node>, Stop, Vec<f64>)> {
        let string = self.string;
        let lambda = self.lambda;
        let ev = events(string, extra, upto);
        let atoms = string.atoms();
        let atom_at = |s: f64| atoms.iter().find(|a| a.s == s).map(|a| a.mass).unwrap_or(0.0);
        let support = string.support_end();
        let dirichlet = string.is_dirichlet();

        let a0 = atom_at(0.0);
        let mut node = Node {
            s: 0.0,
            f_n: 1.0,
            f_n_prime: lambda * a0,
            f_d: 0.0,
            f_d_prime: 1.0,
            f_n_prime_left: 0.0,
            seg: 0,
            m: [1.0, 0.0, 0.0, 1.0],
            cj: 0.0,
            ck: if a0 > 0.0 { f64::INFINITY } else { 0.0 },
            atom: a0,
            remainder: false,
        };
        let mut nodes = vec![node];
        let mut log_scale = vec![0.0];
        let mut scale_acc = 0.0f64;
        let mut integral = 0.0;
        let mut tail = TailState {
            integral_ref: if self.tail_ref > 0.0 { f64::NAN } else { 0.0 },
            mark: None,
            growth: 1.0,
        };
        let mut h = 0.5 / lambda.max(1e-300).sqrt();
        h = h.min(1.0);

        let mut ev = ev;
        let mut ei = 0;
        loop {
            if ei + 1 >= ev.len() {
                if psi_mode && string.length().is_infinite() {
                    // the density persists: keep extending the march outwards
                    let s = node.s;
                    ev.push((2.0 * s).max(s + 40.0 / lambda.sqrt()));
                } else {
                    break;
                }
            }
            let (x, y) = (ev[ei], ev[ei + 1]);
            ei += 1;
            let si = string.segment_index(x);
            let seg = &string.segments()[si];
            let y_seg = y.min(seg.hi);
            let infinite_end = seg.singular_at_hi() && y_seg >= seg.hi && !seg.mass(x, seg.hi).is_finite();
            let mut s = node.s;
            while s < y_seg {
                if psi_mode {
                    if let Some(stop) = self.check_stop(&node, integral, &mut tail, support) {
                        return Ok((nodes, stop, log_scale));
                    }
                }
                if nodes.len() > self.opts.max_steps || s > S_CAP {
                    return Err(KreinError::Accuracy {
                        message: format!("march did not terminate (s = {s:e}, {} steps)", nodes.len()),
                        best_estimate: if integral > 0.0 { 1.0 / integral } else { f64::NAN },
                    });
                }
                let remaining = y_seg - s;
                if infinite_end && remaining <= 1e-14 * y_seg.abs().max(1e-300) {
                    // remaining ∫ f_N⁻² is at most remaining / f_N²
                    let rem = remaining / (node.f_n * node.f_n);
                    integral += rem;
                    node.cj = rem;
                    node.ck = 0.0;
                    node.m = [1.0, 0.0, 0.0, 1.0];
                    node.remainder = true;
                    node.s = y_seg;
                    break;
                }
                let cap = if infinite_end { 0.5 * remaining } else { remaining };
                let mut h_try = h.min(cap);
                let (mat, b) = loop {
                    let b = if h_try >= remaining { y_seg } else { s + h_try };
                    let (mat, err, kappa) = cell_step(seg, lambda, s, b);
                    let hmin = 8.0 * f64::EPSILON * s.abs().max(1e-290);
                    if (err <= self.opts.step_tol && kappa <= MAX_KAPPA) || h_try <= hmin {
                        let factor = if err == 0.0 {
                            4.0
                        } else {
                            (0.9 * (self.opts.step_tol / err).powf(0.2)).clamp(0.2, 4.0)
                        };
                        let grown = h_try * factor;
                        h = if h_try < h { h.max(grown) } else { grown };
                        break (mat, b);
                    }
                    let mut shrink = if err > 0.0 {
                        (0.9 * (self.opts.step_tol / err).powf(0.2)).clamp(0.2, 0.9)
                    } else {
                        0.5
                    };
                    if kappa > MAX_KAPPA {
                        shrink = shrink.min(0.5 * MAX_KAPPA / kappa);
                    }
                    h_try *= shrink;
                };
                let prev = node;
                let fa = prev.f_n;
                let fpa = prev.f_n_prime;
                let f_n = mat[0] * fa + mat[1] * fpa;
                let f_np = mat[2] * fa + mat[3] * fpa;
                let f_d = mat[0] * prev.f_d + mat[1] * prev.f_d_prime;
                let f_dp = mat[2] * prev.f_d + mat[3] * prev.f_d_prime;
                let scale2 = (-2.0 * scale_acc).exp();
                let cj = mat[1] / (fa * f_n) * scale2;
                let ck = if mat[2] == 0.0 {
                    0.0
                } else if fpa == 0.0 {
                    f64::INFINITY
                } else {
                    mat[2] / (fpa * f_np) * scale2
                };
                integral += cj;
                node = Node {
                    s: b,
                    f_n,
                    f_n_prime: f_np,
                    f_d,
                    f_d_prime: f_dp,
                    f_n_prime_left: f_np,
                    seg: si,
                    m: mat,
                    cj,
                    ck,
                    atom: 0.0,
                    remainder: false,
                };
                s = b;
                if s < y_seg {
                    self.push(&mut nodes, &mut log_scale, &mut node, &mut scale_acc, psi_mode);
                }
            }
            // arrival at the event y (possibly an atom)
            node.s = y;
            node.seg = si;
            let m = if y < string.length() { atom_at(y) } else { 0.0 };
            if m > 0.0 {
                node.atom = m;
                node.f_n_prime_left = node.f_n_prime;
                node.f_n_prime += lambda * m * node.f_n;
                node.f_d_prime += lambda * m * node.f_d;
            }
            self.push(&mut nodes, &mut log_scale, &mut node, &mut scale_acc, psi_mode);
            if dirichlet && y >= string.length() {
                return Ok((nodes, Stop::Dirichlet, log_scale));
            }
            if psi_mode {
                if let Some(stop) = self.check_stop(&node, integral, &mut tail, support) {
                    return Ok((nodes, stop, log_scale));
                }
            }
        }
        Ok((nodes, if psi_mode { Stop::NoMass } else { Stop::SMax }, log_scale))
    }

    fn push(&self, nodes: &mut Vec<Node>, log_scale: &mut Vec<f64>, node: &mut Node, acc: &mut f64, psi_mode: bool) {
        nodes.push(*node);
        log_scale.push(*acc);
        if !psi_mode && node.f_n.abs().max(node.f_d.abs()) > 1e100 {
            let f = 1e-100;
            node.f_n *= f;
            node.f_n_prime *= f;
            node.f_d *= f;
            node.f_d_prime *= f;
            node.f_n_prime_left *= f;
            *acc += 100.0 * std::f64::consts::LN_10;
        }
    }

    fn check_stop(&self, node: &Node, integral: f64, tail: &mut TailState, support: f64) -> Option<Stop> {
        if node.s >= support && !self.string.is_dirichlet() {
            return Some(Stop::NoMass);
        }
        if node.f_n > OVERFLOW {
            return Some(Stop::Overflow);
        }
        // the growth model is only used on the final, infinite segment
        let last_lo = self.string.segments().last().map_or(f64::INFINITY, |g| g.lo);
        if self.string.length().is_infinite() && node.s > last_lo.max(0.0) && node.f_n_prime > 0.0 {
            match tail.mark {
                None => tail.mark = Some((node.s, node.f_n_prime)),
                Some((s0, d0)) if node.s >= 2.0 * s0 => {
                    tail.growth = ((node.f_n_prime / d0).ln() / (node.s / s0).ln()).clamp(0.0, 1.0);
                    tail.mark = Some((node.s, node.f_n_prime));
                }
                _ => {}
            }
        }
        if tail.integral_ref.is_nan() {
            if node.s < self.tail_ref {
                return None;
            }
            tail.integral_ref = integral;
        }
        let past = integral - tail.integral_ref;
        if node.f_n_prime > 0.0 && past > 0.0 {
            // the tail is modelled from the growth of f_N'; what remains
            // uncertain is about `growth` times the bound
            let bound = 1.0 / (node.f_n * node.f_n_prime);
            if bound * tail.growth <= self.opts.tail_tol * past {
                self.growth.set(tail.growth);
                return Some(Stop::TailBound);
            }
        }
        None
    }
}

/// `ψ(0)`: zero for natural and Neumann ends, `1/R` for a Dirichlet end.
pub fn psi_at_zero(string: &KreinString) -> f64 {
    match string.end() {
        EndCondition::DirichletAtR => 1.0 / string.length(),
        _ => 0.0,
    }
}

/// Solves for `ψ(λ)` and the data needed to evaluate `φ_λ`, with nodes forced
/// at `points`.
pub fn solve_with<'a>(string: &'a KreinString, lambda: f64, points: &[f64], opts: SolveOptions) -> Result<Solution<'a>> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return domain(format!("λ = {lambda} must be positive (use psi_at_zero for λ = 0)"));
    }
    let far_point = points.iter().copied().filter(|p| p.is_finite()).fold(0.0, f64::max);
    let marcher = Marcher { string, lambda, opts, tail_ref: far_point, growth: std::cell::Cell::new(1.0) };
    let mut upto = string.length();
    if upto.is_infinite() {
        let base = string.breakpoints().last().copied().unwrap_or(0.0);
        upto = base.max(far_point) + 40.0 / lambda.sqrt();
    }
    let (nodes, stop, _) = marcher.run(points, upto, true)?;
    Ok(Solution::assemble(string, lambda, nodes, stop, marcher.growth.get()))
}

pub fn solve(string: &KreinString, lambda: f64) -> Result<Solution<'_>> {
    solve_with(string, lambda, &[], SolveOptions::default())
}

/// `ψ(λ) = (∫_0^{R} f_N⁻² ds)⁻¹`; `tol` is the relative tail tolerance.
pub fn psi(string: &KreinString, lambda: f64, tol: f64) -> Result<f64> {
    if lambda == 0.0 {
        return Ok(psi_at_zero(string));
    }
    let opts = SolveOptions { tail_tol: tol.min(1e-10), ..SolveOptions::default() };
    Ok(solve_with(string, lambda, &[], opts)?.psi())
}

/// Default-tolerance `ψ(λ)`.
pub fn psi_default(string: &KreinString, lambda: f64) -> Result<f64> {
    psi(string, lambda, 1e-14)
}

impl<'a> Solution<'a> {
    fn assemble(string: &'a KreinString, lambda: f64, nodes: Vec<Node>, stop: Stop, growth: f64) -> Self {
        let n = nodes.len();
        let last = nodes[n - 1];
        // tails of J and K beyond the last node
        let (tj, tk) = match stop {
            Stop::NoMass => {
                if last.f_n_prime > 0.0 {
                    (1.0 / (last.f_n * last.f_n_prime), 0.0)
                } else {
                    (f64::INFINITY, 0.0)
                }
            }
            Stop::Dirichlet => {
                let g = if last.f_n_prime > 0.0 { 1.0 / (last.f_n * last.f_n_prime) } else { f64::INFINITY };
                (0.0, g)
            }
            Stop::TailBound if last.f_n_prime > 0.0 => {
                // f_N' ~ s^g gives ∫_s^∞ f_N⁻² = (1+g)/(1+2g) / (f_N f_N')
                let g = growth;
                ((1.0 + g) / (1.0 + 2.0 * g) / (last.f_n * last.f_n_prime), 0.0)
            }
            _ => (0.0, 0.0),
        };
        let mut j = vec![0.0; n];
        let mut k = vec![0.0; n];
        j[n - 1] = tj;
        k[n - 1] = tk;
        for i in (0..n - 1).rev() {
            let nx = &nodes[i + 1];
            j[i] = j[i + 1] + nx.cj;
            let atom_k = if nx.atom > 0.0 {
                let (l, r) = (nx.f_n_prime_left, nx.f_n_prime);
                if l > 0.0 {
                    lambda * nx.atom / (l * r)
                } else {
                    f64::INFINITY
                }
            } else {
                0.0
            };
            k[i] = k[i + 1] + atom_k + nx.ck;
        }
        let total = j[0];
        let psi = if total.is_infinite() { 0.0 } else { 1.0 / total };
        Self { string, lambda, psi, nodes, j, k, stop }
    }

    pub fn psi(&self) -> f64 {
        self.psi
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn stop(&self) -> Stop {
        self.stop
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    /// `f_D / f_N` at the last node, which tends to `1/ψ` (cross-check).
    pub fn ratio_estimate(&self) -> f64 {
        let last = self.nodes.last().unwrap();
        last.f_d / last.f_n
    }

    fn end_s(&self) -> f64 {
        self.nodes.last().unwrap().s
    }

    /// `(φ(s), φ'(s+))`.
    pub fn eval(&self, s: f64) -> (f64, f64) {
        if self.psi == 0.0 {
            return (1.0, 0.0);
        }
        let psi = self.psi;
        let last = self.nodes.last().unwrap();
        if s >= last.s {
            return match self.stop {
                Stop::NoMass if s > last.s => (psi / last.f_n_prime, 0.0),
                _ if s > last.s => (0.0, 0.0),
                _ => self.at_node(self.nodes.len() - 1),
            };
        }
        let i = self.nodes.partition_point(|nd| nd.s <= s);
        // nodes[i-1].s <= s < nodes[i].s
        if self.nodes[i - 1].s == s {
            return self.at_node(i - 1);
        }
        let left = &self.nodes[i - 1];
        let right = &self.nodes[i];
        if right.remainder {
            return self.at_node(i);
        }
        let seg = &self.string.segments()[right.seg];
        let to_x = sub_matrix(seg, self.lambda, left.s, s);
        let f_n = to_x[0] * left.f_n + to_x[1] * left.f_n_prime;
        let f_np = to_x[2] * left.f_n + to_x[3] * left.f_n_prime;
        let from_x = sub_matrix(seg, self.lambda, s, right.s);
        let j_b = self.j[i];
        let phi = psi * (f_n * j_b + from_x[1] / right.f_n);
        // K just left of the right node includes its atom
        let atom_k = if right.atom > 0.0 && right.f_n_prime_left > 0.0 {
            self.lambda * right.atom / (right.f_n_prime_left * right.f_n_prime)
        } else {
            0.0
        };
        let k_b = self.k[i] + atom_k;
        let dphi = if right.f_n_prime_left > 0.0 {
            -psi * (f_np * k_b + from_x[2] / right.f_n_prime_left)
        } else {
            -psi
        };
        (phi, dphi)
    }

    fn at_node(&self, i: usize) -> (f64, f64) {
        let nd = &self.nodes[i];
        let phi = self.psi * nd.f_n * self.j[i];
        let dphi = if nd.f_n_prime > 0.0 { -self.psi * nd.f_n_prime * self.k[i] } else { -self.psi };
        (phi, dphi)
    }

    /// `∫ A(ds) φ²`, atoms included.
    pub fn phi_mass_integral(&self) -> f64 {
        if self.psi == 0.0 {
            return self.string.total_mass();
        }
        let mut acc = 0.0;
        for w in self.nodes.windows(2) {
            let (a, b) = (w[0].s, w[1].s);
            let seg = &self.string.segments()[w[1].seg];
            if b > a && !seg.is_zero() && !w[1].remainder {
                acc += seg.integrate(a, b, |x| {
                    let p = self.eval(x).0;
                    p * p
                });
            }
        }
        for (i, nd) in self.nodes.iter().enumerate() {
            if nd.atom > 0.0 {
                let p = self.at_node(i).0;
                acc += nd.atom * p * p;
            }
        }
        acc
    }

    /// `∫ φ'² ds + λ ∫ A φ²`, which equals `ψ(λ)` for the minimiser.
    pub fn energy(&self) -> f64 {
        let mut kinetic = 0.0;
        for w in self.nodes.windows(2) {
            let (a, b) = (w[0].s, w[1].s);
            if b > a && !w[1].remainder {
                let seg = &self.string.segments()[w[1].seg];
                let f = |x: f64| {
                    let d = self.eval(x).1;
                    d * d
                };
                kinetic += if seg.singular_at_lo() && a - seg.lo < b - a {
                    graded_gauss(a, b, true, f)
                } else if seg.singular_at_hi() && seg.hi - b < b - a {
                    graded_gauss(a, b, false, f)
                } else {
                    gauss8(a, b, f)
                };
            }
        }
        kinetic + self.lambda * self.phi_mass_integral()
    }

    pub fn profile(&self, s_grid: &[f64]) -> PhiProfile {
        let (phi, phi_prime): (Vec<f64>, Vec<f64>) = s_grid.iter().map(|&s| self.eval(s)).unzip();
        PhiProfile { lambda: self.lambda, s_grid: s_grid.to_vec(), phi, phi_prime, psi_value: self.psi }
    }

    /// Largest node position where `φ` is still at least `threshold`.
    pub fn reach(&self, threshold: f64) -> f64 {
        (0..self.nodes.len())
            .rev()
            .find(|&i| self.at_node(i).0 >= threshold)
            .map(|i| self.nodes[i].s)
            .unwrap_or(0.0)
    }

    /// Extent of the computed solution.
    pub fn s_end(&self) -> f64 {
        self.end_s()
    }
}

/// `φ_λ` and its right derivative on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PhiProfile {
    pub lambda: f64,
    pub s_grid: Vec<f64>,
    pub phi: Vec<f64>,
    pub phi_prime: Vec<f64>,
    pub psi_value: f64,
}

/// `φ_λ` on `s_grid` (λ = 0 gives the affine `1 - ψ(0) s`).
pub fn phi(string: &KreinString, lambda: f64, s_grid: &[f64]) -> Result<PhiProfile> {
    for &s in s_grid {
        // a finite end R itself is allowed; φ(R) = 0 for a Dirichlet end
        let r = string.length();
        if !(s >= 0.0 && (s < r || (r.is_finite() && s == r))) {
            return domain(format!("profile point {s} outside [0, R]"));
        }
    }
    if lambda == 0.0 {
        let p0 = psi_at_zero(string);
        return Ok(PhiProfile {
            lambda,
            s_grid: s_grid.to_vec(),
            phi: s_grid.iter().map(|s| 1.0 - p0 * s).collect(),
            phi_prime: vec![-p0; s_grid.len()],
            psi_value: p0,
        });
    }
    let sol = solve_with(string, lambda, s_grid, SolveOptions::default())?;
    Ok(sol.profile(s_grid))
}

/// `∫ A(ds) φ_λ²`.
pub fn phi_mass_integral(string: &KreinString, lambda: f64) -> Result<f64> {
    Ok(solve(string, lambda)?.phi_mass_integral())
}

/// Fundamental pair on a knot grid up to `s_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct StringSolution {
    pub lambda: f64,
    pub s_grid: Vec<f64>,
    pub f_n: Vec<f64>,
    pub f_n_prime: Vec<f64>,
    pub f_d: Vec<f64>,
    pub f_d_prime: Vec<f64>,
    /// Natural log of the common factor removed from the four columns at each knot.
    pub log_scale: Vec<f64>,
    pub psi_value: f64,
    /// `(f_N, f_N')` at `s_max` for linear continuation where the density vanishes.
    pub tail_model: (f64, f64),
}

impl StringSolution {
    pub fn wronskian(&self, i: usize) -> f64 {
        self.f_d_prime[i] * self.f_n[i] - self.f_n_prime[i] * self.f_d[i]
    }
}

/// Marches `(f_N, f_D)` to `s_max` with `steps_per_segment` uniform output knots
/// per segment in addition to the breakpoints.
pub fn solve_fundamental(
    string: &KreinString,
    lambda: f64,
    s_max: f64,
    steps_per_segment: usize,
) -> Result<StringSolution> {
    if !(lambda >= 0.0) {
        return domain(format!("λ = {lambda} must be nonnegative"));
    }
    if !(s_max > 0.0) || s_max >= string.length() {
        return domain(format!("s_max = {s_max} must lie in (0, R)"));
    }
    let mut knots = vec![0.0, s_max];
    for seg in string.segments() {
        let (lo, hi) = (seg.lo, seg.hi.min(s_max));
        if hi > lo {
            for j in 0..=steps_per_segment {
                knots.push(lo + (hi - lo) * j as f64 / steps_per_segment.max(1) as f64);
            }
        }
    }
    knots.extend(string.breakpoints().into_iter().filter(|&x| x <= s_max));
    knots.sort_by(f64::total_cmp);
    knots.dedup();
    let psi_value = if lambda == 0.0 { psi_at_zero(string) } else { psi_default(string, lambda)? };
    let marcher = Marcher { string, lambda, opts: SolveOptions::default(), tail_ref: 0.0, growth: std::cell::Cell::new(1.0) };
    let (nodes, _, log_scale) = if lambda == 0.0 {
        let ns = knots
            .iter()
            .map(|&s| Node {
                s,
                f_n: 1.0,
                f_n_prime: 0.0,
                f_d: s,
                f_d_prime: 1.0,
                f_n_prime_left: 0.0,
                seg: 0,
                m: [1.0, 0.0, 0.0, 1.0],
                cj: 0.0,
                ck: 0.0,
                atom: 0.0,
                remainder: false,
            })
            .collect::<Vec<_>>();
        let ls = vec![0.0; ns.len()];
        (ns, Stop::SMax, ls)
    } else {
        marcher.run(&knots, s_max, false)?
    };
    let mut out = StringSolution {
        lambda,
        s_grid: Vec::new(),
        f_n: Vec::new(),
        f_n_prime: Vec::new(),
        f_d: Vec::new(),
        f_d_prime: Vec::new(),
        log_scale: Vec::new(),
        psi_value,
        tail_model: (0.0, 0.0),
    };
    let mut ki = 0;
    for (nd, ls) in nodes.iter().zip(log_scale) {
        while ki < knots.len() && knots[ki] < nd.s {
            ki += 1;
        }
        if ki < knots.len() && knots[ki] == nd.s && out.s_grid.last() != Some(&nd.s) {
            out.s_grid.push(nd.s);
            out.f_n.push(nd.f_n);
            out.f_n_prime.push(nd.f_n_prime);
            out.f_d.push(nd.f_d);
            out.f_d_prime.push(nd.f_d_prime);
            out.log_scale.push(ls);
        }
    }
    let last = out.s_grid.len() - 1;
    out.tail_model = (out.f_n[last], out.f_n_prime[last]);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::string::{Atom, DensityFamily};

    fn constant(c: f64, r: f64, end: Option<EndCondition>) -> KreinString {
        KreinString::single(DensityFamily::Constant { c }, r, end).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a / b - 1.0).abs()
    }

    #[test]
    fn classical_fundamental_pair() {
        let s = constant(1.0, f64::INFINITY, None);
        let sol = solve_fundamental(&s, 1.0, 2.0, 10).unwrap();
        let i = sol.s_grid.iter().position(|&x| (x - 1.0).abs() < 1e-12).unwrap();
        assert!((sol.f_n[i] - 1f64.cosh()).abs() < 1e-8);
        assert!((sol.f_d[i] - 1f64.sinh()).abs() < 1e-8);
        for k in 0..sol.s_grid.len() {
            assert!((sol.wronskian(k) - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn zero_lambda_fundamental_pair() {
        let s = constant(2.0, f64::INFINITY, None);
        let sol = solve_fundamental(&s, 0.0, 2.0, 4).unwrap();
        for (k, &x) in sol.s_grid.iter().enumerate() {
            assert_eq!(sol.f_n[k], 1.0);
            assert_eq!(sol.f_d[k], x);
        }
    }

    #[test]
    fn atom_jump_rule() {
        let s = KreinString::new(vec![], vec![Atom { s: 1.0, mass: 1.0 }], f64::INFINITY, None).unwrap();
        let sol = solve_fundamental(&s, 1.0, 3.0, 4).unwrap();
        for (k, &x) in sol.s_grid.iter().enumerate() {
            let (fnx, fdx) = if x < 1.0 { (1.0, x) } else { (1.0 + (x - 1.0), x + (x - 1.0)) };
            assert!((sol.f_n[k] - fnx).abs() < 1e-14, "{x}");
            assert!((sol.f_d[k] - fdx).abs() < 1e-14, "{x}");
        }
        assert!((psi_default(&s, 1.0).unwrap() - 0.5).abs() < 1e-14);
        let prof = phi(&s, 1.0, &[0.0, 0.5, 1.0, 2.0]).unwrap();
        assert!((prof.phi[2] - 0.5).abs() < 1e-14);
        assert!((prof.phi[3] - 0.5).abs() < 1e-14);
        assert!((phi_mass_integral(&s, 1.0).unwrap() - 0.25).abs() < 1e-14);
    }

    #[test]
    fn classical_psi_and_phi() {
        let s = constant(1.0, f64::INFINITY, None);
        assert!(rel(psi_default(&s, 4.0).unwrap(), 2.0) < 1e-12);
        let prof = phi(&s, 1.0, &[0.0, 1.0, 3.0]).unwrap();
        assert_eq!(prof.phi[0], 1.0);
        assert!(rel(prof.phi[1], (-1f64).exp()) < 1e-10);
        assert!(rel(prof.phi_prime[2], -(-3f64).exp()) < 1e-9);
        let sol = solve(&s, 4.0).unwrap();
        assert!(rel(sol.phi_mass_integral(), 0.25) < 1e-9);
        assert!(rel(sol.energy(), 2.0) < 1e-9);
        // interior evaluation away from nodes
        let (p, d) = sol.eval(0.123_456);
        assert!(rel(p, (-2.0 * 0.123_456f64).exp()) < 1e-10);
        assert!(rel(d, -2.0 * (-2.0 * 0.123_456f64).exp()) < 1e-10);
    }

    #[test]
    fn quasi_relativistic_psi_and_phi() {
        let s = KreinString::single(DensityFamily::RationalPower { c: 1.0, q: 2.0, r: -2.0 }, f64::INFINITY, None).unwrap();
        assert!(rel(psi_default(&s, 3.0).unwrap(), 1.0) < 1e-10);
        for &l in &[0.1, 10.0, 100.0] {
            let expect = (1.0 + l as f64).sqrt() - 1.0;
            assert!(rel(psi_default(&s, l).unwrap(), expect) < 1e-9, "{l}");
        }
        let prof = phi(&s, 3.0, &[1.0]).unwrap();
        assert!(rel(prof.phi[0], 3f64.powf(-0.5)) < 1e-9);
    }

    #[test]
    fn water_waves_ends() {
        let n = constant(1.0, 1.0, Some(EndCondition::NeumannAtR));
        assert!(rel(psi_default(&n, 1.0).unwrap(), 1f64.tanh()) < 1e-12);
        let d = constant(1.0, 1.0, Some(EndCondition::DirichletAtR));
        assert!(rel(psi_default(&d, 1.0).unwrap(), 1.0 / 1f64.tanh()) < 1e-12);
        let sol = solve(&d, 1.0).unwrap();
        assert!(sol.eval(1.0 - 1e-9).0.abs() < 1e-8);
        assert!(rel(1.0 / sol.ratio_estimate(), sol.psi()) < 1e-12);
    }

    #[test]
    fn finite_dual_singular_end() {
        let s = KreinString::single(DensityFamily::RationalPower { c: 1.0, q: -2.0, r: -2.0 }, 0.5, None).unwrap();
        for &l in &[0.1, 1.0, 10.0, 100.0] {
            let expect = (1.0 + l as f64).sqrt() + 1.0;
            assert!(rel(psi_default(&s, l).unwrap(), expect) < 1e-9, "{l}");
        }
    }

    #[test]
    fn zero_string_has_zero_psi() {
        let s = constant(0.0, f64::INFINITY, None);
        assert_eq!(psi_default(&s, 1.0).unwrap(), 0.0);
        let p = phi(&s, 10.0, &[0.0, 5.0]).unwrap();
        assert_eq!(p.phi, vec![1.0, 1.0]);
    }

    #[test]
    fn psi_at_zero_cases() {
        assert_eq!(psi_at_zero(&constant(1.0, f64::INFINITY, None)), 0.0);
        assert_eq!(psi_at_zero(&constant(1.0, 2.0, Some(EndCondition::DirichletAtR))), 0.5);
    }

    #[test]
    fn rejects_negative_lambda_and_bad_s_max() {
        let s = constant(1.0, 1.0, Some(EndCondition::NeumannAtR));
        assert!(psi(&s, -1.0, 1e-12).is_err());
        assert!(solve_fundamental(&s, -1.0, 0.5, 4).is_err());
        assert!(solve_fundamental(&s, 1.0, 1.0, 4).is_err());
    }
}
