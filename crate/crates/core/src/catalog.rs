//! Strings with closed-form characteristics, used as golden references.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{KreinError, Result};
use crate::special::{bessel_i_scaled, bessel_k_scaled, gamma};
use crate::string::spec::{CoefficientSpec, StringSpec};
use crate::string::{from_coefficient_a, shift_string, CoefficientA, DensityFamily, EndCondition, KreinString};

/// Knots used to tabulate a shifted coefficient.
pub const SHIFT_KNOTS: usize = 2000;

pub const NAMES: [&str; 9] = [
    "classical",
    "caffarelli_silvestre",
    "quasi_relativistic",
    "finite_dual",
    "shifted",
    "water_waves_neumann",
    "water_waves_dirichlet",
    "bessel",
    "atom",
];

/// Which variable the closed-form φ is given in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Variable {
    S,
    T,
    Both,
}

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    Classical,
    CaffarelliSilvestre { alpha: f64, c: f64, big_c: f64 },
    QuasiRelativistic { m: f64 },
    FiniteDual { m: f64 },
    Shifted { base: Box<CatalogEntry>, mu: f64 },
    WaterNeumann { r: f64 },
    WaterDirichlet { r: f64 },
    Bessel { alpha: f64 },
    Atom { s: f64, mass: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct CatalogEntry {
    pub name: String,
    pub params: BTreeMap<String, f64>,
    pub string: KreinString,
    pub coefficient: Option<CoefficientA>,
    pub variable: Variable,
    kind: Kind,
}

/// `c_α = 2^α Γ(α/2) / |Γ(-α/2)|`.
pub fn cs_small_c(alpha: f64) -> f64 {
    2f64.powf(alpha) * gamma(alpha / 2.0) / gamma(-alpha / 2.0).abs()
}

/// `C_α = 2^{1-α/2} / Γ(α/2)`.
pub fn cs_big_c(alpha: f64) -> f64 {
    2f64.powf(1.0 - alpha / 2.0) / gamma(alpha / 2.0)
}

fn bad(msg: String) -> KreinError {
    KreinError::Domain(msg)
}

fn params(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

fn entry(name: &str, p: &[(&str, f64)], string: KreinString, coefficient: Option<CoefficientA>, variable: Variable, kind: Kind) -> CatalogEntry {
    CatalogEntry { name: name.into(), params: params(p), string, coefficient, variable, kind }
}

pub fn classical() -> CatalogEntry {
    let inf = f64::INFINITY;
    let s = KreinString::single(DensityFamily::Constant { c: 1.0 }, inf, None).expect("classical string");
    let a = CoefficientA::single(DensityFamily::Constant { c: 1.0 }, inf, None).expect("classical coefficient");
    entry("classical", &[], s, Some(a), Variable::Both, Kind::Classical)
}

pub fn caffarelli_silvestre(alpha: f64) -> Result<CatalogEntry> {
    if !(alpha > 0.0 && alpha < 2.0) {
        return Err(bad(format!("caffarelli_silvestre needs α in (0, 2), got {alpha}")));
    }
    let c = cs_small_c(alpha);
    let inf = f64::INFINITY;
    let s = KreinString::single(
        DensityFamily::Power { c: c.powf(2.0 / alpha) / (alpha * alpha), p: 2.0 / alpha - 2.0 },
        inf,
        None,
    )?;
    let a = CoefficientA::single(DensityFamily::Power { c: c / alpha, p: 1.0 - alpha }, inf, None)?;
    let kind = Kind::CaffarelliSilvestre { alpha, c, big_c: cs_big_c(alpha) };
    Ok(entry("caffarelli_silvestre", &[("alpha", alpha)], s, Some(a), Variable::Both, kind))
}

pub fn quasi_relativistic(m: f64) -> Result<CatalogEntry> {
    if !(m > 0.0 && m.is_finite()) {
        return Err(bad(format!("quasi_relativistic needs m > 0, got {m}")));
    }
    let inf = f64::INFINITY;
    let s = KreinString::single(DensityFamily::RationalPower { c: 1.0, q: 2.0 * m, r: -2.0 }, inf, None)?;
    let a = CoefficientA::single(DensityFamily::Exponential { c: 1.0, q: -2.0 * m }, inf, None)?;
    Ok(entry("quasi_relativistic", &[("m", m)], s, Some(a), Variable::Both, Kind::QuasiRelativistic { m }))
}

pub fn finite_dual(m: f64) -> Result<CatalogEntry> {
    if !(m > 0.0 && m.is_finite()) {
        return Err(bad(format!("finite_dual needs m > 0, got {m}")));
    }
    let len = 0.5 / m;
    let s = KreinString::single(
        DensityFamily::RationalPower { c: 1.0, q: -2.0 * m, r: -2.0 },
        len,
        Some(EndCondition::DirichletAtR),
    )?;
    let a = CoefficientA::single(DensityFamily::Exponential { c: 1.0, q: 2.0 * m }, f64::INFINITY, None)?;
    Ok(entry("finite_dual", &[("m", m)], s, Some(a), Variable::Both, Kind::FiniteDual { m }))
}

fn water(r: f64, end: EndCondition) -> Result<(KreinString, CoefficientA)> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(bad(format!("water-waves depth must be positive and finite, got {r}")));
    }
    let s = KreinString::single(DensityFamily::Constant { c: 1.0 }, r, Some(end))?;
    let a = CoefficientA::single(DensityFamily::Constant { c: 1.0 }, r, Some(end))?;
    Ok((s, a))
}

pub fn water_waves_neumann(r: f64) -> Result<CatalogEntry> {
    let (s, a) = water(r, EndCondition::NeumannAtR)?;
    Ok(entry("water_waves_neumann", &[("R", r)], s, Some(a), Variable::Both, Kind::WaterNeumann { r }))
}

pub fn water_waves_dirichlet(r: f64) -> Result<CatalogEntry> {
    let (s, a) = water(r, EndCondition::DirichletAtR)?;
    Ok(entry("water_waves_dirichlet", &[("R", r)], s, Some(a), Variable::Both, Kind::WaterDirichlet { r }))
}

/// `a(t) = (1-t)^{1-2α}` on `[0, 1)` with a Dirichlet end; only `α > 0`.
pub fn bessel(alpha: f64) -> Result<CatalogEntry> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(bad(format!("bessel entry needs α > 0, got {alpha}")));
    }
    let dir = Some(EndCondition::DirichletAtR);
    let r = 1.0 / alpha - 2.0;
    let family = if r == 0.0 {
        DensityFamily::Constant { c: 1.0 }
    } else {
        DensityFamily::RationalPower { c: 1.0, q: -2.0 * alpha, r }
    };
    let s = KreinString::single(family, 0.5 / alpha, dir)?;
    let tfam = if alpha == 0.5 {
        DensityFamily::Constant { c: 1.0 }
    } else {
        DensityFamily::RationalPower { c: 1.0, q: -1.0, r: 1.0 - 2.0 * alpha }
    };
    let a = CoefficientA::single(tfam, 1.0, dir)?;
    Ok(entry("bessel", &[("alpha", alpha)], s, Some(a), Variable::T, Kind::Bessel { alpha }))
}

/// Single atom of mass `m` at `s`, zero density, infinite length:
/// `ψ(λ) = λm / (1 + λms)`.
pub fn atom(s: f64, mass: f64) -> Result<CatalogEntry> {
    if !(s > 0.0 && mass > 0.0 && s.is_finite() && mass.is_finite()) {
        return Err(bad(format!("atom entry needs s, mass > 0, got {s}, {mass}")));
    }
    let string = KreinString::new(vec![], vec![crate::string::Atom { s, mass }], f64::INFINITY, None)?;
    Ok(entry("atom", &[("s", s), ("mass", mass)], string, None, Variable::S, Kind::Atom { s, mass }))
}

/// Coefficient `b = a φ_μ²` of the base entry; `ψ_b(λ) = ψ(μ + λ) - ψ(μ)`.
pub fn shifted(base: &CatalogEntry, mu: f64) -> Result<CatalogEntry> {
    let coeff = base
        .coefficient
        .as_ref()
        .ok_or_else(|| KreinError::NotRepresentable(format!("'{}' has no coefficient to shift", base.name)))?;
    let b = shift_string(coeff, mu, SHIFT_KNOTS)?;
    let string = from_coefficient_a(&b, SHIFT_KNOTS)?;
    let mut p = base.params.clone();
    p.insert("mu".into(), mu);
    Ok(CatalogEntry {
        name: "shifted".into(),
        params: p,
        string,
        coefficient: Some(b),
        variable: Variable::T,
        kind: Kind::Shifted { base: Box::new(base.clone()), mu },
    })
}

/// `e^{-x s} (1 ± e^{-2x(R-s)}) / (1 ± e^{-2xR})`, i.e. the cosh or sinh ratio.
fn hyperbolic_ratio(x: f64, r: f64, s: f64, plus: bool) -> f64 {
    let decay = (-x * s).exp();
    if plus {
        decay * (1.0 + (-2.0 * x * (r - s)).exp()) / (1.0 + (-2.0 * x * r).exp())
    } else {
        decay * (-2.0 * x * (r - s)).exp_m1() / (-2.0 * x * r).exp_m1()
    }
}

impl CatalogEntry {
    /// Closed-form `ψ(λ)` for `λ > 0`.
    pub fn psi(&self, lambda: f64) -> f64 {
        let x = lambda.sqrt();
        match &self.kind {
            Kind::Classical => x,
            Kind::CaffarelliSilvestre { alpha, .. } => lambda.powf(0.5 * alpha),
            Kind::QuasiRelativistic { m } => lambda / ((m * m + lambda).sqrt() + m),
            Kind::FiniteDual { m } => (m * m + lambda).sqrt() + m,
            Kind::Shifted { base, mu } => base.psi(mu + lambda) - base.psi(*mu),
            Kind::WaterNeumann { r } => x * (x * r).tanh(),
            Kind::WaterDirichlet { r } => x / (x * r).tanh(),
            Kind::Bessel { alpha } => x * bessel_i_scaled(alpha - 1.0, x) / bessel_i_scaled(*alpha, x),
            Kind::Atom { s, mass } => lambda * mass / (1.0 + lambda * mass * s),
        }
    }

    /// Closed-form `φ_λ(s)` where one is available.
    pub fn phi_s(&self, lambda: f64, s: f64) -> Option<f64> {
        let x = lambda.sqrt();
        match &self.kind {
            Kind::Classical => Some((-x * s).exp()),
            Kind::CaffarelliSilvestre { alpha, c, big_c } => {
                if s == 0.0 {
                    return Some(1.0);
                }
                let z = c * lambda.powf(0.5 * alpha) * s;
                let arg = z.powf(1.0 / alpha);
                Some(big_c * z.sqrt() * bessel_k_scaled(0.5 * alpha, arg) * (-arg).exp())
            }
            Kind::QuasiRelativistic { m } => {
                let e = (m - (m * m + lambda).sqrt()) / (2.0 * m);
                Some((e * (2.0 * m * s).ln_1p()).exp())
            }
            Kind::FiniteDual { m } => {
                let e = (m + (m * m + lambda).sqrt()) / (2.0 * m);
                Some((e * (-2.0 * m * s).ln_1p()).exp())
            }
            Kind::WaterNeumann { r } => Some(hyperbolic_ratio(x, *r, s, true)),
            Kind::WaterDirichlet { r } => Some(hyperbolic_ratio(x, *r, s, false)),
            // φ' jumps from -ψ to 0 at the atom
            Kind::Atom { s: s0, .. } => Some(1.0 - self.psi(lambda) * s.min(*s0)),
            Kind::Shifted { .. } | Kind::Bessel { .. } => None,
        }
    }

    /// Closed-form `φ_λ(t)` in the coefficient variable where one is available.
    pub fn phi_t(&self, lambda: f64, t: f64) -> Option<f64> {
        let x = lambda.sqrt();
        match &self.kind {
            Kind::Classical => Some((-x * t).exp()),
            Kind::CaffarelliSilvestre { alpha, big_c, .. } => {
                if t == 0.0 {
                    return Some(1.0);
                }
                let w = x * t;
                Some(big_c * w.powf(0.5 * alpha) * bessel_k_scaled(0.5 * alpha, w) * (-w).exp())
            }
            Kind::QuasiRelativistic { m } => Some(((m - (m * m + lambda).sqrt()) * t).exp()),
            Kind::FiniteDual { m } => Some((-(m + (m * m + lambda).sqrt()) * t).exp()),
            Kind::WaterNeumann { r } => Some(hyperbolic_ratio(x, *r, t, true)),
            Kind::WaterDirichlet { r } => Some(hyperbolic_ratio(x, *r, t, false)),
            Kind::Bessel { alpha } => {
                let u = 1.0 - t;
                if u <= 0.0 {
                    return Some(0.0);
                }
                let ratio = bessel_i_scaled(*alpha, x * u) / bessel_i_scaled(*alpha, x);
                Some(u.powf(*alpha) * ratio * (-x * t).exp())
            }
            Kind::Shifted { base, mu } => {
                let (num, den) = (base.phi_t(mu + lambda, t)?, base.phi_t(*mu, t)?);
                Some(num / den)
            }
            Kind::Atom { .. } => None,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        #[derive(Serialize)]
        struct Wire<'a> {
            name: &'a str,
            params: &'a BTreeMap<String, f64>,
            variable: Variable,
            string: StringSpec,
            #[serde(skip_serializing_if = "Option::is_none")]
            coefficient: Option<CoefficientSpec>,
        }
        serde_json::to_value(Wire {
            name: &self.name,
            params: &self.params,
            variable: self.variable,
            string: StringSpec::from_string_model(&self.string),
            coefficient: self.coefficient.as_ref().map(CoefficientSpec::from_coefficient),
        })
        .expect("catalog entry serializes")
    }
}

fn get(p: &BTreeMap<String, f64>, key: &str, default: f64) -> f64 {
    p.get(key).copied().unwrap_or(default)
}

/// Builds an entry by name. Missing parameters take the defaults
/// `alpha = 1`, `m = 1`, `R = 1`, `mu = 1`, `s = 1`, `mass = 1`.
/// `shifted` takes its base from `base` (default `classical`).
pub fn lookup(name: &str, p: &BTreeMap<String, f64>, base: Option<&str>) -> Result<CatalogEntry> {
    let known: &[&str] = match name {
        "classical" => &[],
        "caffarelli_silvestre" | "bessel" => &["alpha"],
        "quasi_relativistic" | "finite_dual" => &["m"],
        "water_waves_neumann" | "water_waves_dirichlet" => &["R"],
        "atom" => &["s", "mass"],
        "shifted" => &["mu", "alpha", "m", "R"],
        other => return Err(KreinError::Input(format!("unknown catalog entry '{other}'"))),
    };
    if let Some(k) = p.keys().find(|k| !known.contains(&k.as_str())) {
        return Err(KreinError::Input(format!("entry '{name}' has no parameter '{k}'")));
    }
    match name {
        "classical" => Ok(classical()),
        "caffarelli_silvestre" => caffarelli_silvestre(get(p, "alpha", 1.0)),
        "quasi_relativistic" => quasi_relativistic(get(p, "m", 1.0)),
        "finite_dual" => finite_dual(get(p, "m", 1.0)),
        "water_waves_neumann" => water_waves_neumann(get(p, "R", 1.0)),
        "water_waves_dirichlet" => water_waves_dirichlet(get(p, "R", 1.0)),
        "bessel" => bessel(get(p, "alpha", 1.0)),
        "atom" => atom(get(p, "s", 1.0), get(p, "mass", 1.0)),
        _ => {
            let base_name = base.unwrap_or("classical");
            if base_name == "shifted" {
                return Err(KreinError::Input("a shifted entry cannot be the base of another shift".into()));
            }
            let mut bp = p.clone();
            let mu = bp.remove("mu").unwrap_or(1.0);
            let b = lookup(base_name, &bp, None)?;
            shifted(&b, mu)
        }
    }
}

/// Parses `name` or `name:key=value,...`, where `base=<entry>` selects the
/// base of a shifted entry.
pub fn lookup_str(desc: &str) -> Result<CatalogEntry> {
    let (name, rest) = desc.split_once(':').unwrap_or((desc, ""));
    let mut p = BTreeMap::new();
    let mut base = None;
    for kv in rest.split(',').filter(|s| !s.is_empty()) {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| KreinError::Input(format!("expected key=value, got '{kv}'")))?;
        if k == "base" {
            base = Some(v);
            continue;
        }
        let x: f64 = v.parse().map_err(|_| KreinError::Input(format!("parameter {k}: '{v}' is not a number")))?;
        p.insert(k.to_string(), x);
    }
    lookup(name, &p, base)
}

/// The entries exercised by the property suites, at their reference parameters.
pub fn standard_entries() -> Vec<CatalogEntry> {
    let built = [
        Ok(classical()),
        caffarelli_silvestre(0.5),
        caffarelli_silvestre(1.0),
        caffarelli_silvestre(1.5),
        quasi_relativistic(1.0),
        finite_dual(1.0),
        water_waves_neumann(1.0),
        water_waves_dirichlet(1.0),
        bessel(0.5),
        bessel(1.0),
        bessel(2.0),
        atom(1.0, 1.0),
    ];
    built.into_iter().map(|e| e.expect("reference parameters are valid")).collect()
}
