//! Seeded random strings for the property suites.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::string::{Atom, DensityFamily, DensitySegment, EndCondition, KreinString};

/// Which kind of right end the generator produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tail {
    /// Constant density on `[L, ∞)`.
    Constant,
    /// Zero density on `[L, ∞)`: finite support, natural end.
    Empty,
    Neumann,
    Dirichlet,
}

fn family(rng: &mut ChaCha8Rng, lo: f64, hi: f64, first: bool) -> DensityFamily {
    match rng.gen_range(0..5) {
        0 => DensityFamily::Constant { c: rng.gen_range(0.2..3.0) },
        1 => {
            // integrable singularity only where the segment starts at 0
            let p = if first { rng.gen_range(-0.6..1.5) } else { rng.gen_range(0.0..1.5) };
            DensityFamily::Power { c: rng.gen_range(0.5..2.0), p }
        }
        2 => DensityFamily::Exponential { c: rng.gen_range(0.5..2.0), q: rng.gen_range(-1.0..1.0) },
        3 => {
            // keep 1 + q s ≥ 0.3 on the segment
            let qmin = -0.7 / hi.max(lo).max(1e-9);
            let q = rng.gen_range(qmin.max(-1.0)..1.0);
            DensityFamily::RationalPower { c: rng.gen_range(0.5..2.0), q, r: rng.gen_range(-2.0..1.0) }
        }
        _ => DensityFamily::Constant { c: 0.0 },
    }
}

/// A string with 1 to 3 finite segments, up to 2 atoms and a random end.
pub fn random_string_with_tail(seed: u64) -> (KreinString, Tail) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nseg = rng.gen_range(1..=3);
    let mut segments = Vec::new();
    let mut lo = 0.0;
    for i in 0..nseg {
        let hi = lo + rng.gen_range(0.2..1.5);
        let fam = family(&mut rng, lo, hi, i == 0);
        let fam = if i == 0 && fam == (DensityFamily::Constant { c: 0.0 }) {
            DensityFamily::Constant { c: 1.0 }
        } else {
            fam
        };
        segments.push(DensitySegment::new(lo, hi, fam).expect("generated segment is valid"));
        lo = hi;
    }
    let length = lo;
    let natoms = rng.gen_range(0..=2);
    let mut atoms = Vec::new();
    for _ in 0..natoms {
        atoms.push(Atom { s: rng.gen_range(0.05..0.95) * length, mass: rng.gen_range(0.1..1.5) });
    }
    let tail = match rng.gen_range(0..4) {
        0 => Tail::Constant,
        1 => Tail::Empty,
        2 => Tail::Neumann,
        _ => Tail::Dirichlet,
    };
    let (total, end) = match tail {
        Tail::Constant => {
            let c = rng.gen_range(0.3..3.0);
            segments.push(DensitySegment::new(length, f64::INFINITY, DensityFamily::Constant { c }).expect("tail"));
            (f64::INFINITY, None)
        }
        Tail::Empty => (f64::INFINITY, None),
        Tail::Neumann => (length, Some(EndCondition::NeumannAtR)),
        Tail::Dirichlet => (length, Some(EndCondition::DirichletAtR)),
    };
    let s = KreinString::new(segments, atoms, total, end).expect("generated string is valid");
    (s, tail)
}

pub fn random_string(seed: u64) -> KreinString {
    random_string_with_tail(seed).0
}

/// `count` strings from consecutive seeds starting at `base`.
pub fn random_strings(base: u64, count: usize) -> Vec<KreinString> {
    (0..count as u64).map(|i| random_string(base + i)).collect()
}
