//! Krein strings: density segments plus point atoms on `[0, R)`.

mod coefficient;
mod complementary;
mod density;
mod shift;
pub mod spec;

pub use coefficient::{from_coefficient_a, to_coefficient_a, CoefficientA};
pub use complementary::complementary;
pub use density::{DensityFamily, DensitySegment};
pub use shift::shift_string;

use crate::error::{domain, KreinError, Result};

/// Boundary behaviour of a string at its right end.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EndCondition {
    /// `R = ∞`.
    Natural,
    /// `φ(R) = 0`.
    DirichletAtR,
    /// Same as continuing the string by zero density on `[R, ∞)`.
    NeumannAtR,
}

impl EndCondition {
    pub fn as_str(self) -> &'static str {
        match self {
            EndCondition::Natural => "natural",
            EndCondition::DirichletAtR => "dirichlet_at_R",
            EndCondition::NeumannAtR => "neumann_at_R",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub s: f64,
    pub mass: f64,
}

/// Locally finite measure `A(ds)` on `[0, R)`.
///
/// Segments always tile `[0, R)`: gaps supplied by the caller are filled with
/// zero density at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct KreinString {
    segments: Vec<DensitySegment>,
    atoms: Vec<Atom>,
    length: f64,
    end: EndCondition,
}

impl KreinString {
    /// Builds and validates a string. `end = None` infers the condition: natural
    /// for infinite length, Dirichlet when `∫(R - s) A(ds)` diverges, and an
    /// error otherwise (the two finite choices give different ψ).
    pub fn new(
        mut segments: Vec<DensitySegment>,
        mut atoms: Vec<Atom>,
        length: f64,
        end: Option<EndCondition>,
    ) -> Result<Self> {
        let bad = |m: String| Err(KreinError::InvalidString(m));
        if !(length > 0.0) {
            return bad(format!("string length {length} must be positive"));
        }
        for seg in &segments {
            seg.validate()?;
        }
        segments.sort_by(|a, b| a.lo.total_cmp(&b.lo));
        let mut tiled = Vec::with_capacity(segments.len() + 2);
        let mut cursor = 0.0;
        for mut seg in segments {
            if seg.lo < cursor - 1e-12 * (1.0 + cursor) {
                return bad(format!("segments overlap near s = {}", seg.lo));
            }
            // rounding overlaps are clipped so every point has one segment
            if seg.lo < cursor {
                seg.lo = cursor;
                if seg.hi <= seg.lo {
                    continue;
                }
            }
            if seg.lo > cursor {
                tiled.push(DensitySegment::constant(cursor, seg.lo, 0.0)?);
            }
            cursor = seg.hi;
            tiled.push(seg);
        }
        if cursor > length * (1.0 + 1e-12) {
            return bad(format!("segments extend to {cursor} beyond R = {length}"));
        }
        if cursor < length {
            tiled.push(DensitySegment::constant(cursor, length, 0.0)?);
        } else if let Some(last) = tiled.last_mut() {
            last.hi = length;
        }
        for (i, seg) in tiled.iter().enumerate() {
            let last = i + 1 == tiled.len();
            if !last && !seg.mass(seg.lo, seg.hi).is_finite() {
                return bad(format!("infinite mass on [{}, {}) inside the string", seg.lo, seg.hi));
            }
        }

        for a in &atoms {
            if !(a.mass > 0.0 && a.mass.is_finite()) {
                return bad(format!("atom mass {} must be positive and finite", a.mass));
            }
            if !(a.s >= 0.0 && a.s < length) {
                return bad(format!("atom position {} outside [0, R)", a.s));
            }
        }
        atoms.sort_by(|a, b| a.s.total_cmp(&b.s));
        let mut merged: Vec<Atom> = Vec::with_capacity(atoms.len());
        for a in atoms {
            match merged.last_mut() {
                Some(prev) if prev.s == a.s => prev.mass += a.mass,
                _ => merged.push(a),
            }
        }

        let mut string = Self { segments: tiled, atoms: merged, length, end: EndCondition::Natural };
        string.end = if length.is_infinite() {
            match end {
                None | Some(EndCondition::Natural) => EndCondition::Natural,
                Some(e) => return bad(format!("{} requires a finite length", e.as_str())),
            }
        } else {
            let moment_finite = string.end_moment_finite();
            match end {
                Some(EndCondition::Natural) => return bad("natural end requires R = ∞".into()),
                Some(EndCondition::NeumannAtR) if !moment_finite => {
                    return bad("∫(R - s) A(ds) diverges, so only the Dirichlet end is possible".into())
                }
                Some(e) => e,
                None if !moment_finite => EndCondition::DirichletAtR,
                None => {
                    return bad("finite string needs an explicit end condition (dirichlet or neumann)".into())
                }
            }
        };
        Ok(string)
    }

    /// Convenience: a single segment on `[0, R)`.
    pub fn single(family: DensityFamily, length: f64, end: Option<EndCondition>) -> Result<Self> {
        let seg = DensitySegment::new(0.0, length, family)?;
        Self::new(vec![seg], Vec::new(), length, end)
    }

    pub fn segments(&self) -> &[DensitySegment] {
        &self.segments
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn end(&self) -> EndCondition {
        self.end
    }

    pub fn is_dirichlet(&self) -> bool {
        self.end == EndCondition::DirichletAtR
    }

    /// Index of the segment containing `s` (the last one for `s >= R`).
    pub fn segment_index(&self, s: f64) -> usize {
        let i = self.segments.partition_point(|seg| seg.hi <= s);
        i.min(self.segments.len() - 1)
    }

    pub fn density(&self, s: f64) -> f64 {
        self.segments[self.segment_index(s)].density(s)
    }

    /// `∫_a^b` of the density part only.
    pub fn density_mass(&self, a: f64, b: f64) -> f64 {
        let mut acc = 0.0;
        for seg in &self.segments {
            let (lo, hi) = (seg.lo.max(a), seg.hi.min(b));
            if hi > lo {
                acc += seg.mass(lo, hi);
            }
        }
        acc
    }

    /// `A([0, s))`: density mass plus atoms strictly left of `s`.
    pub fn cumulative_mass(&self, s: f64) -> Result<f64> {
        if !(s >= 0.0) || s > self.length {
            return domain(format!("s = {s} outside [0, R]"));
        }
        let atoms: f64 = self.atoms.iter().take_while(|a| a.s < s).map(|a| a.mass).sum();
        Ok(self.density_mass(0.0, s) + atoms)
    }

    pub fn total_mass(&self) -> f64 {
        self.density_mass(0.0, self.length) + self.atoms.iter().map(|a| a.mass).sum::<f64>()
    }

    /// Whether `∫(R - s) A(ds)` is finite (always true for infinite strings'
    /// purposes is irrelevant; only meaningful for finite `R`).
    pub fn end_moment_finite(&self) -> bool {
        let last = self.segments.last().unwrap();
        if !last.mass(last.lo, last.hi).is_finite() {
            if let DensityFamily::RationalPower { r, .. } = last.family {
                return r > -2.0;
            }
            return false;
        }
        true
    }

    /// Smallest `S` such that `A` puts no mass on `[S, ∞)` (infinite when the
    /// density persists). Neumann strings count as zero beyond `R`.
    pub fn support_end(&self) -> f64 {
        let mut end = self.atoms.last().map(|a| a.s).unwrap_or(0.0);
        for seg in self.segments.iter().rev() {
            if !seg.is_zero() {
                let top = match &seg.family {
                    DensityFamily::Tabulated { knots } if knots.last().unwrap().1 == 0.0 => {
                        let mut x = knots.last().unwrap().0;
                        for w in knots.windows(2).rev() {
                            if w[0].1 == 0.0 {
                                x = w[0].0;
                            } else {
                                break;
                            }
                        }
                        x
                    }
                    _ => seg.hi,
                };
                end = end.max(top);
                break;
            }
        }
        end
    }

    /// Positions where the density or its derivative may jump.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut pts: Vec<f64> = Vec::new();
        for seg in &self.segments {
            pts.push(seg.lo);
            pts.extend(seg.interior_knots());
        }
        pts.extend(self.atoms.iter().map(|a| a.s));
        if self.length.is_finite() {
            pts.push(self.length);
        }
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }

    /// "Positive and locally Lipschitz" density with no atoms, the hypothesis
    /// of the strong nodal bound.
    pub fn positive_lipschitz(&self) -> bool {
        self.atoms.is_empty()
            && self.segments.len() == 1
            && !self.segments[0].singular_at_lo()
            && match &self.segments[0].family {
                DensityFamily::Constant { c } => *c > 0.0,
                DensityFamily::Power { c, p } => *c > 0.0 && *p == 0.0,
                DensityFamily::RationalPower { c, .. } | DensityFamily::Exponential { c, .. } => *c > 0.0,
                DensityFamily::Tabulated { knots } => knots.iter().all(|k| k.1 > 0.0),
            }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn classical() -> KreinString {
        KreinString::single(DensityFamily::Constant { c: 1.0 }, f64::INFINITY, None).unwrap()
    }

    #[test]
    fn cumulative_mass_examples() {
        assert!((classical().cumulative_mass(2.5).unwrap() - 2.5).abs() < 1e-15);
        let atom = KreinString::new(vec![], vec![Atom { s: 1.0, mass: 1.0 }], f64::INFINITY, None).unwrap();
        assert_eq!(atom.cumulative_mass(0.5).unwrap(), 0.0);
        assert_eq!(atom.cumulative_mass(1.0).unwrap(), 0.0);
        assert_eq!(atom.cumulative_mass(1.5).unwrap(), 1.0);
        let qr = KreinString::single(
            DensityFamily::RationalPower { c: 1.0, q: 2.0, r: -2.0 },
            f64::INFINITY,
            None,
        )
        .unwrap();
        assert!((qr.cumulative_mass(1.0).unwrap() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn cumulative_mass_rejects_beyond_length() {
        let s = KreinString::single(DensityFamily::Constant { c: 1.0 }, 2.0, Some(EndCondition::NeumannAtR)).unwrap();
        assert!(s.cumulative_mass(2.5).is_err());
        assert!((s.cumulative_mass(2.0).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn end_inference() {
        // finite moment: explicit flag required
        assert!(KreinString::single(DensityFamily::Constant { c: 1.0 }, 1.0, None).is_err());
        // (1 - 2s)^-2 on [0, 1/2): moment diverges, Dirichlet forced
        let fd = KreinString::single(
            DensityFamily::RationalPower { c: 1.0, q: -2.0, r: -2.0 },
            0.5,
            None,
        )
        .unwrap();
        assert_eq!(fd.end(), EndCondition::DirichletAtR);
        assert!(KreinString::single(
            DensityFamily::RationalPower { c: 1.0, q: -2.0, r: -2.0 },
            0.5,
            Some(EndCondition::NeumannAtR)
        )
        .is_err());
        assert!(KreinString::single(DensityFamily::Constant { c: 1.0 }, f64::INFINITY, Some(EndCondition::DirichletAtR)).is_err());
    }

    #[test]
    fn gaps_are_filled_with_zero_density() {
        let seg = DensitySegment::constant(1.0, 2.0, 3.0).unwrap();
        let s = KreinString::new(vec![seg], vec![], f64::INFINITY, None).unwrap();
        assert_eq!(s.segments().len(), 3);
        assert_eq!(s.density(0.5), 0.0);
        assert_eq!(s.density(1.5), 3.0);
        assert_eq!(s.support_end(), 2.0);
        assert!((s.cumulative_mass(10.0).unwrap() - 3.0).abs() < 1e-15);
    }

    #[test]
    fn overlapping_segments_rejected() {
        let a = DensitySegment::constant(0.0, 2.0, 1.0).unwrap();
        let b = DensitySegment::constant(1.0, 3.0, 1.0).unwrap();
        assert!(KreinString::new(vec![a, b], vec![], f64::INFINITY, None).is_err());
    }

    #[test]
    fn rounding_overlap_is_clipped() {
        let a = DensitySegment::constant(0.0, 1.0 + 4e-16, 1.0).unwrap();
        let b = DensitySegment::constant(1.0 - 4e-16, 3.0, 2.0).unwrap();
        let s = KreinString::new(vec![a, b], vec![], f64::INFINITY, None).unwrap();
        assert_eq!(s.segments()[1].lo, s.segments()[0].hi);
        assert_eq!(s.density(2.0), 2.0);
    }
}
