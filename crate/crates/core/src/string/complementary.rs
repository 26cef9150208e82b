//! The complementary string, whose distribution function is the
//! left-continuous generalised inverse of `s ↦ A([0, s))`.

use super::{Atom, DensityFamily, DensitySegment, EndCondition, KreinString};
use crate::error::{KreinError, Result};

enum Piece {
    Density(DensitySegment),
    Atom(f64, f64),
}

/// Image of the density on `[a, b) ⊂ seg` when its mass starts at level `t0`.
fn map_piece(seg: &DensitySegment, a: f64, b: f64, t0: f64) -> Result<Vec<Piece>> {
    let m = seg.mass(a, b);
    if seg.is_zero() {
        return Ok(vec![Piece::Atom(t0, b - a)]);
    }
    let t1 = t0 + m;
    let closed = match seg.family {
        DensityFamily::Constant { c } => Some(DensityFamily::Constant { c: 1.0 / c }),
        DensityFamily::Power { c, p } => {
            let ua = a - seg.lo;
            if p == 0.0 {
                Some(DensityFamily::Constant { c: 1.0 / c })
            } else if ua <= 0.0 {
                let e = -p / (p + 1.0);
                Some(DensityFamily::Power { c: ((p + 1.0) / c).powf(e) / c, p: e })
            } else {
                rational_image(c, 1.0, p, ua, t0)
            }
        }
        DensityFamily::RationalPower { c, q, r } => {
            if q == 0.0 || r == 0.0 {
                Some(DensityFamily::Constant { c: 1.0 / seg.density(a) })
            } else {
                rational_image(c, q, r, 1.0 + q * a, t0)
            }
        }
        DensityFamily::Exponential { c, q } => {
            if q == 0.0 {
                Some(DensityFamily::Constant { c: 1.0 / c })
            } else {
                let ea = (q * a).exp();
                let k = ea - q * t0 / c;
                (k > 0.0 && k.is_finite())
                    .then(|| DensityFamily::RationalPower { c: 1.0 / (c * k), q: q / (c * k), r: -1.0 })
            }
        }
        DensityFamily::Tabulated { .. } => None,
    };
    if let Some(family) = closed {
        return Ok(vec![Piece::Density(DensitySegment::new(t0, t1, family)?)]);
    }
    tabulated_image(seg, a, b, t0)
}

/// `1/A` on the image of a piece where `A(s) = c w(s)^r` with `w` linear of
/// slope `beta` and `w(a) = wa`; None when the image leaves the closed families.
fn rational_image(c: f64, beta: f64, r: f64, wa: f64, t0: f64) -> Option<DensityFamily> {
    if r == -1.0 {
        let cc = wa * (-beta * t0 / c).exp() / c;
        return (cc.is_finite() && cc > 0.0).then_some(DensityFamily::Exponential { c: cc, q: beta / c });
    }
    let kappa = beta * (r + 1.0) / c;
    let k = wa.powf(r + 1.0) - kappa * t0;
    let rp = -r / (r + 1.0);
    (k > 0.0 && k.is_finite()).then(|| DensityFamily::RationalPower { c: k.powf(rp) / c, q: kappa / k, r: rp })
}

/// Fallback: sample `1/A` at refined knots mapped through the distribution function.
fn tabulated_image(seg: &DensitySegment, a: f64, b: f64, t0: f64) -> Result<Vec<Piece>> {
    if !b.is_finite() {
        return Err(KreinError::NotRepresentable(
            "complementary density leaves the closed families on an infinite segment".into(),
        ));
    }
    let mut xs = vec![a];
    match &seg.family {
        DensityFamily::Tabulated { knots } => {
            let inner: Vec<f64> = knots.iter().map(|k| k.0).filter(|&x| x > a && x < b).collect();
            let mut cuts = vec![a];
            cuts.extend(inner);
            cuts.push(b);
            let m = (256 / (cuts.len() - 1)).max(4);
            for w in cuts.windows(2) {
                for j in 1..=m {
                    xs.push(w[0] + (w[1] - w[0]) * j as f64 / m as f64);
                }
            }
        }
        _ => {
            for j in 1..=256 {
                xs.push(a + (b - a) * j as f64 / 256.0);
            }
        }
    }
    // runs of zero density become atoms, positive runs become tabulated pieces
    let mut out = Vec::new();
    let mut level = t0;
    let mut run: Vec<(f64, f64)> = Vec::new();
    let mut run_start = level;
    let flush = |run: &mut Vec<(f64, f64)>, start: f64, out: &mut Vec<Piece>| -> Result<()> {
        if run.len() >= 2 {
            let end = run.last().unwrap().0;
            out.push(Piece::Density(DensitySegment::new(start, end, DensityFamily::Tabulated { knots: std::mem::take(run) })?));
        }
        run.clear();
        Ok(())
    };
    for w in xs.windows(2) {
        let (x0, x1) = (w[0], w[1]);
        let (v0, v1) = (seg.density(x0), seg.density(x1));
        let dm = seg.mass(x0, x1);
        if v0 == 0.0 && v1 == 0.0 {
            flush(&mut run, run_start, &mut out)?;
            out.push(Piece::Atom(level, x1 - x0));
            run_start = level;
            continue;
        }
        // density of the image at a level equals 1/A; zeros of A are
        // integrable spikes, replaced by the mean over the sub-piece
        let mean = (x1 - x0) / dm;
        let b0 = if v0 > 0.0 && v0.is_finite() { 1.0 / v0 } else { mean };
        let b1 = if v1 > 0.0 && v1.is_finite() { 1.0 / v1 } else { mean };
        if run.is_empty() {
            run_start = level;
            run.push((level, b0));
        }
        level += dm;
        run.push((level, b1));
    }
    flush(&mut run, run_start, &mut out)?;
    Ok(out)
}

/// Complementary string `B` with `B([0, t)) = inf{s : A([0, s]) ≥ t}`.
pub fn complementary(string: &KreinString) -> Result<KreinString> {
    let mut pieces: Vec<Piece> = Vec::new();
    let mut level = 0.0;
    let atoms = string.atoms();
    let mut ai = 0;
    for seg in string.segments() {
        let mut cursor = seg.lo;
        loop {
            // atoms at the current position come first (the jump precedes the density)
            while ai < atoms.len() && atoms[ai].s <= cursor {
                level += atoms[ai].mass;
                ai += 1;
            }
            let next = if ai < atoms.len() && atoms[ai].s < seg.hi { atoms[ai].s } else { seg.hi };
            if next > cursor {
                let m = seg.mass(cursor, next);
                if !(m.is_finite() || next == string.length()) {
                    return Err(KreinError::NotRepresentable("infinite mass inside the string".into()));
                }
                pieces.extend(map_piece(seg, cursor, next, level)?);
                level += m;
            }
            cursor = next;
            if cursor >= seg.hi {
                break;
            }
        }
    }
    let total = level;
    let (length, end) = if total.is_infinite() {
        (f64::INFINITY, EndCondition::Natural)
    } else if string.end() == EndCondition::DirichletAtR {
        (total, EndCondition::NeumannAtR)
    } else {
        (total, EndCondition::DirichletAtR)
    };
    if !(length > 0.0) {
        return Err(KreinError::NotRepresentable("complementary string would have zero length".into()));
    }

    let mut segments = Vec::new();
    let mut batoms = Vec::new();
    let mut neumann_edge_atom = false;
    for p in pieces {
        match p {
            Piece::Density(seg) => {
                if seg.lo < length {
                    segments.push(DensitySegment { hi: seg.hi.min(length), ..seg });
                }
            }
            Piece::Atom(t, m) => {
                if t < length && m.is_finite() {
                    batoms.push(Atom { s: t, mass: m });
                } else if t >= length && end == EndCondition::NeumannAtR && m.is_finite() {
                    batoms.push(Atom { s: t, mass: m });
                    neumann_edge_atom = true;
                }
            }
        }
    }
    let (length, end) = if neumann_edge_atom {
        // zero density past R, so the atom at R can sit inside an infinite string
        (f64::INFINITY, EndCondition::Natural)
    } else {
        (length, end)
    };
    segments.retain(|s| s.hi > s.lo);
    KreinString::new(segments, batoms, length, Some(end))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classical_is_self_complementary() {
        let a = KreinString::single(DensityFamily::Constant { c: 1.0 }, f64::INFINITY, None).unwrap();
        let b = complementary(&a).unwrap();
        assert_eq!(b.end(), EndCondition::Natural);
        assert_eq!(b.segments()[0].family, DensityFamily::Constant { c: 1.0 });
    }

    #[test]
    fn neumann_and_dirichlet_swap() {
        let a = KreinString::single(DensityFamily::Constant { c: 1.0 }, 1.0, Some(EndCondition::NeumannAtR)).unwrap();
        let b = complementary(&a).unwrap();
        assert_eq!(b.end(), EndCondition::DirichletAtR);
        assert!((b.length() - 1.0).abs() < 1e-15);
        let c = complementary(&b).unwrap();
        assert_eq!(c.end(), EndCondition::NeumannAtR);
    }

    #[test]
    fn atom_becomes_gap_and_gap_becomes_atom() {
        let a = KreinString::new(vec![], vec![Atom { s: 1.0, mass: 1.0 }], f64::INFINITY, None).unwrap();
        let b = complementary(&a).unwrap();
        // plateau [0,1) of A becomes an atom of mass 1 at t = 0; then B stops at t = 1
        assert_eq!(b.atoms(), &[Atom { s: 0.0, mass: 1.0 }]);
        assert_eq!(b.end(), EndCondition::DirichletAtR);
        assert!((b.length() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn quasi_relativistic_maps_to_finite_dual() {
        let a = KreinString::single(DensityFamily::RationalPower { c: 1.0, q: 2.0, r: -2.0 }, f64::INFINITY, None).unwrap();
        let b = complementary(&a).unwrap();
        assert!((b.length() - 0.5).abs() < 1e-15);
        assert_eq!(b.end(), EndCondition::DirichletAtR);
        for &t in &[0.0f64, 0.1, 0.4] {
            let expect = (1.0 - 2.0 * t).powi(-2);
            assert!((b.density(t) / expect - 1.0).abs() < 1e-12, "{t}");
        }
    }

    #[test]
    fn involution_on_distribution_functions() {
        let segs = vec![
            DensitySegment::new(0.0, 1.0, DensityFamily::Power { c: 2.0, p: -0.5 }).unwrap(),
            DensitySegment::new(1.5, 3.0, DensityFamily::Exponential { c: 1.0, q: 0.3 }).unwrap(),
            DensitySegment::new(3.0, f64::INFINITY, DensityFamily::Constant { c: 0.7 }).unwrap(),
        ];
        let atoms = vec![Atom { s: 0.5, mass: 0.25 }, Atom { s: 2.0, mass: 1.0 }];
        let a = KreinString::new(segs, atoms, f64::INFINITY, None).unwrap();
        let cc = complementary(&complementary(&a).unwrap()).unwrap();
        for &s in &[0.1, 0.45, 0.55, 0.7, 1.2, 1.9, 2.1, 2.5, 4.0, 10.0] {
            let (x, y) = (a.cumulative_mass(s).unwrap(), cc.cumulative_mass(s).unwrap());
            assert!((x - y).abs() < 1e-6 * (1.0 + x), "{s}: {x} vs {y}");
        }
    }
}
