//! JSON wire format for strings and coefficients.

use serde::{Deserialize, Serialize};

use super::{Atom, CoefficientA, DensityFamily, DensitySegment, EndCondition, KreinString};
use crate::error::{KreinError, Result};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SegmentSpec {
    pub lo: f64,
    /// `null` for +∞.
    pub hi: Option<f64>,
    pub family: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub knots: Option<Vec<[f64; 2]>>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct AtomSpec {
    pub s: f64,
    pub mass: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct StringSpec {
    #[serde(default)]
    pub segments: Vec<SegmentSpec>,
    #[serde(default)]
    pub atoms: Vec<AtomSpec>,
    #[serde(rename = "R", default)]
    pub length: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub end: Option<String>,
}

/// Coefficient `a(t)` on `[0, r)`, same segment schema in the `t` variable.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct CoefficientSpec {
    pub segments: Vec<SegmentSpec>,
    #[serde(default)]
    pub r: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub end: Option<String>,
}

fn inf_to_none(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

pub fn parse_end(name: &str) -> Result<EndCondition> {
    match name {
        "natural" => Ok(EndCondition::Natural),
        "dirichlet" | "dirichlet_at_R" => Ok(EndCondition::DirichletAtR),
        "neumann" | "neumann_at_R" => Ok(EndCondition::NeumannAtR),
        other => Err(KreinError::Input(format!("unknown end condition '{other}'"))),
    }
}

impl SegmentSpec {
    pub fn to_segment(&self) -> Result<DensitySegment> {
        let need = |v: Option<f64>, name: &str| {
            v.ok_or_else(|| KreinError::Input(format!("family '{}' needs parameter '{name}'", self.family)))
        };
        let family = match self.family.as_str() {
            "constant" => DensityFamily::Constant { c: need(self.c, "c")? },
            "power" => DensityFamily::Power { c: need(self.c, "c")?, p: need(self.p, "p")? },
            "rational" | "rational_power" => DensityFamily::RationalPower {
                c: need(self.c, "c")?,
                q: need(self.q, "q")?,
                r: need(self.r, "r")?,
            },
            "exponential" => DensityFamily::Exponential { c: need(self.c, "c")?, q: need(self.q, "q")? },
            "tabulated" => {
                let knots = self
                    .knots
                    .as_ref()
                    .ok_or_else(|| KreinError::Input("tabulated family needs 'knots'".into()))?;
                DensityFamily::Tabulated { knots: knots.iter().map(|k| (k[0], k[1])).collect() }
            }
            other => return Err(KreinError::Input(format!("unknown density family '{other}'"))),
        };
        DensitySegment::new(self.lo, self.hi.unwrap_or(f64::INFINITY), family)
    }

    pub fn from_segment(seg: &DensitySegment) -> Self {
        let mut spec = SegmentSpec {
            lo: seg.lo,
            hi: inf_to_none(seg.hi),
            family: String::new(),
            c: None,
            p: None,
            q: None,
            r: None,
            knots: None,
        };
        match &seg.family {
            DensityFamily::Constant { c } => {
                spec.family = "constant".into();
                spec.c = Some(*c);
            }
            DensityFamily::Power { c, p } => {
                spec.family = "power".into();
                spec.c = Some(*c);
                spec.p = Some(*p);
            }
            DensityFamily::RationalPower { c, q, r } => {
                spec.family = "rational".into();
                spec.c = Some(*c);
                spec.q = Some(*q);
                spec.r = Some(*r);
            }
            DensityFamily::Exponential { c, q } => {
                spec.family = "exponential".into();
                spec.c = Some(*c);
                spec.q = Some(*q);
            }
            DensityFamily::Tabulated { knots } => {
                spec.family = "tabulated".into();
                spec.knots = Some(knots.iter().map(|k| [k.0, k.1]).collect());
            }
        }
        spec
    }
}

impl StringSpec {
    pub fn to_string_model(&self) -> Result<KreinString> {
        let segments = self.segments.iter().map(SegmentSpec::to_segment).collect::<Result<Vec<_>>>()?;
        let atoms = self.atoms.iter().map(|a| Atom { s: a.s, mass: a.mass }).collect();
        let end = self.end.as_deref().map(parse_end).transpose()?;
        KreinString::new(segments, atoms, self.length.unwrap_or(f64::INFINITY), end)
    }

    pub fn from_string_model(s: &KreinString) -> Self {
        StringSpec {
            segments: s.segments().iter().map(SegmentSpec::from_segment).collect(),
            atoms: s.atoms().iter().map(|a| AtomSpec { s: a.s, mass: a.mass }).collect(),
            length: inf_to_none(s.length()),
            end: Some(s.end().as_str().to_string()),
        }
    }
}

impl CoefficientSpec {
    pub fn to_coefficient(&self) -> Result<CoefficientA> {
        let segments = self.segments.iter().map(SegmentSpec::to_segment).collect::<Result<Vec<_>>>()?;
        let end = self.end.as_deref().map(parse_end).transpose()?;
        CoefficientA::new(segments, self.r.unwrap_or(f64::INFINITY), end)
    }

    pub fn from_coefficient(a: &CoefficientA) -> Self {
        CoefficientSpec {
            segments: a.segments().iter().map(SegmentSpec::from_segment).collect(),
            r: inf_to_none(a.length()),
            end: a.end_override().map(|e| e.as_str().to_string()),
        }
    }
}

/// Parses the JSON string-spec format.
pub fn parse_string(json: &str) -> Result<KreinString> {
    let spec: StringSpec = serde_json::from_str(json)?;
    spec.to_string_model()
}

pub fn string_to_json(s: &KreinString) -> String {
    serde_json::to_string(&StringSpec::from_string_model(s)).expect("string spec serializes")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_wire_example() {
        let json = r#"{"segments":[{"lo":0,"hi":null,"family":"power","c":1.0,"p":-0.5}],
                       "atoms":[{"s":1.0,"mass":1.0}], "R":null, "end":"natural"}"#;
        let s = parse_string(json).unwrap();
        assert_eq!(s.atoms().len(), 1);
        assert!(s.length().is_infinite());
        assert!((s.cumulative_mass(4.0).unwrap() - 5.0).abs() < 1e-14);
    }

    #[test]
    fn round_trip_through_json() {
        let json = r#"{"segments":[{"lo":0,"hi":1,"family":"constant","c":2.0},
                                   {"lo":1,"hi":3,"family":"tabulated","knots":[[1,2],[2,1],[3,0.5]]}],
                       "R":3, "end":"neumann"}"#;
        let s = parse_string(json).unwrap();
        let again = parse_string(&string_to_json(&s)).unwrap();
        assert_eq!(s, again);
    }

    #[test]
    fn unknown_keys_and_families_rejected() {
        assert!(parse_string(r#"{"segments":[],"bogus":1}"#).is_err());
        assert!(parse_string(r#"{"segments":[{"lo":0,"hi":null,"family":"weird","c":1}]}"#).is_err());
        assert!(parse_string(r#"{"segments":[{"lo":0,"hi":null,"family":"power","c":1}]}"#).is_err());
    }
}
