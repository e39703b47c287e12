//! JSON distribution descriptors.
//!
//! A descriptor is either `{"family": ..., params}` (see [`Family`]) or
//! `{"triple": {"shift", "covariance", "measure": {"rays": [...]}}}`. Each ray
//! lists its unit `direction`, optional `atoms` (`radius`, `weight`), optional
//! closed-form `terms`, and an optional piecewise log-linear `density` given on a
//! radius grid with power-law tails.

use crate::error::{Error, Result};
use crate::family::{family_triple, Family};
use crate::measure::{Atom, DensityTerm, RadialLevyMeasure, Ray, Shape};
use crate::triple::LevyTriple;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use serde_json::Value;

const KNOWN_FAMILIES: [&str; 4] = ["gaussian", "compound_poisson", "gamma", "stable"];

/// A radius bound that may be `"inf"`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Bound {
    Finite(f64),
    Named(InfTag),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum InfTag {
    #[serde(rename = "inf")]
    Inf,
}

impl Bound {
    pub fn value(self) -> f64 {
        match self {
            Bound::Finite(v) => v,
            Bound::Named(InfTag::Inf) => f64::INFINITY,
        }
    }

    pub fn from_f64(v: f64) -> Bound {
        if v.is_infinite() {
            Bound::Named(InfTag::Inf)
        } else {
            Bound::Finite(v)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ShapeDto {
    Power {
        p: f64,
        #[serde(default)]
        log_power: u32,
    },
    IncGamma {
        p: f64,
        s: f64,
        rate: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermDto {
    pub coef: f64,
    #[serde(flatten)]
    pub shape: ShapeDto,
    #[serde(default)]
    pub lo: f64,
    pub hi: Bound,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomDto {
    pub radius: f64,
    pub weight: f64,
}

/// Piecewise log-linear density: `radii` strictly increasing, `values ≥ 0`,
/// power-law continuation `f(r) = f(r_0)(r/r_0)^{lower}` below the grid and
/// `f(r_n)(r/r_n)^{upper}` above it (absent tails mean zero density there).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridDensityDto {
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lower_tail_exponent: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub upper_tail_exponent: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RayDto {
    pub direction: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub atoms: Vec<AtomDto>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub terms: Vec<TermDto>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density: Option<GridDensityDto>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureDto {
    pub rays: Vec<RayDto>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TripleDto {
    pub shift: Vec<f64>,
    pub covariance: Vec<Vec<f64>>,
    #[serde(default = "empty_measure")]
    pub measure: MeasureDto,
}

fn empty_measure() -> MeasureDto {
    MeasureDto { rays: Vec::new() }
}

fn grid_terms(g: &GridDensityDto) -> Result<Vec<DensityTerm>> {
    let (r, v) = (&g.radii, &g.values);
    if r.len() != v.len() || r.is_empty() {
        return Err(Error::Format("density radii and values must have equal nonzero length".into()));
    }
    if r.windows(2).any(|w| !(w[1] > w[0])) || !(r[0] > 0.0) {
        return Err(Error::Format("density radii must be positive and strictly increasing".into()));
    }
    if v.iter().any(|x| !(*x >= 0.0) || !x.is_finite()) {
        return Err(Error::Format("density values must be finite and nonnegative".into()));
    }
    let mut terms = Vec::new();
    for i in 0..r.len() - 1 {
        if v[i] == 0.0 || v[i + 1] == 0.0 {
            continue;
        }
        let p = (v[i + 1] / v[i]).ln() / (r[i + 1] / r[i]).ln();
        terms.push(DensityTerm::new(v[i] * r[i].powf(-p), Shape::power(p), r[i], r[i + 1]));
    }
    if let Some(p) = g.lower_tail_exponent {
        if v[0] > 0.0 {
            terms.push(DensityTerm::new(v[0] * r[0].powf(-p), Shape::power(p), 0.0, r[0]));
        }
    }
    let n = r.len() - 1;
    if let Some(p) = g.upper_tail_exponent {
        if v[n] > 0.0 {
            terms.push(DensityTerm::new(v[n] * r[n].powf(-p), Shape::power(p), r[n], f64::INFINITY));
        }
    }
    Ok(terms)
}

impl TripleDto {
    pub fn to_triple(&self) -> Result<LevyTriple> {
        let d = self.shift.len();
        if self.covariance.len() != d || self.covariance.iter().any(|row| row.len() != d) {
            return Err(Error::DimMismatch { expected: d, got: self.covariance.len() });
        }
        let cov = DMatrix::from_fn(d, d, |i, j| self.covariance[i][j]);
        let mut rays = Vec::new();
        for r in &self.measure.rays {
            let atoms = r.atoms.iter().map(|a| Atom { radius: a.radius, weight: a.weight }).collect::<Vec<_>>();
            if r.atoms.iter().any(|a| !(a.weight > 0.0)) {
                return Err(Error::InvalidParameter("atom weights must be positive".into()));
            }
            let mut terms: Vec<DensityTerm> = r
                .terms
                .iter()
                .map(|t| {
                    let shape = match t.shape {
                        ShapeDto::Power { p, log_power } => Shape::Power { p, log_power },
                        ShapeDto::IncGamma { p, s, rate } => Shape::IncGamma { p, s, rate },
                    };
                    DensityTerm::new(t.coef, shape, t.lo, t.hi.value())
                })
                .collect();
            if let Some(g) = &r.density {
                terms.extend(grid_terms(g)?);
            }
            rays.push(Ray::new(r.direction.clone(), atoms, terms));
        }
        LevyTriple::new(self.shift.clone(), cov, RadialLevyMeasure::new(d, rays)?)
    }

    pub fn from_triple(t: &LevyTriple) -> TripleDto {
        let d = t.dim();
        let cov = t.covariance();
        TripleDto {
            shift: t.shift().to_vec(),
            covariance: (0..d).map(|i| (0..d).map(|j| cov[(i, j)]).collect()).collect(),
            measure: MeasureDto {
                rays: t
                    .measure()
                    .rays()
                    .iter()
                    .map(|r| RayDto {
                        direction: r.direction.clone(),
                        atoms: r.atoms.iter().map(|a| AtomDto { radius: a.radius, weight: a.weight }).collect(),
                        terms: r
                            .terms
                            .iter()
                            .map(|term| TermDto {
                                coef: term.coef,
                                shape: match term.shape {
                                    Shape::Power { p, log_power } => ShapeDto::Power { p, log_power },
                                    Shape::IncGamma { p, s, rate } => ShapeDto::IncGamma { p, s, rate },
                                },
                                lo: term.lo,
                                hi: Bound::from_f64(term.hi),
                            })
                            .collect(),
                        density: None,
                    })
                    .collect(),
            },
        }
    }
}

/// Parsed distribution descriptor.
#[derive(Debug, Clone, PartialEq)]
pub enum Descriptor {
    Family(Family),
    Triple(TripleDto),
}

impl Descriptor {
    pub fn from_value(v: &Value) -> Result<Descriptor> {
        let obj = v.as_object().ok_or_else(|| Error::Format("descriptor must be a JSON object".into()))?;
        if let Some(t) = obj.get("triple") {
            let dto: TripleDto = serde_json::from_value(t.clone()).map_err(|e| Error::Format(e.to_string()))?;
            return Ok(Descriptor::Triple(dto));
        }
        match obj.get("family").and_then(Value::as_str) {
            Some(name) if KNOWN_FAMILIES.contains(&name) => {
                let fam: Family = serde_json::from_value(v.clone()).map_err(|e| Error::Format(e.to_string()))?;
                Ok(Descriptor::Family(fam))
            }
            Some(name) => Err(Error::UnknownFamily(name.to_string())),
            None => Err(Error::Format("descriptor needs a \"family\" or \"triple\" key".into())),
        }
    }

    pub fn from_json(s: &str) -> Result<Descriptor> {
        let v: Value = serde_json::from_str(s).map_err(|e| Error::Format(e.to_string()))?;
        Descriptor::from_value(&v)
    }

    pub fn triple(&self) -> Result<LevyTriple> {
        match self {
            Descriptor::Family(f) => family_triple(f),
            Descriptor::Triple(t) => t.to_triple(),
        }
    }

    pub fn to_value(&self) -> Value {
        match self {
            Descriptor::Family(f) => serde_json::to_value(f).expect("family serializes"),
            Descriptor::Triple(t) => serde_json::json!({ "triple": t }),
        }
    }

    pub fn of_triple(t: &LevyTriple) -> Descriptor {
        Descriptor::Triple(TripleDto::from_triple(t))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn parses_family_and_triple() {
        let d = Descriptor::from_json(r#"{"family": "gamma", "shape": 1, "rate": 1}"#).unwrap();
        assert_eq!(d, Descriptor::Family(Family::gamma(1.0, 1.0)));
        let t = Descriptor::from_json(
            r#"{"triple": {"shift": [0.5], "covariance": [[2]],
                "measure": {"rays": [{"direction": [-1], "atoms": [{"radius": 2, "weight": 0.5}],
                  "terms": [{"coef": 1, "kind": "power", "p": -1.5, "lo": 0, "hi": 1}]}]}}}"#,
        )
        .unwrap()
        .triple()
        .unwrap();
        assert_eq!(t.shift(), &[0.5]);
        assert_eq!(t.measure().rays()[0].direction, vec![-1.0]);
        assert_eq!(t.measure().rays()[0].terms.len(), 1);
    }

    #[test]
    fn unknown_family_and_garbage() {
        assert!(matches!(Descriptor::from_json(r#"{"family": "cauchy"}"#), Err(Error::UnknownFamily(_))));
        assert!(matches!(Descriptor::from_json("[1, 2]"), Err(Error::Format(_))));
        assert!(matches!(Descriptor::from_json(r#"{"family": "gamma", "shape": "x"}"#), Err(Error::Format(_))));
    }

    #[test]
    fn grid_density_is_log_linear() {
        let g = GridDensityDto {
            radii: vec![0.5, 1.0, 4.0],
            values: vec![2.0, 1.0, 0.25],
            lower_tail_exponent: Some(-1.5),
            upper_tail_exponent: Some(-2.0),
        };
        let ray = Ray::new(vec![1.0], vec![], grid_terms(&g).unwrap());
        assert_relative_eq!(ray.density(0.5), 2.0, max_relative = 1e-14);
        assert_relative_eq!(ray.density(2.0), 0.5, max_relative = 1e-14);
        assert_relative_eq!(ray.density(0.25), 2.0 * 0.5f64.powf(-1.5), max_relative = 1e-14);
        assert_relative_eq!(ray.density(8.0), 0.25 / 4.0, max_relative = 1e-14);
    }

    #[test]
    fn triple_roundtrip_through_json() {
        let t = Family::stable(0.7, 1.0, Some(10.0)).triple().unwrap();
        let v = Descriptor::of_triple(&t).to_value();
        let back = Descriptor::from_value(&v).unwrap().triple().unwrap();
        assert_eq!(back, t);
        let inf = Descriptor::of_triple(&Family::gamma(1.0, 1.0).triple().unwrap()).to_value();
        assert!(inf.to_string().contains("\"inf\""));
        assert_eq!(Descriptor::from_value(&inf).unwrap().triple().unwrap(), Family::gamma(1.0, 1.0).triple().unwrap());
    }
}
