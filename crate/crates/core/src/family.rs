//! Named distribution families and their exact triples.

use crate::error::{Error, Result};
use crate::measure::{Atom, DensityTerm, RadialLevyMeasure, Ray, Shape};
use crate::triple::LevyTriple;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScalarOrVec {
    Scalar(f64),
    Vector(Vec<f64>),
}

impl ScalarOrVec {
    fn to_vec(&self) -> Vec<f64> {
        match self {
            ScalarOrVec::Scalar(v) => vec![*v],
            ScalarOrVec::Vector(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JumpAtom {
    /// Jump location.
    pub x: ScalarOrVec,
    /// Probability of this jump given a jump occurs.
    pub prob: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    Gaussian {
        #[serde(default = "zero_mean")]
        mean: ScalarOrVec,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        variance: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        covariance: Option<Vec<Vec<f64>>>,
    },
    CompoundPoisson {
        rate: f64,
        atoms: Vec<JumpAtom>,
    },
    /// Lévy density `k e^{-λr}/r` on `(0, ∞)`.
    Gamma {
        shape: f64,
        rate: f64,
    },
    /// One-sided strictly stable law with Lévy density `c r^{-1-α}`, optionally cut at `r ≤ cutoff`.
    Stable {
        index: f64,
        scale: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        cutoff: Option<f64>,
    },
}

fn zero_mean() -> ScalarOrVec {
    ScalarOrVec::Scalar(0.0)
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be positive and finite, got {v}")))
    }
}

impl Family {
    pub fn gamma(shape: f64, rate: f64) -> Family {
        Family::Gamma { shape, rate }
    }

    pub fn gaussian(mean: f64, variance: f64) -> Family {
        Family::Gaussian { mean: ScalarOrVec::Scalar(mean), variance: Some(variance), covariance: None }
    }

    pub fn stable(index: f64, scale: f64, cutoff: Option<f64>) -> Family {
        Family::Stable { index, scale, cutoff }
    }

    pub fn compound_poisson(rate: f64, atoms: &[(f64, f64)]) -> Family {
        Family::CompoundPoisson {
            rate,
            atoms: atoms.iter().map(|&(x, prob)| JumpAtom { x: ScalarOrVec::Scalar(x), prob }).collect(),
        }
    }

    pub fn triple(&self) -> Result<LevyTriple> {
        family_triple(self)
    }
}

/// The exact triple of a named family.
pub fn family_triple(family: &Family) -> Result<LevyTriple> {
    match family {
        Family::Gaussian { mean, variance, covariance } => {
            let m = mean.to_vec();
            let d = m.len();
            let cov = match (variance, covariance) {
                (Some(v), None) => {
                    if !(*v >= 0.0) {
                        return Err(Error::InvalidParameter(format!("variance must be nonnegative, got {v}")));
                    }
                    DMatrix::from_diagonal_element(d, d, *v)
                }
                (None, Some(rows)) => {
                    if rows.len() != d || rows.iter().any(|r| r.len() != d) {
                        return Err(Error::DimMismatch { expected: d, got: rows.len() });
                    }
                    DMatrix::from_fn(d, d, |i, j| rows[i][j])
                }
                (None, None) => DMatrix::identity(d, d),
                (Some(_), Some(_)) => {
                    return Err(Error::InvalidParameter("give either variance or covariance, not both".into()))
                }
            };
            LevyTriple::new(m, cov, RadialLevyMeasure::zero(d))
        }
        Family::CompoundPoisson { rate, atoms } => {
            positive("rate", *rate)?;
            if atoms.is_empty() {
                return Err(Error::InvalidParameter("compound Poisson law needs at least one atom".into()));
            }
            let d = atoms[0].x.to_vec().len();
            let total: f64 = atoms.iter().map(|a| a.prob).sum();
            if atoms.iter().any(|a| !(a.prob > 0.0)) || (total - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidParameter(format!("atom probabilities must be positive and sum to 1, got {total}")));
            }
            let mut shift = vec![0.0; d];
            let mut rays = Vec::new();
            for a in atoms {
                let x = a.x.to_vec();
                if x.len() != d {
                    return Err(Error::DimMismatch { expected: d, got: x.len() });
                }
                let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                if r == 0.0 {
                    continue;
                }
                let w = rate * a.prob;
                if r <= 1.0 {
                    for (s, v) in shift.iter_mut().zip(&x) {
                        *s += w * v;
                    }
                }
                let dir = x.iter().map(|v| v / r).collect();
                rays.push(Ray::new(dir, vec![Atom { radius: r, weight: w }], vec![]));
            }
            LevyTriple::new(shift, DMatrix::zeros(d, d), RadialLevyMeasure::new(d, rays)?)
        }
        Family::Gamma { shape, rate } => {
            positive("shape", *shape)?;
            positive("rate", *rate)?;
            let term = DensityTerm::new(*shape, Shape::exp_power(-1.0, *rate), 0.0, f64::INFINITY);
            let m = RadialLevyMeasure::new(1, vec![Ray::new(vec![1.0], vec![], vec![term])])?;
            let shift = shape * (-(-rate).exp_m1()) / rate;
            LevyTriple::new(vec![shift], DMatrix::zeros(1, 1), m)
        }
        Family::Stable { index, scale, cutoff } => {
            let alpha = *index;
            if !(alpha > 0.0 && alpha < 2.0) {
                return Err(Error::InvalidParameter(format!("stable index must lie in (0, 2), got {alpha}")));
            }
            positive("scale", *scale)?;
            let hi = match cutoff {
                Some(r) => {
                    positive("cutoff", *r)?;
                    *r
                }
                None => f64::INFINITY,
            };
            let term = DensityTerm::new(*scale, Shape::power(-1.0 - alpha), 0.0, hi);
            let ray = Ray::new(vec![1.0], vec![], vec![term]);
            // strictly stable centring: no drift for α < 1, zero mean for α > 1
            let shift = if alpha < 1.0 {
                ray.weighted_integral(-1.0, 0.0, 1.0)
            } else if alpha > 1.0 {
                ray.weighted_integral(-1.0, 1.0, f64::INFINITY).map(|v| -v)
            } else {
                Some(0.0)
            }
            .ok_or_else(|| Error::NonIntegrable("stable centring integral diverges".into()))?;
            let m = RadialLevyMeasure::new(1, vec![ray])?;
            LevyTriple::new(vec![shift], DMatrix::zeros(1, 1), m)
        }
    }
}
