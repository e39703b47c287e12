//! Lévy–Khintchine triples `[a, R, M]` and the operations that act on them
//! componentwise: convolution, convolution powers and dilations.

use crate::error::{Error, Result};
use crate::measure::RadialLevyMeasure;
use nalgebra::{DMatrix, SymmetricEigen};

const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct LevyTriple {
    shift: Vec<f64>,
    covariance: DMatrix<f64>,
    measure: RadialLevyMeasure,
}

fn check_psd(r: &DMatrix<f64>) -> Result<()> {
    let n = r.nrows();
    let scale = r.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
    for i in 0..n {
        for j in 0..i {
            if (r[(i, j)] - r[(j, i)]).abs() > SYMMETRY_TOL * scale {
                return Err(Error::NotPsd(format!("entries ({i},{j}) and ({j},{i}) differ")));
            }
        }
    }
    let trace = r.trace().abs();
    let eig = SymmetricEigen::new(r.clone()).eigenvalues;
    let min = eig.iter().cloned().fold(f64::INFINITY, f64::min);
    if min < -1e-12 * trace.max(f64::MIN_POSITIVE) {
        return Err(Error::NotPsd(format!("smallest eigenvalue {min:.3e}")));
    }
    Ok(())
}

impl LevyTriple {
    pub fn new(shift: Vec<f64>, covariance: DMatrix<f64>, measure: RadialLevyMeasure) -> Result<Self> {
        let d = shift.len();
        if d == 0 {
            return Err(Error::InvalidParameter("dimension must be positive".into()));
        }
        if covariance.nrows() != d || covariance.ncols() != d {
            return Err(Error::DimMismatch { expected: d, got: covariance.nrows() });
        }
        if measure.dim() != d {
            return Err(Error::DimMismatch { expected: d, got: measure.dim() });
        }
        if shift.iter().chain(covariance.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("shift and covariance must be finite".into()));
        }
        check_psd(&covariance)?;
        Ok(LevyTriple { shift, covariance, measure })
    }

    pub(crate) fn from_parts_unchecked(shift: Vec<f64>, covariance: DMatrix<f64>, measure: RadialLevyMeasure) -> Self {
        LevyTriple { shift, covariance, measure }
    }

    /// The degenerate law `δ_0`.
    pub fn zero(dim: usize) -> Self {
        LevyTriple { shift: vec![0.0; dim], covariance: DMatrix::zeros(dim, dim), measure: RadialLevyMeasure::zero(dim) }
    }

    /// One-dimensional `[a, σ², 0]`.
    pub fn gaussian_1d(mean: f64, variance: f64) -> Result<Self> {
        LevyTriple::new(vec![mean], DMatrix::from_element(1, 1, variance), RadialLevyMeasure::zero(1))
    }

    pub fn dim(&self) -> usize {
        self.shift.len()
    }

    pub fn shift(&self) -> &[f64] {
        &self.shift
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.covariance
    }

    pub fn measure(&self) -> &RadialLevyMeasure {
        &self.measure
    }

    pub fn is_gaussian(&self) -> bool {
        self.measure.is_zero()
    }

    pub fn with_shift(mut self, shift: Vec<f64>) -> Self {
        self.shift = shift;
        self
    }

    pub fn convolve(&self, other: &LevyTriple) -> Result<LevyTriple> {
        if self.dim() != other.dim() {
            return Err(Error::DimMismatch { expected: self.dim(), got: other.dim() });
        }
        Ok(LevyTriple {
            shift: self.shift.iter().zip(&other.shift).map(|(a, b)| a + b).collect(),
            covariance: &self.covariance + &other.covariance,
            measure: self.measure.merged(&other.measure)?,
        })
    }

    /// `ν^{*c}`: every component scaled by `c > 0`.
    pub fn conv_power(&self, c: f64) -> Result<LevyTriple> {
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::InvalidParameter(format!("convolution power must be positive, got {c}")));
        }
        Ok(self.scaled_unchecked(c))
    }

    /// Componentwise scaling by any real factor; the result may be a signed triple.
    pub(crate) fn scaled_unchecked(&self, c: f64) -> LevyTriple {
        LevyTriple {
            shift: self.shift.iter().map(|v| v * c).collect(),
            covariance: &self.covariance * c,
            measure: self.measure.scaled(c),
        }
    }

    /// Law of `uX` for `X ~ self`.
    pub fn dilate(&self, u: f64) -> Result<LevyTriple> {
        if u == 0.0 || !u.is_finite() {
            return Err(Error::InvalidParameter(format!("dilation factor must be nonzero and finite, got {u}")));
        }
        let c = u.abs();
        let mut shift: Vec<f64> = self.shift.iter().map(|v| v * u).collect();
        // ∫ ux [1(|ux| ≤ 1) − 1(|x| ≤ 1)] M(dx)
        if c != 1.0 {
            for ray in self.measure.rays() {
                let corr = if c > 1.0 {
                    ray.weighted_integral(-1.0, 1.0 / c, 1.0).map(|v| -v)
                } else {
                    ray.weighted_integral(-1.0, 1.0, 1.0 / c)
                }
                .ok_or_else(|| Error::NonIntegrable("dilation compensator diverges".into()))?;
                for (s, d) in shift.iter_mut().zip(&ray.direction) {
                    *s += u * d * corr;
                }
            }
        }
        Ok(LevyTriple { shift, covariance: &self.covariance * (u * u), measure: self.measure.dilated(u) })
    }

    pub fn log_moment(&self) -> f64 {
        self.measure.log_moment()
    }

    /// Componentwise difference, used to compare triples in tests and reports.
    pub fn max_component_gap(&self, other: &LevyTriple) -> (f64, f64) {
        let ds = self.shift.iter().zip(&other.shift).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let dr = (&self.covariance - &other.covariance).iter().map(|v| v.abs()).fold(0.0, f64::max);
        (ds, dr)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{Atom, Ray};
    use approx::assert_relative_eq;

    fn atom_triple(r: f64, w: f64) -> LevyTriple {
        let m = RadialLevyMeasure::new(1, vec![Ray::new(vec![1.0], vec![Atom { radius: r, weight: w }], vec![])]).unwrap();
        LevyTriple::new(vec![0.0], DMatrix::zeros(1, 1), m).unwrap()
    }

    #[test]
    fn gaussian_convolution() {
        let t = LevyTriple::gaussian_1d(1.0, 1.0).unwrap().convolve(&LevyTriple::gaussian_1d(2.0, 3.0).unwrap()).unwrap();
        assert_eq!(t, LevyTriple::gaussian_1d(3.0, 4.0).unwrap());
        let g = LevyTriple::gaussian_1d(0.3, 2.0).unwrap();
        assert_eq!(g.convolve(&LevyTriple::zero(1)).unwrap(), g);
    }

    #[test]
    fn conv_power_scales() {
        let g = LevyTriple::gaussian_1d(0.0, 1.0).unwrap();
        assert_eq!(g.conv_power(1.0).unwrap(), g);
        assert_eq!(g.conv_power(2.0).unwrap(), LevyTriple::gaussian_1d(0.0, 2.0).unwrap());
        assert!(g.conv_power(0.0).is_err());
    }

    #[test]
    fn dilation_of_gaussian_and_identity() {
        let g = LevyTriple::gaussian_1d(0.0, 1.0).unwrap();
        assert_eq!(g.dilate(3.0).unwrap(), LevyTriple::gaussian_1d(0.0, 9.0).unwrap());
        let a = atom_triple(0.5, 1.0);
        assert_eq!(a.dilate(1.0).unwrap(), a);
        assert!(g.dilate(0.0).is_err());
    }

    #[test]
    fn dilation_compensator_for_atom() {
        // atom at 0.5 leaves the unit ball under x ↦ 4x: shift 4·(−0.5)
        let d = atom_triple(0.5, 1.0).dilate(4.0).unwrap();
        assert_relative_eq!(d.shift()[0], -2.0, epsilon = 1e-15);
        assert_eq!(d.measure().rays()[0].atoms[0].radius, 2.0);
        // negative factor flips the direction and the sign of the compensator
        let n = atom_triple(2.0, 1.0).dilate(-0.25).unwrap();
        assert_relative_eq!(n.shift()[0], -0.25 * 2.0, epsilon = 1e-15);
        assert_eq!(n.measure().rays()[0].direction, vec![-1.0]);
    }

    #[test]
    fn psd_rejection() {
        let bad = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(matches!(LevyTriple::new(vec![0.0, 0.0], bad, RadialLevyMeasure::zero(2)), Err(Error::NotPsd(_))));
        let asym = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]);
        assert!(LevyTriple::new(vec![0.0, 0.0], asym, RadialLevyMeasure::zero(2)).is_err());
    }

    #[test]
    fn dim_mismatch() {
        let a = LevyTriple::zero(1);
        let b = LevyTriple::zero(2);
        assert!(matches!(a.convolve(&b), Err(Error::DimMismatch { .. })));
    }
}
