//! Empirical characteristic functions and their comparison with exact exponents.

use crate::error::{Error, Result};
use crate::exponent::CharFn;
use crate::simulate::SampleBatch;
use num_complex::Complex64;
use serde::Serialize;

pub const DEFAULT_CONFIDENCE: f64 = 3.0;

/// `(1/n) Σ_k e^{i⟨y, X_k⟩}` at each probe.
pub fn ecf(batch: &SampleBatch, probes: &[Vec<f64>]) -> Result<Vec<Complex64>> {
    if batch.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let n = batch.len() as f64;
    probes
        .iter()
        .map(|y| {
            if y.len() != batch.dim() {
                return Err(Error::DimMismatch { expected: batch.dim(), got: y.len() });
            }
            let mut acc = Complex64::new(0.0, 0.0);
            for x in batch.samples() {
                let phase: f64 = y.iter().zip(x).map(|(a, b)| a * b).sum();
                let (s, c) = phase.sin_cos();
                acc += Complex64::new(c, s);
            }
            Ok(acc / n)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EcfReport {
    pub probes: Vec<Vec<f64>>,
    pub ecf: Vec<Complex64>,
    pub target: Vec<Complex64>,
    pub gaps: Vec<f64>,
    /// `c/√n`, the same at every probe.
    pub band: Vec<f64>,
    pub confidence: f64,
    pub n_samples: usize,
    pub pass: bool,
}

impl EcfReport {
    pub fn max_gap(&self) -> f64 {
        self.gaps.iter().copied().fold(0.0, f64::max)
    }

    pub fn failures(&self) -> usize {
        self.gaps.iter().zip(&self.band).filter(|(g, b)| g > b).count()
    }
}

/// Compare the ECF of a batch with `e^{Φ}` on the target's probe grid.
pub fn compare(batch: &SampleBatch, target: &CharFn, confidence: f64) -> Result<EcfReport> {
    let probes = target.grid().points().to_vec();
    let values = target.probe_values()?.to_vec();
    compare_at(batch, &probes, &values, confidence)
}

/// Compare with explicitly supplied exponent values.
pub fn compare_at(batch: &SampleBatch, probes: &[Vec<f64>], exponents: &[Complex64], confidence: f64) -> Result<EcfReport> {
    if !(confidence > 0.0) {
        return Err(Error::InvalidParameter(format!("confidence must be positive, got {confidence}")));
    }
    let e = ecf(batch, probes)?;
    let target: Vec<Complex64> = exponents.iter().map(|p| p.exp()).collect();
    let gaps: Vec<f64> = e.iter().zip(&target).map(|(a, b)| (a - b).norm()).collect();
    let radius = confidence / (batch.len() as f64).sqrt();
    let pass = gaps.iter().all(|g| *g <= radius);
    Ok(EcfReport {
        probes: probes.to_vec(),
        ecf: e,
        target,
        band: vec![radius; gaps.len()],
        gaps,
        confidence,
        n_samples: batch.len(),
        pass,
    })
}

/// Partition refinement check on coupled batches (same increments, bisected partition).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CauchyReport {
    pub max_shift: f64,
    pub band: f64,
    pub pass: bool,
}

pub fn cauchy_check(coarse: &SampleBatch, fine: &SampleBatch, probes: &[Vec<f64>], confidence: f64) -> Result<CauchyReport> {
    let a = ecf(coarse, probes)?;
    let b = ecf(fine, probes)?;
    let max_shift = a.iter().zip(&b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
    let band = confidence / (coarse.len() as f64).sqrt();
    Ok(CauchyReport { max_shift, band, pass: max_shift < band })
}

/// Standardized fourth cumulant `κ₄/σ⁴` of one coordinate, and its 3σ band under normality
/// (`3·√(24/n)`).
pub fn excess_kurtosis(batch: &SampleBatch, coord: usize) -> Result<(f64, f64)> {
    if batch.is_empty() {
        return Err(Error::EmptyBatch);
    }
    if coord >= batch.dim() {
        return Err(Error::DimMismatch { expected: batch.dim(), got: coord + 1 });
    }
    let n = batch.len() as f64;
    let mean = batch.samples().map(|x| x[coord]).sum::<f64>() / n;
    let (mut m2, mut m4) = (0.0, 0.0);
    for x in batch.samples() {
        let d = x[coord] - mean;
        m2 += d * d;
        m4 += d * d * d * d;
    }
    m2 /= n;
    m4 /= n;
    Ok((m4 / (m2 * m2) - 3.0, 3.0 * (24.0 / n).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponent::{exponent_of, ProbeGrid};
    use crate::simulate::{sample_increment, Provenance, SimConfig};
    use crate::triple::LevyTriple;
    use serde_json::Value;
    use std::f64::consts::PI;

    fn batch(values: Vec<f64>) -> SampleBatch {
        let p = Provenance { config: SimConfig::default(), source: Value::Null };
        SampleBatch::new(1, values, p).unwrap()
    }

    #[test]
    fn ecf_of_point_masses() {
        let e = ecf(&batch(vec![0.0; 5]), &[vec![1.0], vec![-3.0]]).unwrap();
        assert!(e.iter().all(|v| (v - 1.0).norm() == 0.0));
        let e = ecf(&batch(vec![PI]), &[vec![1.0]]).unwrap();
        assert!((e[0] + 1.0).norm() < 1e-15);
    }

    #[test]
    fn empty_batch_is_an_error() {
        assert_eq!(ecf(&batch(vec![]), &[vec![1.0]]), Err(Error::EmptyBatch));
    }

    #[test]
    fn gaussian_ecf_at_one() {
        let n = 1_000_000;
        let cfg = SimConfig { seed: 11, ..SimConfig::default() };
        let b = sample_increment(&LevyTriple::gaussian_1d(0.0, 1.0).unwrap(), 1.0, &cfg, n).unwrap();
        let e = ecf(&b, &[vec![1.0]]).unwrap()[0];
        assert!((e - (-0.5f64).exp()).norm() < 3.0 / (n as f64).sqrt());
    }

    #[test]
    fn compare_passes_self_and_fails_wrong_variance() {
        let n = 100_000;
        let cfg = SimConfig { seed: 3, ..SimConfig::default() };
        let b = sample_increment(&LevyTriple::gaussian_1d(0.0, 1.0).unwrap(), 1.0, &cfg, n).unwrap();
        let own = exponent_of(&LevyTriple::gaussian_1d(0.0, 1.0).unwrap()).unwrap();
        let r = compare(&b, &own, DEFAULT_CONFIDENCE).unwrap();
        assert!(r.pass, "max gap {}", r.max_gap());
        assert!(r.ecf.iter().all(|v| v.norm() <= 1.0 + 1e-12));
        let wrong = exponent_of(&LevyTriple::gaussian_1d(0.0, 4.0).unwrap())
            .unwrap()
            .with_grid(ProbeGrid::from_points(vec![vec![1.0]]));
        let r = compare(&b, &wrong, DEFAULT_CONFIDENCE).unwrap();
        assert!(!r.pass);
        assert!((r.gaps[0] - ((-0.5f64).exp() - (-2.0f64).exp())).abs() < 0.01);
    }

    #[test]
    fn conjugate_probe_mirrors() {
        let cfg = SimConfig { seed: 5, ..SimConfig::default() };
        let b = sample_increment(&LevyTriple::gaussian_1d(0.3, 1.0).unwrap(), 1.0, &cfg, 1000).unwrap();
        let e = ecf(&b, &[vec![1.7], vec![-1.7]]).unwrap();
        assert!((e[0] - e[1].conj()).norm() < 1e-12);
    }

    #[test]
    fn kurtosis_of_gaussian_is_small() {
        let cfg = SimConfig { seed: 9, ..SimConfig::default() };
        let b = sample_increment(&LevyTriple::gaussian_1d(0.0, 2.0).unwrap(), 1.0, &cfg, 100_000).unwrap();
        let (k, band) = excess_kurtosis(&b, 0).unwrap();
        assert!(k.abs() < band);
    }
}
