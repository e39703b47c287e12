//! Monte Carlo sampling of increments, random integrals and fractional Lévy marginals.
//!
//! Integrals are Riemann–Stieltjes sums `Σ h(τ_j) (Y(r(t_j)) − Y(r(t_{j−1})))` with
//! independent exact increments of length `|r(t_j) − r(t_{j−1})|`; no paths are stored.
//! Every sample draws from its own ChaCha8 stream keyed by `(seed, tag, sample index)`,
//! so output does not depend on how samples are scheduled across threads.

use crate::descriptor::{Bound, Descriptor};
use crate::error::{Error, Result};
use crate::exponent::{Envelope, ProbeGrid};
use crate::integral_map::{IntegralMapSpec, Kernel};
use crate::measure::{RadialLevyMeasure, Ray, Shape};
use crate::special::gamma_any;
use crate::triple::LevyTriple;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Gamma, Poisson, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::f64::consts::PI;

/// Stream tags separating independent sources of randomness.
pub mod tags {
    pub const INCREMENT: u64 = 1;
    pub const INTEGRAL: u64 = 2;
    pub const MAFLP_V: u64 = 3;
    pub const MAFLP_U: u64 = 4;
}

/// Above this many expected jumps per unit time the truncation is considered unresolvable.
const MAX_JUMP_RATE: f64 = 1e7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SmallJumpMode {
    /// Jumps below the truncation contribute only their compensated mean (zero).
    DriftOnly,
    /// Jumps below the truncation are replaced by a Gaussian with matching covariance.
    GaussianApprox,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub seed: u64,
    pub n_samples: usize,
    /// Small-jump cutoff radius.
    pub jump_truncation: f64,
    pub n_time_steps: usize,
    /// Half-line truncation; derived from the tail certificate when absent.
    pub b_max: Option<f64>,
    pub small_jump_mode: SmallJumpMode,
    /// Exponent error allowed for the half-line truncation when `b_max` is derived.
    pub tail_tol: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            seed: 0,
            n_samples: 10_000,
            jump_truncation: 1e-3,
            n_time_steps: 256,
            b_max: None,
            small_jump_mode: SmallJumpMode::GaussianApprox,
            tail_tol: 1e-4,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_samples == 0 {
            return Err(Error::InvalidParameter("n_samples must be positive".into()));
        }
        if !(self.jump_truncation > 0.0) || !self.jump_truncation.is_finite() {
            return Err(Error::InvalidParameter(format!("jump truncation must be positive, got {}", self.jump_truncation)));
        }
        if self.n_time_steps < 2 {
            return Err(Error::InvalidParameter(format!("need at least 2 time steps, got {}", self.n_time_steps)));
        }
        if let Some(b) = self.b_max {
            if !(b > 0.0) || !b.is_finite() {
                return Err(Error::InvalidParameter(format!("b_max must be positive and finite, got {b}")));
            }
        }
        if !(self.tail_tol > 0.0) {
            return Err(Error::InvalidParameter("tail_tol must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub config: SimConfig,
    /// What was sampled: operation, law descriptor and mapping.
    pub source: Value,
}

/// Row-major samples: `len()` vectors of length `dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    dim: usize,
    data: Vec<f64>,
    pub provenance: Provenance,
}

impl SampleBatch {
    pub fn new(dim: usize, data: Vec<f64>, provenance: Provenance) -> Result<SampleBatch> {
        if dim == 0 || data.len() % dim != 0 {
            return Err(Error::DimMismatch { expected: dim, got: data.len() });
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::Resolution(format!("sample {} is not finite", i / dim)));
        }
        Ok(SampleBatch { dim, data, provenance })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn sample(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn samples(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn mean(&self) -> Vec<f64> {
        let n = self.len() as f64;
        let mut m = vec![0.0; self.dim];
        for x in self.samples() {
            for (a, v) in m.iter_mut().zip(x) {
                *a += v;
            }
        }
        m.iter_mut().for_each(|a| *a /= n);
        m
    }

    /// Unbiased per-coordinate variances.
    pub fn variance(&self) -> Vec<f64> {
        let m = self.mean();
        let n = self.len() as f64;
        let mut s = vec![0.0; self.dim];
        for x in self.samples() {
            for ((a, v), mu) in s.iter_mut().zip(x).zip(&m) {
                *a += (v - mu) * (v - mu);
            }
        }
        s.iter_mut().for_each(|a| *a /= n - 1.0);
        s
    }

    /// Samplewise sum of two batches of equal shape.
    pub fn add(&self, other: &SampleBatch, provenance: Provenance) -> Result<SampleBatch> {
        if self.dim != other.dim || self.data.len() != other.data.len() {
            return Err(Error::DimMismatch { expected: self.data.len(), got: other.data.len() });
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        SampleBatch::new(self.dim, data, provenance)
    }
}

/// The RNG for one sample of one source.
pub fn stream(seed: u64, tag: u64, index: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&tag.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(index);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum ExactKind {
    Gamma { shape: f64, rate: f64 },
    /// Strictly stable, totally skewed to the right, scale `sigma` at unit time.
    Stable { alpha: f64, sigma: f64 },
}

impl ExactKind {
    fn sample<R: Rng>(&self, dt: f64, rng: &mut R) -> f64 {
        match *self {
            ExactKind::Gamma { shape, rate } => {
                Gamma::new(shape * dt, 1.0 / rate).expect("positive gamma parameters").sample(rng)
            }
            ExactKind::Stable { alpha, sigma } => sigma * dt.powf(1.0 / alpha) * skewed_stable(alpha, rng),
        }
    }
}

/// Chambers–Mallows–Stuck draw with skewness 1: log CF `−|y|^α (1 − i sgn(y) tan(πα/2))`, `α ≠ 1`.
fn skewed_stable<R: Rng>(alpha: f64, rng: &mut R) -> f64 {
    let tan = (PI * alpha / 2.0).tan();
    let b = tan.atan() / alpha;
    let s = (1.0 + tan * tan).powf(1.0 / (2.0 * alpha));
    let v = PI * (rng.random::<f64>() - 0.5);
    let w: f64 = Exp1.sample(rng);
    let ab = alpha * (v + b);
    s * ab.sin() / v.cos().powf(1.0 / alpha) * ((v - ab).cos() / w).powf((1.0 - alpha) / alpha)
}

/// Recognize a single-ray gamma or untruncated stable measure; returns the exact law and
/// the shift that law carries in the triple's compensation convention.
fn exact_ray(m: &RadialLevyMeasure) -> Option<(Vec<f64>, ExactKind, f64)> {
    let [ray] = m.rays() else { return None };
    let [term] = ray.terms.as_slice() else { return None };
    if !ray.atoms.is_empty() || term.lo != 0.0 || term.hi.is_finite() || !(term.coef > 0.0) {
        return None;
    }
    let c = term.coef;
    match term.shape {
        Shape::IncGamma { p, s, rate } if p == -1.0 && s == 1.0 => {
            Some((ray.direction.clone(), ExactKind::Gamma { shape: c, rate }, c * (-(-rate).exp_m1()) / rate))
        }
        Shape::Power { p, log_power: 0 } => {
            let alpha = -1.0 - p;
            if !(alpha > 0.0 && alpha < 2.0) || (alpha - 1.0).abs() < 1e-9 {
                return None;
            }
            let sigma = (-c * gamma_any(-alpha) * (PI * alpha / 2.0).cos()).powf(1.0 / alpha);
            let shift = if alpha < 1.0 { c / (1.0 - alpha) } else { -c / (alpha - 1.0) };
            Some((ray.direction.clone(), ExactKind::Stable { alpha, sigma }, shift))
        }
        _ => None,
    }
}

/// Jumps above the truncation on one ray: atoms drawn discretely, the density part
/// through a tabulated radial CDF with log-linear interpolation.
struct JumpRay {
    direction: Vec<f64>,
    mass: f64,
    atoms: Vec<(f64, f64)>,
    atom_mass: f64,
    table: Option<RadialTable>,
}

struct RadialTable {
    ln_x: Vec<f64>,
    cdf: Vec<f64>,
    /// Density part of the ray, for the rare draws beyond the tabulated range.
    terms: Ray,
    eps: f64,
}

const TABLE_NODES: usize = 4096;

impl JumpRay {
    fn new(ray: &Ray, eps: f64, mass: f64) -> JumpRay {
        let atoms: Vec<(f64, f64)> = ray.atoms.iter().filter(|a| a.radius > eps).map(|a| (a.radius, a.weight)).collect();
        let atom_mass = atoms.iter().map(|a| a.1).sum();
        let terms = Ray { direction: ray.direction.clone(), atoms: vec![], terms: ray.terms.clone() };
        let cont = terms.mass(eps, f64::INFINITY).unwrap_or(0.0);
        let table = (cont > 0.0).then(|| RadialTable::new(terms, eps, cont));
        JumpRay { direction: ray.direction.clone(), mass, atoms, atom_mass, table }
    }

    fn radius<R: Rng>(&self, rng: &mut R) -> f64 {
        let u = rng.random::<f64>() * self.mass;
        match &self.table {
            Some(t) if u >= self.atom_mass || self.atoms.is_empty() => t.invert(u - self.atom_mass),
            _ => {
                let mut acc = 0.0;
                for &(r, w) in &self.atoms {
                    acc += w;
                    if acc > u {
                        return r;
                    }
                }
                self.atoms.last().map_or(self.table.as_ref().map_or(1.0, |t| t.eps), |a| a.0)
            }
        }
    }
}

impl RadialTable {
    fn new(terms: Ray, eps: f64, total: f64) -> RadialTable {
        let hi = terms.terms.iter().map(|t| t.hi).fold(0.0, f64::max);
        let top = if hi.is_finite() {
            hi.ln()
        } else {
            let mut h = eps.max(1.0).ln() + 1.0;
            while terms.mass(h.exp(), f64::INFINITY).unwrap_or(0.0) > 1e-12 * total && h < 700.0 {
                h += 2.0;
            }
            h
        };
        let lo = eps.ln();
        let ln_x: Vec<f64> = (0..TABLE_NODES).map(|i| lo + (top - lo) * i as f64 / (TABLE_NODES - 1) as f64).collect();
        let mut cdf = Vec::with_capacity(TABLE_NODES);
        let mut acc = 0.0f64;
        cdf.push(0.0);
        for w in ln_x.windows(2) {
            acc += terms.mass(w[0].exp(), w[1].exp()).unwrap_or(0.0);
            // roundoff in cancelling terms must not break monotonicity
            let last = *cdf.last().unwrap();
            cdf.push(acc.max(last));
        }
        RadialTable { ln_x, cdf, terms, eps }
    }

    fn invert(&self, target: f64) -> f64 {
        let last = *self.cdf.last().unwrap();
        if target >= last {
            return self.beyond(target - last);
        }
        let j = self.cdf.partition_point(|c| *c <= target).clamp(1, self.cdf.len() - 1);
        let (c0, c1) = (self.cdf[j - 1], self.cdf[j]);
        let f = if c1 > c0 { (target - c0) / (c1 - c0) } else { 0.5 };
        (self.ln_x[j - 1] + f * (self.ln_x[j] - self.ln_x[j - 1])).exp()
    }

    /// Bisection in `ln x` past the table's last node.
    fn beyond(&self, target: f64) -> f64 {
        let start = *self.ln_x.last().unwrap();
        let mass_to = |h: f64| self.terms.mass(start.exp(), h.exp()).unwrap_or(f64::INFINITY);
        let mut hi = start + 1.0;
        while mass_to(hi) < target && hi < 700.0 {
            hi += 4.0;
        }
        let mut lo = start;
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if mass_to(mid) >= target {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi.exp()
    }
}

/// Draws increments of the Lévy process of a triple over arbitrary durations.
pub struct IncrementSampler {
    dim: usize,
    drift: Vec<f64>,
    /// `L` with `L Lᵀ` the Gaussian covariance per unit time; `None` when zero.
    gauss: Option<DMatrix<f64>>,
    exact: Option<(Vec<f64>, ExactKind)>,
    jumps: Vec<JumpRay>,
    jump_rate: f64,
}

impl IncrementSampler {
    pub fn new(triple: &LevyTriple, config: &SimConfig) -> Result<IncrementSampler> {
        config.validate()?;
        let d = triple.dim();
        let mut drift = triple.shift().to_vec();
        let mut cov = triple.covariance().clone();
        let eps = config.jump_truncation;
        let mut exact = None;
        let mut jumps = Vec::new();
        let mut jump_rate = 0.0;
        if let Some((dir, kind, shift)) = exact_ray(triple.measure()) {
            for (b, u) in drift.iter_mut().zip(&dir) {
                *b -= shift * u;
            }
            exact = Some((dir, kind));
        } else {
            for ray in triple.measure().rays() {
                let nonint = || Error::NonIntegrable("Lévy measure moment diverges".into());
                let mass = ray.mass(eps, f64::INFINITY).ok_or_else(nonint)?;
                if mass < 0.0 {
                    return Err(Error::InvalidParameter("Lévy measure has negative mass".into()));
                }
                // compensator of the jumps between ε and 1 moves into the drift
                let comp = if eps < 1.0 {
                    -ray.weighted_integral(-1.0, eps, 1.0).ok_or_else(nonint)?
                } else {
                    ray.weighted_integral(-1.0, 1.0, eps).ok_or_else(nonint)?
                };
                for (b, u) in drift.iter_mut().zip(&ray.direction) {
                    *b += comp * u;
                }
                if config.small_jump_mode == SmallJumpMode::GaussianApprox {
                    let second = ray.weighted_integral(-2.0, 0.0, eps).ok_or_else(nonint)?;
                    let u = DVector::from_column_slice(&ray.direction);
                    cov += &u * u.transpose() * second;
                }
                if mass > 0.0 {
                    jumps.push(JumpRay::new(ray, eps, mass));
                    jump_rate += mass;
                }
            }
            if jump_rate > MAX_JUMP_RATE {
                return Err(Error::Resolution(format!(
                    "{jump_rate:.3e} expected jumps per unit time above truncation {eps:.1e}; raise the truncation"
                )));
            }
        }
        Ok(IncrementSampler { dim: d, drift, gauss: sqrt_psd(&cov), exact, jumps, jump_rate })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Adds `weight · (Y(s + dt) − Y(s))` to `out`.
    pub fn add_increment<R: Rng>(&self, dt: f64, weight: f64, rng: &mut R, out: &mut [f64]) {
        if dt <= 0.0 || weight == 0.0 {
            return;
        }
        for (o, b) in out.iter_mut().zip(&self.drift) {
            *o += weight * dt * b;
        }
        if let Some(l) = &self.gauss {
            let z = DVector::from_fn(self.dim, |_, _| rng.sample::<f64, _>(StandardNormal));
            let g = l * z;
            let s = weight * dt.sqrt();
            for (o, v) in out.iter_mut().zip(g.iter()) {
                *o += s * v;
            }
        }
        if let Some((dir, kind)) = &self.exact {
            let x = weight * kind.sample(dt, rng);
            for (o, u) in out.iter_mut().zip(dir) {
                *o += x * u;
            }
        }
        if self.jump_rate > 0.0 {
            let n: f64 = Poisson::new(self.jump_rate * dt).expect("positive rate").sample(rng);
            for _ in 0..n as u64 {
                let (dir, r) = self.jump(rng);
                for (o, u) in out.iter_mut().zip(dir) {
                    *o += weight * r * u;
                }
            }
        }
    }

    fn jump<R: Rng>(&self, rng: &mut R) -> (&[f64], f64) {
        let mut pick = rng.random::<f64>() * self.jump_rate;
        let mut k = 0;
        while k + 1 < self.jumps.len() && pick >= self.jumps[k].mass {
            pick -= self.jumps[k].mass;
            k += 1;
        }
        let jr = &self.jumps[k];
        (&jr.direction, jr.radius(rng))
    }
}

/// `L` with `L Lᵀ = S` for a PSD matrix, through the symmetric eigendecomposition.
fn sqrt_psd(s: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    if s.iter().all(|v| *v == 0.0) {
        return None;
    }
    let eig = s.clone().symmetric_eigen();
    let root = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
    Some(&eig.eigenvectors * DMatrix::from_diagonal(&root))
}

fn provenance(config: &SimConfig, source: Value) -> Provenance {
    Provenance { config: config.clone(), source }
}

fn triple_value(t: &LevyTriple) -> Value {
    Descriptor::of_triple(t).to_value()
}

/// JSON description of a mapping, used in provenance records.
pub fn spec_value(spec: &IntegralMapSpec) -> Value {
    json!({
        "kernel": spec.kernel,
        "time_change": spec.time_change,
        "interval": [spec.interval.a, Bound::from_f64(spec.interval.b)],
    })
}

fn fill<F>(dim: usize, n: usize, f: F) -> Vec<f64>
where
    F: Fn(usize, &mut [f64]) + Sync,
{
    let mut data = vec![0.0; dim * n];
    data.par_chunks_mut(dim).enumerate().for_each(|(i, out)| f(i, out));
    data
}

/// `count` draws from `ν^{*dt}`.
pub fn sample_increment(triple: &LevyTriple, dt: f64, config: &SimConfig, count: usize) -> Result<SampleBatch> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")));
    }
    if count == 0 {
        return Err(Error::InvalidParameter("count must be positive".into()));
    }
    let sampler = IncrementSampler::new(triple, config)?;
    let d = triple.dim();
    let data = fill(d, count, |i, out| {
        let mut rng = stream(config.seed, tags::INCREMENT, i as u64);
        sampler.add_increment(dt, 1.0, &mut rng, out);
    });
    let source = json!({"op": "increment", "dt": dt, "count": count, "law": triple_value(triple)});
    SampleBatch::new(d, data, provenance(config, source))
}

/// One partition cell: tag point for the kernel and signed time-change increment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub t0: f64,
    pub t1: f64,
    pub tag: f64,
    pub dr: f64,
}

impl Cell {
    fn new(spec: &IntegralMapSpec, t0: f64, t1: f64) -> Cell {
        let tc = &spec.time_change;
        Cell { t0, t1, tag: 0.5 * (t0 + t1), dr: tc.eval(t1) - tc.eval(t0) }
    }

    fn halves(&self, spec: &IntegralMapSpec) -> [Cell; 2] {
        [Cell::new(spec, self.t0, self.tag), Cell::new(spec, self.tag, self.t1)]
    }
}

fn kernel_scale(k: &Kernel) -> f64 {
    match k {
        Kernel::MaflpU { t, .. } => *t,
        _ => 1.0,
    }
}

/// Half-line truncation point: the configured `b_max`, or the tail certificate at the probe radius.
pub fn truncation_point(spec: &IntegralMapSpec, triple: &LevyTriple, config: &SimConfig) -> Result<f64> {
    if let Some(b) = config.b_max {
        return Ok(b);
    }
    if spec.kernel == Kernel::Exp && !triple.log_moment().is_finite() {
        return Err(Error::InfiniteLogMoment);
    }
    let env = Envelope::of_triple(triple)?;
    let y_norm = ProbeGrid::default_for(triple.dim())?
        .points()
        .iter()
        .map(|y| y.iter().map(|v| v * v).sum::<f64>().sqrt())
        .fold(0.0, f64::max);
    spec.tail_cutoff(Some(&env), y_norm, config.tail_tol)
}

/// Partition of every monotone piece: uniform on finite pieces, graded geometrically
/// away from the left end on half-lines.
pub fn partition(spec: &IntegralMapSpec, triple: &LevyTriple, config: &SimConfig) -> Result<Vec<Cell>> {
    let n = config.n_time_steps;
    let mut cells = Vec::new();
    for piece in spec.monotone_pieces() {
        let (t0, t1) = (piece.t0, piece.t1);
        if t1.is_finite() {
            let h = (t1 - t0) / n as f64;
            cells.extend((0..n).map(|j| {
                let b = if j + 1 == n { t1 } else { t0 + h * (j + 1) as f64 };
                Cell::new(spec, t0 + h * j as f64, b)
            }));
            continue;
        }
        let b = truncation_point(spec, triple, config)?;
        if b <= t0 {
            return Err(Error::InvalidParameter(format!("b_max {b} does not exceed the interval start {t0}")));
        }
        let first = (1e-3 * kernel_scale(&spec.kernel)).min(0.5 * (b - t0));
        let q = ((b - t0) / first).ln() / (n - 1) as f64;
        cells.push(Cell::new(spec, t0, t0 + first));
        let mut prev = t0 + first;
        for j in 1..n {
            let next = if j + 1 == n { b } else { t0 + first * (q * j as f64).exp() };
            cells.push(Cell::new(spec, prev, next));
            prev = next;
        }
    }
    Ok(cells)
}

fn riemann_sum<R: Rng>(
    spec: &IntegralMapSpec,
    cells: &[Cell],
    sampler: &IncrementSampler,
    rng: &mut R,
    out: &mut [f64],
) {
    for c in cells {
        let w = spec.kernel.eval(c.tag) * c.dr.signum();
        sampler.add_increment(c.dr.abs(), w, rng, out);
    }
}

fn integral_batch(
    spec: &IntegralMapSpec,
    triple: &LevyTriple,
    config: &SimConfig,
    tag: u64,
    source: Value,
) -> Result<SampleBatch> {
    let cells = partition(spec, triple, config)?;
    let sampler = IncrementSampler::new(triple, config)?;
    let d = triple.dim();
    let data = fill(d, config.n_samples, |i, out| {
        let mut rng = stream(config.seed, tag, i as u64);
        riemann_sum(spec, &cells, &sampler, &mut rng, out);
    });
    SampleBatch::new(d, data, provenance(config, source))
}

/// Draws of `∫ h(t) dY(r(t))` over the spec's interval.
pub fn sample_integral(spec: &IntegralMapSpec, triple: &LevyTriple, config: &SimConfig) -> Result<SampleBatch> {
    let source = json!({"op": "integral", "map": spec_value(spec), "law": triple_value(triple)});
    integral_batch(spec, triple, config, tags::INTEGRAL, source)
}

/// Coupled Riemann sums on a partition and on its bisection, sharing the fine increments.
///
/// Both sums are exact in law for their own partitions, so the gap between their ECFs
/// measures discretization error rather than sampling noise.
pub fn sample_integral_pair(
    spec: &IntegralMapSpec,
    triple: &LevyTriple,
    config: &SimConfig,
) -> Result<(SampleBatch, SampleBatch)> {
    let cells = partition(spec, triple, config)?;
    let sampler = IncrementSampler::new(triple, config)?;
    let d = triple.dim();
    let mut data = vec![0.0; 2 * d * config.n_samples];
    data.par_chunks_mut(2 * d).enumerate().for_each(|(i, out)| {
        let mut rng = stream(config.seed, tags::INTEGRAL, i as u64);
        let (coarse, fine) = out.split_at_mut(d);
        let mut inc = vec![0.0; d];
        for c in &cells {
            let mut total = vec![0.0; d];
            for half in c.halves(spec) {
                inc.iter_mut().for_each(|v| *v = 0.0);
                sampler.add_increment(half.dr.abs(), half.dr.signum(), &mut rng, &mut inc);
                let w = spec.kernel.eval(half.tag);
                for ((f, t), v) in fine.iter_mut().zip(total.iter_mut()).zip(&inc) {
                    *f += w * v;
                    *t += v;
                }
            }
            let w = spec.kernel.eval(c.tag);
            for (o, v) in coarse.iter_mut().zip(&total) {
                *o += w * v;
            }
        }
    });
    let (coarse, fine): (Vec<_>, Vec<_>) = data.chunks_exact(2 * d).map(|c| (c[..d].to_vec(), c[d..].to_vec())).unzip();
    let base = json!({"map": spec_value(spec), "law": triple_value(triple)});
    let src = |level: &str| {
        let mut v = base.clone();
        v["op"] = json!("integral_pair");
        v["partition"] = json!(level);
        v
    };
    Ok((
        SampleBatch::new(d, coarse.concat(), provenance(config, src("coarse")))?,
        SampleBatch::new(d, fine.concat(), provenance(config, src("bisected")))?,
    ))
}

/// Marginal `Z(t) = V(t) + U(t)` of the fractional process together with its parts.
#[derive(Debug, Clone)]
pub struct MaflpSamples {
    pub v: SampleBatch,
    pub u: SampleBatch,
    pub z: SampleBatch,
}

/// `V(t) = ∫_0^t s^α dY(s)` and the independent `U(t) = ∫_0^∞ ((t+s)^α − s^α) dY(s)`,
/// drawn from disjoint streams.
pub fn sample_maflp(nu: &LevyTriple, alpha: f64, t: f64, config: &SimConfig) -> Result<MaflpSamples> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::InvalidParameter(format!("t must be positive, got {t}")));
    }
    let v_spec = IntegralMapSpec::maflp_v(alpha, t)?;
    let u_spec = IntegralMapSpec::maflp_u(alpha, t)?;
    let law = triple_value(nu);
    let part = |name: &str| json!({"op": "maflp", "part": name, "alpha": alpha, "t": t, "law": law.clone()});
    let v = integral_batch(&v_spec, nu, config, tags::MAFLP_V, part("v"))?;
    let u = integral_batch(&u_spec, nu, config, tags::MAFLP_U, part("u"))?;
    let z = v.add(&u, provenance(config, part("z")))?;
    Ok(MaflpSamples { v, u, z })
}
