//! Lévy exponents: evaluation of the Lévy–Khintchine integral for a triple,
//! and the [`CharFn`] value type shared by every module.

use crate::error::{Error, Result};
use crate::measure::{DensityTerm, Ray};
use crate::quad::{integrate, linspace, QuadOptions};
use crate::triple::LevyTriple;
use num_complex::Complex64;
use std::f64::consts::PI;
use std::fmt;
use std::sync::{Arc, OnceLock};

const I: Complex64 = Complex64::new(0.0, 1.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);
/// Tolerance attached to exponents computed by quadrature.
pub const EXPONENT_TOL: f64 = 1e-9;
const QUAD_ACCEPT: f64 = 1e-9;
const MAX_PRESPLIT: usize = 2000;

fn quad_opts() -> QuadOptions {
    QuadOptions { abs_tol: 1e-13, rel_tol: 1e-12, max_intervals: 4000 }
}

/// `e^{ix} − 1 − ix`, accurate for small `x`.
fn psi_compensated(x: f64) -> Complex64 {
    if x.abs() < 0.1 {
        let x2 = x * x;
        let re = -x2 / 2.0 * (1.0 - x2 / 12.0 * (1.0 - x2 / 30.0 * (1.0 - x2 / 56.0)));
        let im = -x * x2 / 6.0 * (1.0 - x2 / 20.0 * (1.0 - x2 / 42.0 * (1.0 - x2 / 72.0)));
        Complex64::new(re, im)
    } else {
        let h = (x / 2.0).sin();
        Complex64::new(-2.0 * h * h, x.sin() - x)
    }
}

/// `e^{ix} − 1`.
fn psi_plain(x: f64) -> Complex64 {
    let h = (x / 2.0).sin();
    Complex64::new(-2.0 * h * h, x.sin())
}

/// `∫ (e^{iθr} − 1 − iθr 1(r ≤ 1)) M(dr)` for one ray.
pub fn ray_exponent(ray: &Ray, theta: f64) -> Result<Complex64> {
    if theta == 0.0 {
        return Ok(ZERO);
    }
    let mut total = ZERO;
    for a in &ray.atoms {
        let x = theta * a.radius;
        total += a.weight * if a.radius <= 1.0 { psi_compensated(x) } else { psi_plain(x) };
    }
    total += small_jump_part(&ray.terms, theta)?;
    for t in &ray.terms {
        let a = t.lo.max(1.0);
        if t.hi <= a {
            continue;
        }
        total += if t.shape.is_analytic() { large_jump_rotated(t, a, theta)? } else { large_jump_real(t, a, theta)? };
    }
    Ok(total)
}

/// Contribution of `r ∈ (0, 1]`, integrated in `u = ln r`.
fn small_jump_part(terms: &[DensityTerm], theta: f64) -> Result<Complex64> {
    let active: Vec<&DensityTerm> = terms.iter().filter(|t| t.lo < 1.0).collect();
    if active.is_empty() {
        return Ok(ZERO);
    }
    let density = |r: f64| active.iter().map(|t| t.eval(r)).sum::<f64>();
    let mut u_lo = active.iter().map(|t| t.lo).fold(f64::INFINITY, f64::min);
    let u_lo = if u_lo > 0.0 {
        u_lo.ln()
    } else {
        // walk down until the θ²r³ f(r) integrand is negligible
        u_lo = -5.0;
        while u_lo > -740.0 {
            let r = u_lo.exp();
            let bound: f64 = active
                .iter()
                .filter(|t| t.lo == 0.0)
                .map(|t| (t.coef * t.shape.eval(r)).abs())
                .sum::<f64>()
                * theta * theta * r * r * r;
            if bound < 1e-18 {
                break;
            }
            u_lo -= 5.0;
        }
        u_lo
    };
    let mut pts = vec![u_lo, 0.0];
    for t in &active {
        for e in [t.lo, t.hi] {
            if e > 0.0 && e < 1.0 {
                pts.push(e.ln());
            }
        }
    }
    let half = PI / theta.abs();
    if half < 1.0 {
        let n = ((1.0 / half) as usize).min(MAX_PRESPLIT);
        for k in 1..=n {
            let r = k as f64 * half;
            if r < 1.0 {
                pts.push(r.ln());
            }
        }
    }
    pts.retain(|u| *u >= u_lo);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let res = integrate(
        |u| {
            let r = u.exp();
            let f = density(r);
            if f == 0.0 {
                ZERO
            } else {
                psi_compensated(theta * r) * (f * r)
            }
        },
        &pts,
        quad_opts(),
    );
    res.checked(QUAD_ACCEPT)
}

/// `∫_a^{hi} (e^{iθr} − 1) f(r) dr` for an analytic term, rotating the
/// oscillatory part onto rays of steepest descent.
fn large_jump_rotated(t: &DensityTerm, a: f64, theta: f64) -> Result<Complex64> {
    let lambda = t.shape.rate();
    let kappa = Complex64::new(lambda, -theta);
    let d = kappa.conj() / kappa.norm();
    let p = match t.shape {
        crate::measure::Shape::Power { p, .. } => p,
        crate::measure::Shape::IncGamma { p, .. } => p,
    };
    let leg = |start: f64| -> Result<Complex64> {
        let k = kappa.norm();
        let growth = if p > 0.0 { p * (1.0 + 60.0 / (k * start)).ln() } else { 0.0 };
        let tmax = (60.0 + growth) / k;
        // geometric from the smaller of the two natural scales (start radius, decay length)
        let mut pts = vec![0.0];
        let mut s = start.min(tmax) / 32.0;
        while s < tmax {
            pts.push(s);
            s *= 2.0;
        }
        pts.push(tmax);
        let z0 = Complex64::new(start, 0.0);
        let res = integrate(
            |tau| {
                let z = z0 + d * tau;
                let (lf, logf) = t.shape.eval_complex_parts(z);
                // e^{iθz} · f(z) · dz/dτ; the e^{-λz} factor lives in `lf`
                (lf + I * theta * z).exp() * logf * d
            },
            &pts,
            quad_opts(),
        );
        Ok(res.checked(QUAD_ACCEPT)? * t.coef)
    };
    let mut osc = leg(a)?;
    if t.hi.is_finite() {
        osc -= leg(t.hi)?;
    }
    let mass = t
        .weighted_integral(0.0, a, t.hi)
        .ok_or_else(|| Error::NonIntegrable(format!("tail mass diverges for {:?}", t.shape)))?;
    Ok(osc - mass)
}

/// Real-line fallback for non-analytic terms (exponential decay guaranteed).
fn large_jump_real(t: &DensityTerm, a: f64, theta: f64) -> Result<Complex64> {
    let lambda = t.shape.rate();
    let b = if t.hi.is_finite() { t.hi } else { a + 80.0 / lambda };
    let half = PI / theta.abs();
    let n = (((b - a) / half).ceil() as usize).clamp(16, MAX_PRESPLIT);
    let pts = linspace(a, b, n);
    let res = integrate(|r| psi_plain(theta * r) * t.eval(r), &pts, quad_opts());
    res.checked(QUAD_ACCEPT)
}

/// `Φ(y)` for a triple, by the Lévy–Khintchine formula.
pub fn exponent_value(triple: &LevyTriple, y: &[f64]) -> Result<Complex64> {
    let d = triple.dim();
    if y.len() != d {
        return Err(Error::DimMismatch { expected: d, got: y.len() });
    }
    let a = triple.shift();
    let r = triple.covariance();
    let mut lin = 0.0;
    let mut quad = 0.0;
    for i in 0..d {
        lin += y[i] * a[i];
        for j in 0..d {
            quad += y[i] * r[(i, j)] * y[j];
        }
    }
    let mut total = Complex64::new(-0.5 * quad, lin);
    for ray in triple.measure().rays() {
        let theta: f64 = ray.direction.iter().zip(y).map(|(u, v)| u * v).sum();
        total += ray_exponent(ray, theta)?;
    }
    Ok(total)
}

/// Power-law bound `|Φ(y)| ≤ Σ A_i ‖y‖^{κ_i}`, used for half-line tail certificates.
#[derive(Debug, Clone, PartialEq)]
pub struct Envelope {
    pub terms: Vec<(f64, f64)>,
}

impl Envelope {
    pub fn bound(&self, z: f64) -> f64 {
        self.terms.iter().map(|(a, k)| a * z.powf(*k)).sum()
    }

    pub fn scaled(&self, c: f64) -> Envelope {
        Envelope { terms: self.terms.iter().map(|(a, k)| (a * c.abs(), *k)).collect() }
    }

    pub fn plus(&self, other: &Envelope) -> Envelope {
        let mut terms = self.terms.clone();
        terms.extend_from_slice(&other.terms);
        Envelope { terms }
    }

    /// Smallest exponent, which controls behaviour near the origin.
    pub fn min_exponent(&self) -> f64 {
        self.terms.iter().filter(|(a, _)| *a > 0.0).map(|(_, k)| *k).fold(f64::INFINITY, f64::min)
    }

    /// Envelope of a triple's exponent.
    pub fn of_triple(triple: &LevyTriple) -> Result<Envelope> {
        let m = triple.measure();
        let mut terms = Vec::new();
        let cov_norm = triple.covariance().iter().map(|v| v * v).sum::<f64>().sqrt();
        let mut small = 0.0;
        for ray in m.rays() {
            small += ray
                .weighted_integral(-2.0, 0.0, 1.0)
                .ok_or_else(|| Error::NonIntegrable("∫_{r≤1} r² M(dr) diverges".into()))?
                .abs();
        }
        let quad = 0.5 * (cov_norm + small);
        if quad > 0.0 {
            terms.push((quad, 2.0));
        }
        let tail = m.tail_index();
        let mut mean = triple.shift().to_vec();
        if tail > 1.0 {
            // centred large jumps: |e^{ix} − 1 − ix| ≤ 2^{3−2κ}|x|^κ for κ ∈ [1, 2]
            let kappa = if tail.is_infinite() { 2.0 } else { (0.999 * tail).min(2.0).max(1.0) };
            let mut mom = 0.0;
            for ray in m.rays() {
                let w = ray.weighted_integral(-kappa, 1.0, f64::INFINITY).unwrap_or(f64::INFINITY).abs();
                mom += w;
                let first = ray.weighted_integral(-1.0, 1.0, f64::INFINITY).unwrap_or(0.0);
                for (s, d) in mean.iter_mut().zip(&ray.direction) {
                    *s += first * d;
                }
            }
            if mom > 0.0 {
                terms.push((2f64.powf(3.0 - 2.0 * kappa) * mom, kappa));
            }
        } else {
            // min(2, |x|) ≤ 2^{1−κ}|x|^κ for κ ∈ (0, 1]
            let kappa = 0.999 * tail;
            let mut mom = 0.0;
            for ray in m.rays() {
                mom += ray.weighted_integral(-kappa, 1.0, f64::INFINITY).unwrap_or(f64::INFINITY).abs();
            }
            if mom > 0.0 {
                terms.push((2f64.powf(1.0 - kappa) * mom, kappa));
            }
        }
        let mean_norm = mean.iter().map(|v| v * v).sum::<f64>().sqrt();
        if mean_norm > 1e-14 {
            terms.push((mean_norm, 1.0));
        }
        Ok(Envelope { terms })
    }
}

/// Probe points for exponent comparisons: `n` points per axis, uniform on `[lo, hi]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeGrid {
    points: Vec<Vec<f64>>,
}

impl ProbeGrid {
    pub const DEFAULT_POINTS: usize = 64;
    pub const DEFAULT_RADIUS: f64 = 5.0;

    pub fn uniform(dim: usize, n: usize, lo: f64, hi: f64) -> Result<ProbeGrid> {
        if !(1..=2).contains(&dim) {
            return Err(Error::InvalidParameter(format!("probe grids support dimensions 1 and 2, got {dim}")));
        }
        let axis: Vec<f64> = linspace(lo, hi, n.max(2) - 1);
        let points = if dim == 1 {
            axis.iter().map(|&v| vec![v]).collect()
        } else {
            axis.iter().flat_map(|&a| axis.iter().map(move |&b| vec![a, b])).collect()
        };
        Ok(ProbeGrid { points })
    }

    pub fn default_for(dim: usize) -> Result<ProbeGrid> {
        ProbeGrid::uniform(dim, Self::DEFAULT_POINTS, -Self::DEFAULT_RADIUS, Self::DEFAULT_RADIUS)
    }

    pub fn from_points(points: Vec<Vec<f64>>) -> ProbeGrid {
        ProbeGrid { points }
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

type EvalFn = dyn Fn(&[f64]) -> Result<Complex64> + Send + Sync;

/// A Lévy exponent as an evaluable function, with values cached on its probe grid.
#[derive(Clone)]
pub struct CharFn {
    dim: usize,
    eval: Arc<EvalFn>,
    envelope: Option<Envelope>,
    log_moment: Option<f64>,
    grid: Arc<ProbeGrid>,
    cache: Arc<OnceLock<std::result::Result<Vec<Complex64>, Error>>>,
    tol: f64,
}

impl fmt::Debug for CharFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CharFn")
            .field("dim", &self.dim)
            .field("envelope", &self.envelope)
            .field("log_moment", &self.log_moment)
            .field("probes", &self.grid.len())
            .field("tol", &self.tol)
            .finish()
    }
}

impl CharFn {
    pub fn new(dim: usize, eval: impl Fn(&[f64]) -> Result<Complex64> + Send + Sync + 'static) -> Result<CharFn> {
        Ok(CharFn {
            dim,
            eval: Arc::new(eval),
            envelope: None,
            log_moment: None,
            grid: Arc::new(ProbeGrid::default_for(dim)?),
            cache: Arc::new(OnceLock::new()),
            tol: EXPONENT_TOL,
        })
    }

    pub fn with_envelope(mut self, env: Option<Envelope>) -> CharFn {
        self.envelope = env;
        self
    }

    pub fn with_log_moment(mut self, lm: Option<f64>) -> CharFn {
        self.log_moment = lm;
        self
    }

    pub fn with_tol(mut self, tol: f64) -> CharFn {
        self.tol = tol;
        self
    }

    /// Replace the probe grid (drops cached values).
    pub fn with_grid(mut self, grid: ProbeGrid) -> CharFn {
        self.grid = Arc::new(grid);
        self.cache = Arc::new(OnceLock::new());
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn envelope(&self) -> Option<&Envelope> {
        self.envelope.as_ref()
    }

    pub fn log_moment(&self) -> Option<f64> {
        self.log_moment
    }

    pub fn grid(&self) -> &ProbeGrid {
        &self.grid
    }

    pub fn eval(&self, y: &[f64]) -> Result<Complex64> {
        if y.len() != self.dim {
            return Err(Error::DimMismatch { expected: self.dim, got: y.len() });
        }
        (self.eval)(y)
    }

    /// Values on the probe grid, computed once.
    pub fn probe_values(&self) -> Result<&[Complex64]> {
        let cached = self.cache.get_or_init(|| self.grid.points().iter().map(|y| (self.eval)(y)).collect());
        cached.as_deref().map_err(|e| e.clone())
    }

    pub fn scaled(&self, c: f64) -> CharFn {
        let inner = self.eval.clone();
        CharFn {
            dim: self.dim,
            eval: Arc::new(move |y| Ok(inner(y)? * c)),
            envelope: self.envelope.as_ref().map(|e| e.scaled(c)),
            log_moment: self.log_moment.map(|v| v * c.abs()),
            grid: self.grid.clone(),
            cache: Arc::new(OnceLock::new()),
            tol: self.tol * c.abs(),
        }
    }

    pub fn plus(&self, other: &CharFn) -> Result<CharFn> {
        if self.dim != other.dim {
            return Err(Error::DimMismatch { expected: self.dim, got: other.dim });
        }
        let (f, g) = (self.eval.clone(), other.eval.clone());
        let envelope = match (&self.envelope, &other.envelope) {
            (Some(a), Some(b)) => Some(a.plus(b)),
            _ => None,
        };
        let log_moment = match (self.log_moment, other.log_moment) {
            (Some(a), Some(b)) => Some(a + b),
            _ => None,
        };
        Ok(CharFn {
            dim: self.dim,
            eval: Arc::new(move |y| Ok(f(y)? + g(y)?)),
            envelope,
            log_moment,
            grid: self.grid.clone(),
            cache: Arc::new(OnceLock::new()),
            tol: self.tol + other.tol,
        })
    }

    /// `y ↦ Φ(u·y)`.
    pub fn dilated(&self, u: f64) -> CharFn {
        let inner = self.eval.clone();
        CharFn {
            dim: self.dim,
            eval: Arc::new(move |y| {
                let uy: Vec<f64> = y.iter().map(|v| v * u).collect();
                inner(&uy)
            }),
            envelope: self.envelope.as_ref().map(|e| Envelope {
                terms: e.terms.iter().map(|(a, k)| (a * u.abs().powf(*k), *k)).collect(),
            }),
            log_moment: None,
            grid: self.grid.clone(),
            cache: Arc::new(OnceLock::new()),
            tol: self.tol,
        }
    }

    /// Sup-norm gap to another exponent over this exponent's probe grid.
    pub fn sup_gap(&self, other: &CharFn) -> Result<f64> {
        if self.dim != other.dim {
            return Err(Error::DimMismatch { expected: self.dim, got: other.dim });
        }
        let mine = self.probe_values()?;
        let theirs: Vec<Complex64> = if Arc::ptr_eq(&self.grid, &other.grid) || *self.grid == *other.grid {
            other.probe_values()?.to_vec()
        } else {
            self.grid.points().iter().map(|y| other.eval(y)).collect::<Result<_>>()?
        };
        Ok(mine.iter().zip(&theirs).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
    }

    /// Check `Φ(0) = 0`, Hermitian symmetry and `Re Φ ≤ 0` on the probe grid.
    pub fn check_invariants(&self) -> Result<()> {
        let slack = self.tol.max(1e-12) * 10.0;
        let zero = self.eval(&vec![0.0; self.dim])?;
        if zero.norm() > slack {
            return Err(Error::Consistency { what: "Φ(0) = 0".into(), gap: zero.norm() });
        }
        let vals = self.probe_values()?;
        for (y, v) in self.grid.points().iter().zip(vals) {
            if v.re > slack {
                return Err(Error::Consistency { what: format!("Re Φ ≤ 0 at {y:?}"), gap: v.re });
            }
            let neg: Vec<f64> = y.iter().map(|c| -c).collect();
            let w = self.eval(&neg)?;
            let gap = (w - v.conj()).norm();
            if gap > slack {
                return Err(Error::Consistency { what: format!("Φ(−y) = conj Φ(y) at {y:?}"), gap });
            }
        }
        Ok(())
    }
}

/// The exponent of a triple as a [`CharFn`], with envelope and log moment attached.
pub fn exponent_of(triple: &LevyTriple) -> Result<CharFn> {
    for ray in triple.measure().rays() {
        ray.check_integrable()?;
    }
    let envelope = Envelope::of_triple(triple)?;
    let lm = triple.log_moment();
    let t = triple.clone();
    Ok(CharFn::new(triple.dim(), move |y| exponent_value(&t, y))?
        .with_envelope(Some(envelope))
        .with_log_moment(Some(lm)))
}
