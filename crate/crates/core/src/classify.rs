//! Deciding when `J^β(ν)` is selfdecomposable.
//!
//! The operational criterion is nonnegativity of the signed measure
//! `Δ = N − N^{(β)}` on every radial interval `(r_i, r_{i+1}]` and every tail
//! `(r_i, ∞)` of a log grid, at several refinement levels, together with a finite
//! log moment of `N`. When it holds, `ρ = β([b,S,N] − J^β(ν))` is a witness
//! with `ν = ρ^{*1/β} * I(ρ)`, and the exponent identity
//! `Φ(y) = Ψ(y)/β + ∫_0^1 Ψ(wy) dw/w` is verified on the probe grid.

use crate::error::{Error, Result};
use crate::exponent::{exponent_of, CharFn};
use crate::integral_map::{i_transform, jbeta_transform, map_exponent, IntegralMapSpec};
use crate::measure::{tilde_measure, RadialLevyMeasure, Ray};
use crate::triple::LevyTriple;
use serde::Serialize;

/// Sup-norm budget for witness validation and the exponent factorization.
pub const FACTORIZATION_TOL: f64 = 1e-5;
const COROLLARY_COMPONENT_TOL: f64 = 1e-6;
const COROLLARY_MEASURE_TOL: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    Yes,
    No,
    Inconclusive,
}

/// Radial grid used to probe the signed measure.
#[derive(Debug, Clone, PartialEq)]
pub struct RadiiGrid {
    pub points: usize,
    pub r_min: f64,
    pub r_max: f64,
    /// Each level doubles the number of cells between consecutive points.
    pub refinement_levels: u32,
}

impl Default for RadiiGrid {
    fn default() -> Self {
        RadiiGrid { points: 512, r_min: 1e-6, r_max: 1e6, refinement_levels: 2 }
    }
}

impl RadiiGrid {
    fn base(&self) -> Vec<f64> {
        let (a, b) = (self.r_min.ln(), self.r_max.ln());
        let n = self.points.max(2) - 1;
        (0..=n).map(|i| (a + (b - a) * i as f64 / n as f64).exp()).collect()
    }

    /// Grid for one ray: base points clipped to the ray's support, plus its breakpoints,
    /// refined `level` times by log-midpoints.
    fn for_ray(&self, ray: &Ray, level: u32) -> Vec<f64> {
        let (lo, hi) = support(ray);
        let mut pts: Vec<f64> = self.base().into_iter().filter(|r| *r >= lo && *r <= hi).collect();
        pts.extend(ray.breakpoints().into_iter().filter(|r| *r >= self.r_min && *r <= self.r_max));
        if lo > 0.0 && lo >= self.r_min && lo <= self.r_max {
            pts.push(lo);
        }
        if hi.is_finite() && hi >= self.r_min && hi <= self.r_max {
            pts.push(hi);
        }
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        for _ in 0..level {
            let mut finer = Vec::with_capacity(2 * pts.len());
            for w in pts.windows(2) {
                finer.push(w[0]);
                finer.push((w[0] * w[1]).sqrt());
            }
            if let Some(last) = pts.last() {
                finer.push(*last);
            }
            pts = finer;
        }
        pts
    }
}

fn support(ray: &Ray) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for a in &ray.atoms {
        lo = lo.min(a.radius);
        hi = hi.max(a.radius);
    }
    for t in &ray.terms {
        lo = lo.min(t.lo);
        hi = hi.max(t.hi);
    }
    (lo, hi)
}

/// Where the signed measure was found negative.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FailureEvidence {
    pub ray: usize,
    pub direction: Vec<f64>,
    pub interval_lo: f64,
    /// `None` encodes `+∞` (a tail set).
    pub interval_hi: Option<f64>,
    pub mass: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Margins {
    /// Smallest `Δ` mass over all grid intervals and tails.
    pub min_interval_mass: f64,
    /// Sup-norm gap of the witness roundtrip `I(ρ)` vs `J^β(ν)`.
    pub witness_gap: Option<f64>,
    /// Sup-norm gap of the exponent factorization.
    pub factorization_gap: Option<f64>,
    pub intervals_checked: usize,
}

#[derive(Debug, Clone)]
pub struct ClassificationReport {
    pub decision: Decision,
    pub witness: Option<LevyTriple>,
    pub failure_evidence: Option<FailureEvidence>,
    pub log_moment_value: f64,
    pub margins: Margins,
    pub refinement_hint: Option<String>,
    pub scope_note: &'static str,
}

const SCOPE_NOTE: &str = "nonnegativity is certified on radial intervals and tails of each ray; \
     sets that are not unions of such intervals are not examined";

#[derive(Debug, Clone, PartialEq)]
pub struct ClassifyOptions {
    pub grid: RadiiGrid,
    /// Absolute interval-mass tolerance.
    pub tol: f64,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions { grid: RadiiGrid::default(), tol: 1e-9 }
    }
}

/// `N − N^{(β)}` as a signed polar measure.
pub fn difference_measure(nu: &LevyTriple, beta: f64) -> Result<RadialLevyMeasure> {
    let jb = jbeta_transform(nu, beta)?;
    nu.measure().merged(&jb.measure().scaled(-1.0))
}

struct Scan {
    min_mass: f64,
    worst: Option<FailureEvidence>,
    count: usize,
    oscillating: bool,
}

fn scan(delta: &RadialLevyMeasure, grid: &RadiiGrid, tol: f64) -> Result<Scan> {
    let mut out = Scan { min_mass: f64::INFINITY, worst: None, count: 0, oscillating: false };
    for (k, ray) in delta.rays().iter().enumerate() {
        for level in 0..=grid.refinement_levels {
            let pts = ray_points(grid, ray, level);
            let mut prev_sign = 0i8;
            let mut flips = 0usize;
            let record = |lo: f64, hi: Option<f64>, m: f64, out: &mut Scan| {
                out.count += 1;
                if m < out.min_mass {
                    out.min_mass = m;
                    out.worst = Some(FailureEvidence {
                        ray: k,
                        direction: ray.direction.clone(),
                        interval_lo: lo,
                        interval_hi: hi,
                        mass: m,
                    });
                }
            };
            for w in pts.windows(2) {
                let m = ray
                    .mass(w[0], w[1])
                    .ok_or_else(|| Error::NonIntegrable(format!("Δ mass of ({}, {}] diverges", w[0], w[1])))?;
                let sign = if m < -tol { -1 } else if m > tol { 1 } else { 0 };
                if sign != 0 && prev_sign != 0 && sign != prev_sign {
                    flips += 1;
                }
                if sign != 0 {
                    prev_sign = sign;
                }
                record(w[0], Some(w[1]), m, &mut out);
            }
            // tails: accumulate interval masses from the right onto the exact outer tail
            if let Some(&last) = pts.last() {
                let mut tail = ray
                    .mass(last, f64::INFINITY)
                    .ok_or_else(|| Error::NonIntegrable("Δ tail mass diverges".into()))?;
                record(last, None, tail, &mut out);
                for w in pts.windows(2).rev() {
                    tail += ray.mass(w[0], w[1]).unwrap_or(0.0);
                    record(w[0], None, tail, &mut out);
                }
            }
            if flips > pts.len() / 4 {
                out.oscillating = true;
            }
        }
    }
    if out.min_mass == f64::INFINITY {
        out.min_mass = 0.0;
    }
    Ok(out)
}

fn ray_points(grid: &RadiiGrid, ray: &Ray, level: u32) -> Vec<f64> {
    grid.for_ray(ray, level)
}

/// Nonnegativity of `N − N^{(β)}` on the grid, with the witness and its checks when the answer is yes.
pub fn check_iv(nu: &LevyTriple, beta: f64, opts: &ClassifyOptions) -> Result<ClassificationReport> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::InvalidParameter(format!("β must be positive, got {beta}")));
    }
    let delta = difference_measure(nu, beta)?;
    let s = scan(&delta, &opts.grid, opts.tol)?;
    let log_moment = nu.log_moment();
    let mut margins =
        Margins { min_interval_mass: s.min_mass, witness_gap: None, factorization_gap: None, intervals_checked: s.count };
    let mut report = ClassificationReport {
        decision: Decision::Inconclusive,
        witness: None,
        failure_evidence: None,
        log_moment_value: log_moment,
        margins: margins.clone(),
        refinement_hint: None,
        scope_note: SCOPE_NOTE,
    };
    if s.min_mass < -10.0 * opts.tol {
        report.decision = Decision::No;
        report.failure_evidence = s.worst;
        return Ok(report);
    }
    if !log_moment.is_finite() {
        // without a finite log moment the candidate witness is outside the domain of I
        report.decision = Decision::No;
        report.refinement_hint = Some("log moment of the Lévy measure is infinite".into());
        return Ok(report);
    }
    if s.min_mass < -opts.tol {
        report.failure_evidence = s.worst;
        report.refinement_hint = Some(format!(
            "smallest interval mass {:.3e} lies within 10·tol; refine the radii grid{}",
            s.min_mass,
            if s.oscillating { " (adjacent intervals alternate in sign)" } else { "" }
        ));
        return Ok(report);
    }
    if s.oscillating {
        report.refinement_hint = Some("adjacent intervals alternate in sign; refine the radii grid".into());
    }
    let witness = construct_witness_unchecked(nu, beta)?;
    let gap = witness_gap(nu, &witness, beta)?;
    margins.witness_gap = Some(gap);
    if gap >= FACTORIZATION_TOL {
        return Err(Error::Consistency { what: "I(ρ) = J^β(ν) for the constructed witness".into(), gap });
    }
    let fact = factorization_check(nu, &witness, beta)?;
    margins.factorization_gap = Some(fact.gap);
    report.margins = margins;
    if fact.pass {
        report.decision = Decision::Yes;
        report.witness = Some(witness);
    } else {
        report.refinement_hint = Some(format!("exponent factorization gap {:.3e} exceeds tolerance", fact.gap));
    }
    Ok(report)
}

fn construct_witness_unchecked(nu: &LevyTriple, beta: f64) -> Result<LevyTriple> {
    let jb = jbeta_transform(nu, beta)?;
    let shift = nu.shift().iter().zip(jb.shift()).map(|(b, bb)| beta * (b - bb)).collect();
    let cov = (nu.covariance() - jb.covariance()) * beta;
    let measure = nu.measure().merged(&jb.measure().scaled(-1.0))?.scaled(beta);
    LevyTriple::new(shift, cov, measure)
}

fn witness_gap(nu: &LevyTriple, rho: &LevyTriple, beta: f64) -> Result<f64> {
    let lhs = exponent_of(&i_transform(rho)?)?;
    let rhs = exponent_of(&jbeta_transform(nu, beta)?)?;
    lhs.sup_gap(&rhs)
}

/// `ρ = [β(b − b^{(β)}), β(S − S^{(β)}), β(N − N^{(β)})]`, validated by `I(ρ) = J^β(ν)`.
pub fn construct_witness(nu: &LevyTriple, beta: f64) -> Result<LevyTriple> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::InvalidParameter(format!("β must be positive, got {beta}")));
    }
    let rho = construct_witness_unchecked(nu, beta)?;
    let gap = witness_gap(nu, &rho, beta)?;
    if gap >= FACTORIZATION_TOL {
        return Err(Error::Consistency { what: "I(ρ) = J^β(ν) for the constructed witness".into(), gap });
    }
    Ok(rho)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FactorizationResult {
    pub pass: bool,
    pub gap: f64,
}

/// Compare `Φ_ν` with `Ψ_ρ/β + ∫_0^1 Ψ_ρ(wy) dw/w` on the probe grid.
pub fn factorization_check(nu: &LevyTriple, rho: &LevyTriple, beta: f64) -> Result<FactorizationResult> {
    if !rho.log_moment().is_finite() {
        return Err(Error::InfiniteLogMoment);
    }
    let phi = exponent_of(nu)?;
    let psi = exponent_of(rho)?;
    let averaged = map_exponent(&IntegralMapSpec::selfdecomposable(), &psi)?;
    let rhs = psi.scaled(1.0 / beta).plus(&averaged)?;
    let gap = phi.sup_gap(&rhs)?;
    Ok(FactorizationResult { pass: gap < FACTORIZATION_TOL, gap })
}

/// Candidate exponent `β[Φ(y) − β∫_0^1 Φ(ty) t^{β−1} dt]` and whether it is a valid exponent.
pub fn check_iii(nu: &LevyTriple, beta: f64, opts: &ClassifyOptions) -> Result<(CharFn, bool)> {
    let phi = exponent_of(nu)?;
    let averaged = map_exponent(&IntegralMapSpec::jbeta(beta)?, &phi)?;
    let candidate = phi.plus(&averaged.scaled(-1.0))?.scaled(beta);
    let valid = check_iv(nu, beta, opts)?.decision == Decision::Yes;
    Ok((candidate, valid))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Corollary2Report {
    pub pass: bool,
    pub shift_margin: f64,
    pub covariance_margin: f64,
    pub measure_margin: f64,
}

/// The triple relations between `ν = [b,S,N]` and a candidate `ρ = [a,R,M]`:
/// `b = (β+1)/β·a + ∫_{‖x‖>1} x/‖x‖ M(dx)`, `S = (β+2)/(2β)·R`, `N = M/β + M^∼`.
pub fn corollary2_check(nu: &LevyTriple, rho: &LevyTriple, beta: f64) -> Result<Corollary2Report> {
    if nu.dim() != rho.dim() {
        return Err(Error::DimMismatch { expected: nu.dim(), got: rho.dim() });
    }
    let m = rho.measure();
    let corr = m.directed_integral(0.0, 1.0, f64::INFINITY)?;
    let f = (beta + 1.0) / beta;
    let shift_margin = nu
        .shift()
        .iter()
        .zip(rho.shift())
        .zip(&corr)
        .map(|((b, a), c)| (b - (f * a + c)).abs())
        .fold(0.0, f64::max);
    let g = (beta + 2.0) / (2.0 * beta);
    let covariance_margin = (nu.covariance() - rho.covariance() * g).iter().map(|v| v.abs()).fold(0.0, f64::max);
    let predicted = m.scaled(1.0 / beta).merged(&tilde_measure(m)?)?;
    let residual = nu.measure().merged(&predicted.scaled(-1.0))?;
    let grid = RadiiGrid { refinement_levels: 0, ..RadiiGrid::default() };
    let mut measure_margin = 0.0f64;
    for ray in residual.rays() {
        let pts = grid.for_ray(ray, 0);
        for w in pts.windows(2) {
            let v = ray.mass(w[0], w[1]).unwrap_or(f64::INFINITY);
            measure_margin = measure_margin.max(v.abs());
        }
        if let Some(&last) = pts.last() {
            measure_margin = measure_margin.max(ray.mass(last, f64::INFINITY).unwrap_or(f64::INFINITY).abs());
        }
    }
    Ok(Corollary2Report {
        pass: shift_margin < COROLLARY_COMPONENT_TOL
            && covariance_margin < COROLLARY_COMPONENT_TOL
            && measure_margin < COROLLARY_MEASURE_TOL,
        shift_margin,
        covariance_margin,
        measure_margin,
    })
}

/// `ν = ρ^{*1/β} * I(ρ)`, the general element of the class decided by [`check_iv`].
pub fn compose_from_witness(rho: &LevyTriple, beta: f64) -> Result<LevyTriple> {
    rho.conv_power(1.0 / beta)?.convolve(&i_transform(rho)?)
}
