//! Random integral mappings `ν ↦ law of ∫_{(a,b]} h(t) dY_ν(r(t))`.
//!
//! At the exponent level the image law has exponent `∫ Φ_ν(h(t)y) dr(t)`,
//! computed here by quadrature. The maps `J^β` (kernel `t`, time change `t^β`
//! on `(0,1]`) and `I` (kernel `e^{-t}`, identity on `(0,∞)`) also have exact
//! triple-level forms, and the moving-average fractional Lévy process marginals
//! are built from them.

use crate::error::{Error, Result};
use crate::exponent::{exponent_of, CharFn, Envelope};
use crate::measure::{beta_measure, tilde_measure};
use crate::quad::{integrate, QuadOptions};
use crate::special::upper_gamma;
use crate::triple::LevyTriple;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Default truncation tolerance for half-line integrals.
pub const DEFAULT_TAIL_TOL: f64 = 1e-8;
const MAX_CUTOFF: f64 = 1e30;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Kernel {
    /// `t^α`
    Power { alpha: f64 },
    /// `e^{-t}`
    Exp,
    /// `s ↦ (t + s)^α − s^α`
    MaflpU { t: f64, alpha: f64 },
    Constant { value: f64 },
}

impl Kernel {
    pub fn eval(&self, s: f64) -> f64 {
        match *self {
            Kernel::Power { alpha } => {
                if s == 0.0 {
                    if alpha > 0.0 {
                        0.0
                    } else if alpha == 0.0 {
                        1.0
                    } else {
                        f64::INFINITY
                    }
                } else {
                    s.powf(alpha)
                }
            }
            Kernel::Exp => (-s).exp(),
            Kernel::MaflpU { t, alpha } => {
                if s == 0.0 {
                    t.powf(alpha)
                } else {
                    s.powf(alpha) * (alpha * (t / s).ln_1p()).exp_m1()
                }
            }
            Kernel::Constant { value } => value,
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            Kernel::Power { alpha } if !alpha.is_finite() => Err(bad("kernel exponent must be finite")),
            Kernel::MaflpU { t, alpha } if !(t > 0.0) || !(alpha > 0.0 && alpha < 1.0) => {
                Err(bad("maflp_u kernel needs t > 0 and α ∈ (0, 1)"))
            }
            Kernel::Constant { value } if !value.is_finite() => Err(bad("constant kernel must be finite")),
            _ => Ok(()),
        }
    }

    /// `∫_T^∞ |h(t)|^κ r'(t) dt` bound for a power-law time change `r = c t^β`,
    /// or `None` when the bound diverges.
    fn tail_moment(&self, kappa: f64, c: f64, beta: f64, cut: f64) -> Option<f64> {
        match *self {
            Kernel::Exp => Some(c * beta * kappa.powf(-beta) * upper_gamma(beta, kappa * cut)),
            Kernel::Power { alpha } => power_tail(c * beta, alpha * kappa + beta - 1.0, cut),
            Kernel::MaflpU { t, alpha } => {
                // (t+s)^α − s^α ≤ α t s^{α−1}
                power_tail(c * beta * (alpha * t).powf(kappa), kappa * (alpha - 1.0) + beta - 1.0, cut)
            }
            Kernel::Constant { value } => {
                if value == 0.0 {
                    Some(0.0)
                } else {
                    None
                }
            }
        }
    }
}

/// `∫_T^∞ A s^e ds`
fn power_tail(a: f64, e: f64, cut: f64) -> Option<f64> {
    if e < -1.0 {
        Some(a * cut.powf(e + 1.0) / (-(e + 1.0)))
    } else {
        None
    }
}

fn bad(msg: &str) -> Error {
    Error::InvalidParameter(msg.to_string())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum TimeChange {
    /// `t^β`
    Power { beta: f64 },
    Identity,
    /// `c·t`
    Linear { c: f64 },
    /// Linear interpolation through `(t_i, r_i)` knots, constant outside them.
    PiecewiseLinear { knots: Vec<(f64, f64)> },
}

impl TimeChange {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            TimeChange::Power { beta } => t.powf(*beta),
            TimeChange::Identity => t,
            TimeChange::Linear { c } => c * t,
            TimeChange::PiecewiseLinear { knots } => {
                if t <= knots[0].0 {
                    return knots[0].1;
                }
                for w in knots.windows(2) {
                    if t <= w[1].0 {
                        let f = (t - w[0].0) / (w[1].0 - w[0].0);
                        return w[0].1 + f * (w[1].1 - w[0].1);
                    }
                }
                knots[knots.len() - 1].1
            }
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            TimeChange::Power { beta } if !(*beta > 0.0 && beta.is_finite()) => Err(bad("time change exponent must be positive")),
            TimeChange::Linear { c } if !(*c > 0.0 && c.is_finite()) => Err(bad("linear time change needs c > 0")),
            TimeChange::PiecewiseLinear { knots } => {
                if knots.len() < 2 {
                    return Err(bad("piecewise-linear time change needs at least two knots"));
                }
                if knots.windows(2).any(|w| !(w[1].0 > w[0].0)) {
                    return Err(bad("knot times must be strictly increasing"));
                }
                if knots.iter().any(|k| !(k.1 >= 0.0) || !k.0.is_finite() || !k.1.is_finite()) {
                    return Err(bad("time change values must be finite and nonnegative"));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

/// One monotone piece of the time change over `[t0, t1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Piece {
    pub t0: f64,
    pub t1: f64,
    /// `r'` on the piece is `rate(t)`; `increasing = false` means `r` decreases.
    pub increasing: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub a: f64,
    /// May be `+∞`.
    pub b: f64,
}

impl Interval {
    pub fn new(a: f64, b: f64) -> Result<Interval> {
        if !(a >= 0.0) || !(b > a) || a.is_infinite() {
            return Err(bad("interval must satisfy 0 ≤ a < b ≤ ∞"));
        }
        Ok(Interval { a, b })
    }

    pub fn is_half_line(&self) -> bool {
        self.b.is_infinite()
    }
}

/// A random integral mapping: kernel, time change and interval.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegralMapSpec {
    pub kernel: Kernel,
    pub time_change: TimeChange,
    pub interval: Interval,
}

impl IntegralMapSpec {
    pub fn new(kernel: Kernel, time_change: TimeChange, interval: Interval) -> Result<IntegralMapSpec> {
        kernel.validate()?;
        time_change.validate()?;
        let spec = IntegralMapSpec { kernel, time_change, interval };
        spec.validate_monotone()?;
        Ok(spec)
    }

    /// `J^β`: kernel `t`, time change `t^β`, interval `(0, 1]`.
    pub fn jbeta(beta: f64) -> Result<IntegralMapSpec> {
        if !(beta > 0.0) {
            return Err(bad("β must be positive"));
        }
        IntegralMapSpec::new(Kernel::Power { alpha: 1.0 }, TimeChange::Power { beta }, Interval::new(0.0, 1.0)?)
    }

    /// `I`: kernel `e^{-t}`, identity time change, interval `(0, ∞)`.
    pub fn selfdecomposable() -> IntegralMapSpec {
        IntegralMapSpec {
            kernel: Kernel::Exp,
            time_change: TimeChange::Identity,
            interval: Interval { a: 0.0, b: f64::INFINITY },
        }
    }

    /// The `V(t)` part of the fractional process: kernel `s^α` on `(0, t]`.
    pub fn maflp_v(alpha: f64, t: f64) -> Result<IntegralMapSpec> {
        check_alpha(alpha)?;
        IntegralMapSpec::new(Kernel::Power { alpha }, TimeChange::Identity, Interval::new(0.0, t)?)
    }

    /// The `U(t)` part: kernel `(t+s)^α − s^α` on `(0, ∞)`.
    pub fn maflp_u(alpha: f64, t: f64) -> Result<IntegralMapSpec> {
        check_alpha(alpha)?;
        IntegralMapSpec::new(Kernel::MaflpU { t, alpha }, TimeChange::Identity, Interval::new(0.0, f64::INFINITY)?)
    }

    /// Monotone decomposition of the time change over the interval.
    pub fn monotone_pieces(&self) -> Vec<Piece> {
        let Interval { a, b } = self.interval;
        match &self.time_change {
            TimeChange::PiecewiseLinear { knots } => knots
                .windows(2)
                .filter(|w| w[1].1 != w[0].1)
                .filter_map(|w| {
                    let (t0, t1) = (w[0].0.max(a), w[1].0.min(b));
                    (t1 > t0).then_some(Piece { t0, t1, increasing: w[1].1 > w[0].1 })
                })
                .collect(),
            _ => vec![Piece { t0: a, t1: b, increasing: true }],
        }
    }

    fn validate_monotone(&self) -> Result<()> {
        for p in self.monotone_pieces() {
            let hi = if p.t1.is_finite() { p.t1 } else { p.t0 + 1e3 };
            let mut prev = self.time_change.eval(p.t0);
            for k in 1..=64 {
                let v = self.time_change.eval(p.t0 + (hi - p.t0) * k as f64 / 64.0);
                if (p.increasing && v < prev) || (!p.increasing && v > prev) {
                    return Err(bad("time change is not monotone on a declared piece"));
                }
                prev = v;
            }
        }
        Ok(())
    }

    /// `r'(t)` on a piece (absolute value).
    fn rate(&self, t: f64) -> f64 {
        match &self.time_change {
            TimeChange::Power { beta } => {
                if *beta == 1.0 {
                    1.0
                } else {
                    beta * t.powf(beta - 1.0)
                }
            }
            TimeChange::Identity => 1.0,
            TimeChange::Linear { c } => *c,
            TimeChange::PiecewiseLinear { knots } => {
                for w in knots.windows(2) {
                    if t >= w[0].0 && t <= w[1].0 {
                        return ((w[1].1 - w[0].1) / (w[1].0 - w[0].0)).abs();
                    }
                }
                0.0
            }
        }
    }

    /// `(c, β)` with `r(t) = c t^β` for the time changes that extend to infinity.
    fn power_form(&self) -> Option<(f64, f64)> {
        match &self.time_change {
            TimeChange::Power { beta } => Some((1.0, *beta)),
            TimeChange::Identity => Some((1.0, 1.0)),
            TimeChange::Linear { c } => Some((*c, 1.0)),
            TimeChange::PiecewiseLinear { .. } => None,
        }
    }

    /// Smallest cutoff `T` (found by doubling) such that the certified tail
    /// `∫_T^∞ |Φ(h(t)y)| dr(t)` stays below `tail_tol` for all `‖y‖ ≤ y_norm`.
    pub fn tail_cutoff(&self, envelope: Option<&Envelope>, y_norm: f64, tail_tol: f64) -> Result<f64> {
        let Interval { a, .. } = self.interval;
        let (c, beta) = self
            .power_form()
            .ok_or_else(|| Error::Divergent("time change is bounded; no half-line piece".into()))?;
        let env = envelope.ok_or_else(|| {
            Error::Divergent("no power-law envelope is available to certify the half-line tail".into())
        })?;
        let bound = |cut: f64| -> Result<f64> {
            let mut total = 0.0;
            for &(amp, kappa) in &env.terms {
                if amp == 0.0 {
                    continue;
                }
                let m = self.kernel.tail_moment(kappa, c, beta, cut).ok_or_else(|| {
                    Error::Divergent(format!(
                        "tail bound ∫ |h(t)|^{kappa:.4} dr(t) diverges for envelope term {amp:.3e}·|y|^{kappa:.4}"
                    ))
                })?;
                total += amp * y_norm.powf(kappa) * m;
            }
            Ok(total)
        };
        let mut cut = (a + 1.0).max(1.0);
        loop {
            let b = bound(cut)?;
            if b <= tail_tol {
                return Ok(cut);
            }
            if cut > MAX_CUTOFF {
                return Err(Error::Divergent(format!(
                    "tail bound {b:.3e} still above tolerance {tail_tol:.1e} at cutoff {cut:.3e}"
                )));
            }
            cut *= 2.0;
        }
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 0.5 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("α must lie in (0, 1/2), got {alpha}")))
    }
}

fn quad_opts() -> QuadOptions {
    QuadOptions { abs_tol: 1e-11, rel_tol: 1e-11, max_intervals: 2000 }
}
const MAP_ACCEPT: f64 = 1e-8;

/// Partition of `[t0, t1]` refined geometrically toward `t0` (endpoint singularities).
fn graded(t0: f64, t1: f64) -> Vec<f64> {
    let mut pts = vec![t0];
    for k in (0..12).rev() {
        pts.push(t0 + (t1 - t0) * 0.25f64.powi(k));
    }
    pts
}

/// Partition of `[t0, cut]` geometric in `t` beyond `t0 + 1`.
fn half_line_points(t0: f64, cut: f64) -> Vec<f64> {
    let mut pts = graded(t0, t0 + 1.0);
    let mut s = 2.0;
    while t0 + s < cut {
        pts.push(t0 + s);
        s *= 2.0;
    }
    pts.push(cut);
    pts
}

/// Options for [`map_exponent_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MapOptions {
    pub tail_tol: f64,
}

impl Default for MapOptions {
    fn default() -> Self {
        MapOptions { tail_tol: DEFAULT_TAIL_TOL }
    }
}

/// `y ↦ ∫_{(a,b]} Φ(h(t)y) dr(t)` with the default tail tolerance.
pub fn map_exponent(spec: &IntegralMapSpec, phi: &CharFn) -> Result<CharFn> {
    map_exponent_with(spec, phi, MapOptions::default())
}

pub fn map_exponent_with(spec: &IntegralMapSpec, phi: &CharFn, opts: MapOptions) -> Result<CharFn> {
    if spec.interval.is_half_line() {
        if spec.kernel == Kernel::Exp {
            if let Some(lm) = phi.log_moment() {
                if !lm.is_finite() {
                    return Err(Error::InfiniteLogMoment);
                }
            }
        }
        // fail early if the tail cannot be certified at all
        spec.tail_cutoff(phi.envelope(), 1.0, opts.tail_tol)?;
    }
    let spec = Arc::new(spec.clone());
    let inner = phi.clone();
    let dim = phi.dim();
    let eval = move |y: &[f64]| -> Result<Complex64> {
        let ynorm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        if ynorm == 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let mut total = Complex64::new(0.0, 0.0);
        for piece in spec.monotone_pieces() {
            let sign = if piece.increasing { 1.0 } else { -1.0 };
            let pts = if piece.t1.is_infinite() {
                let cut = spec.tail_cutoff(inner.envelope(), ynorm, opts.tail_tol)?;
                half_line_points(piece.t0, cut)
            } else {
                graded(piece.t0, piece.t1)
            };
            let mut err = None;
            let mut hy = vec![0.0; y.len()];
            let res = integrate(
                |t| {
                    let rate = spec.rate(t);
                    let h = spec.kernel.eval(t);
                    if rate == 0.0 || h == 0.0 || !rate.is_finite() {
                        return Complex64::new(0.0, 0.0);
                    }
                    for (o, v) in hy.iter_mut().zip(y) {
                        *o = sign * h * v;
                    }
                    match inner.eval(&hy) {
                        Ok(v) => v * rate,
                        Err(e) => {
                            err.get_or_insert(e);
                            Complex64::new(0.0, 0.0)
                        }
                    }
                },
                &pts,
                quad_opts(),
            );
            if let Some(e) = err {
                return Err(e);
            }
            total += res.checked(MAP_ACCEPT)?;
        }
        Ok(total)
    };
    Ok(CharFn::new(dim, eval)?.with_tol(MAP_ACCEPT))
}

/// `J^β(ν) = [b^{(β)}, S^{(β)}, N^{(β)}]`.
pub fn jbeta_transform(nu: &LevyTriple, beta: f64) -> Result<LevyTriple> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::InvalidParameter(format!("β must be positive, got {beta}")));
    }
    let m = nu.measure();
    let corr = m.directed_integral(beta, 1.0, f64::INFINITY)?;
    let f = beta / (beta + 1.0);
    let shift = nu.shift().iter().zip(&corr).map(|(b, c)| f * (b + c)).collect();
    let cov = nu.covariance() * (beta / (2.0 + beta));
    Ok(LevyTriple::from_parts_unchecked(shift, cov, beta_measure(m, beta)?))
}

/// `I(ρ) = [a^∼, R^∼, M^∼]`, defined when `ρ` has a finite log moment.
pub fn i_transform(rho: &LevyTriple) -> Result<LevyTriple> {
    let m = rho.measure();
    if !m.log_moment().is_finite() {
        return Err(Error::InfiniteLogMoment);
    }
    let corr = m.directed_integral(0.0, 1.0, f64::INFINITY)?;
    let shift = rho.shift().iter().zip(&corr).map(|(a, c)| a + c).collect();
    let cov = rho.covariance() * 0.5;
    Ok(LevyTriple::from_parts_unchecked(shift, cov, tilde_measure(m)?))
}

/// Law of `V(t) = ∫_0^t (t−s)^α dY_ν(s)` as a triple.
pub fn v_law(nu: &LevyTriple, alpha: f64, t: f64) -> Result<LevyTriple> {
    check_alpha(alpha)?;
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::InvalidParameter(format!("t must be positive, got {t}")));
    }
    jbeta_transform(nu, 1.0 / alpha)?.conv_power(t)?.dilate(t.powf(alpha))
}

/// Exponent of `U(t) = ∫_0^∞ ((t+s)^α − s^α) dY_ν(s)`.
pub fn u_law(nu: &LevyTriple, alpha: f64, t: f64, tail_tol: f64) -> Result<CharFn> {
    let spec = IntegralMapSpec::maflp_u(alpha, t)?;
    map_exponent_with(&spec, &exponent_of(nu)?, MapOptions { tail_tol })
}

/// Exponent of the fractional process marginal `Z(t) = U(t) + V(t)`.
pub fn z_law(nu: &LevyTriple, alpha: f64, t: f64, tail_tol: f64) -> Result<CharFn> {
    exponent_of(&v_law(nu, alpha, t)?)?.plus(&u_law(nu, alpha, t, tail_tol)?)
}
