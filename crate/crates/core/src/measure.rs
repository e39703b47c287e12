//! Lévy measures in polar form.
//!
//! A measure is a list of rays. Each ray carries a unit direction, point masses
//! (atoms) at positive radii, and a radial density written as a finite sum of
//! closed-form terms `c · x^p (ln x)^k` or `c · x^p Γ(s, λx)`, each supported on
//! an interval `[lo, hi)`. A piecewise log-linear density is the special case of
//! power terms on consecutive grid cells.
//!
//! Every radial map used by the integral mappings (scaling, dilation, and the
//! tail-weighted averages behind `J^β` and `I`) sends this class into itself,
//! so transforms are carried out symbolically and only exponents and masses
//! ever touch quadrature.

use crate::error::{Error, Result};
use crate::quad::{integrate_real, QuadOptions};
use crate::special::{lower_gamma, upper_gamma};
use num_complex::Complex64;

const CANCEL_REL: f64 = 1e-12;
const DIRECTION_TOL: f64 = 1e-9;

fn snap(v: f64) -> f64 {
    let r = v.round();
    if (v - r).abs() < 1e-12 {
        r + 0.0
    } else {
        v
    }
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn factorial(n: u32) -> f64 {
    (1..=n).fold(1.0, |acc, i| acc * i as f64)
}

/// Radial shape of one density term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shape {
    /// `x^p (ln x)^k`
    Power { p: f64, log_power: u32 },
    /// `x^p Γ(s, λx)`; `s = 1` is the exponential `x^p e^{-λx}`.
    IncGamma { p: f64, s: f64, rate: f64 },
}

impl Shape {
    pub fn power(p: f64) -> Self {
        Shape::Power { p: snap(p), log_power: 0 }
    }

    pub fn exp_power(p: f64, rate: f64) -> Self {
        Shape::IncGamma { p: snap(p), s: 1.0, rate }
    }

    fn normalized(self) -> Self {
        match self {
            Shape::Power { p, log_power } => Shape::Power { p: snap(p), log_power },
            Shape::IncGamma { p, s, rate } => Shape::IncGamma { p: snap(p), s: snap(s), rate },
        }
    }

    fn key(&self) -> (u8, u64, u64, u64) {
        match *self {
            Shape::Power { p, log_power } => (0, p.to_bits(), log_power as u64, 0),
            Shape::IncGamma { p, s, rate } => (1, p.to_bits(), s.to_bits(), rate.to_bits()),
        }
    }

    /// True when the shape extends to an analytic function on `Re z > 0`.
    pub fn is_analytic(&self) -> bool {
        match *self {
            Shape::Power { .. } => true,
            Shape::IncGamma { s, .. } => s == 1.0,
        }
    }

    /// Exponential decay rate at infinity (zero for power terms).
    pub fn rate(&self) -> f64 {
        match *self {
            Shape::Power { .. } => 0.0,
            Shape::IncGamma { rate, .. } => rate,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            Shape::Power { p, log_power } => {
                let v = if p == 0.0 { 1.0 } else { x.powf(p) };
                if log_power == 0 {
                    v
                } else {
                    v * x.ln().powi(log_power as i32)
                }
            }
            Shape::IncGamma { p, s, rate } => {
                if s == 1.0 {
                    (p * x.ln() - rate * x).exp()
                } else {
                    let g = upper_gamma(s, rate * x);
                    if g == 0.0 {
                        0.0
                    } else if p == 0.0 {
                        g
                    } else {
                        x.powf(p) * g
                    }
                }
            }
        }
    }

    /// `ln f(z)` split as `(exponent, log_factor)` so that `f(z) = exp(exponent) · log_factor`.
    /// Only valid for analytic shapes; `z` must lie in the right half-plane.
    pub fn eval_complex_parts(&self, z: Complex64) -> (Complex64, Complex64) {
        let lz = z.ln();
        match *self {
            Shape::Power { p, log_power } => (lz * p, lz.powi(log_power as i32)),
            Shape::IncGamma { p, rate, .. } => (lz * p - z * rate, Complex64::new(1.0, 0.0)),
        }
    }

    /// Leading small-`x` behaviour `x^ν |ln x|^j`, used to truncate `x → 0` integrals.
    pub fn small_x_exponent(&self) -> (f64, u32) {
        match *self {
            Shape::Power { p, log_power } => (p, log_power),
            Shape::IncGamma { p, s, .. } => {
                if s > 0.0 {
                    (p, 0)
                } else if s == 0.0 {
                    (p, 1)
                } else {
                    (p + s, 0)
                }
            }
        }
    }

    /// Primitive of `x^{-γ} f(x)` as a sum of shapes.
    pub fn antiderivative(&self, gamma: f64) -> Result<Vec<(f64, Shape)>> {
        match *self {
            Shape::Power { p, log_power: k } => {
                let q = snap(p - gamma + 1.0);
                if q == 0.0 {
                    Ok(vec![(1.0 / (k + 1) as f64, Shape::Power { p: 0.0, log_power: k + 1 })])
                } else {
                    let kf = factorial(k);
                    Ok((0..=k)
                        .map(|j| {
                            let sign = if (k - j) % 2 == 0 { 1.0 } else { -1.0 };
                            let c = sign * kf / factorial(j) / q.powi((k - j + 1) as i32);
                            (c, Shape::Power { p: q, log_power: j })
                        })
                        .collect())
                }
            }
            Shape::IncGamma { p, s, rate } => {
                let q = snap(p - gamma + 1.0);
                if s == 1.0 {
                    // ∫ x^{q-1} e^{-λx} dx = -λ^{-q} Γ(q, λx)
                    Ok(vec![(-rate.powf(-q), Shape::IncGamma { p: 0.0, s: q, rate })])
                } else if q == 0.0 {
                    Err(Error::UnsupportedTransform(format!(
                        "primitive of x^-1 Γ({s}, {rate}x) is not an incomplete-gamma term"
                    )))
                } else {
                    Ok(vec![
                        (1.0 / q, Shape::IncGamma { p: q, s, rate }),
                        (-rate.powf(-q) / q, Shape::IncGamma { p: 0.0, s: snap(q + s), rate }.normalized()),
                    ])
                }
            }
        }
    }

    /// `lim_{x→0+} f(x)`, or `None` if unbounded.
    pub fn limit_at_zero(&self) -> Option<f64> {
        match *self {
            Shape::Power { p, log_power } => {
                if p > 0.0 {
                    Some(0.0)
                } else if p == 0.0 && log_power == 0 {
                    Some(1.0)
                } else {
                    None
                }
            }
            Shape::IncGamma { p, s, rate } => {
                if s > 0.0 {
                    if p > 0.0 {
                        Some(0.0)
                    } else if p == 0.0 {
                        Some(crate::special::gamma(s))
                    } else {
                        None
                    }
                } else if s == 0.0 {
                    if p > 0.0 {
                        Some(0.0)
                    } else {
                        None
                    }
                } else {
                    let e = snap(p + s);
                    if e > 0.0 {
                        Some(0.0)
                    } else if e == 0.0 {
                        Some(rate.powf(s) / -s)
                    } else {
                        None
                    }
                }
            }
        }
    }

    /// `lim_{x→∞} f(x)`, or `None` if it does not vanish.
    pub fn limit_at_infinity(&self) -> Option<f64> {
        match *self {
            Shape::Power { p, .. } => {
                if p < 0.0 {
                    Some(0.0)
                } else {
                    None
                }
            }
            Shape::IncGamma { .. } => Some(0.0),
        }
    }

    /// `f(b) - f(a)` with limits at `a = 0` and `b = ∞`.
    pub fn increment(&self, a: f64, b: f64) -> Option<f64> {
        // Γ(s, λb) − Γ(s, λa) through the lower function when both arguments are small
        if let Shape::IncGamma { p, s, rate } = *self {
            if p == 0.0 && s > 0.0 && b.is_finite() && rate * b < s + 1.0 {
                return Some(lower_gamma(s, rate * a) - lower_gamma(s, rate * b));
            }
        }
        let fb = if b.is_infinite() { self.limit_at_infinity()? } else { self.eval(b) };
        let fa = if a == 0.0 { self.limit_at_zero()? } else { self.eval(a) };
        Some(fb - fa)
    }

    /// Image of the shape under `x ↦ c·x` (`c > 0`), as the density `f(x/c)/c`.
    pub fn dilate(&self, c: f64) -> Vec<(f64, Shape)> {
        match *self {
            Shape::Power { p, log_power: k } => {
                let scale = c.powf(-p - 1.0);
                let lc = -c.ln();
                (0..=k)
                    .map(|j| {
                        let coef = scale * binomial(k, j) * lc.powi((k - j) as i32);
                        (coef, Shape::Power { p, log_power: j })
                    })
                    .filter(|(coef, _)| *coef != 0.0 || k == 0)
                    .collect()
            }
            Shape::IncGamma { p, s, rate } => {
                vec![(c.powf(-p - 1.0), Shape::IncGamma { p, s, rate: rate / c })]
            }
        }
    }

    fn shift_power(&self, dp: f64) -> Shape {
        match *self {
            Shape::Power { p, log_power } => Shape::Power { p: snap(p + dp), log_power },
            Shape::IncGamma { p, s, rate } => Shape::IncGamma { p: snap(p + dp), s, rate },
        }
    }

    /// Multiply the shape by `ln x` when that stays in the class.
    fn times_log(&self) -> Option<Shape> {
        match *self {
            Shape::Power { p, log_power } => Some(Shape::Power { p, log_power: log_power + 1 }),
            Shape::IncGamma { .. } => None,
        }
    }
}

/// One density term `coef · shape(x)` on `[lo, hi)`; `hi` may be `+∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityTerm {
    pub coef: f64,
    pub shape: Shape,
    pub lo: f64,
    pub hi: f64,
}

impl DensityTerm {
    pub fn new(coef: f64, shape: Shape, lo: f64, hi: f64) -> Self {
        DensityTerm { coef, shape: shape.normalized(), lo, hi }
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x < self.lo || x >= self.hi {
            0.0
        } else {
            self.coef * self.shape.eval(x)
        }
    }

    /// `∫_{[a,b] ∩ support} x^{-γ} f(x) dx`; `None` when divergent.
    pub fn weighted_integral(&self, gamma: f64, a: f64, b: f64) -> Option<f64> {
        let lo = a.max(self.lo);
        let hi = b.min(self.hi);
        if hi <= lo {
            return Some(0.0);
        }
        match self.shape.antiderivative(gamma) {
            Ok(prim) => {
                let mut total = 0.0;
                for (c, sh) in prim {
                    total += c * sh.increment(lo, hi)?;
                }
                Some(self.coef * total)
            }
            Err(_) => self.weighted_integral_numeric(gamma, lo, hi),
        }
    }

    fn weighted_integral_numeric(&self, gamma: f64, lo: f64, hi: f64) -> Option<f64> {
        let (nu, _) = self.shape.small_x_exponent();
        if lo == 0.0 && nu - gamma + 1.0 <= 0.0 {
            return None;
        }
        let rate = self.shape.rate();
        if hi.is_infinite() && rate == 0.0 {
            return None;
        }
        let u_lo = if lo == 0.0 { (-700.0f64).max(-60.0 / (nu - gamma + 1.0)) } else { lo.ln() };
        let u_hi = if hi.is_infinite() { (lo.max(1.0) + 80.0 / rate).ln() } else { hi.ln() };
        let pts = crate::quad::linspace(u_lo, u_hi, 16);
        let (v, _, _) = integrate_real(
            |u| {
                let x = u.exp();
                self.shape.eval(x) * x.powf(1.0 - gamma)
            },
            &pts,
            QuadOptions::with_abs(1e-14),
        );
        Some(self.coef * v)
    }

    fn key(&self) -> (u8, u64, u64, u64, u64, u64) {
        let k = self.shape.key();
        (k.0, k.1, k.2, k.3, self.lo.to_bits(), self.hi.to_bits())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub radius: f64,
    pub weight: f64,
}

/// One ray of a polar Lévy measure.
#[derive(Debug, Clone, PartialEq)]
pub struct Ray {
    pub direction: Vec<f64>,
    pub atoms: Vec<Atom>,
    pub terms: Vec<DensityTerm>,
}

impl Ray {
    pub fn new(direction: Vec<f64>, atoms: Vec<Atom>, terms: Vec<DensityTerm>) -> Self {
        let mut ray = Ray { direction, atoms, terms };
        ray.normalize();
        ray
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty() && self.terms.is_empty()
    }

    pub fn density(&self, x: f64) -> f64 {
        self.terms.iter().map(|t| t.eval(x)).sum()
    }

    /// `∫_{(a,b]} x^{-γ} M(dx)` along the ray; `None` when divergent.
    pub fn weighted_integral(&self, gamma: f64, a: f64, b: f64) -> Option<f64> {
        let mut total = 0.0;
        for at in &self.atoms {
            if at.radius > a && at.radius <= b {
                total += at.weight * at.radius.powf(-gamma);
            }
        }
        for t in &self.terms {
            total += t.weighted_integral(gamma, a, b)?;
        }
        Some(total)
    }

    /// Mass of `(a, b]`.
    pub fn mass(&self, a: f64, b: f64) -> Option<f64> {
        self.weighted_integral(0.0, a, b)
    }

    /// Merge like terms and atoms; drop terms whose coefficients cancelled.
    pub fn normalize(&mut self) {
        let mut atoms: Vec<Atom> = Vec::with_capacity(self.atoms.len());
        let mut sorted = std::mem::take(&mut self.atoms);
        sorted.sort_by(|a, b| a.radius.total_cmp(&b.radius));
        for at in sorted {
            match atoms.last_mut() {
                Some(last) if last.radius == at.radius => last.weight += at.weight,
                _ => atoms.push(at),
            }
        }
        atoms.retain(|a| a.weight != 0.0);
        self.atoms = atoms;

        let mut terms = std::mem::take(&mut self.terms);
        terms.retain(|t| t.hi > t.lo && t.coef != 0.0);
        for t in terms.iter_mut() {
            t.shape = t.shape.normalized();
        }
        terms.sort_by(|a, b| a.key().cmp(&b.key()));
        let mut merged: Vec<(DensityTerm, f64)> = Vec::with_capacity(terms.len());
        for t in terms {
            match merged.last_mut() {
                Some((last, abs)) if last.key() == t.key() => {
                    last.coef += t.coef;
                    *abs += t.coef.abs();
                }
                _ => {
                    let a = t.coef.abs();
                    merged.push((t, a));
                }
            }
        }
        self.terms = merged
            .into_iter()
            .filter(|(t, abs)| t.coef.abs() > CANCEL_REL * abs)
            .map(|(t, _)| t)
            .collect();
        self.terms.sort_by(|a, b| a.lo.total_cmp(&b.lo).then(a.hi.total_cmp(&b.hi)));
    }

    pub fn scaled(&self, c: f64) -> Ray {
        Ray {
            direction: self.direction.clone(),
            atoms: self.atoms.iter().map(|a| Atom { radius: a.radius, weight: a.weight * c }).collect(),
            terms: self.terms.iter().map(|t| DensityTerm { coef: t.coef * c, ..*t }).collect(),
        }
    }

    /// Image of the ray's radial measure under `r ↦ c·r`, `c > 0`.
    pub fn radially_dilated(&self, c: f64) -> Ray {
        let atoms = self.atoms.iter().map(|a| Atom { radius: a.radius * c, weight: a.weight }).collect();
        let mut terms = Vec::new();
        for t in &self.terms {
            for (k, sh) in t.shape.dilate(c) {
                terms.push(DensityTerm::new(t.coef * k, sh, t.lo * c, t.hi * c));
            }
        }
        Ray::new(self.direction.clone(), atoms, terms)
    }

    /// The radial map `f ↦ x^{γ-1} ∫_x^∞ r^{-γ} f(r) dr`, which sends atoms to densities.
    ///
    /// `γ = β` gives `N^{(β)}/β`; `γ = 0` gives the `M^∼` transform.
    pub fn tail_weighted(&self, gamma: f64) -> Result<Ray> {
        let outer = Shape::power(gamma - 1.0);
        let mut terms = Vec::new();
        for at in &self.atoms {
            terms.push(DensityTerm::new(at.weight * at.radius.powf(-gamma), outer, 0.0, at.radius));
        }
        for t in &self.terms {
            let prim = t.shape.antiderivative(gamma)?;
            let at_hi = if t.hi.is_infinite() {
                let mut s = 0.0;
                for (c, sh) in &prim {
                    s += c * sh.limit_at_infinity().ok_or_else(|| {
                        Error::NonIntegrable(format!("tail integral of {:?} diverges at infinity", t.shape))
                    })?;
                }
                s
            } else {
                prim.iter().map(|(c, sh)| c * sh.eval(t.hi)).sum()
            };
            if t.lo > 0.0 {
                let at_lo: f64 = prim.iter().map(|(c, sh)| c * sh.eval(t.lo)).sum();
                let mass = t.coef * (at_hi - at_lo);
                terms.push(DensityTerm::new(mass, outer, 0.0, t.lo));
            }
            terms.push(DensityTerm::new(t.coef * at_hi, outer, t.lo, t.hi));
            for (c, sh) in prim {
                terms.push(DensityTerm::new(-t.coef * c, sh.shift_power(gamma - 1.0), t.lo, t.hi));
            }
        }
        Ok(Ray::new(self.direction.clone(), Vec::new(), terms))
    }

    /// `∫_{r>1} ln r M(dr)` along the ray.
    pub fn log_moment(&self) -> f64 {
        let mut total: f64 = self.atoms.iter().filter(|a| a.radius > 1.0).map(|a| a.weight * a.radius.ln()).sum();
        for t in &self.terms {
            let lo = t.lo.max(1.0);
            if t.hi <= lo {
                continue;
            }
            let part = match t.shape.times_log() {
                Some(sh) => DensityTerm { shape: sh, lo, ..*t }.weighted_integral(0.0, lo, t.hi),
                None => {
                    let rate = t.shape.rate();
                    let hi = if t.hi.is_infinite() { lo + 80.0 / rate } else { t.hi };
                    let pts = crate::quad::linspace(lo.ln(), hi.ln(), 16);
                    let (v, _, _) = integrate_real(
                        |u| {
                            let x = u.exp();
                            t.shape.eval(x) * u * x
                        },
                        &pts,
                        QuadOptions::with_abs(1e-14),
                    );
                    Some(t.coef * v)
                }
            };
            match part {
                Some(v) => total += v,
                None => return f64::INFINITY,
            }
        }
        total
    }

    /// Integrability of `min(1, r²)` against every term and atom.
    pub fn check_integrable(&self) -> Result<()> {
        for a in &self.atoms {
            if !(a.radius > 0.0) || !a.radius.is_finite() {
                return Err(invalid_radius(a.radius));
            }
        }
        for t in &self.terms {
            if !(t.lo >= 0.0) || !(t.hi > t.lo) {
                return Err(Error::InvalidParameter(format!("empty or negative support [{}, {})", t.lo, t.hi)));
            }
            if let Shape::IncGamma { rate, .. } = t.shape {
                if !(rate > 0.0) {
                    return Err(Error::InvalidParameter(format!("incomplete-gamma rate must be positive, got {rate}")));
                }
            }
            if t.lo < 1.0 && t.weighted_integral(-2.0, t.lo, t.hi.min(1.0)).is_none() {
                return Err(Error::NonIntegrable(format!("∫ r² M(dr) diverges at the origin for {:?}", t.shape)));
            }
            if t.hi > 1.0 && t.weighted_integral(0.0, t.lo.max(1.0), t.hi).is_none() {
                return Err(Error::NonIntegrable(format!("tail mass diverges for {:?}", t.shape)));
            }
        }
        Ok(())
    }

    /// Sup of `κ` such that `∫_{r>1} r^κ M(dr) < ∞`.
    pub fn tail_index(&self) -> f64 {
        self.terms
            .iter()
            .filter(|t| t.hi.is_infinite())
            .filter_map(|t| match t.shape {
                Shape::Power { p, .. } => Some(-1.0 - p),
                Shape::IncGamma { .. } => None,
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Breakpoints of the radial description: support edges and atom radii.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut pts: Vec<f64> = self.atoms.iter().map(|a| a.radius).collect();
        for t in &self.terms {
            if t.lo > 0.0 {
                pts.push(t.lo);
            }
            if t.hi.is_finite() {
                pts.push(t.hi);
            }
        }
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }
}

fn invalid_radius(r: f64) -> Error {
    Error::InvalidParameter(format!("atom radius must be positive and finite, got {r}"))
}

/// A Lévy measure on `ℝ^dim` in polar form.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialLevyMeasure {
    dim: usize,
    rays: Vec<Ray>,
}

impl RadialLevyMeasure {
    pub fn zero(dim: usize) -> Self {
        RadialLevyMeasure { dim, rays: Vec::new() }
    }

    /// Build and validate: unit directions, positive radii, integrability.
    pub fn new(dim: usize, rays: Vec<Ray>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("dimension must be positive".into()));
        }
        let mut m = RadialLevyMeasure { dim, rays: Vec::new() };
        for mut ray in rays {
            if ray.direction.len() != dim {
                return Err(Error::DimMismatch { expected: dim, got: ray.direction.len() });
            }
            let norm = ray.direction.iter().map(|v| v * v).sum::<f64>().sqrt();
            if (norm - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidParameter(format!("ray direction has norm {norm}, expected 1")));
            }
            ray.normalize();
            ray.check_integrable()?;
            m.push_ray(ray);
        }
        Ok(m)
    }

    /// Construct without validation; for internal results of closed maps.
    pub(crate) fn from_rays_unchecked(dim: usize, rays: Vec<Ray>) -> Self {
        let mut m = RadialLevyMeasure { dim, rays: Vec::new() };
        for ray in rays {
            m.push_ray(ray);
        }
        m
    }

    fn push_ray(&mut self, ray: Ray) {
        if ray.is_empty() {
            return;
        }
        if let Some(existing) = self.rays.iter_mut().find(|r| same_direction(&r.direction, &ray.direction)) {
            existing.atoms.extend(ray.atoms);
            existing.terms.extend(ray.terms);
            existing.normalize();
            return;
        }
        self.rays.push(ray);
        self.rays.retain(|r| !r.is_empty());
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rays(&self) -> &[Ray] {
        &self.rays
    }

    pub fn is_zero(&self) -> bool {
        self.rays.iter().all(|r| r.is_empty())
    }

    pub fn merged(&self, other: &RadialLevyMeasure) -> Result<RadialLevyMeasure> {
        if self.dim != other.dim {
            return Err(Error::DimMismatch { expected: self.dim, got: other.dim });
        }
        let mut out = self.clone();
        for r in &other.rays {
            out.push_ray(r.clone());
        }
        out.rays.retain(|r| !r.is_empty());
        Ok(out)
    }

    pub fn scaled(&self, c: f64) -> RadialLevyMeasure {
        RadialLevyMeasure { dim: self.dim, rays: self.rays.iter().map(|r| r.scaled(c)).collect() }
    }

    /// Image measure under `x ↦ u·x`, `u ≠ 0`.
    pub fn dilated(&self, u: f64) -> RadialLevyMeasure {
        let c = u.abs();
        let rays = self
            .rays
            .iter()
            .map(|r| {
                let mut d = r.radially_dilated(c);
                if u < 0.0 {
                    d.direction.iter_mut().for_each(|v| *v = -*v + 0.0);
                }
                d
            })
            .collect();
        RadialLevyMeasure::from_rays_unchecked(self.dim, rays)
    }

    /// Apply [`Ray::tail_weighted`] on every ray and scale by `factor`.
    pub fn tail_weighted(&self, gamma: f64, factor: f64) -> Result<RadialLevyMeasure> {
        let rays = self
            .rays
            .iter()
            .map(|r| r.tail_weighted(gamma).map(|t| t.scaled(factor)))
            .collect::<Result<Vec<_>>>()?;
        Ok(RadialLevyMeasure::from_rays_unchecked(self.dim, rays))
    }

    /// `∫_{‖x‖ ∈ (a,b]} x ‖x‖^{-γ-1} M(dx)` as a vector.
    pub fn directed_integral(&self, gamma: f64, a: f64, b: f64) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.dim];
        for r in &self.rays {
            let w = r.weighted_integral(gamma, a, b).ok_or_else(|| {
                Error::NonIntegrable(format!("∫ x‖x‖^(-{gamma}-1) M(dx) diverges on ({a}, {b}]"))
            })?;
            for (o, d) in out.iter_mut().zip(&r.direction) {
                *o += w * d;
            }
        }
        Ok(out)
    }

    /// `∫_{‖x‖>1} log‖x‖ M(dx)`; `+∞` when the tail makes it diverge.
    pub fn log_moment(&self) -> f64 {
        self.rays.iter().map(|r| r.log_moment()).sum()
    }

    pub fn tail_index(&self) -> f64 {
        self.rays.iter().map(|r| r.tail_index()).fold(f64::INFINITY, f64::min)
    }
}

fn same_direction(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt() < DIRECTION_TOL
}

/// `∫_0^1 M(t^{-1}A) t^{-1} dt`: the Lévy measure map of the `I` transform.
pub fn tilde_measure(m: &RadialLevyMeasure) -> Result<RadialLevyMeasure> {
    m.tail_weighted(0.0, 1.0)
}

/// `β ∫_0^1 N(s^{-1}A) s^{β-1} ds`: the Lévy measure map of `J^β`.
pub fn beta_measure(n: &RadialLevyMeasure, beta: f64) -> Result<RadialLevyMeasure> {
    n.tail_weighted(beta, beta)
}
