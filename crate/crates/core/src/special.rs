//! Gamma-family special functions on the real line.
//!
//! The upper incomplete gamma function is needed for every real order, including
//! zero and negative orders, because the radial transforms of exponential Lévy
//! densities produce terms `x^p Γ(s, λx)` with `s ≤ 0`.

use std::f64::consts::PI;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const EPS: f64 = 1e-16;
const MAX_ITER: usize = 500;

pub fn gamma(x: f64) -> f64 {
    statrs::function::gamma::gamma(x)
}

pub fn ln_gamma(x: f64) -> f64 {
    statrs::function::gamma::ln_gamma(x)
}

/// Snap orders that are integers up to rounding noise.
fn as_integer(a: f64) -> Option<i64> {
    let n = a.round();
    if (a - n).abs() < 1e-10 {
        Some(n as i64)
    } else {
        None
    }
}

/// Exponential integral `E1(z) = Γ(0, z)` for `z > 0`.
pub fn exp_int_e1(z: f64) -> f64 {
    if z <= 0.0 {
        return f64::INFINITY;
    }
    if z <= 1.5 {
        let mut sum = 0.0;
        let mut term = 1.0;
        for k in 1..MAX_ITER {
            term *= -z / k as f64;
            let add = term / k as f64;
            sum += add;
            if add.abs() < EPS * sum.abs().max(1e-300) {
                break;
            }
        }
        -EULER_GAMMA - z.ln() - sum
    } else {
        upper_gamma_cf(0.0, z)
    }
}

/// Lentz continued fraction for `Γ(a, z)`; converges for any real `a` once `z > max(a+1, 1.5)`.
fn upper_gamma_cf(a: f64, z: f64) -> f64 {
    let tiny = 1e-300;
    let mut b = z + 1.0 - a;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < tiny {
            d = tiny;
        }
        c = b + an / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    (a * z.ln() - z).exp() * h
}

/// Series for the lower incomplete gamma `γ(a, z)`, `a > 0`.
fn lower_gamma_series(a: f64, z: f64) -> f64 {
    if z == 0.0 {
        return 0.0;
    }
    let mut ap = a;
    let mut del = 1.0 / a;
    let mut sum = del;
    for _ in 0..MAX_ITER {
        ap += 1.0;
        del *= z / ap;
        sum += del;
        if del.abs() < sum.abs() * EPS {
            break;
        }
    }
    sum * (a * z.ln() - z).exp()
}

/// Lower incomplete gamma `γ(a, z) = ∫_0^z t^{a-1} e^{-t} dt` for `a > 0`, `z ≥ 0`.
pub fn lower_gamma(a: f64, z: f64) -> f64 {
    debug_assert!(a > 0.0);
    if z <= 0.0 {
        return 0.0;
    }
    if z < a + 1.0 {
        lower_gamma_series(a, z)
    } else {
        gamma(a) - upper_gamma_cf(a, z)
    }
}

/// Upper incomplete gamma `Γ(a, z) = ∫_z^∞ t^{a-1} e^{-t} dt` for any real `a`, `z ≥ 0`.
///
/// Returns `+∞` at `z = 0` when `a ≤ 0`.
pub fn upper_gamma(a: f64, z: f64) -> f64 {
    if z <= 0.0 {
        return if a > 0.0 { gamma(a) } else { f64::INFINITY };
    }
    if z > 1.5 && z > a + 1.0 {
        return upper_gamma_cf(a, z);
    }
    if a > 0.0 {
        return gamma(a) - lower_gamma_series(a, z);
    }
    match as_integer(a) {
        Some(n) => {
            // downward recurrence from Γ(0, z) = E1(z)
            let mut g = exp_int_e1(z);
            let mut order = 0i64;
            let emz = (-z).exp();
            while order > n {
                let next = (order - 1) as f64;
                g = (g - z.powf(next) * emz) / next;
                order -= 1;
            }
            g
        }
        None => {
            // Γ(a, z) = Γ(a) - Σ (-1)^k z^{a+k} / (k! (a+k))
            let mut sum = 0.0;
            let mut fact = 1.0;
            let za = z.powf(a);
            let mut zk = 1.0;
            for k in 0..MAX_ITER {
                if k > 0 {
                    fact *= k as f64;
                    zk *= -z;
                }
                let add = za * zk / (fact * (a + k as f64));
                sum += add;
                if k > 2 && add.abs() < EPS * sum.abs().max(1e-300) {
                    break;
                }
            }
            gamma(a) - sum
        }
    }
}

/// `Γ(a)` for possibly negative non-integer `a`; `±∞` at the poles.
pub fn gamma_any(a: f64) -> f64 {
    if a <= 0.0 && as_integer(a).is_some() {
        return f64::INFINITY;
    }
    if a < 0.5 {
        PI / ((PI * a).sin() * gamma(1.0 - a))
    } else {
        gamma(a)
    }
}
