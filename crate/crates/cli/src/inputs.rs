//! Command-line inputs: distribution descriptors, mapping descriptors and ECF targets.
//!
//! Every JSON argument may be a file path or inline JSON (starting with `{`).

use anyhow::{anyhow, bail, Context, Result};
use levymap::descriptor::Bound;
use levymap::exponent::CharFn;
use levymap::integral_map::{map_exponent, u_law, v_law, z_law, DEFAULT_TAIL_TOL};
use levymap::{exponent_of, i_transform, jbeta_transform, Descriptor, IntegralMapSpec, Interval, Kernel, LevyTriple, TimeChange};
use serde::Deserialize;
use serde_json::{json, Value};
use std::path::Path;

/// A JSON argument with the exact bytes it was read from, for hashing.
#[derive(Debug, Clone)]
pub struct JsonInput {
    pub value: Value,
    pub bytes: Vec<u8>,
}

pub fn load_json(arg: &str) -> Result<JsonInput> {
    let bytes = if arg.trim_start().starts_with('{') {
        arg.as_bytes().to_vec()
    } else {
        std::fs::read(Path::new(arg)).with_context(|| format!("reading {arg}"))?
    };
    let value = serde_json::from_slice(&bytes).with_context(|| format!("malformed JSON in {arg}"))?;
    Ok(JsonInput { value, bytes })
}

/// Named shorthands accepted wherever a distribution is expected.
fn preset(name: &str) -> Option<Value> {
    match name {
        "gaussian" => Some(json!({"family": "gaussian", "mean": 0.0, "variance": 1.0})),
        "gamma" => Some(json!({"family": "gamma", "shape": 1.0, "rate": 1.0})),
        _ => None,
    }
}

pub fn load_dist(arg: &str) -> Result<(LevyTriple, JsonInput)> {
    let input = match preset(arg) {
        Some(v) if !Path::new(arg).exists() => JsonInput { bytes: serde_json::to_vec(&v)?, value: v },
        _ => load_json(arg)?,
    };
    let triple = Descriptor::from_value(&input.value)?.triple()?;
    Ok((triple, input))
}

/// Which mapping to apply.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "map", rename_all = "snake_case")]
pub enum MapDescriptor {
    Jbeta { beta: f64 },
    #[serde(rename = "i", alias = "selfdecomposable")]
    Selfdecomposable,
    MaflpV { alpha: f64, t: f64 },
    MaflpU { alpha: f64, t: f64 },
    Integral { kernel: Kernel, time_change: TimeChange, interval: (f64, Bound) },
}

impl MapDescriptor {
    pub fn from_value(v: &Value) -> Result<MapDescriptor> {
        serde_json::from_value(v.clone()).map_err(|e| anyhow!("malformed map descriptor: {e}"))
    }

    pub fn spec(&self) -> Result<IntegralMapSpec> {
        Ok(match self {
            MapDescriptor::Jbeta { beta } => IntegralMapSpec::jbeta(*beta)?,
            MapDescriptor::Selfdecomposable => IntegralMapSpec::selfdecomposable(),
            MapDescriptor::MaflpV { alpha, t } => IntegralMapSpec::maflp_v(*alpha, *t)?,
            MapDescriptor::MaflpU { alpha, t } => IntegralMapSpec::maflp_u(*alpha, *t)?,
            MapDescriptor::Integral { kernel, time_change, interval } => IntegralMapSpec::new(
                kernel.clone(),
                time_change.clone(),
                Interval::new(interval.0, interval.1.value())?,
            )?,
        })
    }

    /// The mapped triple when a closed form exists.
    pub fn closed_form(&self, nu: &LevyTriple) -> Option<Result<LevyTriple>> {
        let r = match self {
            MapDescriptor::Jbeta { beta } => jbeta_transform(nu, *beta),
            MapDescriptor::Selfdecomposable => i_transform(nu),
            MapDescriptor::MaflpV { alpha, t } => v_law(nu, *alpha, *t),
            _ => return None,
        };
        Some(r.map_err(Into::into))
    }

    /// Exponent of the mapped law: closed form when available, quadrature otherwise.
    pub fn exponent(&self, nu: &LevyTriple) -> Result<CharFn> {
        if let MapDescriptor::MaflpU { alpha, t } = self {
            return Ok(u_law(nu, *alpha, *t, DEFAULT_TAIL_TOL)?);
        }
        match self.closed_form(nu) {
            Some(t) => Ok(exponent_of(&t?)?),
            None => Ok(map_exponent(&self.spec()?, &exponent_of(nu)?)?),
        }
    }
}

/// The law a sample batch is checked against.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
enum LawTarget {
    MaflpZ { dist: Value, alpha: f64, t: f64 },
    MaflpV { dist: Value, alpha: f64, t: f64 },
    MaflpU { dist: Value, alpha: f64, t: f64 },
    Mapped { dist: Value, map: Value },
    Increment { dist: Value, dt: f64 },
}

fn dist_of(v: &Value) -> Result<LevyTriple> {
    match v {
        Value::String(name) => {
            let p = preset(name).ok_or_else(|| anyhow!("unknown distribution shorthand {name:?}"))?;
            Ok(Descriptor::from_value(&p)?.triple()?)
        }
        other => Ok(Descriptor::from_value(other)?.triple()?),
    }
}

/// A target is a plain distribution descriptor or a `{"law": ...}` object naming a derived law.
pub fn target_exponent(v: &Value) -> Result<CharFn> {
    if v.get("law").is_none() {
        return Ok(exponent_of(&dist_of(v)?)?);
    }
    let tail_tol = DEFAULT_TAIL_TOL;
    let target: LawTarget = serde_json::from_value(v.clone()).map_err(|e| anyhow!("malformed target: {e}"))?;
    Ok(match target {
        LawTarget::MaflpZ { dist, alpha, t } => z_law(&dist_of(&dist)?, alpha, t, tail_tol)?,
        LawTarget::MaflpV { dist, alpha, t } => exponent_of(&v_law(&dist_of(&dist)?, alpha, t)?)?,
        LawTarget::MaflpU { dist, alpha, t } => u_law(&dist_of(&dist)?, alpha, t, tail_tol)?,
        LawTarget::Mapped { dist, map } => MapDescriptor::from_value(&map)?.exponent(&dist_of(&dist)?)?,
        LawTarget::Increment { dist, dt } => {
            if !(dt > 0.0) {
                bail!("dt must be positive");
            }
            exponent_of(&dist_of(&dist)?.conv_power(dt)?)?
        }
    })
}
