//! Parsing of command-line values.
//!
//! Group elements: 12 numbers `x,y,z,R11,…,R33` (row-major rotation) or
//! `exp:c1,…,c6`. Cosets: `x,y,z,n1,n2,n3`. Numbers may be separated by
//! commas and/or whitespace.

use std::fs;
use std::path::Path;

use se3_fiber::sections::CosetPoint;
use se3_fiber::se3::exp_se3;
use se3_fiber::shooting::ShootingConfig;
use se3_fiber::{AlgebraVector, MetricParams, RigidMotion};
use serde::de::DeserializeOwned;

use crate::CliError;

pub fn numbers(s: &str) -> Result<Vec<f64>, CliError> {
    s.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| CliError::Parse(format!("not a finite number: {t:?}")))
        })
        .collect()
}

fn exactly<const N: usize>(s: &str, what: &str) -> Result<[f64; N], CliError> {
    let v = numbers(s)?;
    v.try_into()
        .map_err(|v: Vec<f64>| CliError::Parse(format!("{what} needs {N} numbers, got {}", v.len())))
}

pub fn algebra(s: &str) -> Result<AlgebraVector, CliError> {
    Ok(AlgebraVector::new(exactly::<6>(s, "an algebra vector")?))
}

pub fn group_element(s: &str) -> Result<RigidMotion, CliError> {
    if let Some(rest) = s.trim().strip_prefix("exp:") {
        return Ok(exp_se3(&algebra(rest)?));
    }
    let v = exactly::<12>(s, "a rigid motion")?;
    Ok(RigidMotion::from_slice(&v)?)
}

pub fn coset(s: &str) -> Result<CosetPoint, CliError> {
    Ok(CosetPoint::from_slice(&exactly::<6>(s, "a coset")?)?)
}

/// Inline JSON (anything starting with `{` or `[`) or a path to a JSON file.
fn json_or_file<T: DeserializeOwned>(s: &str, what: &str) -> Result<T, CliError> {
    let t = s.trim_start();
    let text = if t.starts_with('{') || t.starts_with('[') {
        s.to_string()
    } else {
        fs::read_to_string(Path::new(s)).map_err(|e| CliError::Parse(format!("cannot read {what} file {s:?}: {e}")))?
    };
    serde_json::from_str(&text).map_err(|e| CliError::Parse(format!("invalid {what}: {e}")))
}

#[derive(serde::Deserialize)]
#[serde(untagged)]
enum MetricInput {
    Diagonal([f64; 6]),
    Full(MetricParams),
}

/// A metric object (`{"g11":…,"g33":…,"g44":…,"g66":…,"mode":"R"}`) or a
/// diagonal `[g11,g22,g33,g44,g55,g66]`.
pub fn metric(s: &str) -> Result<MetricParams, CliError> {
    match json_or_file::<MetricInput>(s, "metric")? {
        MetricInput::Diagonal(d) => Ok(MetricParams::from_diagonal(d)?),
        MetricInput::Full(m) => Ok(m),
    }
}

pub fn shooting(s: &str) -> Result<ShootingConfig, CliError> {
    let cfg: ShootingConfig = json_or_file(s, "shooting config")?;
    cfg.validate()?;
    Ok(cfg)
}
