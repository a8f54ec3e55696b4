//! TOML run manifests.
//!
//! Every dimensional key carries its unit in the name (`b0_mT`, `tc_MHz`,
//! `esr_us`). A key whose stem is known but whose unit differs is reported
//! as a unit mismatch rather than silently converted.
//!
//! ```toml
//! experiment = "psb_esr"
//! b0_mT = 1000.0
//!
//! [timing]
//! esr_us = 80.0
//!
//! [grid.b0_mT]        # sweeps only
//! min = 1.0
//! max = 1000.0
//! points = 20
//! spacing = "linear"
//! ```

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::error::{Error, Result};
use crate::experiments::{
    AxisSpec, ExperimentId, ExperimentSpec, FunnelMode, NuclearInit, Spacing,
};
use crate::spin::Direction;

/// Where and how outputs are written.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutputSpec {
    pub dir: Option<PathBuf>,
    /// File stem for the CSV and sidecar; defaults to the experiment id.
    pub prefix: String,
}

/// A parsed, validated run description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub spec: ExperimentSpec,
    pub output: OutputSpec,
    pub threads: Option<usize>,
    /// Reserved; the dynamics are deterministic.
    pub seed: u64,
    /// Keys that were not given and took their default value.
    #[serde(default)]
    pub defaults_applied: Vec<String>,
}

const UNIT_TOKENS: &[&str] = &[
    "T",
    "mT",
    "uT",
    "G",
    "GHz",
    "MHz",
    "kHz",
    "Hz",
    "s",
    "ms",
    "us",
    "ns",
    "ps",
    "rad",
    "deg",
    "MHz_per_T",
    "GHz_per_T",
    "Hz_per_T",
    "pA",
    "nA",
];

/// (stem, expected key) for every dimensional top-level parameter.
const SYSTEM_KEYS: &[(&str, &str)] = &[
    ("b0", "b0_mT"),
    ("b_ac", "b_ac_mT"),
    ("tc", "tc_MHz"),
    ("delta", "delta_MHz"),
    ("a_left", "a_left_MHz"),
    ("a_right", "a_right_MHz"),
    ("gamma_l", "gamma_l_MHz"),
    ("gamma_r", "gamma_r_MHz"),
    ("gamma_e", "gamma_e_MHz_per_T"),
    ("gamma_n", "gamma_n_MHz_per_T"),
    ("drive", "drive_MHz"),
    ("theta", "theta_rad"),
];

const PLAIN_KEYS: &[&str] = &[
    "experiment",
    "direction",
    "nuclear_init",
    "funnel_mode",
    "seed",
    "threads",
    "timing",
    "grid",
    "output",
];

const TIMING_KEYS: &[(&str, &str)] = &[
    ("transport", "transport_us"),
    ("esr", "esr_us"),
    ("sample_step", "sample_step_ns"),
    ("funnel_window", "funnel_window_us"),
];

fn check_key(key: &str, dimensional: &[(&str, &str)], plain: &[&str], section: &str) -> Result<()> {
    if plain.contains(&key) || dimensional.iter().any(|(_, k)| *k == key) {
        return Ok(());
    }
    // longest stem first so that "delta_a_MHz" is not read as "delta" + "a_MHz"
    let mut stems: Vec<&(&str, &str)> = dimensional.iter().collect();
    stems.sort_by_key(|(s, _)| std::cmp::Reverse(s.len()));
    for (stem, expected) in stems {
        let unit = if key == *stem {
            Some("")
        } else {
            key.strip_prefix(stem).and_then(|r| r.strip_prefix('_'))
        };
        if let Some(unit) = unit {
            if unit.is_empty() || UNIT_TOKENS.contains(&unit) {
                return Err(Error::UnitMismatch {
                    found: key.to_string(),
                    expected: expected.to_string(),
                });
            }
        }
    }
    Err(Error::Manifest(format!("unknown key '{key}'{section}")))
}

fn number(v: &Value, key: &str) -> Result<f64> {
    match v {
        Value::Float(f) => Ok(*f),
        Value::Integer(i) => Ok(*i as f64),
        _ => Err(Error::Manifest(format!("'{key}' must be a number"))),
    }
}

fn numbers(v: &Value, key: &str) -> Result<Vec<f64>> {
    match v {
        Value::Array(items) => items.iter().map(|x| number(x, key)).collect(),
        other => Ok(vec![number(other, key)?]),
    }
}

fn string<'a>(v: &'a Value, key: &str) -> Result<&'a str> {
    v.as_str()
        .ok_or_else(|| Error::Manifest(format!("'{key}' must be a string")))
}

fn unsigned(v: &Value, key: &str) -> Result<u64> {
    match v {
        Value::Integer(i) if *i >= 0 => Ok(*i as u64),
        _ => Err(Error::Manifest(format!(
            "'{key}' must be a non-negative integer"
        ))),
    }
}

fn table<'a>(v: &'a Value, key: &str) -> Result<&'a Table> {
    v.as_table()
        .ok_or_else(|| Error::Manifest(format!("'{key}' must be a table")))
}

fn enum_value<T: for<'de> Deserialize<'de>>(v: &Value, key: &str) -> Result<T> {
    let s = string(v, key)?;
    serde_json::from_value(serde_json::Value::String(s.to_string()))
        .map_err(|_| Error::Manifest(format!("invalid value '{s}' for '{key}'")))
}

/// Grid axis keys (with units) as (x, y) for each sweep experiment.
pub fn grid_keys(id: ExperimentId) -> Option<(&'static str, &'static str)> {
    match id {
        ExperimentId::SpinFunnel => Some(("delta_MHz", "b0_mT")),
        ExperimentId::StarkSweep => Some(("b0_mT", "delta_a_MHz")),
        _ => None,
    }
}

fn parse_axis(t: &Table, name: &str, default: &AxisSpec) -> Result<AxisSpec> {
    let mut axis = default.clone();
    for (k, v) in t {
        match k.as_str() {
            "min" => axis.min = number(v, k)?,
            "max" => axis.max = number(v, k)?,
            "points" => axis.points = unsigned(v, k)? as usize,
            "spacing" => axis.spacing = enum_value::<Spacing>(v, k)?,
            other => {
                return Err(Error::Manifest(format!(
                    "unknown key '{other}' in [grid.{name}]"
                )))
            }
        }
    }
    Ok(axis)
}

/// Parses and validates a manifest; unspecified parameters take the
/// experiment's defaults and are listed in `defaults_applied`.
pub fn parse_manifest(text: &str) -> Result<RunManifest> {
    let root: Table = text
        .parse()
        .map_err(|e: toml::de::Error| Error::Manifest(e.to_string()))?;
    for key in root.keys() {
        check_key(key, SYSTEM_KEYS, PLAIN_KEYS, "")?;
    }
    let id: ExperimentId = match root.get("experiment") {
        Some(v) => string(v, "experiment")?.parse()?,
        None => return Err(Error::Manifest("missing required key 'experiment'".into())),
    };
    let mut spec = ExperimentSpec::defaults(id);
    let mut given: Vec<&str> = Vec::new();
    let c = &mut spec.config;
    for (key, v) in &root {
        given.push(key);
        match key.as_str() {
            "b0_mT" => c.b0 = number(v, key)? * 1e-3,
            "b_ac_mT" => c.b_ac_esr = number(v, key)? * 1e-3,
            "tc_MHz" => c.tc = number(v, key)?,
            "delta_MHz" => c.delta = number(v, key)?,
            "a_left_MHz" => c.a_left = numbers(v, key)?,
            "a_right_MHz" => c.a_right = numbers(v, key)?,
            "gamma_l_MHz" => c.gamma_l = number(v, key)?,
            "gamma_r_MHz" => c.gamma_r = number(v, key)?,
            "gamma_e_MHz_per_T" => c.gamma_e = number(v, key)?,
            "gamma_n_MHz_per_T" => c.gamma_n = number(v, key)?,
            "direction" => c.direction = enum_value::<Direction>(v, key)?,
            _ => {}
        }
    }
    if let Some(v) = root.get("drive_MHz") {
        spec.drive_frequency = Some(number(v, "drive_MHz")?);
    }
    if let Some(v) = root.get("theta_rad") {
        spec.theta = number(v, "theta_rad")?;
    }
    if let Some(v) = root.get("nuclear_init") {
        spec.nuclear_init = enum_value::<NuclearInit>(v, "nuclear_init")?;
    }
    if let Some(v) = root.get("funnel_mode") {
        spec.funnel_mode = enum_value::<FunnelMode>(v, "funnel_mode")?;
    }

    let mut timing_given: Vec<String> = Vec::new();
    if let Some(v) = root.get("timing") {
        let t = table(v, "timing")?;
        for (key, v) in t {
            check_key(key, TIMING_KEYS, &["readout_fraction"], " in [timing]")?;
            timing_given.push(key.clone());
            let x = number(v, key)?;
            match key.as_str() {
                "transport_us" => spec.timing.transport = x,
                "esr_us" => spec.timing.esr = x,
                "sample_step_ns" => spec.timing.sample_step = x * 1e-3,
                "funnel_window_us" => spec.timing.funnel_window = x,
                "readout_fraction" => spec.timing.readout_fraction = x,
                _ => unreachable!("checked above"),
            }
        }
    }

    let mut axes_given: Vec<String> = Vec::new();
    if let Some(v) = root.get("grid") {
        let g = table(v, "grid")?;
        let (xk, yk) = grid_keys(id).ok_or_else(|| {
            Error::Manifest(format!("experiment '{id}' does not take a [grid] section"))
        })?;
        let dims = [
            ("delta", "delta_MHz"),
            ("b0", "b0_mT"),
            ("delta_a", "delta_a_MHz"),
        ];
        for (key, v) in g {
            check_key(key, &dims, &[], " in [grid]")?;
            let t = table(v, key)?;
            if key == xk {
                spec.x_axis = Some(parse_axis(t, key, spec.x_axis.as_ref().expect("sweep"))?);
            } else if key == yk {
                spec.y_axis = Some(parse_axis(t, key, spec.y_axis.as_ref().expect("sweep"))?);
            } else {
                return Err(Error::Manifest(format!(
                    "experiment '{id}' sweeps [grid.{xk}] and [grid.{yk}], not [grid.{key}]"
                )));
            }
            axes_given.push(format!("grid.{key}"));
        }
    }

    let mut output = OutputSpec {
        dir: None,
        prefix: id.as_str().to_string(),
    };
    if let Some(v) = root.get("output") {
        for (key, v) in table(v, "output")? {
            match key.as_str() {
                "dir" => output.dir = Some(PathBuf::from(string(v, key)?)),
                "prefix" => output.prefix = string(v, key)?.to_string(),
                other => {
                    return Err(Error::Manifest(format!(
                        "unknown key '{other}' in [output]"
                    )))
                }
            }
        }
    }
    let threads = match root.get("threads") {
        Some(v) => match unsigned(v, "threads")? {
            0 => return Err(Error::invalid("threads", "must be at least 1")),
            n => Some(n as usize),
        },
        None => None,
    };
    let seed = match root.get("seed") {
        Some(v) => unsigned(v, "seed")?,
        None => 0,
    };

    spec.validate().map_err(|e| match e {
        Error::InvalidParameter { field, reason } => Error::InvalidParameter {
            field: manifest_field(&field),
            reason,
        },
        other => other,
    })?;

    let mut defaults_applied: Vec<String> = SYSTEM_KEYS
        .iter()
        .map(|(_, k)| *k)
        .chain(["direction"])
        .filter(|k| !given.contains(k))
        .filter(|k| !matches!(*k, "drive_MHz" | "theta_rad") || relevant(id, k))
        .map(String::from)
        .collect();
    for (_, k) in TIMING_KEYS {
        if !timing_given.iter().any(|g| g == k) {
            defaults_applied.push(format!("timing.{k}"));
        }
    }
    if let Some((xk, yk)) = grid_keys(id) {
        for k in [xk, yk] {
            let name = format!("grid.{k}");
            if !axes_given.contains(&name) {
                defaults_applied.push(name);
            }
        }
    }
    Ok(RunManifest {
        spec,
        output,
        threads,
        seed,
        defaults_applied,
    })
}

fn relevant(id: ExperimentId, key: &str) -> bool {
    match key {
        "theta_rad" => id == ExperimentId::Readout,
        _ => true,
    }
}

/// Maps an internal field name to its manifest key for diagnostics.
fn manifest_field(field: &str) -> String {
    let mapped = match field {
        "b0" => "b0_mT",
        "b_ac_esr" => "b_ac_mT",
        "tc" => "tc_MHz",
        "delta" => "delta_MHz",
        "a_left" => "a_left_MHz",
        "a_right" => "a_right_MHz",
        "gamma_l" => "gamma_l_MHz",
        "gamma_r" => "gamma_r_MHz",
        "gamma_e" => "gamma_e_MHz_per_T",
        "gamma_n" => "gamma_n_MHz_per_T",
        "transport" => "timing.transport_us",
        "esr" => "timing.esr_us",
        "sample_step" => "timing.sample_step_ns",
        "funnel_window" => "timing.funnel_window_us",
        "readout_fraction" => "timing.readout_fraction",
        "theta" => "theta_rad",
        "drive_frequency" => "drive_MHz",
        other => other,
    };
    mapped.to_string()
}

fn float(x: f64) -> Value {
    Value::Float(x)
}

fn axis_table(a: &AxisSpec) -> Value {
    let mut t = Table::new();
    t.insert("min".into(), float(a.min));
    t.insert("max".into(), float(a.max));
    t.insert("points".into(), Value::Integer(a.points as i64));
    t.insert(
        "spacing".into(),
        Value::String(
            match a.spacing {
                Spacing::Linear => "linear",
                Spacing::Log => "log",
            }
            .into(),
        ),
    );
    Value::Table(t)
}

fn enum_string<T: Serialize>(v: &T) -> Value {
    Value::String(
        serde_json::to_value(v)
            .ok()
            .and_then(|j| j.as_str().map(String::from))
            .unwrap_or_default(),
    )
}

/// Writes every resolved parameter explicitly, so that parsing the result
/// reproduces `manifest` without relying on defaults.
pub fn manifest_to_toml(manifest: &RunManifest) -> String {
    let s = &manifest.spec;
    let c = &s.config;
    let mut root = Table::new();
    root.insert("experiment".into(), Value::String(s.id.as_str().into()));
    root.insert("b0_mT".into(), float(c.b0 * 1e3));
    root.insert("b_ac_mT".into(), float(c.b_ac_esr * 1e3));
    root.insert("tc_MHz".into(), float(c.tc));
    root.insert("delta_MHz".into(), float(c.delta));
    root.insert(
        "a_left_MHz".into(),
        Value::Array(c.a_left.iter().map(|&x| float(x)).collect()),
    );
    root.insert(
        "a_right_MHz".into(),
        Value::Array(c.a_right.iter().map(|&x| float(x)).collect()),
    );
    root.insert("gamma_l_MHz".into(), float(c.gamma_l));
    root.insert("gamma_r_MHz".into(), float(c.gamma_r));
    root.insert("gamma_e_MHz_per_T".into(), float(c.gamma_e));
    root.insert("gamma_n_MHz_per_T".into(), float(c.gamma_n));
    root.insert("direction".into(), enum_string(&c.direction));
    if let Some(f) = s.drive_frequency {
        root.insert("drive_MHz".into(), float(f));
    }
    root.insert("theta_rad".into(), float(s.theta));
    root.insert("nuclear_init".into(), enum_string(&s.nuclear_init));
    root.insert("funnel_mode".into(), enum_string(&s.funnel_mode));
    root.insert("seed".into(), Value::Integer(manifest.seed as i64));
    if let Some(n) = manifest.threads {
        root.insert("threads".into(), Value::Integer(n as i64));
    }
    let mut timing = Table::new();
    timing.insert("transport_us".into(), float(s.timing.transport));
    timing.insert("esr_us".into(), float(s.timing.esr));
    timing.insert("sample_step_ns".into(), float(s.timing.sample_step * 1e3));
    timing.insert("readout_fraction".into(), float(s.timing.readout_fraction));
    timing.insert("funnel_window_us".into(), float(s.timing.funnel_window));
    root.insert("timing".into(), Value::Table(timing));
    if let (Some((xk, yk)), Some(x), Some(y)) = (grid_keys(s.id), &s.x_axis, &s.y_axis) {
        let mut grid = Table::new();
        grid.insert(xk.into(), axis_table(x));
        grid.insert(yk.into(), axis_table(y));
        root.insert("grid".into(), Value::Table(grid));
    }
    let mut out = Table::new();
    if let Some(d) = &manifest.output.dir {
        out.insert("dir".into(), Value::String(d.display().to_string()));
    }
    out.insert(
        "prefix".into(),
        Value::String(manifest.output.prefix.clone()),
    );
    root.insert("output".into(), Value::Table(out));
    toml::to_string(&root).expect("a TOML table always serializes")
}
