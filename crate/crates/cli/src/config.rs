//! Run configuration: `key = value` text or JSON, overlaid with command-line
//! overrides, then validated into a [`RunConfig`].

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use gnq::entropy::{ShotMode, DEFAULT_SHOTS};
use gnq::ldoa::AnsatzKind;
use gnq::model::{self, LatticeParams};
use gnq::trotter::{LdoaMode, TrotterOrder, TrotterPlan};
use serde::{Deserialize, Deserializer, Serialize};
use serde_json::{Map, Value};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(format!("unknown format `{s}` (expected csv or json)")),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Csv => "csv",
            Format::Json => "json",
        })
    }
}

/// Which state the entropy command measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StateSource {
    Exact,
    Trotter,
}

impl FromStr for StateSource {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "exact" => Ok(StateSource::Exact),
            "trotter" => Ok(StateSource::Trotter),
            _ => Err(format!("unknown state source `{s}` (expected exact or trotter)")),
        }
    }
}

fn parsed<'de, D, T>(d: D) -> Result<T, D::Error>
where
    D: Deserializer<'de>,
    T: FromStr,
    T::Err: fmt::Display,
{
    let s = String::deserialize(d)?;
    s.parse().map_err(serde::de::Error::custom)
}

fn parsed_opt<'de, D, T>(d: D) -> Result<Option<T>, D::Error>
where
    D: Deserializer<'de>,
    T: FromStr,
    T::Err: fmt::Display,
{
    match Option::<String>::deserialize(d)? {
        None => Ok(None),
        Some(s) => s.parse().map(Some).map_err(serde::de::Error::custom),
    }
}

/// Every knob of every subcommand. Unused keys are harmless; unknown keys
/// are rejected so typos do not silently fall back to defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Staggered sites.
    #[serde(rename = "L")]
    pub l: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub a: f64,
    pub g: f64,
    pub t: f64,
    /// Target step size; ignored when `r` is given.
    pub dt: f64,
    pub r: Option<usize>,
    #[serde(deserialize_with = "parsed")]
    pub order: TrotterOrder,
    /// `None` lets `stats` sweep all modes; elsewhere it means no LDOA.
    #[serde(deserialize_with = "parsed_opt")]
    pub ldoa: Option<LdoaMode>,
    pub r_max: usize,

    #[serde(deserialize_with = "parsed")]
    pub ansatz: AnsatzKind,
    pub theta_g: f64,
    pub sweep: bool,
    pub sweep_min: f64,
    pub sweep_max: f64,
    pub sweep_points: usize,
    /// JSON ansatz template file.
    pub template: Option<String>,
    /// Circuit text file holding a diagonal target block.
    pub target: Option<String>,
    pub dump_matrices: bool,

    pub j: usize,
    pub jp: usize,
    pub initial: Option<String>,
    pub exact: bool,

    /// Comma list and/or ranges, e.g. `0-9` or `0,2,4`.
    pub subsystem: Option<String>,
    pub n_u: usize,
    /// `exact`, `finite` (default shot count) or a number of shots.
    pub shots: String,
    #[serde(deserialize_with = "parsed")]
    pub state: StateSource,

    pub lowered: bool,

    pub seed: u64,
    #[serde(deserialize_with = "parsed")]
    pub format: Format,
    pub out_dir: Option<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            l: 10,
            n: 2,
            a: 1.0,
            g: 0.5,
            t: 4.0,
            dt: 0.5,
            r: None,
            order: TrotterOrder::First,
            ldoa: None,
            r_max: 8,
            ansatz: AnsatzKind::Cp,
            theta_g: 1.0,
            sweep: false,
            sweep_min: 0.0,
            sweep_max: std::f64::consts::FRAC_PI_2,
            sweep_points: 101,
            template: None,
            target: None,
            dump_matrices: false,
            j: 3,
            jp: 5,
            initial: None,
            exact: true,
            subsystem: None,
            n_u: 100,
            shots: "exact".into(),
            state: StateSource::Exact,
            lowered: false,
            seed: 0,
            format: Format::Csv,
            out_dir: None,
        }
    }
}

/// Keys whose values stay strings even when they look numeric.
const STRING_KEYS: &[&str] = &[
    "order", "ldoa", "ansatz", "template", "target", "initial", "subsystem", "shots", "state", "format", "out_dir",
];

fn scalar(key: &str, raw: &str) -> Value {
    let raw = raw.trim();
    let unquoted = raw
        .strip_prefix('"')
        .and_then(|s| s.strip_suffix('"'))
        .unwrap_or(raw);
    if STRING_KEYS.contains(&key) || unquoted.len() != raw.len() {
        return Value::String(unquoted.to_string());
    }
    if let Ok(b) = raw.parse::<bool>() {
        return Value::Bool(b);
    }
    if let Ok(u) = raw.parse::<u64>() {
        return Value::from(u);
    }
    if let Ok(f) = raw.parse::<f64>() {
        if let Some(n) = serde_json::Number::from_f64(f) {
            return Value::Number(n);
        }
    }
    Value::String(raw.to_string())
}

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_key_values(text: &str) -> Result<Map<String, Value>, CliError> {
    let mut map = Map::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::config(format!("line {}: expected key = value, got `{line}`", i + 1)))?;
        map.insert(k.trim().to_string(), scalar(k.trim(), v));
    }
    Ok(map)
}

pub fn parse_override(s: &str) -> Result<(String, Value), CliError> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| CliError::config(format!("override `{s}` is not key=value")))?;
    Ok((k.trim().to_string(), scalar(k.trim(), v)))
}

/// Reads a config file; JSON when it parses as a JSON object, otherwise
/// `key = value`.
pub fn load_file(path: &Path) -> Result<Map<String, Value>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("cannot read config {}: {e}", path.display())))?;
    if text.trim_start().starts_with('{') {
        match serde_json::from_str::<Value>(&text) {
            Ok(Value::Object(m)) => Ok(m),
            Ok(_) => Err(CliError::config("JSON config must be an object")),
            Err(e) => Err(CliError::config(format!("{}: {e}", path.display()))),
        }
    } else {
        parse_key_values(&text)
    }
}

/// Normalises JSON-native values so both input styles deserialize alike.
fn normalise(map: &mut Map<String, Value>) {
    for key in STRING_KEYS {
        if let Some(v) = map.get_mut(*key) {
            match v {
                Value::Number(n) => *v = Value::String(n.to_string()),
                Value::Array(items) => {
                    let parts: Vec<String> = items
                        .iter()
                        .map(|x| match x {
                            Value::String(s) => s.clone(),
                            other => other.to_string(),
                        })
                        .collect();
                    *v = Value::String(parts.join(","));
                }
                _ => {}
            }
        }
    }
}

pub fn from_map(mut map: Map<String, Value>) -> Result<RunConfig, CliError> {
    normalise(&mut map);
    let cfg: RunConfig = serde_json::from_value(Value::Object(map)).map_err(|e| CliError::config(e.to_string()))?;
    Ok(cfg)
}

/// Integer lists like `0-3,7,9`.
pub fn parse_index_list(s: &str) -> Result<Vec<usize>, CliError> {
    let bad = || CliError::config(format!("bad index list `{s}`"));
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        match part.split_once('-') {
            Some((a, b)) => {
                let (a, b): (usize, usize) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
                if a > b {
                    return Err(bad());
                }
                out.extend(a..=b);
            }
            None => out.push(part.parse().map_err(|_| bad())?),
        }
    }
    if out.is_empty() {
        return Err(bad());
    }
    Ok(out)
}

impl RunConfig {
    pub fn lattice(&self) -> Result<LatticeParams, CliError> {
        LatticeParams::from_staggered(self.l, self.n, self.a, self.g).map_err(|e| {
            if self.l % 2 != 0 {
                CliError::config(format!("L must be even and positive, got {}", self.l))
            } else {
                e.into()
            }
        })
    }

    pub fn ldoa_mode(&self) -> LdoaMode {
        self.ldoa.unwrap_or(LdoaMode::None)
    }

    /// The plan reaching `t`: `r` steps if given, otherwise steps of about `dt`.
    pub fn plan(&self, p: &LatticeParams, t: f64) -> Result<TrotterPlan, CliError> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(CliError::config(format!("dt must be positive, got {}", self.dt)));
        }
        Ok(match self.r {
            Some(r) => TrotterPlan::new(p, self.order, r, t, self.ldoa_mode())?,
            None => TrotterPlan::with_step(p, self.order, self.dt, t, self.ldoa_mode())?,
        })
    }

    pub fn initial_state(&self, width: usize) -> Result<String, CliError> {
        let s = self.initial.clone().unwrap_or_else(|| model::default_initial_state(width));
        if s.len() != width || model::parse_bitstring(&s).is_none() {
            return Err(CliError::config(format!("initial state must be {width} characters of 0/1, got `{s}`")));
        }
        Ok(s)
    }

    pub fn subsystem_qubits(&self, width: usize) -> Result<Vec<usize>, CliError> {
        match &self.subsystem {
            Some(s) => parse_index_list(s),
            None => Ok((0..width / 2).collect()),
        }
    }

    pub fn shot_mode(&self) -> Result<ShotMode, CliError> {
        match self.shots.trim().to_ascii_lowercase().as_str() {
            "exact" => Ok(ShotMode::ExactProbabilities),
            "finite" => Ok(ShotMode::FiniteShots(DEFAULT_SHOTS)),
            other => other
                .parse()
                .map(ShotMode::FiniteShots)
                .map_err(|_| CliError::config(format!("shots must be exact, finite or a count, got `{other}`"))),
        }
    }

    /// Copy with derived defaults written out, as embedded in outputs.
    pub fn resolved(&self) -> Result<RunConfig, CliError> {
        let mut c = self.clone();
        let width = c.lattice()?.width();
        if c.initial.is_none() {
            c.initial = Some(model::default_initial_state(width));
        }
        if c.subsystem.is_none() {
            let q: Vec<String> = c.subsystem_qubits(width)?.iter().map(|q| q.to_string()).collect();
            c.subsystem = Some(q.join(","));
        }
        Ok(c)
    }
}
