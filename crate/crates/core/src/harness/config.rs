//! `key = value` configuration files.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::str::FromStr;

use thiserror::Error;

use crate::baselines::Algorithm;
use crate::topology::{Field, Position};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("line {line}: duplicate key `{key}`")]
    Duplicate { line: usize, key: String },
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("bad value for `{key}`: {message}")]
    Value { key: String, message: String },
}

/// Parsed `key = value` lines; `#` starts a comment.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct KeyValues(BTreeMap<String, String>);

impl KeyValues {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut map = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or(ConfigError::Syntax { line: i + 1 })?;
            let key = k.trim().to_ascii_lowercase();
            if key.is_empty() {
                return Err(ConfigError::Syntax { line: i + 1 });
            }
            if map.insert(key.clone(), v.trim().to_string()).is_some() {
                return Err(ConfigError::Duplicate { line: i + 1, key });
            }
        }
        Ok(KeyValues(map))
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.0.keys().map(String::as_str)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    pub fn check_known(&self, known: &[&str]) -> Result<(), ConfigError> {
        match self.keys().find(|k| !known.contains(k)) {
            Some(k) => Err(ConfigError::UnknownKey(k.to_string())),
            None => Ok(()),
        }
    }
}

fn bad(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Value {
        key: key.to_string(),
        message: message.into(),
    }
}

pub fn parse_one<T: FromStr>(key: &str, v: &str) -> Result<T, ConfigError> {
    v.trim().parse().map_err(|_| bad(key, format!("cannot parse `{v}`")))
}

/// Comma- or whitespace-separated list.
pub fn parse_list<T: FromStr>(key: &str, v: &str) -> Result<Vec<T>, ConfigError> {
    v.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| parse_one(key, s))
        .collect()
}

pub fn parse_algorithms(key: &str, v: &str) -> Result<Vec<Algorithm>, ConfigError> {
    v.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| Algorithm::parse(s).ok_or_else(|| bad(key, format!("unknown algorithm `{s}`"))))
        .collect()
}

pub fn parse_pair(key: &str, v: &str) -> Result<(f64, f64), ConfigError> {
    match parse_list::<f64>(key, v)?.as_slice() {
        &[a, b] => Ok((a, b)),
        _ => Err(bad(key, "expected two numbers")),
    }
}

/// Timing and radio knobs shared by `run` and `sweep`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Timing {
    pub ts_ms: u64,
    pub latency_ms: u64,
    pub beacon_period_s: u64,
    pub failure_timeout_s: u64,
}

impl Default for Timing {
    fn default() -> Self {
        Timing {
            ts_ms: 500,
            latency_ms: 10,
            beacon_period_s: 2,
            failure_timeout_s: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub n: Vec<usize>,
    pub k: Vec<usize>,
    pub beta: Vec<f64>,
    pub failure_fraction: f64,
    pub repetitions: u64,
    pub seed: u64,
    pub algorithms: Vec<Algorithm>,
    pub field: Field,
    pub range: f64,
    pub depot: Position,
    pub resolution: Option<f64>,
    pub timing: Timing,
    pub output: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            n: vec![20, 40, 60],
            k: vec![1, 2, 3],
            beta: vec![0.0, 0.3, 0.6],
            failure_fraction: 0.2,
            repetitions: 10,
            seed: 1,
            algorithms: Algorithm::ALL.to_vec(),
            field: Field::new(1000.0, 1000.0),
            range: 20.0,
            depot: Position::new(0.0, 0.0),
            resolution: None,
            timing: Timing::default(),
            output: PathBuf::from("out"),
        }
    }
}

pub const EXPERIMENT_KEYS: &[&str] = &[
    "n",
    "k",
    "beta",
    "failure_fraction",
    "repetitions",
    "seed",
    "algorithms",
    "field",
    "range",
    "depot",
    "resolution",
    "ts_ms",
    "latency_ms",
    "beacon_period_s",
    "failure_timeout_s",
    "output",
];

impl ExperimentConfig {
    /// Overrides fields with every key present in `kv`.
    pub fn apply(&mut self, kv: &KeyValues) -> Result<(), ConfigError> {
        kv.check_known(EXPERIMENT_KEYS)?;
        for key in kv.keys() {
            let v = kv.get(key).expect("listed");
            match key {
                "n" => self.n = parse_list(key, v)?,
                "k" => self.k = parse_list(key, v)?,
                "beta" => self.beta = parse_list(key, v)?,
                "failure_fraction" => self.failure_fraction = parse_one(key, v)?,
                "repetitions" => self.repetitions = parse_one(key, v)?,
                "seed" => self.seed = parse_one(key, v)?,
                "algorithms" => self.algorithms = parse_algorithms(key, v)?,
                "field" => {
                    let (w, h) = parse_pair(key, v)?;
                    self.field = Field::new(w, h);
                }
                "range" => self.range = parse_one(key, v)?,
                "depot" => {
                    let (x, y) = parse_pair(key, v)?;
                    self.depot = Position::new(x, y);
                }
                "resolution" => self.resolution = Some(parse_one(key, v)?),
                "ts_ms" => self.timing.ts_ms = parse_one(key, v)?,
                "latency_ms" => self.timing.latency_ms = parse_one(key, v)?,
                "beacon_period_s" => self.timing.beacon_period_s = parse_one(key, v)?,
                "failure_timeout_s" => self.timing.failure_timeout_s = parse_one(key, v)?,
                "output" => self.output = PathBuf::from(v),
                _ => unreachable!("checked"),
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        for (key, empty) in [
            ("n", self.n.is_empty()),
            ("k", self.k.is_empty()),
            ("beta", self.beta.is_empty()),
            ("algorithms", self.algorithms.is_empty()),
        ] {
            if empty {
                return Err(bad(key, "list must not be empty"));
            }
        }
        if !(self.failure_fraction >= 0.0 && self.failure_fraction < 1.0) {
            return Err(bad("failure_fraction", "must lie in [0, 1)"));
        }
        if self.repetitions == 0 {
            return Err(bad("repetitions", "must be positive"));
        }
        if self.k.contains(&0) {
            return Err(bad("k", "must be at least 1"));
        }
        if let Some(&n) = self.n.iter().find(|&&n| self.k.iter().any(|&k| n <= k)) {
            return Err(bad("n", format!("{n} nodes are too few for the requested k")));
        }
        if self.beta.iter().any(|b| !(0.0..=1.0).contains(b)) {
            return Err(bad("beta", "must lie in [0, 1]"));
        }
        if !(self.range > 0.0) {
            return Err(bad("range", "must be positive"));
        }
        if self.resolution.is_some_and(|r| !(r > 0.0)) {
            return Err(bad("resolution", "must be positive"));
        }
        Ok(())
    }
}
