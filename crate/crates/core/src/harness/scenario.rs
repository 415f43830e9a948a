//! Single-run scenario files.
//!
//! ```text
//! topology = deploy.txt      # relative to the scenario file
//! algorithm = linar
//! k = 2
//! beta = 0.3
//! failure_fraction = 0.2
//! seed = 7                   # failure order
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use super::config::{parse_one, parse_pair, ConfigError, KeyValues, Timing};
use super::{failure_seed, run_baseline, run_linar_traced, HarnessError, MetricsRecord, RunSettings, RunSpec};
use crate::baselines::Algorithm;
use crate::topology::{load, Position, Topology};

pub const SCENARIO_KEYS: &[&str] = &[
    "topology",
    "algorithm",
    "k",
    "beta",
    "failure_fraction",
    "seed",
    "depot",
    "resolution",
    "ts_ms",
    "latency_ms",
    "beacon_period_s",
    "failure_timeout_s",
];

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub topology: Option<PathBuf>,
    pub algorithm: Algorithm,
    /// Defaults to the topology's own k.
    pub k: Option<usize>,
    pub beta: f64,
    pub failure_fraction: f64,
    /// Failure-order seed; defaults to one derived from the topology seed.
    pub seed: Option<u64>,
    pub depot: Position,
    pub resolution: Option<f64>,
    pub timing: Timing,
}

impl Default for Scenario {
    fn default() -> Self {
        Scenario {
            topology: None,
            algorithm: Algorithm::Linar,
            k: None,
            beta: 0.0,
            failure_fraction: 0.2,
            seed: None,
            depot: Position::new(0.0, 0.0),
            resolution: None,
            timing: Timing::default(),
        }
    }
}

impl Scenario {
    /// Overrides fields present in `kv`. A relative `topology` path is taken
    /// relative to `base`.
    pub fn apply(&mut self, kv: &KeyValues, base: &Path) -> Result<(), ConfigError> {
        kv.check_known(SCENARIO_KEYS)?;
        for key in kv.keys() {
            let v = kv.get(key).expect("listed");
            match key {
                "topology" => self.topology = Some(base.join(v)),
                "algorithm" => {
                    self.algorithm = Algorithm::parse(v).ok_or_else(|| ConfigError::Value {
                        key: key.into(),
                        message: format!("unknown algorithm `{v}`"),
                    })?
                }
                "k" => self.k = Some(parse_one(key, v)?),
                "beta" => self.beta = parse_one(key, v)?,
                "failure_fraction" => self.failure_fraction = parse_one(key, v)?,
                "seed" => self.seed = Some(parse_one(key, v)?),
                "depot" => {
                    let (x, y) = parse_pair(key, v)?;
                    self.depot = Position::new(x, y);
                }
                "resolution" => self.resolution = Some(parse_one(key, v)?),
                "ts_ms" => self.timing.ts_ms = parse_one(key, v)?,
                "latency_ms" => self.timing.latency_ms = parse_one(key, v)?,
                "beacon_period_s" => self.timing.beacon_period_s = parse_one(key, v)?,
                "failure_timeout_s" => self.timing.failure_timeout_s = parse_one(key, v)?,
                _ => unreachable!("checked"),
            }
        }
        Ok(())
    }

    pub fn from_file(path: &Path) -> Result<Self, HarnessError> {
        let kv = KeyValues::parse(&fs::read_to_string(path)?)?;
        let mut s = Scenario::default();
        s.apply(&kv, path.parent().unwrap_or(Path::new(".")))?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |key: &str, message: &str| ConfigError::Value {
            key: key.into(),
            message: message.into(),
        };
        if !(0.0..1.0).contains(&self.failure_fraction) {
            return Err(bad("failure_fraction", "must lie in [0, 1)"));
        }
        if !(0.0..=1.0).contains(&self.beta) {
            return Err(bad("beta", "must lie in [0, 1]"));
        }
        if self.k == Some(0) {
            return Err(bad("k", "must be at least 1"));
        }
        Ok(())
    }

    pub fn load_topology(&self) -> Result<Topology, HarnessError> {
        let path = self.topology.as_ref().ok_or_else(|| ConfigError::Value {
            key: "topology".into(),
            message: "no topology given".into(),
        })?;
        Ok(load(path)?)
    }
}

/// Runs `sc` on `topo`; the trace is empty unless requested and the
/// algorithm is simulated.
pub fn run_scenario(
    sc: &Scenario,
    topo: &Topology,
    trace: bool,
) -> Result<(MetricsRecord, Vec<String>), HarnessError> {
    sc.validate()?;
    let k = sc.k.unwrap_or(topo.k);
    let spec = RunSpec {
        algorithm: sc.algorithm,
        n: topo.len(),
        k,
        beta: (sc.algorithm == Algorithm::Linar).then_some(sc.beta),
        rep: 0,
        topology_seed: topo.seed,
    };
    let settings = RunSettings {
        k,
        beta: sc.beta,
        failure_fraction: sc.failure_fraction,
        failure_seed: sc.seed.unwrap_or_else(|| failure_seed(topo.seed)),
        depot: sc.depot,
        resolution: sc.resolution,
        timing: sc.timing,
    };
    match sc.algorithm {
        Algorithm::Linar => run_linar_traced(topo, &spec, &settings, trace),
        _ => Ok((run_baseline(topo, &spec, &settings)?, Vec::new())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_relative_topology() {
        let kv = KeyValues::parse("topology = t.txt\nalgorithm = tapu\nk = 2\nseed = 4\n").unwrap();
        let mut s = Scenario::default();
        s.apply(&kv, Path::new("/data")).unwrap();
        assert_eq!(s.topology, Some(PathBuf::from("/data/t.txt")));
        assert_eq!(s.algorithm, Algorithm::Tapu);
        assert_eq!((s.k, s.seed), (Some(2), Some(4)));
        assert!(s.apply(&KeyValues::parse("n = 3").unwrap(), Path::new(".")).is_err());
    }
}
