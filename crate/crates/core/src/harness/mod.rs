//! Experiment runs, sweeps and CSV output.

pub mod config;
pub mod plot;
pub mod scenario;
pub mod validate;

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::baselines::{
    basic_restore, central_ledger, greedy_restore, localized_restore, mccr_restore, tapu_restore, Algorithm,
    Network, RestoreError, SparePool,
};
use crate::coverage::{coverage_losses, default_resolution, CoverageError};
use crate::graph::{is_trusted_oracle, kappa, NodeId};
use crate::par::Exec;
use crate::protocol::{MessageKind, NodeStatus, ProtocolConfig, MILLIS, SECONDS};
use crate::sim::{choose_failures, ByteLedger, Sim, SimConfig, SimError};
use crate::topology::{generate, GenerateParams, Position, Topology, TopologyError};

pub use config::{ConfigError, ExperimentConfig, KeyValues, Timing};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Coverage(#[from] CoverageError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Plot(#[from] plot::PlotError),
}

/// One failure inside a run.
#[derive(Debug, Clone, PartialEq)]
pub struct EventRecord {
    pub index: usize,
    pub failed: NodeId,
    /// Label the failed node carried: the agent's own for the protocol, the
    /// ground truth for the central schemes.
    pub failed_trusted: bool,
    pub moves: usize,
    pub movement_m: f64,
    pub sent_bytes: u64,
    pub kappa_after: usize,
    /// `restored`, `degraded` or `infeasible`.
    pub status: &'static str,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRecord {
    pub algorithm: Algorithm,
    pub n: usize,
    pub k: usize,
    /// Only the protocol has a coverage knob.
    pub beta: Option<f64>,
    pub seed: u64,
    pub topology_seed: u64,
    pub status: String,
    pub failures: usize,
    pub restored_failures: usize,
    pub total_movement_m: f64,
    pub moves: usize,
    pub bytes: ByteLedger,
    pub kappa_before: usize,
    pub kappa_after: usize,
    pub primary_loss_pct: f64,
    pub general_loss_pct: f64,
    /// Simulated seconds from the first failure to quiescence.
    pub event_time_s: Option<f64>,
    pub events: Vec<EventRecord>,
}

impl MetricsRecord {
    fn empty(spec: &RunSpec, status: String) -> Self {
        MetricsRecord {
            algorithm: spec.algorithm,
            n: spec.n,
            k: spec.k,
            beta: spec.beta,
            seed: spec.rep,
            topology_seed: spec.topology_seed,
            status,
            failures: 0,
            restored_failures: 0,
            total_movement_m: 0.0,
            moves: 0,
            bytes: ByteLedger::default(),
            kappa_before: 0,
            kappa_after: 0,
            primary_loss_pct: 0.0,
            general_loss_pct: 0.0,
            event_time_s: None,
            events: Vec::new(),
        }
    }

    pub fn is_error(&self) -> bool {
        self.status.starts_with("error")
    }
}

/// One cell of a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunSpec {
    pub algorithm: Algorithm,
    pub n: usize,
    pub k: usize,
    pub beta: Option<f64>,
    pub rep: u64,
    pub topology_seed: u64,
}

/// Seed of the topology for one (n, k, repetition); shared by every
/// algorithm and β so they face the same deployment and failures.
pub fn topology_seed(base: u64, n: usize, k: usize, rep: u64) -> u64 {
    base.wrapping_mul(1_000_003)
        .wrapping_add(n as u64 * 10_007)
        .wrapping_add(k as u64 * 101)
        .wrapping_add(rep)
}

pub fn failure_seed(topology_seed: u64) -> u64 {
    topology_seed ^ 0x5eed_f00d
}

/// Settings for a single run on a given topology.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunSettings {
    pub k: usize,
    pub beta: f64,
    pub failure_fraction: f64,
    pub failure_seed: u64,
    pub depot: Position,
    pub resolution: Option<f64>,
    pub timing: Timing,
}

pub fn sim_config(k: usize, beta: f64, range: f64, timing: Timing) -> SimConfig {
    let mut p = ProtocolConfig::new(k, beta, range);
    p.ts = timing.ts_ms * MILLIS;
    let mut c = SimConfig::new(p);
    c.latency = timing.latency_ms * MILLIS;
    c.beacon_period = timing.beacon_period_s * SECONDS;
    c.failure_timeout = timing.failure_timeout_s * SECONDS;
    c
}

fn event_status(kappa_after: usize, k: usize) -> &'static str {
    if kappa_after >= k {
        "restored"
    } else {
        "degraded"
    }
}

fn finish(
    mut rec: MetricsRecord,
    topo: &Topology,
    after: &[Position],
    resolution: Option<f64>,
) -> Result<MetricsRecord, HarnessError> {
    let res = resolution.unwrap_or_else(|| default_resolution(topo.field));
    let cov = coverage_losses(&topo.positions, after, topo.field, topo.sensing_range, res)?;
    rec.primary_loss_pct = cov.primary_loss_pct;
    rec.general_loss_pct = cov.general_loss_pct;
    rec.failures = rec.events.len();
    rec.restored_failures = rec.events.iter().filter(|e| e.status == "restored").count();
    rec.total_movement_m = rec.events.iter().map(|e| e.movement_m).sum::<f64>() + 0.0;
    rec.moves = rec.events.iter().map(|e| e.moves).sum();
    rec.status = if rec.kappa_after >= rec.kappa_before { "restored" } else { "degraded" }.to_string();
    Ok(rec)
}

/// The distributed protocol: phase 1, then each failure in turn.
pub fn run_linar(topo: &Topology, spec: &RunSpec, s: &RunSettings) -> Result<MetricsRecord, HarnessError> {
    run_linar_traced(topo, spec, s, false).map(|(rec, _)| rec)
}

/// [`run_linar`] that can also return the simulator's event trace.
pub fn run_linar_traced(
    topo: &Topology,
    spec: &RunSpec,
    s: &RunSettings,
    trace: bool,
) -> Result<(MetricsRecord, Vec<String>), HarnessError> {
    let mut rec = MetricsRecord::empty(spec, String::new());
    rec.kappa_before = kappa(&topo.graph());
    let mut cfg = sim_config(s.k, s.beta, topo.range, s.timing);
    cfg.trace = trace;
    let mut sim = Sim::new(topo, cfg);
    sim.run_phase1()?;
    let t0 = sim.now();
    for (i, f) in choose_failures(topo.len(), s.failure_fraction, s.failure_seed).into_iter().enumerate() {
        let ep = sim.fail_and_restore(f)?;
        rec.events.push(EventRecord {
            index: i,
            failed: f,
            failed_trusted: ep.failed_status == NodeStatus::Trusted,
            moves: ep.moves.len(),
            movement_m: ep.movement,
            sent_bytes: ep.bytes,
            kappa_after: ep.kappa_after,
            status: event_status(ep.kappa_after, s.k),
        });
    }
    rec.bytes = sim.ledger.clone();
    rec.kappa_after = kappa(&sim.graph());
    rec.event_time_s = Some((sim.now() - t0) as f64 / SECONDS as f64);
    let rec = finish(rec, topo, &sim.live_positions(), s.resolution)?;
    Ok((rec, sim.trace().to_vec()))
}

/// A central scheme planning on global snapshots.
pub fn run_baseline(topo: &Topology, spec: &RunSpec, s: &RunSettings) -> Result<MetricsRecord, HarnessError> {
    let mut rec = MetricsRecord::empty(spec, String::new());
    let mut net = Network::from_topology(topo);
    rec.kappa_before = kappa(&net.graph());
    let failures = choose_failures(topo.len(), s.failure_fraction, s.failure_seed);
    let mut pool = SparePool {
        depot: s.depot,
        remaining: failures.len(),
    };
    let mut ledger = ByteLedger::new(topo.len());
    for (i, &f) in failures.iter().enumerate() {
        let g = net.graph();
        let trusted = is_trusted_oracle(&g, f).expect("live node");
        let outcome = match spec.algorithm {
            Algorithm::Mccr => mccr_restore(&net, f, s.k),
            Algorithm::Tapu => tapu_restore(&net, f, s.k),
            Algorithm::Greedy => greedy_restore(&net, f, s.k),
            Algorithm::Localized => localized_restore(&net, f, s.k),
            Algorithm::Basic => basic_restore(&net, f, &mut pool),
            Algorithm::Linar => unreachable!("simulated separately"),
        };
        let (plan, feasible) = match outcome {
            Ok(p) => (p, true),
            Err(RestoreError::Infeasible { partial }) => (partial, false),
            Err(e) => unreachable!("{e}"),
        };
        ledger.merge(&central_ledger(&net, f, &plan, spec.algorithm == Algorithm::Basic));
        net.kill(f);
        net.apply(&plan);
        let kappa_after = kappa(&net.graph());
        rec.events.push(EventRecord {
            index: i,
            failed: f,
            failed_trusted: trusted,
            moves: plan.moves.len(),
            movement_m: plan.total_cost,
            sent_bytes: ledger.total_bytes() - rec.events.iter().map(|e| e.sent_bytes).sum::<u64>(),
            kappa_after,
            status: if feasible { event_status(kappa_after, s.k) } else { "infeasible" },
        });
    }
    rec.bytes = ledger;
    rec.kappa_after = kappa(&net.graph());
    finish(rec, topo, &net.live_positions(), s.resolution)
}

pub fn run_one(topo: &Topology, spec: &RunSpec, s: &RunSettings) -> MetricsRecord {
    let out = match spec.algorithm {
        Algorithm::Linar => run_linar(topo, spec, s),
        _ => run_baseline(topo, spec, s),
    };
    out.unwrap_or_else(|e| MetricsRecord::empty(spec, format!("error: {e}")))
}

/// Every (algorithm, n, k, β, repetition) cell in output order. β only
/// multiplies the protocol's runs.
pub fn expand(cfg: &ExperimentConfig) -> Vec<RunSpec> {
    let mut out = Vec::new();
    for &algorithm in &cfg.algorithms {
        for &n in &cfg.n {
            for &k in &cfg.k {
                let betas: Vec<Option<f64>> = match algorithm {
                    Algorithm::Linar => cfg.beta.iter().map(|&b| Some(b)).collect(),
                    _ => vec![None],
                };
                for beta in betas {
                    for rep in 0..cfg.repetitions {
                        out.push(RunSpec {
                            algorithm,
                            n,
                            k,
                            beta,
                            rep,
                            topology_seed: topology_seed(cfg.seed, n, k, rep),
                        });
                    }
                }
            }
        }
    }
    out
}

pub fn generate_for(cfg: &ExperimentConfig, n: usize, k: usize, seed: u64) -> Result<Topology, TopologyError> {
    generate(GenerateParams {
        n,
        k,
        field: cfg.field,
        range: cfg.range,
        seed,
        max_attempts: 5000,
    })
}

/// Runs the sweep in memory; results follow [`expand`] order whatever the
/// executor.
pub fn sweep(cfg: &ExperimentConfig, exec: Exec) -> Result<Vec<MetricsRecord>, HarnessError> {
    cfg.validate()?;
    let specs = expand(cfg);
    let mut cells: Vec<(usize, usize, u64)> = specs.iter().map(|s| (s.n, s.k, s.topology_seed)).collect();
    cells.sort_unstable();
    cells.dedup();
    let topologies = exec.map(&cells, |&(n, k, seed)| generate_for(cfg, n, k, seed).map_err(|e| e.to_string()));
    let lookup = |s: &RunSpec| {
        let i = cells.binary_search(&(s.n, s.k, s.topology_seed)).expect("expanded");
        &topologies[i]
    };
    Ok(exec.map(&specs, |spec| match lookup(spec) {
        Ok(topo) => {
            let settings = RunSettings {
                k: spec.k,
                beta: spec.beta.unwrap_or(0.0),
                failure_fraction: cfg.failure_fraction,
                failure_seed: failure_seed(spec.topology_seed),
                depot: cfg.depot,
                resolution: cfg.resolution,
                timing: cfg.timing,
            };
            run_one(topo, spec, &settings)
        }
        Err(e) => MetricsRecord::empty(spec, format!("error: topology generation failed: {e}")),
    }))
}

pub const RUNS_FILE: &str = "runs.csv";
pub const EVENTS_FILE: &str = "events.csv";
pub const SUMMARY_FILE: &str = "summary.csv";

fn fmt_f(v: f64) -> String {
    // an empty f64 sum is -0
    format!("{}", v + 0.0)
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f).unwrap_or_default()
}

pub fn runs_header() -> Vec<String> {
    let mut h: Vec<String> = [
        "algorithm",
        "n",
        "k",
        "beta",
        "seed",
        "topology_seed",
        "status",
        "failures",
        "restored_failures",
        "total_movement_m",
        "moves",
        "sent_bytes",
        "messages",
        "kappa_before",
        "kappa_after",
        "primary_loss_pct",
        "general_loss_pct",
        "event_time_s",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    for kind in MessageKind::ALL {
        h.push(format!("bytes_{}", kind.name()));
    }
    for kind in MessageKind::ALL {
        h.push(format!("count_{}", kind.name()));
    }
    h
}

fn run_row(r: &MetricsRecord) -> Vec<String> {
    let mut row = vec![
        r.algorithm.name().to_string(),
        r.n.to_string(),
        r.k.to_string(),
        fmt_opt(r.beta),
        r.seed.to_string(),
        r.topology_seed.to_string(),
        r.status.clone(),
        r.failures.to_string(),
        r.restored_failures.to_string(),
        fmt_f(r.total_movement_m),
        r.moves.to_string(),
        r.bytes.total_bytes().to_string(),
        r.bytes.total_messages().to_string(),
        r.kappa_before.to_string(),
        r.kappa_after.to_string(),
        fmt_f(r.primary_loss_pct),
        fmt_f(r.general_loss_pct),
        fmt_opt(r.event_time_s),
    ];
    row.extend(MessageKind::ALL.iter().map(|&k| r.bytes.bytes_of(k).to_string()));
    row.extend(MessageKind::ALL.iter().map(|&k| r.bytes.count_of(k).to_string()));
    row
}

pub const EVENTS_HEADER: &[&str] = &[
    "algorithm",
    "n",
    "k",
    "beta",
    "seed",
    "event",
    "failed",
    "failed_trusted",
    "moves",
    "movement_m",
    "sent_bytes",
    "kappa_after",
    "status",
];

pub const SUMMARY_HEADER: &[&str] = &[
    "algorithm",
    "n",
    "k",
    "beta",
    "runs",
    "errors",
    "restored_runs",
    "mean_movement_m",
    "stderr_movement_m",
    "mean_sent_bytes",
    "mean_primary_loss_pct",
    "mean_general_loss_pct",
    "mean_event_time_s",
];

fn writer(path: &Path) -> Result<csv::Writer<fs::File>, HarnessError> {
    Ok(csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_path(path)?)
}

pub fn write_runs(path: &Path, records: &[MetricsRecord]) -> Result<(), HarnessError> {
    let mut w = writer(path)?;
    w.write_record(runs_header())?;
    for r in records {
        w.write_record(run_row(r))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_events(path: &Path, records: &[MetricsRecord]) -> Result<(), HarnessError> {
    let mut w = writer(path)?;
    w.write_record(EVENTS_HEADER)?;
    for r in records {
        for e in &r.events {
            w.write_record([
                r.algorithm.name().to_string(),
                r.n.to_string(),
                r.k.to_string(),
                fmt_opt(r.beta),
                r.seed.to_string(),
                e.index.to_string(),
                e.failed.0.to_string(),
                e.failed_trusted.to_string(),
                e.moves.to_string(),
                fmt_f(e.movement_m),
                e.sent_bytes.to_string(),
                e.kappa_after.to_string(),
                e.status.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Mean and standard error of the mean (0 for a single value).
pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

pub fn write_summary(path: &Path, records: &[MetricsRecord]) -> Result<(), HarnessError> {
    let mut w = writer(path)?;
    w.write_record(SUMMARY_HEADER)?;
    let mut i = 0;
    while i < records.len() {
        let r0 = &records[i];
        let same = |r: &MetricsRecord| (r.algorithm, r.n, r.k, r.beta.map(f64::to_bits)) == (r0.algorithm, r0.n, r0.k, r0.beta.map(f64::to_bits));
        let j = i + records[i..].iter().take_while(|r| same(r)).count();
        let group = &records[i..j];
        let ok: Vec<&MetricsRecord> = group.iter().filter(|r| !r.is_error()).collect();
        let col = |f: &dyn Fn(&MetricsRecord) -> f64| ok.iter().map(|r| f(r)).collect::<Vec<_>>();
        let (mv, mv_se) = mean_stderr(&col(&|r| r.total_movement_m));
        let times: Vec<f64> = ok.iter().filter_map(|r| r.event_time_s).collect();
        w.write_record([
            r0.algorithm.name().to_string(),
            r0.n.to_string(),
            r0.k.to_string(),
            fmt_opt(r0.beta),
            group.len().to_string(),
            (group.len() - ok.len()).to_string(),
            ok.iter().filter(|r| r.status == "restored").count().to_string(),
            fmt_f(mv),
            fmt_f(mv_se),
            fmt_f(mean_stderr(&col(&|r| r.bytes.total_bytes() as f64)).0),
            fmt_f(mean_stderr(&col(&|r| r.primary_loss_pct)).0),
            fmt_f(mean_stderr(&col(&|r| r.general_loss_pct)).0),
            if times.is_empty() { String::new() } else { fmt_f(mean_stderr(&times).0) },
        ])?;
        i = j;
    }
    w.flush()?;
    Ok(())
}

/// Runs the sweep and writes the three CSV files into `cfg.output`.
pub fn run_sweep(cfg: &ExperimentConfig, exec: Exec) -> Result<(Vec<MetricsRecord>, Vec<PathBuf>), HarnessError> {
    let records = sweep(cfg, exec)?;
    fs::create_dir_all(&cfg.output)?;
    let paths: Vec<PathBuf> = [RUNS_FILE, EVENTS_FILE, SUMMARY_FILE].iter().map(|f| cfg.output.join(f)).collect();
    write_runs(&paths[0], &records)?;
    write_events(&paths[1], &records)?;
    write_summary(&paths[2], &records)?;
    Ok((records, paths))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> ExperimentConfig {
        ExperimentConfig {
            n: vec![12],
            k: vec![2],
            beta: vec![0.0, 0.6],
            repetitions: 2,
            algorithms: vec![Algorithm::Linar, Algorithm::Greedy, Algorithm::Basic],
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn expansion_order() {
        let specs = expand(&tiny());
        assert_eq!(specs.len(), 2 * 2 + 2 + 2);
        assert_eq!(specs[0].beta, Some(0.0));
        assert_eq!(specs[2].beta, Some(0.6));
        assert!(specs[4..].iter().all(|s| s.beta.is_none()));
        assert_eq!(specs[0].topology_seed, specs[4].topology_seed);
    }

    #[test]
    fn no_failures_single_row_zero_cost() {
        let cfg = ExperimentConfig {
            repetitions: 1,
            beta: vec![0.0],
            algorithms: vec![Algorithm::Linar],
            failure_fraction: 0.0,
            ..tiny()
        };
        let recs = sweep(&cfg, Exec::Sequential).unwrap();
        assert_eq!(recs.len(), 1);
        assert_eq!(recs[0].total_movement_m, 0.0);
        assert_eq!(recs[0].status, "restored");
        assert_eq!(recs[0].primary_loss_pct, 0.0);
    }

    #[test]
    fn executors_agree_and_rows_are_complete() {
        let cfg = tiny();
        let a = sweep(&cfg, Exec::Sequential).unwrap();
        let b = sweep(&cfg, Exec::Parallel).unwrap();
        assert_eq!(a, b);
        for r in &a {
            assert!(!r.is_error(), "{}", r.status);
            assert_eq!(r.failures, 2);
            assert!(r.general_loss_pct <= r.primary_loss_pct + 1e-9);
        }
        assert_eq!(run_row(&a[0]).len(), runs_header().len());
    }

    #[test]
    fn mean_and_stderr() {
        assert_eq!(mean_stderr(&[4.0]), (4.0, 0.0));
        let (m, se) = mean_stderr(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((se - (5.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-12);
    }
}
