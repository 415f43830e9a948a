use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use linar::baselines::Algorithm;
use linar::harness::config::{parse_algorithms, parse_list, ExperimentConfig, KeyValues, Timing};
use linar::harness::plot::emit_plotdata;
use linar::harness::scenario::{run_scenario, Scenario};
use linar::harness::validate::validate_topology;
use linar::harness::{run_sweep, write_events, write_runs, MetricsRecord};
use linar::par::Exec;
use linar::protocol::MessageKind;
use linar::topology::{from_text, generate, load, to_text, Field, GenerateParams};

#[derive(Parser)]
#[command(name = "linar", version, about = "k-connectivity restoration simulator and experiment harness")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a random deployment with connectivity exactly k.
    Gen(GenArgs),
    /// Run one algorithm on one topology.
    Run(RunArgs),
    /// Run a parameter sweep and write runs.csv, events.csv and summary.csv.
    Sweep(SweepArgs),
    /// Turn runs.csv into per-figure series files.
    Plotdata(PlotArgs),
    /// Check graph and protocol properties on a topology.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 1000.0)]
    width: f64,
    #[arg(long, default_value_t = 1000.0)]
    height: f64,
    #[arg(long, default_value_t = 20.0)]
    range: f64,
    #[arg(long, default_value_t = 5000)]
    max_attempts: usize,
    /// Output file; stdout when absent.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TimingArgs {
    #[arg(long)]
    ts_ms: Option<u64>,
    #[arg(long)]
    latency_ms: Option<u64>,
    #[arg(long)]
    beacon_period_s: Option<u64>,
    #[arg(long)]
    failure_timeout_s: Option<u64>,
}

impl TimingArgs {
    fn apply(&self, t: &mut Timing) {
        if let Some(v) = self.ts_ms {
            t.ts_ms = v;
        }
        if let Some(v) = self.latency_ms {
            t.latency_ms = v;
        }
        if let Some(v) = self.beacon_period_s {
            t.beacon_period_s = v;
        }
        if let Some(v) = self.failure_timeout_s {
            t.failure_timeout_s = v;
        }
    }
}

#[derive(Args)]
struct RunArgs {
    /// Scenario file; its keys override the flags below.
    #[arg(long)]
    scenario: Option<PathBuf>,
    #[arg(long)]
    topology: Option<PathBuf>,
    #[arg(long, default_value = "linar")]
    algorithm: String,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, default_value_t = 0.0)]
    beta: f64,
    #[arg(long, default_value_t = 0.2)]
    failure_fraction: f64,
    /// Failure-order seed.
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    timing: TimingArgs,
    /// Write the metrics row (runs.csv schema) here.
    #[arg(long)]
    runs: Option<PathBuf>,
    /// Write the per-failure table here.
    #[arg(long)]
    events: Option<PathBuf>,
    /// Write the simulator's event trace here (protocol only).
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// `key = value` file; its keys override the flags below.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    k: Option<String>,
    #[arg(long)]
    beta: Option<String>,
    #[arg(long)]
    failure_fraction: Option<f64>,
    #[arg(long)]
    repetitions: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    algorithms: Option<String>,
    #[arg(long)]
    range: Option<f64>,
    #[arg(long)]
    resolution: Option<f64>,
    #[command(flatten)]
    timing: TimingArgs,
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Run on one thread.
    #[arg(long)]
    sequential: bool,
}

#[derive(Args)]
struct PlotArgs {
    /// runs.csv from a sweep.
    runs: PathBuf,
    #[arg(long, short, default_value = "plotdata")]
    out: PathBuf,
    /// Keep only these algorithms (comma separated).
    #[arg(long)]
    algorithms: Option<String>,
}

#[derive(Args)]
struct ValidateArgs {
    topology: PathBuf,
    /// Connectivity to check the protocol against; defaults to the file's k.
    #[arg(long)]
    k: Option<usize>,
}

type Res<T> = Result<T, Box<dyn std::error::Error>>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = match cli.cmd {
        Cmd::Gen(a) => gen(a),
        Cmd::Run(a) => run(a),
        Cmd::Sweep(a) => sweep(a),
        Cmd::Plotdata(a) => plotdata(a),
        Cmd::Validate(a) => validate(a),
    };
    match out {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn gen(a: GenArgs) -> Res<ExitCode> {
    let t = generate(GenerateParams {
        n: a.n,
        k: a.k,
        field: Field::new(a.width, a.height),
        range: a.range,
        seed: a.seed,
        max_attempts: a.max_attempts,
    })?;
    match a.out {
        Some(p) => fs::write(p, to_text(&t))?,
        None => print!("{}", to_text(&t)),
    }
    Ok(ExitCode::SUCCESS)
}

fn print_metrics(r: &MetricsRecord) {
    let beta = r.beta.map(|b| b.to_string()).unwrap_or_else(|| "-".into());
    println!("algorithm        {}", r.algorithm.name());
    println!("n k beta         {} {} {beta}", r.n, r.k);
    println!("status           {}", r.status);
    println!("failures         {} ({} restored)", r.failures, r.restored_failures);
    println!("kappa            {} -> {}", r.kappa_before, r.kappa_after);
    println!("movement_m       {:.3} over {} moves", r.total_movement_m + 0.0, r.moves);
    println!("sent_bytes       {}", r.bytes.total_bytes());
    for kind in MessageKind::ALL {
        let (b, c) = (r.bytes.bytes_of(kind), r.bytes.count_of(kind));
        if c > 0 {
            println!("  {:<14} {b} bytes in {c} messages", kind.name());
        }
    }
    println!("primary_loss_pct {:.4}", r.primary_loss_pct);
    println!("general_loss_pct {:.4}", r.general_loss_pct);
    if let Some(t) = r.event_time_s {
        println!("event_time_s     {t}");
    }
}

fn run(a: RunArgs) -> Res<ExitCode> {
    let mut sc = Scenario {
        topology: a.topology,
        algorithm: Algorithm::parse(&a.algorithm).ok_or_else(|| format!("unknown algorithm `{}`", a.algorithm))?,
        k: a.k,
        beta: a.beta,
        failure_fraction: a.failure_fraction,
        seed: a.seed,
        ..Scenario::default()
    };
    a.timing.apply(&mut sc.timing);
    if let Some(p) = &a.scenario {
        let kv = KeyValues::parse(&fs::read_to_string(p)?)?;
        sc.apply(&kv, p.parent().unwrap_or(std::path::Path::new(".")))?;
    }
    let topo = match &sc.topology {
        Some(p) if p.as_os_str() == "-" => from_text(&std::io::read_to_string(std::io::stdin())?)?,
        Some(p) => load(p)?,
        None => return Err("no topology: pass --topology or set it in the scenario".into()),
    };
    let (rec, trace) = run_scenario(&sc, &topo, a.trace.is_some())?;
    print_metrics(&rec);
    if let Some(p) = a.runs {
        write_runs(&p, std::slice::from_ref(&rec))?;
    }
    if let Some(p) = a.events {
        write_events(&p, std::slice::from_ref(&rec))?;
    }
    if let Some(p) = a.trace {
        let mut text = trace.join("\n");
        text.push('\n');
        fs::write(p, text)?;
    }
    Ok(ExitCode::SUCCESS)
}

fn sweep(a: SweepArgs) -> Res<ExitCode> {
    let mut cfg = ExperimentConfig::default();
    if let Some(v) = &a.n {
        cfg.n = parse_list("n", v)?;
    }
    if let Some(v) = &a.k {
        cfg.k = parse_list("k", v)?;
    }
    if let Some(v) = &a.beta {
        cfg.beta = parse_list("beta", v)?;
    }
    if let Some(v) = &a.algorithms {
        cfg.algorithms = parse_algorithms("algorithms", v)?;
    }
    if let Some(v) = a.failure_fraction {
        cfg.failure_fraction = v;
    }
    if let Some(v) = a.repetitions {
        cfg.repetitions = v;
    }
    if let Some(v) = a.seed {
        cfg.seed = v;
    }
    if let Some(v) = a.range {
        cfg.range = v;
    }
    if a.resolution.is_some() {
        cfg.resolution = a.resolution;
    }
    if let Some(v) = a.output {
        cfg.output = v;
    }
    a.timing.apply(&mut cfg.timing);
    if let Some(p) = &a.config {
        cfg.apply(&KeyValues::parse(&fs::read_to_string(p)?)?)?;
    }
    let exec = if a.sequential { Exec::Sequential } else { Exec::default() };
    let (records, paths) = run_sweep(&cfg, exec)?;
    let errors = records.iter().filter(|r| r.is_error()).count();
    eprintln!("{} runs, {errors} errors", records.len());
    for p in paths {
        println!("{}", p.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn plotdata(a: PlotArgs) -> Res<ExitCode> {
    let algorithms: Vec<String> = a
        .algorithms
        .map(|v| v.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect())
        .unwrap_or_default();
    for p in emit_plotdata(&a.runs, &a.out, &algorithms)? {
        println!("{}", p.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn validate(a: ValidateArgs) -> Res<ExitCode> {
    let topo = load(&a.topology)?;
    let checks = validate_topology(&topo, a.k, Timing::default());
    for c in &checks {
        println!("{} {:<20} {}", if c.passed { "ok  " } else { "FAIL" }, c.name, c.detail);
    }
    Ok(if checks.iter().all(|c| c.passed) {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}
