use std::collections::BTreeMap;
use std::fs;

use linar::baselines::Algorithm;
use linar::harness::plot::{emit_plotdata, PlotError, PLOT_HEADER};
use linar::harness::{run_sweep, sweep, ExperimentConfig, MetricsRecord};
use linar::par::Exec;

fn small(dir: &std::path::Path) -> ExperimentConfig {
    ExperimentConfig {
        n: vec![12, 16],
        k: vec![1, 2],
        beta: vec![0.0, 0.5],
        repetitions: 3,
        algorithms: vec![Algorithm::Linar, Algorithm::Mccr, Algorithm::Greedy, Algorithm::Basic],
        output: dir.to_path_buf(),
        ..ExperimentConfig::default()
    }
}

const RUNS_HEADER: &str = "algorithm,n,k,beta,seed,topology_seed,status,failures,restored_failures,\
total_movement_m,moves,sent_bytes,messages,kappa_before,kappa_after,primary_loss_pct,general_loss_pct,\
event_time_s,bytes_start,bytes_ngb,bytes_discover,bytes_explore,bytes_confirm,bytes_stat,bytes_beacon,\
bytes_moved,bytes_neighbor_report,bytes_failure_report,bytes_move_command,count_start,count_ngb,\
count_discover,count_explore,count_confirm,count_stat,count_beacon,count_moved,count_neighbor_report,\
count_failure_report,count_move_command";

fn read_csv(path: &std::path::Path) -> Vec<BTreeMap<String, String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    let h = r.headers().unwrap().clone();
    r.records()
        .map(|rec| h.iter().zip(rec.unwrap().iter()).map(|(a, b)| (a.to_string(), b.to_string())).collect())
        .collect()
}

#[test]
fn sweep_files_are_stable() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let (recs, paths) = run_sweep(&small(a.path()), Exec::Parallel).unwrap();
    let (_, paths_b) = run_sweep(&small(b.path()), Exec::Sequential).unwrap();
    // 2 n × 2 k × 3 reps, the protocol twice for two β values
    assert_eq!(recs.len(), 12 * (2 + 3));
    assert!(recs.iter().all(|r| !r.is_error()));
    for (x, y) in paths.iter().zip(&paths_b) {
        assert_eq!(fs::read(x).unwrap(), fs::read(y).unwrap(), "{}", x.display());
    }
    let runs = fs::read_to_string(&paths[0]).unwrap();
    assert_eq!(runs.lines().next().unwrap(), RUNS_HEADER);
    assert_eq!(runs.lines().count(), recs.len() + 1);
    // protocol rows carry β and a time; central rows leave both empty
    for row in read_csv(&paths[0]) {
        let linar = row["algorithm"] == "linar";
        assert_eq!(row["beta"].is_empty(), !linar);
        assert_eq!(row["event_time_s"].is_empty(), !linar);
        assert!(row["primary_loss_pct"].parse::<f64>().unwrap() >= row["general_loss_pct"].parse::<f64>().unwrap());
    }
}

fn plot_rows(path: &std::path::Path) -> Vec<(String, f64, f64, f64, usize)> {
    read_csv(path)
        .into_iter()
        .map(|r| {
            (
                r["series"].clone(),
                r["x"].parse().unwrap(),
                r["mean"].parse().unwrap(),
                r["stderr"].parse().unwrap(),
                r["count"].parse().unwrap(),
            )
        })
        .collect()
}

fn by_hand(recs: &[MetricsRecord], k: usize, label: &str, n: usize) -> (f64, f64, usize) {
    let xs: Vec<f64> = recs
        .iter()
        .filter(|r| r.k == k && r.n == n)
        .filter(|r| {
            let l = match r.beta {
                Some(b) => format!("{} b={b}", r.algorithm.name()),
                None => r.algorithm.name().to_string(),
            };
            l == label
        })
        .map(|r| r.total_movement_m)
        .collect();
    let m = xs.iter().sum::<f64>() / xs.len() as f64;
    let var = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64;
    (m, (var / xs.len() as f64).sqrt(), xs.len())
}

#[test]
fn plotdata_matches_hand_aggregation() {
    let dir = tempfile::tempdir().unwrap();
    let (recs, paths) = run_sweep(&small(dir.path()), Exec::default()).unwrap();
    let out = dir.path().join("plots");
    let written = emit_plotdata(&paths[0], &out, &[]).unwrap();
    assert_eq!(written.len(), 15);
    let pts = plot_rows(&out.join("movement_vs_n.csv"));
    assert_eq!(pts.len(), 5 * 2 * 2);
    for (series, x, mean, se, count) in pts {
        let (label, k) = series.rsplit_once(" k=").unwrap();
        let (m, s, c) = by_hand(&recs, k.parse().unwrap(), label, x as usize);
        assert_eq!(count, c);
        // the CSV holds shortest round-trip decimals of the harness's values
        assert!((mean - m).abs() <= 1e-9 * m.abs().max(1.0), "{series} {x}");
        assert!((se - s).abs() <= 1e-9 * s.abs().max(1.0), "{series} {x}");
    }
    // one point per k for every (series, n)
    let vs_k = plot_rows(&out.join("movement_vs_k.csv"));
    let mut per: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for (s, x, ..) in vs_k {
        per.entry(s).or_default().push(x);
    }
    assert_eq!(per.len(), 5 * 2);
    assert!(per.values().all(|xs| xs == &[1.0, 2.0]));
    let vs_beta = plot_rows(&out.join("movement_vs_beta.csv"));
    assert!(vs_beta.iter().all(|p| p.0.starts_with("linar ")));
    assert_eq!(vs_beta.len(), 2 * 2 * 2);
    assert!(plot_rows(&out.join("event_time_vs_n.csv")).iter().all(|p| p.0.starts_with("linar")));
}

#[test]
fn unmatched_filter_gives_header_only_files() {
    let dir = tempfile::tempdir().unwrap();
    let (_, paths) = run_sweep(&small(dir.path()), Exec::default()).unwrap();
    let out = dir.path().join("none");
    for p in emit_plotdata(&paths[0], &out, &["tapu".to_string()]).unwrap() {
        assert_eq!(fs::read_to_string(p).unwrap(), format!("{}\n", PLOT_HEADER.join(",")));
    }
}

#[test]
fn schema_errors_name_the_column() {
    let dir = tempfile::tempdir().unwrap();
    let runs = dir.path().join("runs.csv");
    fs::write(&runs, "algorithm,n,k,beta,status\nlinar,10,1,0,restored\n").unwrap();
    match emit_plotdata(&runs, &dir.path().join("p"), &[]) {
        Err(PlotError::MissingColumn(c)) => assert_eq!(c, "total_movement_m"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn bad_configs_are_refused() {
    for cfg in [
        ExperimentConfig { n: vec![], ..ExperimentConfig::default() },
        ExperimentConfig { beta: vec![1.5], ..ExperimentConfig::default() },
        ExperimentConfig { failure_fraction: 2.0, ..ExperimentConfig::default() },
        ExperimentConfig { repetitions: 0, ..ExperimentConfig::default() },
    ] {
        assert!(sweep(&cfg, Exec::Sequential).is_err());
    }
}
