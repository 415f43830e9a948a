//! Acceptance report. Prints one PASS/FAIL line per criterion and always
//! exits 0 so the rest of the test suite still runs; set
//! ACCEPTANCE_STRICT=1 to exit non-zero on any FAIL.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fs;
use std::time::Instant;

use itertools::Itertools;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use linar::baselines::{brute_force_optimal, mccr_restore, tapu_restore, Algorithm, Network};
use linar::coverage::{covered_area, default_resolution, support_degree};
use linar::graph::{disjoint_paths, is_k_connected, is_trusted_oracle, local_subgraph_2hop, Graph, NodeId};
use linar::harness::{run_sweep, sweep, ExperimentConfig, MetricsRecord};
use linar::par::Exec;
use linar::protocol::imaginary::build_imaginary_kconnected;
use linar::protocol::{NodeStatus, ProtocolConfig};
use linar::sim::{Sim, SimConfig};
use linar::topology::{generate, Field, GenerateParams, Position, Topology};

struct Report {
    failed: usize,
    total: usize,
}

impl Report {
    fn line(&mut self, n: usize, name: &str, pass: bool, detail: String) {
        self.total += 1;
        self.failed += !pass as usize;
        println!("criterion {n:>2} {name}: {} ({detail})", if pass { "PASS" } else { "FAIL" });
    }
}

fn topo(n: usize, k: usize, seed: u64) -> Topology {
    generate(GenerateParams {
        n,
        k,
        field: Field::new(1000.0, 1000.0),
        range: 20.0,
        seed,
        max_attempts: 5000,
    })
    .expect("topology")
}

fn settled(t: &Topology, k: usize) -> Sim {
    let mut s = Sim::new(t, SimConfig::new(ProtocolConfig::new(k, 0.0, t.range)));
    s.run_phase1().expect("phase 1");
    s
}

#[derive(Default)]
struct LabelStats {
    nodes: usize,
    agree: usize,
    view_trials: usize,
    view_false_trusted: usize,
    views_built: usize,
    lemma_violations: usize,
    searches: usize,
    fanout_violations: usize,
}

/// Criteria 1, 2, 3 and 9 on one topology.
fn label_stats(i: u64) -> LabelStats {
    let n = 10 + (i as usize * 7) % 31;
    let k = 1 + i as usize % 4;
    let t = topo(n, k, i);
    let g = t.graph();
    let s = settled(&t, k);
    let labels = s.labels();
    let mut st = LabelStats::default();
    let oracle: Vec<bool> = g.nodes().map(|v| is_trusted_oracle(&g, v).unwrap()).collect();
    for v in g.nodes() {
        st.nodes += 1;
        st.agree += ((labels[v.index()] == NodeStatus::Trusted) == oracle[v.index()]) as usize;
        // the view shortcut applies once every neighbour has degree above k
        let gv = local_subgraph_2hop(&g, v).unwrap();
        let nbrs = gv.neighbors(v).to_vec();
        if nbrs.is_empty() || nbrs.iter().any(|&u| gv.degree(u) <= k) {
            continue;
        }
        st.view_trials += 1;
        let aug = build_imaginary_kconnected(&gv, v, k);
        if !aug.success {
            continue;
        }
        st.views_built += 1;
        let local = aug.graph.without(v);
        if is_k_connected(&local, k) && !oracle[v.index()] {
            st.view_false_trusted += 1;
        }
        let global = g.without(v);
        for (x, y) in nbrs.iter().tuple_combinations() {
            if disjoint_paths(&local, *x, *y).unwrap() > disjoint_paths(&global, *x, *y).unwrap() {
                st.lemma_violations += 1;
            }
        }
    }
    for r in s.searches() {
        st.searches += 1;
        st.fanout_violations += (r.discover_tx as usize > r.max_degree + 1) as usize;
    }
    st
}

/// Criterion 4 on one topology: (restored, failures, fan-out violations).
fn restoration(i: u64) -> (usize, usize, usize) {
    let k = 2 + i as usize % 3;
    let n = 15 + (i as usize * 11) % 46;
    let t = topo(n, k, 10_000 + i);
    let g = t.graph();
    let base = settled(&t, k);
    let (mut ok, mut total, mut fanout) = (0, 0, 0);
    for v in g.nodes() {
        if is_trusted_oracle(&g, v).unwrap() {
            continue;
        }
        let mut s = base.clone();
        let ep = s.fail_and_restore(v).expect("episode");
        total += 1;
        ok += (ep.kappa_after >= k) as usize;
        fanout += s.searches().filter(|r| r.discover_tx as usize > r.max_degree + 1).count();
    }
    (ok, total, fanout)
}

/// Criteria 5 and 6: (mccr matches, tapu matches, instances).
fn small_instances() -> (usize, usize, usize, Vec<String>) {
    let mut r = ChaCha8Rng::seed_from_u64(5);
    let (mut mccr_ok, mut tapu_ok, mut count) = (0, 0, 0);
    let mut notes = Vec::new();
    let mut seed = 0;
    while count < 50 {
        seed += 1;
        let n = r.gen_range(6..=9);
        let k = r.gen_range(1..=3);
        let Ok(t) = generate(GenerateParams {
            n,
            k,
            field: Field::new(1000.0, 1000.0),
            range: 20.0,
            seed: 50_000 + seed,
            max_attempts: 5000,
        }) else {
            continue;
        };
        let net = Network::from_topology(&t);
        let f = NodeId::from(r.gen_range(0..n));
        let Ok(best) = brute_force_optimal(&net, f, k, n) else { continue };
        count += 1;
        let close = |c: Option<f64>| c.is_some_and(|c| (c - best.total_cost).abs() <= 1e-9);
        let m = mccr_restore(&net, f, k).ok().map(|p| p.total_cost);
        let tp = tapu_restore(&net, f, k).ok().map(|p| p.total_cost);
        mccr_ok += close(m) as usize;
        tapu_ok += close(tp) as usize;
        if !close(tp) && notes.len() < 3 {
            notes.push(format!("seed {} n{n} k{k} fail {f}: tapu {tp:?} vs optimum {:.6}", 50_000 + seed, best.total_cost));
        }
    }
    (mccr_ok, tapu_ok, count, notes)
}

fn label(r: &MetricsRecord) -> String {
    match r.beta {
        Some(b) => format!("linar@{b}"),
        None => r.algorithm.name().to_string(),
    }
}

fn cell_means(records: &[MetricsRecord], f: impl Fn(&MetricsRecord) -> f64) -> BTreeMap<(usize, usize, String), f64> {
    let mut acc: BTreeMap<(usize, usize, String), (f64, usize)> = BTreeMap::new();
    for r in records {
        let e = acc.entry((r.n, r.k, label(r))).or_default();
        e.0 += f(r);
        e.1 += 1;
    }
    acc.into_iter().map(|(key, (s, c))| (key, s / c as f64)).collect()
}

/// Least-squares slope of ln y against ln x.
fn log_slope(points: &[(f64, f64)]) -> f64 {
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let (mx, my) = (xs.iter().sum::<f64>() / xs.len() as f64, ys.iter().sum::<f64>() / ys.len() as f64);
    let cov: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    cov / var
}

fn main() {
    // libtest flags such as --nocapture may be passed through; ignore them
    let t0 = Instant::now();
    let mut rep = Report { failed: 0, total: 0 };
    let exec = Exec::default();

    // 1, 2, 3 and 9 share the same 200 topologies
    let stats = exec.map_range(200, |i| label_stats(i as u64));
    let sum = |f: fn(&LabelStats) -> usize| stats.iter().map(f).sum::<usize>();
    let (nodes, agree) = (sum(|s| s.nodes), sum(|s| s.agree));
    rep.line(1, "classification matches oracle", agree == nodes, format!("{agree}/{nodes} labels agree"));
    let (trials, false_trusted) = (sum(|s| s.view_trials), sum(|s| s.view_false_trusted));
    rep.line(
        2,
        "view-only Trusted never wrong",
        trials >= 500 && false_trusted == 0,
        format!("{false_trusted} false Trusted in {trials} trials"),
    );
    let (views, lemma) = (sum(|s| s.views_built), sum(|s| s.lemma_violations));
    rep.line(
        3,
        "local path count never exceeds global",
        views >= 500 && lemma == 0,
        format!("{lemma} violating pairs over {views} augmented views"),
    );

    let restored = exec.map_range(100, |i| restoration(i as u64));
    let (ok, total) = restored.iter().fold((0, 0), |a, r| (a.0 + r.0, a.1 + r.1));
    rep.line(
        4,
        "Joint failures restore k",
        ok == total && total > 0,
        format!("{ok}/{total} Joint failures end k-connected"),
    );

    let (mccr_ok, tapu_ok, count, notes) = small_instances();
    rep.line(5, "MCCR equals brute force", mccr_ok == count, format!("{mccr_ok}/{count} instances"));
    let mut detail = format!("{tapu_ok}/{count} instances");
    for n in &notes {
        detail += &format!("; {n}");
    }
    rep.line(6, "TAPU equals MCCR", tapu_ok == count, detail);

    let cfg = ExperimentConfig {
        output: std::env::temp_dir().join(format!("linar-acceptance-a-{}", std::process::id())),
        ..ExperimentConfig::default()
    };
    let (records, paths) = run_sweep(&cfg, exec).expect("desk sweep");
    let errors = records.iter().filter(|r| r.is_error()).count();
    let movement = cell_means(&records, |r| r.total_movement_m);
    let primary = cell_means(&records, |r| r.primary_loss_pct);
    let cells: Vec<(usize, usize)> = cfg.n.iter().copied().cartesian_product(cfg.k.iter().copied()).collect();
    let m = |n, k, l: &str| movement[&(n, k, l.to_string())];
    let cheaper = cells
        .iter()
        .filter(|&&(n, k)| {
            let l = m(n, k, "linar@0");
            ["greedy", "localized", "basic"].iter().all(|b| l <= m(n, k, b))
        })
        .count();
    rep.line(
        7,
        "LINAR(0) movement at most Greedy/Localized/Basic",
        cheaper * 10 >= cells.len() * 9 && errors == 0,
        format!("{cheaper}/{} cells, {errors} error rows", cells.len()),
    );
    let betas = ["linar@0", "linar@0.3", "linar@0.6"];
    let loss_down = cells
        .iter()
        .filter(|&&(n, k)| betas.windows(2).all(|w| primary[&(n, k, w[1].to_string())] <= primary[&(n, k, w[0].to_string())]))
        .count();
    let move_up = cells
        .iter()
        .filter(|&&(n, k)| betas.windows(2).all(|w| m(n, k, w[1]) >= m(n, k, w[0])))
        .count();
    let fmt_cells = |f: &dyn Fn(usize, usize) -> String| cells.iter().map(|&(n, k)| format!("n{n}k{k} {}", f(n, k))).join(", ");
    rep.line(
        8,
        "coverage loss falls and movement rises with beta",
        loss_down * 10 >= cells.len() * 9 && move_up * 10 >= cells.len() * 9,
        format!(
            "loss non-increasing {loss_down}/{n}, movement non-decreasing {move_up}/{n}; primary loss [{}]; movement [{}]",
            fmt_cells(&|n, k| betas.iter().map(|b| format!("{:.2}", primary[&(n, k, b.to_string())])).join("/")),
            fmt_cells(&|n, k| betas.iter().map(|b| format!("{:.1}", m(n, k, b))).join("/")),
            n = cells.len()
        ),
    );

    let searches = sum(|s| s.searches);
    let fanout = sum(|s| s.fanout_violations) + restored.iter().map(|r| r.2).sum::<usize>();
    rep.line(9, "Discover fan-out bounded", fanout == 0, format!("{fanout} searches over the bound; {searches} phase-1 searches"));

    let scale = ExperimentConfig {
        n: vec![20, 40, 80],
        k: vec![2],
        beta: vec![0.0],
        repetitions: 3,
        algorithms: vec![Algorithm::Linar],
        ..ExperimentConfig::default()
    };
    let scaled = sweep(&scale, exec).expect("byte sweep");
    let points: Vec<(f64, f64)> = scale
        .n
        .iter()
        .map(|&n| {
            let v: Vec<f64> = scaled.iter().filter(|r| r.n == n).map(|r| r.bytes.total_bytes() as f64).collect();
            (n as f64, v.iter().sum::<f64>() / v.len() as f64)
        })
        .collect();
    let slope = log_slope(&points);
    rep.line(
        10,
        "byte growth exponent",
        slope <= 2.3,
        format!(
            "exponent {slope:.3}; mean bytes {}",
            points.iter().map(|(n, b)| format!("n{n}={b:.0}")).join(", ")
        ),
    );

    let example = Graph::from_edges(7, &[(0, 1), (0, 2), (0, 3), (0, 4), (0, 5), (0, 6), (1, 2), (2, 3), (4, 5), (5, 6)]).unwrap();
    let worked = support_degree(&example, NodeId(0), 2).unwrap();
    let stars = (1..=6).all(|m| {
        let edges: Vec<(usize, usize)> = (1..=m).map(|i| (0, i)).collect();
        support_degree(&Graph::from_edges(m + 1, &edges).unwrap(), NodeId(0), 1).unwrap() == (m * m) as f64
    });
    rep.line(11, "support degree examples", worked == 14.0 && stars, format!("worked example {worked}, stars {stars}"));

    let again = ExperimentConfig {
        output: std::env::temp_dir().join(format!("linar-acceptance-b-{}", std::process::id())),
        ..cfg.clone()
    };
    let (_, paths_b) = run_sweep(&again, exec).expect("second sweep");
    let identical = paths.iter().zip(&paths_b).all(|(a, b)| fs::read(a).unwrap() == fs::read(b).unwrap());
    rep.line(12, "desk sweep is byte-identical", identical, format!("{} files compared", paths.len()));
    for dir in [&cfg.output, &again.output] {
        let _ = fs::remove_dir_all(dir);
    }

    let field = Field::new(1000.0, 1000.0);
    let res = default_resolution(field);
    let disk = PI * 400.0;
    let one = covered_area(&[Position::new(500.0, 500.0)], 20.0, field, res).unwrap() / disk - 1.0;
    let two = covered_area(&[Position::new(300.0, 300.0), Position::new(700.0, 700.0)], 20.0, field, res).unwrap()
        / (2.0 * disk)
        - 1.0;
    let bad_rows = records.iter().filter(|r| r.general_loss_pct > r.primary_loss_pct + 1e-9).count();
    rep.line(
        13,
        "coverage engine",
        one.abs() < 0.01 && two.abs() < 0.01 && bad_rows == 0,
        format!(
            "single disk {:+.3}%, two disks {:+.3}%, {bad_rows}/{} rows with general > primary",
            one * 100.0,
            two * 100.0,
            records.len()
        ),
    );

    println!(
        "{}/{} criteria pass in {:.0?}",
        rep.total - rep.failed,
        rep.total,
        t0.elapsed()
    );
    if rep.failed > 0 && std::env::var("ACCEPTANCE_STRICT").is_ok_and(|v| v == "1") {
        std::process::exit(1);
    }
}
