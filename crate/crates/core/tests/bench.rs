use std::process::Command;

use mhsm::bench::{read_records, run_benchmark, synthetic_pairs, write_records, Matcher, RECORDS_SCHEMA};
use mhsm::config::Config;
use mhsm::sim::SensorModel;

fn quick_config() -> Config {
    let mut c = Config::default();
    c.bench.seed = 7;
    c
}

#[test]
fn benchmark_errors_are_reproducible() {
    let config = quick_config();
    let pairs = synthetic_pairs(&SensorModel::default(), 7).unwrap();
    let a = run_benchmark(&pairs, &Matcher::ALL, &config).unwrap();
    let b = run_benchmark(
        &pairs,
        &Matcher::ALL,
        &Config {
            bench: mhsm::config::BenchSettings {
                jobs: 3,
                ..config.bench.clone()
            },
            ..config.clone()
        },
    )
    .unwrap();
    assert_eq!(a.records.len(), pairs.len() * 3);
    for (x, y) in a.records.iter().zip(&b.records) {
        assert_eq!((x.pair_index, x.matcher), (y.pair_index, y.matcher));
        assert_eq!(x.estimate, y.estimate);
        assert_eq!((x.trans_error, x.rot_error), (y.trans_error, y.rot_error));
    }
    let s = &a.summaries[0];
    assert_eq!(s.error_cdf.last().unwrap().1, 1.0);
    assert!(s.error_cdf.windows(2).all(|w| w[0].1 <= w[1].1));
}

#[test]
fn timing_covers_the_preparation() {
    let pairs = synthetic_pairs(&SensorModel::default(), 1).unwrap();
    let report = run_benchmark(&pairs[..2], &Matcher::ALL, &quick_config()).unwrap();
    for r in &report.records {
        assert!(r.prepare_ms > 0.0, "{r:?}");
        assert!(r.runtime_ms >= r.prepare_ms, "{r:?}");
    }
}

#[test]
fn records_csv_is_stable() {
    let pairs = synthetic_pairs(&SensorModel::default(), 3).unwrap();
    let report = run_benchmark(&pairs[..3], &[Matcher::Mhsm, Matcher::Icp], &quick_config()).unwrap();
    let mut first = Vec::new();
    write_records(&report.records, &mut first).unwrap();
    assert!(first.starts_with(RECORDS_SCHEMA.as_bytes()));
    let back = read_records(first.as_slice()).unwrap();
    let mut second = Vec::new();
    write_records(&back, &mut second).unwrap();
    assert_eq!(first, second);
    let rel = |a: f64, b: f64| (a - b).abs() <= 5e-9 * a.abs().max(b.abs()) || a == b;
    for (x, y) in report.records.iter().zip(&back) {
        assert_eq!(
            (x.pair_index, x.matcher, x.degraded),
            (y.pair_index, y.matcher, y.degraded)
        );
        for (a, b) in [
            (x.trans_error, y.trans_error),
            (x.rot_error, y.rot_error),
            (x.runtime_ms, y.runtime_ms),
            (x.estimate.translation.x, y.estimate.translation.x),
            (x.estimate.rotation(), y.estimate.rotation()),
            (x.truth.translation.y, y.truth.translation.y),
        ] {
            assert!(rel(a, b), "{a} vs {b}");
        }
    }
}

fn mhsm() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_mhsm"));
    c.env("RUST_LOG", "error");
    c
}

#[test]
fn cli_simulate_bench_cdf() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("sim.log");
    let out = mhsm()
        .args(["simulate", "--walk", "12", "--seed", "4", "--out"])
        .arg(&log)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let parsed = mhsm::carmen::read_carmen_file(&log).unwrap();
    assert_eq!(parsed.records.len(), 13);
    assert!(parsed.warnings.is_empty());

    let results = dir.path().join("results");
    let out = mhsm()
        .args([
            "bench",
            "--matcher",
            "mhsm",
            "--matcher",
            "icp",
            "--pairs",
            "5",
            "--param.laser.fov",
            "6.283185307179586",
            "--input",
        ])
        .arg(&log)
        .arg("--out")
        .arg(&results)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let table = String::from_utf8(out.stdout).unwrap();
    assert!(table.contains("mhsm") && table.contains("icp"), "{table}");
    for f in ["records.csv", "summary.csv", "cdf.csv", "moving_average.csv"] {
        assert!(results.join(f).is_file(), "{f}");
    }
    let records = read_records(std::io::BufReader::new(
        std::fs::File::open(results.join("records.csv")).unwrap(),
    ))
    .unwrap();
    assert_eq!(records.len(), 10);

    let cdf = dir.path().join("cdf.csv");
    let out = mhsm()
        .args([
            "cdf",
            "--matcher",
            "icp",
            "--param.bench.cdf_thresholds=0.5,1",
            "--input",
        ])
        .arg(results.join("records.csv"))
        .arg("--out")
        .arg(&cdf)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&cdf).unwrap();
    assert_eq!(text.lines().count(), 3, "{text}");
    assert!(text.lines().skip(1).all(|l| l.starts_with("icp,")));
}

#[test]
fn cli_synthetic_match_prints_candidates() {
    let out = mhsm()
        .args(["match", "--pair", "2", "--matcher", "mhsm"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(!out.stdout.is_empty());
}

#[test]
fn cli_reports_errors_with_exit_code() {
    let out = mhsm().args(["bench", "--param.gen.bogus", "1"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error:"));
    let out = mhsm()
        .args(["cdf", "--input", "/nonexistent/records.csv"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}
