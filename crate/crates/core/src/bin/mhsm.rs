use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use mhsm::bench::{
    error_cdf, log_pairs, read_records, run_benchmark, run_pair, synthetic_pairs, write_cdf, write_moving_averages,
    write_records, write_summaries, BenchSummary, Matcher, ScanPair,
};
use mhsm::carmen::{read_carmen_file, write_carmen_log, LaserRecord, LogPose};
use mhsm::config::Config;
use mhsm::sim::{integrate, raytrace_scan, six_step_trajectory, Environment, SensorModel};
use mhsm::{match_scans, polar_to_cartesian, Error, Pose2, Result, Transform2};

/// Multi-hypothesis 2D scan matching and benchmarks.
///
/// Any configuration key can be overridden with `--param.<section>.<name> <value>`,
/// for example `--param.gen.n_hypotheses 800`.
#[derive(Parser, Debug)]
#[command(name = "mhsm", version)]
struct Cli {
    /// Flat `key = value` configuration file, applied before overrides.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a synthetic CARMEN log recorded in a 6 m × 4 m room.
    Simulate {
        /// Destination; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Random-walk length; the six-step test trajectory when omitted.
        #[arg(long)]
        walk: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Match a single scan pair and print the candidates.
    Match {
        /// CARMEN log; the synthetic trajectory when omitted.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Pair index.
        #[arg(long, default_value_t = 0)]
        pair: usize,
        #[arg(long = "matcher", value_name = "NAME")]
        matchers: Vec<String>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run matchers over every pair and write CSV reports.
    Bench {
        /// CARMEN log; the synthetic trajectory when omitted.
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long = "matcher", value_name = "NAME")]
        matchers: Vec<String>,
        /// Use at most this many pairs.
        #[arg(long)]
        pairs: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory for records.csv, summary.csv, cdf.csv and moving_average.csv.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Translation error CDF of a records CSV.
    Cdf {
        #[arg(long)]
        input: PathBuf,
        #[arg(long = "matcher", value_name = "NAME")]
        matchers: Vec<String>,
        /// Destination; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Remaining arguments and `(key, value)` overrides.
type SplitArgs = (Vec<String>, Vec<(String, String)>);

/// Pulls `--param.key value` and `--param.key=value` out of the arguments.
fn split_params(args: Vec<String>) -> Result<SplitArgs> {
    let mut rest = Vec::new();
    let mut params = Vec::new();
    let mut it = args.into_iter();
    while let Some(a) = it.next() {
        let Some(spec) = a.strip_prefix("--param.") else {
            rest.push(a);
            continue;
        };
        match spec.split_once('=') {
            Some((k, v)) => params.push((k.to_string(), v.to_string())),
            None => {
                let v = it
                    .next()
                    .ok_or_else(|| Error::Config(format!("--param.{spec} needs a value")))?;
                params.push((spec.to_string(), v));
            }
        }
    }
    Ok((rest, params))
}

fn parse_matchers(names: &[String], default: &[Matcher]) -> Result<Vec<Matcher>> {
    if names.is_empty() {
        return Ok(default.to_vec());
    }
    let mut out: Vec<Matcher> = Vec::new();
    for n in names {
        let m: Matcher = n.parse()?;
        if !out.contains(&m) {
            out.push(m);
        }
    }
    Ok(out)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(create(p)?),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn load_pairs(input: Option<&Path>, config: &Config) -> Result<Vec<ScanPair>> {
    match input {
        None => {
            let mut pairs = synthetic_pairs(&config.sensor, config.bench.seed)?;
            if let Some(n) = config.bench.pairs {
                pairs.truncate(n);
            }
            Ok(pairs)
        }
        Some(path) => {
            let log = read_carmen_file(path)?;
            for w in &log.warnings {
                log::warn!("{}:{}: skipped: {}", path.display(), w.line, w.reason);
            }
            if !log.warnings.is_empty() {
                eprintln!("warning: skipped {} malformed laser line(s)", log.warnings.len());
            }
            log_pairs(&log.records, config)
        }
    }
}

fn random_walk(steps: usize, seed: u64) -> Vec<Pose2> {
    // stay clear of the 6 × 4 walls
    let (hx, hy) = (2.5, 1.5);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut poses = vec![Pose2::default()];
    while poses.len() <= steps {
        let last = *poses.last().expect("non-empty");
        let step = Transform2::from_xyt(
            rng.random_range(-0.2..0.2),
            rng.random_range(-0.2..0.2),
            rng.random_range(-10f64..10.0).to_radians(),
        );
        let next = last.compose(&step);
        if next.x.abs() < hx && next.y.abs() < hy {
            poses.push(next);
        }
    }
    poses
}

fn simulate(config: &Config, out: Option<&Path>, walk: Option<usize>) -> Result<()> {
    let env = Environment::rectangle(6.0, 4.0);
    let poses = match walk {
        Some(n) => random_walk(n, config.bench.seed),
        None => integrate(Pose2::default(), &six_step_trajectory()),
    };
    // beams laid out the way the log reader expects them
    let sensor = SensorModel {
        fov: config.laser.fov,
        max_range: config.sensor.max_range.min(config.laser.max_range),
        ..config.sensor
    };
    let records = poses
        .iter()
        .enumerate()
        .map(|(i, pose)| {
            let s = SensorModel {
                rng_seed: mhsm::bench::derive_seed(config.bench.seed, i, 0),
                ..sensor
            };
            let scan = raytrace_scan(&env, pose, &s)?;
            let p = LogPose {
                x: pose.x,
                y: pose.y,
                theta: pose.theta(),
            };
            let t = i as f64 * 0.1;
            Ok(LaserRecord {
                ranges: scan.readings().iter().map(|r| r.range).collect(),
                laser_pose: p,
                odom_pose: p,
                timestamp: t,
                host: "sim".to_string(),
                logger_timestamp: t,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut w = output(out)?;
    write_carmen_log(&records, &mut w).map_err(|e| Error::io(out.unwrap_or(Path::new("<stdout>")), e))?;
    w.flush()
        .map_err(|e| Error::io(out.unwrap_or(Path::new("<stdout>")), e))
}

fn fmt_transform(t: &Transform2) -> String {
    format!(
        "({:+.4} m, {:+.4} m, {:+.3}°)",
        t.translation.x,
        t.translation.y,
        t.rotation().to_degrees()
    )
}

fn match_one(config: &Config, input: Option<&Path>, pair: usize, matchers: &[Matcher]) -> Result<()> {
    let pairs = load_pairs(
        input,
        &Config {
            bench: mhsm::config::BenchSettings {
                pairs: Some(pair + 1),
                ..config.bench.clone()
            },
            ..config.clone()
        },
    )?;
    let p = pairs
        .get(pair)
        .ok_or_else(|| Error::Config(format!("pair {pair} out of range ({} available)", pairs.len())))?;
    println!("pair {pair}: truth {}", fmt_transform(&p.truth));
    for &m in matchers {
        let r = run_pair(p, m, config);
        println!(
            "{m}: {} error {:.4} m / {:.3}° in {:.2} ms{}",
            fmt_transform(&r.estimate),
            r.trans_error,
            r.rot_error.to_degrees(),
            r.runtime_ms,
            if r.degraded { " (degraded)" } else { "" }
        );
        if m == Matcher::Mhsm {
            // the full candidate list with the same seeds as above
            let gen = mhsm::GenParams {
                rng_seed: mhsm::bench::derive_seed(config.bench.seed, p.index, 1),
                ..config.gen
            };
            let clus = mhsm::ClusterParams {
                rng_seed: mhsm::bench::derive_seed(config.bench.seed, p.index, 2),
                ..config.cluster
            };
            let cur = polar_to_cartesian(&p.current, true);
            let reference = polar_to_cartesian(&p.reference, true);
            if let Ok(res) = match_scans(&cur, &reference, &gen, &clus) {
                for (i, c) in res.candidates.iter().enumerate() {
                    println!(
                        "  #{i}: {} weight {:.3} asr {:.3e} m² members {}",
                        fmt_transform(&c.transform),
                        c.weight,
                        c.asr,
                        c.members
                    );
                }
            }
        }
    }
    Ok(())
}

fn print_summaries(summaries: &[BenchSummary]) {
    println!(
        "{:<6} {:>6} {:>12} {:>12} {:>12} {:>12} {:>8} {:>8}",
        "match", "pairs", "rmse_t [m]", "rmse_r [°]", "mean_t [m]", "mean_r [°]", "ms", "<1 m"
    );
    for s in summaries {
        let below_1m = s
            .error_cdf
            .iter()
            .find(|(t, _)| (*t - 1.0).abs() < 1e-12)
            .map_or("-".to_string(), |(_, f)| format!("{:.0}%", f * 100.0));
        println!(
            "{:<6} {:>6} {:>12.4} {:>12.3} {:>12.4} {:>12.3} {:>8.2} {:>8}",
            s.matcher.label(),
            s.pairs,
            s.rmse_translation,
            s.rmse_rotation.to_degrees(),
            s.mean_translation,
            s.mean_rotation.to_degrees(),
            s.mean_runtime_ms,
            below_1m
        );
        if s.degraded > 0 {
            eprintln!("warning: {} degraded match(es) for {}", s.degraded, s.matcher);
        }
    }
}

fn bench(config: &Config, input: Option<&Path>, matchers: &[Matcher], out: Option<&Path>) -> Result<()> {
    let pairs = load_pairs(input, config)?;
    let report = run_benchmark(&pairs, matchers, config)?;
    print_summaries(&report.summaries);
    if let Some(dir) = out {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let file = |name: &str| create(&dir.join(name));
        let mut w = file("records.csv")?;
        write_records(&report.records, &mut w)?;
        w.flush().map_err(|e| Error::io(dir.join("records.csv"), e))?;
        write_summaries(&report.summaries, file("summary.csv")?)?;
        write_cdf(&report.summaries, file("cdf.csv")?)?;
        write_moving_averages(
            &report.records,
            matchers,
            config.bench.moving_average_window,
            file("moving_average.csv")?,
        )?;
    }
    Ok(())
}

fn cdf(config: &Config, input: &Path, matchers: &[String], out: Option<&Path>) -> Result<()> {
    let file = File::open(input).map_err(|e| Error::io(input, e))?;
    let records = read_records(BufReader::new(file))?;
    let mut present: Vec<Matcher> = Vec::new();
    for r in &records {
        if !present.contains(&r.matcher) {
            present.push(r.matcher);
        }
    }
    let selected = parse_matchers(matchers, &present)?;
    let mut w = csv::Writer::from_writer(output(out)?);
    w.write_record(["matcher", "threshold", "fraction"])?;
    for m in selected {
        let rs: Vec<_> = records.iter().filter(|r| r.matcher == m).copied().collect();
        if rs.is_empty() {
            eprintln!("warning: no records for {m}");
            continue;
        }
        for (t, f) in error_cdf(&rs, &config.bench.cdf_thresholds) {
            w.write_record([m.label().to_string(), format!("{t:.8e}"), format!("{f:.8e}")])?;
        }
    }
    w.flush()
        .map_err(|e| Error::io(out.unwrap_or(Path::new("<stdout>")), e))
}

fn run() -> Result<()> {
    let (args, params) = split_params(std::env::args().collect())?;
    let cli = Cli::parse_from(args);
    let mut config = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    for (k, v) in &params {
        config.set(k, v)?;
    }
    match &cli.command {
        Command::Simulate { seed, .. } | Command::Match { seed, .. } | Command::Bench { seed, .. } => {
            if let Some(s) = seed {
                config.bench.seed = *s;
            }
        }
        Command::Cdf { .. } => {}
    }
    if let Command::Bench { pairs: Some(n), .. } = &cli.command {
        config.bench.pairs = Some(*n);
    }
    config.validate()?;

    match &cli.command {
        Command::Simulate { out, walk, .. } => simulate(&config, out.as_deref(), *walk),
        Command::Match {
            input, pair, matchers, ..
        } => match_one(
            &config,
            input.as_deref(),
            *pair,
            &parse_matchers(matchers, &Matcher::ALL)?,
        ),
        Command::Bench {
            input, matchers, out, ..
        } => bench(
            &config,
            input.as_deref(),
            &parse_matchers(matchers, &[Matcher::Mhsm, Matcher::Idc])?,
            out.as_deref(),
        ),
        Command::Cdf { input, matchers, out } => cdf(&config, input, matchers, out.as_deref()),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
