//! Benchmark harness: runs matchers over scan pairs, times them and
//! summarises their errors.

use std::io::{BufRead, Write};
use std::time::Instant;

use rayon::prelude::*;

use crate::baseline::{icp_match, idc_match};
use crate::carmen::{relative_truth, to_polar_scan, LaserRecord};
use crate::cluster::ClusterParams;
use crate::config::Config;
use crate::error::{Error, Result};
use crate::geometry::{angle_diff, Pose2, Transform2};
use crate::hypothesis::GenParams;
use crate::matcher::match_scans;
use crate::scan::{polar_to_cartesian, PolarScan};
use crate::sim::{integrate, raytrace_scan, six_step_trajectory, Environment, SensorModel};

/// First line of a records CSV.
pub const RECORDS_SCHEMA: &str = "# mhsm match records v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Matcher {
    Mhsm,
    Icp,
    Idc,
}

impl Matcher {
    pub const ALL: [Matcher; 3] = [Matcher::Mhsm, Matcher::Icp, Matcher::Idc];

    pub fn label(self) -> &'static str {
        match self {
            Matcher::Mhsm => "mhsm",
            Matcher::Icp => "icp",
            Matcher::Idc => "idc",
        }
    }
}

impl std::str::FromStr for Matcher {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Matcher::ALL
            .into_iter()
            .find(|m| m.label() == s)
            .ok_or_else(|| Error::Config(format!("unknown matcher `{s}` (expected mhsm, icp or idc)")))
    }
}

impl std::fmt::Display for Matcher {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// Two polar scans with the transform taking `current` into `reference`
/// coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanPair {
    pub index: usize,
    pub reference: PolarScan,
    pub current: PolarScan,
    pub truth: Transform2,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchRecord {
    pub pair_index: usize,
    pub matcher: Matcher,
    pub truth: Transform2,
    pub estimate: Transform2,
    pub trans_error: f64,
    pub rot_error: f64,
    /// End to end, including scan conversion and index construction (ms).
    pub runtime_ms: f64,
    /// The part of `runtime_ms` spent building the Cartesian scans.
    pub prepare_ms: f64,
    /// The matcher failed or ran out of correspondences; `estimate` is then
    /// its fallback (identity on failure).
    pub degraded: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchSummary {
    pub matcher: Matcher,
    pub pairs: usize,
    /// `sqrt(mean e²)` over translation errors (m).
    pub rmse_translation: f64,
    /// `sqrt(mean e²)` over rotation errors (rad).
    pub rmse_rotation: f64,
    pub mean_translation: f64,
    pub mean_rotation: f64,
    pub mean_runtime_ms: f64,
    /// Population variance of the runtimes (ms²).
    pub runtime_variance: f64,
    pub degraded: usize,
    /// Translation error CDF at the configured thresholds, closed with
    /// `(∞, 1)`.
    pub error_cdf: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    /// Ordered by pair, then by matcher in the requested order.
    pub records: Vec<MatchRecord>,
    pub summaries: Vec<BenchSummary>,
}

/// Translation distance and wrapped absolute rotation difference.
pub fn pair_errors(truth: &Transform2, estimate: &Transform2) -> (f64, f64) {
    (
        estimate.translation.distance(truth.translation),
        angle_diff(estimate.rotation(), truth.rotation()).abs(),
    )
}

/// Fraction of `values` strictly below `threshold`.
pub fn fraction_below(values: &[f64], threshold: f64) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.iter().filter(|&&v| v < threshold).count() as f64 / values.len() as f64
}

/// Translation error CDF of `records` at each threshold.
pub fn error_cdf(records: &[MatchRecord], thresholds: &[f64]) -> Vec<(f64, f64)> {
    let errors: Vec<f64> = records.iter().map(|r| r.trans_error).collect();
    thresholds.iter().map(|&t| (t, fraction_below(&errors, t))).collect()
}

/// Trailing moving average; the first `window - 1` entries average what is
/// available.
pub fn moving_average(values: &[f64], window: usize) -> Vec<f64> {
    let window = window.max(1);
    let mut sum = 0.0;
    values
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            sum += v;
            if i >= window {
                sum -= values[i - window];
            }
            sum / (i + 1).min(window) as f64
        })
        .collect()
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Independent seed for one use (`stream`) at one pair, derived from the
/// global seed.
pub fn derive_seed(global: u64, pair: usize, stream: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(global) ^ pair as u64) ^ stream)
}

/// The six-step trajectory in a 6 m × 4 m room, one pair per step.
pub fn synthetic_pairs(sensor: &SensorModel, seed: u64) -> Result<Vec<ScanPair>> {
    let env = Environment::rectangle(6.0, 4.0);
    let steps = six_step_trajectory();
    let poses = integrate(Pose2::default(), &steps);
    let scans = poses
        .iter()
        .enumerate()
        .map(|(i, pose)| {
            let s = SensorModel {
                rng_seed: derive_seed(seed, i, 0),
                ..*sensor
            };
            raytrace_scan(&env, pose, &s)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((0..steps.len())
        .map(|i| ScanPair {
            index: i,
            reference: scans[i].clone(),
            current: scans[i + 1].clone(),
            truth: poses[i].relative(&poses[i + 1]),
        })
        .collect())
}

/// Pairs `(i, i + stride)` of log records, the earlier one as reference.
pub fn log_pairs(records: &[LaserRecord], config: &Config) -> Result<Vec<ScanPair>> {
    let stride = config.bench.pair_stride.max(1);
    let available = records.len().saturating_sub(stride);
    let n = config.bench.pairs.map_or(available, |p| p.min(available));
    (0..n)
        .map(|i| {
            let (a, b) = (&records[i], &records[i + stride]);
            Ok(ScanPair {
                index: i,
                reference: to_polar_scan(a, &config.laser)?,
                current: to_polar_scan(b, &config.laser)?,
                truth: relative_truth(a, b, config.bench.truth),
            })
        })
        .collect()
}

/// Runs one matcher on one pair with seeds derived for that pair.
pub fn run_pair(pair: &ScanPair, matcher: Matcher, config: &Config) -> MatchRecord {
    let gen = GenParams {
        rng_seed: derive_seed(config.bench.seed, pair.index, 1),
        ..config.gen
    };
    let clus = ClusterParams {
        rng_seed: derive_seed(config.bench.seed, pair.index, 2),
        ..config.cluster
    };

    let start = Instant::now();
    let reference = polar_to_cartesian(&pair.reference, true);
    let current = polar_to_cartesian(&pair.current, true);
    let prepared = Instant::now();
    let outcome: Result<(Transform2, bool)> = match matcher {
        Matcher::Mhsm => match_scans(&current, &reference, &gen, &clus)
            .and_then(|r| r.best().map(|c| (c.transform, false)).ok_or(Error::NoClusters)),
        Matcher::Icp => {
            icp_match(&current, &reference, Transform2::IDENTITY, &config.iter).map(|r| (r.transform, r.degraded))
        }
        Matcher::Idc => {
            idc_match(&current, &reference, Transform2::IDENTITY, &config.iter).map(|r| (r.transform, r.degraded))
        }
    };
    let end = Instant::now();

    let (estimate, degraded) = outcome.unwrap_or_else(|e| {
        log::warn!("pair {} ({matcher}): {e}; using identity", pair.index);
        (Transform2::IDENTITY, true)
    });
    let (trans_error, rot_error) = pair_errors(&pair.truth, &estimate);
    MatchRecord {
        pair_index: pair.index,
        matcher,
        truth: pair.truth,
        estimate,
        trans_error,
        rot_error,
        runtime_ms: (end - start).as_secs_f64() * 1e3,
        prepare_ms: (prepared - start).as_secs_f64() * 1e3,
        degraded,
    }
}

pub fn summarize(records: &[MatchRecord], matcher: Matcher, thresholds: &[f64]) -> BenchSummary {
    let rs: Vec<MatchRecord> = records.iter().filter(|r| r.matcher == matcher).copied().collect();
    let n = rs.len().max(1) as f64;
    let mean = |f: &dyn Fn(&MatchRecord) -> f64| rs.iter().map(f).sum::<f64>() / n;
    let mean_runtime = mean(&|r| r.runtime_ms);
    let mut cdf = error_cdf(&rs, thresholds);
    cdf.push((f64::INFINITY, if rs.is_empty() { 0.0 } else { 1.0 }));
    BenchSummary {
        matcher,
        pairs: rs.len(),
        rmse_translation: mean(&|r| r.trans_error * r.trans_error).sqrt(),
        rmse_rotation: mean(&|r| r.rot_error * r.rot_error).sqrt(),
        mean_translation: mean(&|r| r.trans_error),
        mean_rotation: mean(&|r| r.rot_error),
        mean_runtime_ms: mean_runtime,
        runtime_variance: mean(&|r| (r.runtime_ms - mean_runtime).powi(2)),
        degraded: rs.iter().filter(|r| r.degraded).count(),
        error_cdf: cdf,
    }
}

/// Matches every pair with every matcher.
pub fn run_benchmark(pairs: &[ScanPair], matchers: &[Matcher], config: &Config) -> Result<BenchReport> {
    config.validate()?;
    if pairs.is_empty() {
        return Err(Error::NoPairs);
    }
    if matchers.is_empty() {
        return Err(Error::Config("no matchers selected".into()));
    }
    let per_pair = |p: &ScanPair| matchers.iter().map(|&m| run_pair(p, m, config)).collect::<Vec<_>>();
    let records: Vec<MatchRecord> = if config.bench.jobs > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.bench.jobs)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
        pool.install(|| pairs.par_iter().map(per_pair).collect::<Vec<_>>())
            .into_iter()
            .flatten()
            .collect()
    } else {
        pairs.iter().flat_map(per_pair).collect()
    };
    let summaries = matchers
        .iter()
        .map(|&m| summarize(&records, m, &config.bench.cdf_thresholds))
        .collect();
    Ok(BenchReport { records, summaries })
}

/// Nine significant digits.
fn sig9(v: f64) -> String {
    format!("{v:.8e}")
}

const RECORD_HEADER: [&str; 13] = [
    "pair_index",
    "matcher",
    "truth_x",
    "truth_y",
    "truth_theta",
    "est_x",
    "est_y",
    "est_theta",
    "trans_error",
    "rot_error",
    "runtime_ms",
    "prepare_ms",
    "degraded",
];

/// Records as CSV: a schema line, a header, then one row per record.
/// Floats carry nine significant digits; angles are radians.
pub fn write_records(records: &[MatchRecord], mut out: impl Write) -> Result<()> {
    writeln!(out, "{RECORDS_SCHEMA}").map_err(|e| Error::io("<records>", e))?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RECORD_HEADER)?;
    for r in records {
        let mut row = vec![r.pair_index.to_string(), r.matcher.label().to_string()];
        for v in [
            r.truth.translation.x,
            r.truth.translation.y,
            r.truth.rotation(),
            r.estimate.translation.x,
            r.estimate.translation.y,
            r.estimate.rotation(),
            r.trans_error,
            r.rot_error,
            r.runtime_ms,
            r.prepare_ms,
        ] {
            row.push(sig9(v));
        }
        row.push(u8::from(r.degraded).to_string());
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io("<records>", e))?;
    Ok(())
}

pub fn read_records(mut input: impl BufRead) -> Result<Vec<MatchRecord>> {
    let mut first = String::new();
    input.read_line(&mut first).map_err(|e| Error::io("<records>", e))?;
    if first.trim_end() != RECORDS_SCHEMA {
        return Err(Error::Config(format!(
            "records file does not start with `{RECORDS_SCHEMA}`"
        )));
    }
    let mut rdr = csv::Reader::from_reader(input);
    if rdr.headers()?.iter().ne(RECORD_HEADER) {
        return Err(Error::Config("unexpected records header".into()));
    }
    let mut out = Vec::new();
    for row in rdr.records() {
        let row = row?;
        let field = |i: usize| row.get(i).unwrap_or("");
        let num = |i: usize| -> Result<f64> {
            field(i)
                .parse()
                .map_err(|_| Error::Config(format!("column {}: bad number `{}`", RECORD_HEADER[i], field(i))))
        };
        out.push(MatchRecord {
            pair_index: field(0)
                .parse()
                .map_err(|_| Error::Config(format!("bad pair index `{}`", field(0))))?,
            matcher: field(1).parse()?,
            truth: Transform2::from_xyt(num(2)?, num(3)?, num(4)?),
            estimate: Transform2::from_xyt(num(5)?, num(6)?, num(7)?),
            trans_error: num(8)?,
            rot_error: num(9)?,
            runtime_ms: num(10)?,
            prepare_ms: num(11)?,
            degraded: field(12) == "1",
        });
    }
    Ok(out)
}

pub fn write_summaries(summaries: &[BenchSummary], mut out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(&mut out);
    w.write_record([
        "matcher",
        "pairs",
        "rmse_translation",
        "rmse_rotation",
        "mean_translation",
        "mean_rotation",
        "mean_runtime_ms",
        "runtime_variance",
        "degraded",
    ])?;
    for s in summaries {
        let mut row = vec![s.matcher.label().to_string(), s.pairs.to_string()];
        for v in [
            s.rmse_translation,
            s.rmse_rotation,
            s.mean_translation,
            s.mean_rotation,
            s.mean_runtime_ms,
            s.runtime_variance,
        ] {
            row.push(sig9(v));
        }
        row.push(s.degraded.to_string());
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io("<summary>", e))?;
    Ok(())
}

/// One row per (matcher, threshold).
pub fn write_cdf(summaries: &[BenchSummary], mut out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(&mut out);
    w.write_record(["matcher", "threshold", "fraction"])?;
    for s in summaries {
        for &(t, f) in &s.error_cdf {
            w.write_record([s.matcher.label().to_string(), sig9(t), sig9(f)])?;
        }
    }
    w.flush().map_err(|e| Error::io("<cdf>", e))?;
    Ok(())
}

/// Trailing moving averages of runtime and errors, per matcher, in pair order.
pub fn write_moving_averages(
    records: &[MatchRecord],
    matchers: &[Matcher],
    window: usize,
    mut out: impl Write,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(&mut out);
    w.write_record(["pair_index", "matcher", "runtime_ms", "trans_error", "rot_error"])?;
    for &m in matchers {
        let rs: Vec<&MatchRecord> = records.iter().filter(|r| r.matcher == m).collect();
        let col = |f: fn(&MatchRecord) -> f64| moving_average(&rs.iter().map(|r| f(r)).collect::<Vec<_>>(), window);
        let (rt, te, re) = (col(|r| r.runtime_ms), col(|r| r.trans_error), col(|r| r.rot_error));
        for (i, r) in rs.iter().enumerate() {
            w.write_record([
                r.pair_index.to_string(),
                m.label().to_string(),
                sig9(rt[i]),
                sig9(te[i]),
                sig9(re[i]),
            ])?;
        }
    }
    w.flush().map_err(|e| Error::io("<moving averages>", e))?;
    Ok(())
}
