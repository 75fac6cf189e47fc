//! Flat `section.name = value` configuration.
//!
//! Files hold one assignment per line; blank lines and `#` comments are
//! ignored. The same keys are accepted as command-line overrides. Angles are
//! in radians.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::baseline::IterativeParams;
use crate::carmen::{BeamLayout, TruthSource};
use crate::cluster::{ClusterParams, ContributionMode};
use crate::error::{Error, Result};
use crate::hypothesis::GenParams;
use crate::sim::SensorModel;

/// Benchmark-level settings.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchSettings {
    /// Global seed; per-pair seeds are derived from it.
    pub seed: u64,
    /// Maximum number of scan pairs; `None` for all.
    pub pairs: Option<usize>,
    /// Distance in records between the two scans of a pair.
    pub pair_stride: usize,
    pub truth: TruthSource,
    pub moving_average_window: usize,
    /// Worker threads; 1 runs inline.
    pub jobs: usize,
    /// Thresholds (m) for the translation error CDF.
    pub cdf_thresholds: Vec<f64>,
}

impl Default for BenchSettings {
    fn default() -> Self {
        Self {
            seed: 0,
            pairs: None,
            pair_stride: 1,
            truth: TruthSource::Laser,
            moving_average_window: 50,
            jobs: 1,
            cdf_thresholds: (1..=40).map(|i| i as f64 * 0.1).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Config {
    pub gen: GenParams,
    pub cluster: ClusterParams,
    pub iter: IterativeParams,
    pub sensor: SensorModel,
    pub laser: BeamLayout,
    pub bench: BenchSettings,
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("`{key}`: cannot parse `{value}`")))
}

impl Config {
    /// Every key accepted by [`Config::set`].
    pub const KEYS: &'static [&'static str] = &[
        "gen.n_hypotheses",
        "gen.d_min",
        "gen.d_max",
        "gen.k",
        "gen.rng_seed",
        "cluster.n_seeds",
        "cluster.uniform_seed_fraction",
        "cluster.sigma0",
        "cluster.kappa0",
        "cluster.max_iterations",
        "cluster.d_thr",
        "cluster.r_thr",
        "cluster.stable_iters",
        "cluster.merge_dist",
        "cluster.merge_angle",
        "cluster.regularization_eps",
        "cluster.seed_angle_scale",
        "cluster.contribution",
        "cluster.rng_seed",
        "iter.max_iterations",
        "iter.correspondence_cutoff",
        "iter.convergence_eps_t",
        "iter.convergence_eps_r",
        "iter.angular_window",
        "sim.n_beams",
        "sim.fov",
        "sim.max_range",
        "sim.noise_std",
        "sim.rng_seed",
        "laser.fov",
        "laser.max_range",
        "bench.seed",
        "bench.pairs",
        "bench.pair_stride",
        "bench.truth",
        "bench.moving_average_window",
        "bench.jobs",
        "bench.cdf_thresholds",
    ];

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key {
            "gen.n_hypotheses" => self.gen.n_hypotheses = parse(key, v)?,
            "gen.d_min" => self.gen.d_min = parse(key, v)?,
            "gen.d_max" => self.gen.d_max = parse(key, v)?,
            "gen.k" => self.gen.k = parse(key, v)?,
            "gen.rng_seed" => self.gen.rng_seed = parse(key, v)?,
            "cluster.n_seeds" => self.cluster.n_seeds = parse(key, v)?,
            "cluster.uniform_seed_fraction" => self.cluster.uniform_seed_fraction = parse(key, v)?,
            "cluster.sigma0" => self.cluster.sigma0 = parse(key, v)?,
            "cluster.kappa0" => self.cluster.kappa0 = parse(key, v)?,
            "cluster.max_iterations" => self.cluster.max_iterations = parse(key, v)?,
            "cluster.d_thr" => self.cluster.d_thr = parse(key, v)?,
            "cluster.r_thr" => self.cluster.r_thr = parse(key, v)?,
            "cluster.stable_iters" => self.cluster.stable_iters = parse(key, v)?,
            "cluster.merge_dist" => self.cluster.merge_dist = parse(key, v)?,
            "cluster.merge_angle" => self.cluster.merge_angle = parse(key, v)?,
            "cluster.regularization_eps" => self.cluster.regularization_eps = parse(key, v)?,
            "cluster.seed_angle_scale" => self.cluster.seed_angle_scale = parse(key, v)?,
            "cluster.contribution" => {
                self.cluster.contribution = match v {
                    "projected" => ContributionMode::Projected,
                    "per_axis" => ContributionMode::PerAxis,
                    _ => {
                        return Err(Error::Config(format!(
                            "`{key}`: expected projected or per_axis, got `{v}`"
                        )))
                    }
                }
            }
            "cluster.rng_seed" => self.cluster.rng_seed = parse(key, v)?,
            "iter.max_iterations" => self.iter.max_iterations = parse(key, v)?,
            "iter.correspondence_cutoff" => self.iter.correspondence_cutoff = parse(key, v)?,
            "iter.convergence_eps_t" => self.iter.convergence_eps_t = parse(key, v)?,
            "iter.convergence_eps_r" => self.iter.convergence_eps_r = parse(key, v)?,
            "iter.angular_window" => self.iter.angular_window = parse(key, v)?,
            "sim.n_beams" => self.sensor.n_beams = parse(key, v)?,
            "sim.fov" => self.sensor.fov = parse(key, v)?,
            "sim.max_range" => self.sensor.max_range = parse(key, v)?,
            "sim.noise_std" => self.sensor.noise_std = parse(key, v)?,
            "sim.rng_seed" => self.sensor.rng_seed = parse(key, v)?,
            "laser.fov" => self.laser.fov = parse(key, v)?,
            "laser.max_range" => self.laser.max_range = parse(key, v)?,
            "bench.seed" => self.bench.seed = parse(key, v)?,
            "bench.pairs" => {
                self.bench.pairs = match v {
                    "all" => None,
                    _ => Some(parse(key, v)?),
                }
            }
            "bench.pair_stride" => self.bench.pair_stride = parse(key, v)?,
            "bench.truth" => {
                self.bench.truth = match v {
                    "laser" => TruthSource::Laser,
                    "odometry" => TruthSource::Odometry,
                    _ => return Err(Error::Config(format!("`{key}`: expected laser or odometry, got `{v}`"))),
                }
            }
            "bench.moving_average_window" => self.bench.moving_average_window = parse(key, v)?,
            "bench.jobs" => self.bench.jobs = parse(key, v)?,
            "bench.cdf_thresholds" => {
                self.bench.cdf_thresholds = v
                    .split(',')
                    .map(|t| parse(key, t.trim()))
                    .collect::<Result<Vec<f64>>>()?
            }
            _ => return Err(Error::Config(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    /// Applies every assignment in `text` on top of the current values.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", i + 1)))?;
            self.set(key.trim(), value)
                .map_err(|e| Error::Config(format!("line {}: {e}", i + 1)))?;
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(PathBuf::from(path), e))?;
        let mut c = Config::default();
        c.apply_text(&text)?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        self.gen.validate()?;
        self.cluster.validate()?;
        self.iter.validate()?;
        if self.bench.pair_stride == 0 {
            return Err(Error::Config("bench.pair_stride must be at least 1".into()));
        }
        if self.bench.moving_average_window == 0 {
            return Err(Error::Config("bench.moving_average_window must be at least 1".into()));
        }
        if self.bench.jobs == 0 {
            return Err(Error::Config("bench.jobs must be at least 1".into()));
        }
        if self.bench.cdf_thresholds.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Config("bench.cdf_thresholds must be strictly increasing".into()));
        }
        if !(self.laser.fov > 0.0 && self.laser.fov <= std::f64::consts::TAU && self.laser.max_range > 0.0) {
            return Err(Error::Config(
                "laser.fov must lie in (0, 2π] and laser.max_range be positive".into(),
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_then_override() {
        let mut c = Config::default();
        c.apply_text("# tuning\ngen.n_hypotheses = 800\n\ncluster.contribution = per_axis  # alt\nbench.pairs = 500\n")
            .unwrap();
        assert_eq!(c.gen.n_hypotheses, 800);
        assert_eq!(c.cluster.contribution, ContributionMode::PerAxis);
        assert_eq!(c.bench.pairs, Some(500));
        c.set("gen.n_hypotheses", "300").unwrap();
        assert_eq!(c.gen.n_hypotheses, 300);
        c.set("bench.cdf_thresholds", "0.5, 1, 2").unwrap();
        assert_eq!(c.bench.cdf_thresholds, vec![0.5, 1.0, 2.0]);
        c.validate().unwrap();
    }

    #[test]
    fn every_listed_key_is_settable() {
        for key in Config::KEYS {
            let value = match *key {
                "cluster.contribution" => "projected",
                "bench.truth" => "odometry",
                "bench.cdf_thresholds" => "1,2",
                _ => "1",
            };
            Config::default()
                .set(key, value)
                .unwrap_or_else(|e| panic!("{key}: {e}"));
        }
    }

    #[test]
    fn errors_name_the_problem() {
        let mut c = Config::default();
        assert!(matches!(c.set("gen.nope", "1"), Err(Error::Config(_))));
        assert!(matches!(c.set("gen.k", "four"), Err(Error::Config(_))));
        let e = c.apply_text("gen.k 4").unwrap_err().to_string();
        assert!(e.contains("line 1"), "{e}");
        c.set("bench.pair_stride", "0").unwrap();
        assert!(c.validate().is_err());
    }
}
