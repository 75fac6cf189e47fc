//! Reader and writer for the `FLASER` lines of CARMEN robot logs.
//!
//! Layout: `FLASER n r1 … rn x y theta odom_x odom_y odom_theta ts host log_ts`.
//! Other line types are ignored. Malformed laser lines are skipped and
//! reported as warnings rather than failing the whole log.

use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::{Pose2, Transform2};
use crate::scan::PolarScan;
use crate::sim::beam_angles;

/// A pose exactly as stored in the log; the heading is not wrapped.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LogPose {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl LogPose {
    pub fn to_pose(self) -> Pose2 {
        Pose2::new(self.x, self.y, self.theta)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LaserRecord {
    pub ranges: Vec<f64>,
    pub laser_pose: LogPose,
    pub odom_pose: LogPose,
    pub timestamp: f64,
    pub host: String,
    pub logger_timestamp: f64,
}

/// A skipped line.
#[derive(Debug, Clone, PartialEq)]
pub struct ParseWarning {
    /// One-based line number.
    pub line: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CarmenLog {
    pub records: Vec<LaserRecord>,
    pub warnings: Vec<ParseWarning>,
}

/// Which pose field serves as ground truth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TruthSource {
    /// The corrected laser pose.
    #[default]
    Laser,
    Odometry,
}

/// Bearings of the readings in a laser line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamLayout {
    /// Field of view centred on the heading (rad).
    pub fov: f64,
    /// Readings at or beyond this are treated as no-return (m).
    pub max_range: f64,
}

impl Default for BeamLayout {
    /// 180° starting at -90°, as recorded by the SICK scanners common in
    /// CARMEN logs.
    fn default() -> Self {
        Self {
            fov: std::f64::consts::PI,
            max_range: 50.0,
        }
    }
}

impl BeamLayout {
    pub fn angles(&self, n: usize) -> Vec<f64> {
        beam_angles(n, self.fov)
    }
}

fn parse_flaser(tokens: &[&str]) -> std::result::Result<LaserRecord, String> {
    let n: usize = tokens
        .get(1)
        .ok_or("missing reading count")?
        .parse()
        .map_err(|_| format!("bad reading count `{}`", tokens[1]))?;
    // count, readings, two poses, timestamp, host, logger timestamp
    if tokens.len() - 1 != n + 10 {
        return Err(format!(
            "expected {} tokens after FLASER, found {}",
            n + 10,
            tokens.len() - 1
        ));
    }
    let rest = &tokens[2..];
    let num = |i: usize| -> std::result::Result<f64, String> {
        rest[i]
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| format!("bad number `{}`", rest[i]))
    };
    let ranges = (0..n).map(num).collect::<std::result::Result<Vec<_>, _>>()?;
    if let Some(r) = ranges.iter().find(|r| **r < 0.0) {
        return Err(format!("negative range {r}"));
    }
    let pose = |at: usize| -> std::result::Result<LogPose, String> {
        Ok(LogPose {
            x: num(at)?,
            y: num(at + 1)?,
            theta: num(at + 2)?,
        })
    };
    Ok(LaserRecord {
        laser_pose: pose(n)?,
        odom_pose: pose(n + 3)?,
        timestamp: num(n + 6)?,
        host: rest[n + 7].to_string(),
        logger_timestamp: num(n + 8)?,
        ranges,
    })
}

/// Parses every `FLASER` line of a log stream.
pub fn parse_carmen_log(reader: impl BufRead) -> Result<CarmenLog> {
    let mut log = CarmenLog::default();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io("<log stream>", e))?;
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.first() != Some(&"FLASER") {
            continue;
        }
        match parse_flaser(&tokens) {
            Ok(r) => log.records.push(r),
            Err(reason) => log.warnings.push(ParseWarning { line: i + 1, reason }),
        }
    }
    Ok(log)
}

pub fn read_carmen_file(path: &Path) -> Result<CarmenLog> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_carmen_log(std::io::BufReader::new(file))
}

/// One `FLASER` line. Numbers use the shortest representation that parses
/// back to the same value.
pub fn format_flaser(r: &LaserRecord) -> String {
    let mut s = format!("FLASER {}", r.ranges.len());
    for v in &r.ranges {
        write!(s, " {v}").expect("writing to a String");
    }
    for p in [r.laser_pose, r.odom_pose] {
        write!(s, " {} {} {}", p.x, p.y, p.theta).expect("writing to a String");
    }
    write!(s, " {} {} {}", r.timestamp, r.host, r.logger_timestamp).expect("writing to a String");
    s
}

pub fn write_carmen_log(records: &[LaserRecord], mut out: impl Write) -> std::io::Result<()> {
    for r in records {
        writeln!(out, "{}", format_flaser(r))?;
    }
    Ok(())
}

/// Transform taking pose `a` to pose `b`, in `a`'s frame.
pub fn relative_truth(a: &LaserRecord, b: &LaserRecord, source: TruthSource) -> Transform2 {
    let pick = |r: &LaserRecord| match source {
        TruthSource::Laser => r.laser_pose,
        TruthSource::Odometry => r.odom_pose,
    };
    pick(a).to_pose().relative(&pick(b).to_pose())
}

/// The record's readings with bearings from `layout`; ranges beyond the
/// maximum are clamped to it.
pub fn to_polar_scan(r: &LaserRecord, layout: &BeamLayout) -> Result<PolarScan> {
    PolarScan::from_ranges(&r.ranges, &layout.angles(r.ranges.len()), layout.max_range)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_PI_2;

    const LINE: &str = "FLASER 3 1.0 2.0 3.0 0.1 0.2 0.05 0.1 0.2 0.05 1.5 host 1.5";

    fn record(pose: (f64, f64, f64)) -> LaserRecord {
        LaserRecord {
            ranges: vec![1.0],
            laser_pose: LogPose {
                x: pose.0,
                y: pose.1,
                theta: pose.2,
            },
            odom_pose: LogPose::default(),
            timestamp: 0.0,
            host: "h".into(),
            logger_timestamp: 0.0,
        }
    }

    #[test]
    fn parses_fields() {
        let log = parse_carmen_log(LINE.as_bytes()).unwrap();
        assert!(log.warnings.is_empty());
        let r = &log.records[0];
        assert_eq!(r.ranges, vec![1.0, 2.0, 3.0]);
        assert_eq!(
            r.laser_pose,
            LogPose {
                x: 0.1,
                y: 0.2,
                theta: 0.05
            }
        );
        assert_eq!(
            r.odom_pose,
            LogPose {
                x: 0.1,
                y: 0.2,
                theta: 0.05
            }
        );
        assert_eq!(r.timestamp, 1.5);
        assert_eq!(r.host, "host");
        assert_eq!(r.logger_timestamp, 1.5);
    }

    #[test]
    fn skips_other_lines_and_counts_malformed() {
        let text = format!("# comment\nODOM 1 2 3 0 0 0 1 h 1\nPARAM x y\nFLASER 2 1.0\n{LINE}\nFLASER 1 -1 0 0 0 0 0 0 0 h 0\nFLASER x\n");
        let log = parse_carmen_log(text.as_bytes()).unwrap();
        assert_eq!(log.records.len(), 1);
        assert_eq!(log.warnings.len(), 3);
        assert_eq!(log.warnings[0].line, 4);
    }

    #[test]
    fn round_trip_is_exact() {
        let text = "FLASER 4 0.123456789 81.91 3 1e-3 -12.5 7.25 3.2 -0.001 1.0000000001 -3.14159 1000000.123 nohost 1000000.456\n";
        let log = parse_carmen_log(text.as_bytes()).unwrap();
        let mut buf = Vec::new();
        write_carmen_log(&log.records, &mut buf).unwrap();
        let again = parse_carmen_log(buf.as_slice()).unwrap();
        assert_eq!(again, log);
        // headings are kept as stored
        assert_eq!(log.records[0].laser_pose.theta, 3.2);
    }

    #[test]
    fn relative_truth_examples() {
        let a = record((0.0, 0.0, 0.0));
        let t = relative_truth(&a, &a, TruthSource::Laser);
        assert_eq!(t, Transform2::IDENTITY);
        let t = relative_truth(&a, &record((1.0, 0.0, 0.0)), TruthSource::Laser);
        assert_abs_diff_eq!(t.translation.x, 1.0);
        assert_abs_diff_eq!(t.rotation(), 0.0);
        let t = relative_truth(
            &record((0.0, 0.0, FRAC_PI_2)),
            &record((0.0, 1.0, FRAC_PI_2)),
            TruthSource::Laser,
        );
        assert_abs_diff_eq!(t.translation.x, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(t.translation.y, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(t.rotation(), 0.0, epsilon = 1e-12);
        // odometry ignores the laser field
        assert_eq!(
            relative_truth(&a, &record((5.0, 5.0, 1.0)), TruthSource::Odometry),
            Transform2::IDENTITY
        );
    }

    #[test]
    fn default_layout_spans_the_front_half() {
        let a = BeamLayout::default().angles(181);
        assert_abs_diff_eq!(a[0], -FRAC_PI_2, epsilon = 1e-12);
        assert_abs_diff_eq!(a[90], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(a[180], FRAC_PI_2, epsilon = 1e-12);
    }

    #[test]
    fn polar_scan_clamps_long_readings() {
        let mut r = record((0.0, 0.0, 0.0));
        r.ranges = vec![1.0, 81.9, 2.0];
        let s = to_polar_scan(&r, &BeamLayout::default()).unwrap();
        assert_eq!(s.readings()[1].range, 50.0);
        assert_eq!(s.len(), 3);
    }
}
