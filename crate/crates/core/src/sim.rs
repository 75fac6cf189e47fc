//! Raytraced range scans of polygonal rooms.

use std::f64::consts::{PI, TAU};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::geometry::{Point2, Pose2, Transform2};
use crate::scan::{PolarScan, Reading};

const PARALLEL_EPS: f64 = 1e-12;

/// A wall from `a` to `b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub a: Point2,
    pub b: Point2,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Environment {
    segments: Vec<Segment>,
}

impl Environment {
    pub fn new(segments: Vec<Segment>) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::InvalidParameter {
                name: "segments",
                reason: "environment has no walls".into(),
            });
        }
        if let Some(i) = segments.iter().position(|s| s.a == s.b) {
            return Err(Error::InvalidParameter {
                name: "segments",
                reason: format!("segment {i} has coincident endpoints"),
            });
        }
        Ok(Self { segments })
    }

    /// Axis-aligned `width × height` room centred on the origin.
    pub fn rectangle(width: f64, height: f64) -> Self {
        let (hw, hh) = (width / 2.0, height / 2.0);
        let c = [
            Point2::new(-hw, -hh),
            Point2::new(hw, -hh),
            Point2::new(hw, hh),
            Point2::new(-hw, hh),
        ];
        let segments = (0..4)
            .map(|i| Segment {
                a: c[i],
                b: c[(i + 1) % 4],
            })
            .collect();
        Self { segments }
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    /// Distance along the ray to the closest wall, if any.
    pub fn cast(&self, origin: Point2, direction: Point2) -> Option<f64> {
        self.segments
            .iter()
            .filter_map(|s| ray_segment(origin, direction, s))
            .min_by(f64::total_cmp)
    }
}

/// Parametric ray–segment intersection; `direction` must be a unit vector.
fn ray_segment(origin: Point2, direction: Point2, seg: &Segment) -> Option<f64> {
    let edge = seg.b - seg.a;
    let denom = direction.cross(edge);
    if denom.abs() < PARALLEL_EPS {
        return None;
    }
    let rel = seg.a - origin;
    let t = rel.cross(edge) / denom;
    let u = rel.cross(direction) / denom;
    if t >= 0.0 && (-PARALLEL_EPS..=1.0 + PARALLEL_EPS).contains(&u) {
        Some(t)
    } else {
        None
    }
}

/// Bearings of `n` beams spread over `fov` and centred on the heading.
///
/// A full circle uses `n` equal steps starting just after `-π`; narrower
/// fields span `[-fov/2, fov/2]` inclusive.
pub fn beam_angles(n: usize, fov: f64) -> Vec<f64> {
    if n == 0 {
        return Vec::new();
    }
    if n == 1 {
        return vec![0.0];
    }
    if fov >= TAU - 1e-12 {
        let step = TAU / n as f64;
        (0..n).map(|i| -PI + step * (i as f64 + 1.0)).collect()
    } else {
        let step = fov / (n - 1) as f64;
        (0..n).map(|i| -fov / 2.0 + step * i as f64).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensorModel {
    pub n_beams: usize,
    pub fov: f64,
    pub max_range: f64,
    pub noise_std: f64,
    pub rng_seed: u64,
}

impl Default for SensorModel {
    fn default() -> Self {
        Self {
            n_beams: 360,
            fov: TAU,
            max_range: 8.0,
            noise_std: 0.01,
            rng_seed: 0,
        }
    }
}

impl SensorModel {
    pub fn noise_free() -> Self {
        Self {
            noise_std: 0.0,
            ..Self::default()
        }
    }

    pub fn angles(&self) -> Vec<f64> {
        beam_angles(self.n_beams, self.fov)
    }

    fn validate(&self) -> Result<()> {
        if self.n_beams < 2 {
            return Err(Error::InvalidParameter {
                name: "n_beams",
                reason: "need at least 2 beams".into(),
            });
        }
        if !(self.noise_std >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "noise_std",
                reason: "must be non-negative".into(),
            });
        }
        if !(self.max_range > 0.0) || !(self.fov > 0.0 && self.fov <= TAU) {
            return Err(Error::InvalidParameter {
                name: "max_range/fov",
                reason: "need max_range > 0 and 0 < fov ≤ 2π".into(),
            });
        }
        Ok(())
    }
}

/// Simulates one sweep from `pose`. Beams without a hit read `max_range`.
pub fn raytrace_scan(env: &Environment, pose: &Pose2, sensor: &SensorModel) -> Result<PolarScan> {
    sensor.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(sensor.rng_seed);
    let noise =
        (sensor.noise_std > 0.0).then(|| Normal::new(0.0, sensor.noise_std).expect("std is positive and finite"));
    let readings = sensor
        .angles()
        .into_iter()
        .map(|alpha| {
            let dir = Point2::from_angle(pose.theta() + alpha);
            let mut d = env
                .cast(pose.position(), dir)
                .map_or(sensor.max_range, |t| t.min(sensor.max_range));
            if let Some(n) = &noise {
                d = (d + n.sample(&mut rng)).clamp(0.0, sensor.max_range);
            }
            Reading { range: d, angle: alpha }
        })
        .collect();
    PolarScan::new(readings, sensor.max_range)
}

/// Relative motions of the six-step test trajectory.
pub fn six_step_trajectory() -> Vec<Transform2> {
    let deg = PI / 180.0;
    [
        (0.0, 0.0, 0.0),
        (0.0, -0.5, 0.0),
        (0.0, 0.0, 45.0),
        (-0.35, 0.0, 0.0),
        (0.0, 0.0, 45.0),
        (-0.5, -0.25, 0.0),
    ]
    .into_iter()
    .map(|(x, y, t)| Transform2::from_xyt(x, y, t * deg))
    .collect()
}

/// Absolute poses visited by applying `steps` in order from `start`.
/// Returns `steps.len() + 1` poses.
pub fn integrate(start: Pose2, steps: &[Transform2]) -> Vec<Pose2> {
    let mut poses = Vec::with_capacity(steps.len() + 1);
    poses.push(start);
    for step in steps {
        let last = *poses.last().expect("non-empty");
        poses.push(last.compose(step));
    }
    poses
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    fn center_range(alpha: f64) -> f64 {
        let env = Environment::rectangle(6.0, 4.0);
        env.cast(Point2::ORIGIN, Point2::from_angle(alpha)).unwrap()
    }

    #[test]
    fn axis_and_diagonal_ranges() {
        assert_abs_diff_eq!(center_range(0.0), 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(center_range(FRAC_PI_2), 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(center_range(FRAC_PI_4), 2.0 * 2f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn noise_free_scan_is_exact() {
        let env = Environment::rectangle(6.0, 4.0);
        let pose = Pose2::new(0.4, -0.3, 0.2);
        let scan = raytrace_scan(&env, &pose, &SensorModel::noise_free()).unwrap();
        for r in scan.readings() {
            let dir = Point2::from_angle(pose.theta() + r.angle);
            let hit = pose.position() + dir * r.range;
            let on_wall = (hit.x.abs() - 3.0).abs().min((hit.y.abs() - 2.0).abs());
            assert!(on_wall < 1e-9, "hit {hit:?} off the walls");
        }
    }

    #[test]
    fn noisy_scan_reproducible_and_bounded() {
        let env = Environment::rectangle(6.0, 4.0);
        let sensor = SensorModel {
            noise_std: 0.5,
            max_range: 3.2,
            rng_seed: 3,
            ..SensorModel::default()
        };
        let a = raytrace_scan(&env, &Pose2::default(), &sensor).unwrap();
        assert_eq!(a, raytrace_scan(&env, &Pose2::default(), &sensor).unwrap());
        assert!(a.readings().iter().all(|r| (0.0..=3.2).contains(&r.range)));
        let b = raytrace_scan(&env, &Pose2::default(), &SensorModel { rng_seed: 4, ..sensor }).unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn no_hit_reads_max_range() {
        let env = Environment::new(vec![Segment {
            a: Point2::new(1.0, -1.0),
            b: Point2::new(1.0, 1.0),
        }])
        .unwrap();
        let scan = raytrace_scan(&env, &Pose2::default(), &SensorModel::noise_free()).unwrap();
        let back = scan.readings().iter().find(|r| (r.angle - PI).abs() < 1e-9).unwrap();
        assert_eq!(back.range, 8.0);
    }

    #[test]
    fn parallel_beam_misses_wall() {
        let seg = Segment {
            a: Point2::new(1.0, 0.0),
            b: Point2::new(2.0, 0.0),
        };
        assert!(ray_segment(Point2::ORIGIN, Point2::new(1.0, 0.0), &seg).is_none());
    }

    #[test]
    fn beam_layouts() {
        let full = beam_angles(4, TAU);
        assert_abs_diff_eq!(full[0], -FRAC_PI_2, epsilon = 1e-12);
        assert_abs_diff_eq!(full[3], PI, epsilon = 1e-12);
        let half = beam_angles(181, PI);
        assert_abs_diff_eq!(half[0], -FRAC_PI_2, epsilon = 1e-12);
        assert_abs_diff_eq!(half[180], FRAC_PI_2, epsilon = 1e-12);
        assert_abs_diff_eq!(half[90], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn trajectory_rows() {
        let t = six_step_trajectory();
        assert_eq!(t.len(), 6);
        assert_eq!(t[1], Transform2::from_xyt(0.0, -0.5, 0.0));
        assert_abs_diff_eq!(t[2].rotation(), FRAC_PI_4, epsilon = 1e-15);
        assert_eq!(t[5], Transform2::from_xyt(-0.5, -0.25, 0.0));
        let poses = integrate(Pose2::default(), &t);
        assert_eq!(poses.len(), 7);
        assert_abs_diff_eq!(poses[6].theta(), FRAC_PI_2, epsilon = 1e-12);
    }

    #[test]
    fn invalid_inputs() {
        assert!(Environment::new(vec![]).is_err());
        let p = Point2::new(1.0, 1.0);
        assert!(Environment::new(vec![Segment { a: p, b: p }]).is_err());
        let env = Environment::rectangle(2.0, 2.0);
        let bad = SensorModel {
            n_beams: 1,
            ..SensorModel::default()
        };
        assert!(raytrace_scan(&env, &Pose2::default(), &bad).is_err());
    }
}
