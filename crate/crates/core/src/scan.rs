//! Range-scan representations and the point queries used by the matchers.

use crate::error::{Error, Result};
use crate::geometry::Point2;
use crate::kdtree::KdTree;

/// One beam: measured range at a bearing in the sensor frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reading {
    pub range: f64,
    pub angle: f64,
}

/// A single sweep of range readings.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarScan {
    readings: Vec<Reading>,
    max_range: f64,
}

impl PolarScan {
    /// Validates `0 ≤ range ≤ max_range` and strictly increasing angles.
    pub fn new(readings: Vec<Reading>, max_range: f64) -> Result<Self> {
        if !(max_range > 0.0 && max_range.is_finite()) {
            return Err(Error::InvalidScan(format!("max_range {max_range} must be positive")));
        }
        for (i, r) in readings.iter().enumerate() {
            if !(r.range >= 0.0 && r.range <= max_range) {
                return Err(Error::InvalidScan(format!(
                    "reading {i}: range {} outside [0, {max_range}]",
                    r.range
                )));
            }
            if !r.angle.is_finite() {
                return Err(Error::InvalidScan(format!("reading {i}: non-finite angle")));
            }
        }
        if let Some(i) = readings.windows(2).position(|w| w[1].angle <= w[0].angle) {
            return Err(Error::InvalidScan(format!(
                "angles not strictly increasing at reading {}",
                i + 1
            )));
        }
        Ok(Self { readings, max_range })
    }

    /// Pairs `ranges` with `angles`, clamping ranges into `[0, max_range]`.
    pub fn from_ranges(ranges: &[f64], angles: &[f64], max_range: f64) -> Result<Self> {
        if ranges.len() != angles.len() {
            return Err(Error::InvalidScan(format!(
                "{} ranges but {} angles",
                ranges.len(),
                angles.len()
            )));
        }
        let readings = ranges
            .iter()
            .zip(angles)
            .map(|(&range, &angle)| Reading {
                range: if range.is_nan() {
                    max_range
                } else {
                    range.clamp(0.0, max_range)
                },
                angle,
            })
            .collect();
        Self::new(readings, max_range)
    }

    pub fn readings(&self) -> &[Reading] {
        &self.readings
    }

    pub fn max_range(&self) -> f64 {
        self.max_range
    }

    pub fn len(&self) -> usize {
        self.readings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.readings.is_empty()
    }
}

/// Planar points of a scan plus a spatial index over them.
#[derive(Debug, Clone)]
pub struct CartesianScan {
    index: KdTree,
}

impl CartesianScan {
    pub fn from_points(points: Vec<Point2>) -> Self {
        Self {
            index: KdTree::new(&points),
        }
    }

    pub fn points(&self) -> &[Point2] {
        self.index.points()
    }

    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    pub fn point(&self, i: usize) -> Point2 {
        self.index.points()[i]
    }

    /// Indices of points strictly between `d_min` and `d_max` from `p`, ascending.
    pub fn neighbor_indices(&self, p: Point2, d_min: f64, d_max: f64) -> Vec<usize> {
        self.index.annulus(p, d_min, d_max)
    }

    /// `(index, distance²)` of the `k` closest points, ascending by distance then index.
    pub fn k_nearest_indices(&self, p: Point2, k: usize) -> Vec<(usize, f64)> {
        self.index.k_nearest(p, k)
    }

    pub fn nearest_index(&self, p: Point2) -> Option<(usize, f64)> {
        self.index.nearest(p)
    }
}

/// Maps each reading to `d·(cos α, sin α)`; with `drop_max_range`, readings
/// at or beyond the maximum range are discarded.
pub fn polar_to_cartesian(scan: &PolarScan, drop_max_range: bool) -> CartesianScan {
    let points = scan
        .readings
        .iter()
        .filter(|r| !drop_max_range || r.range < scan.max_range)
        .map(|r| Point2::from_angle(r.angle) * r.range)
        .collect();
    CartesianScan::from_points(points)
}

/// Points `q` of `scan` with `d_min < ‖q - p‖ < d_max`, in scan order.
pub fn neighbor_set(scan: &CartesianScan, p: Point2, d_min: f64, d_max: f64) -> Vec<Point2> {
    scan.neighbor_indices(p, d_min, d_max)
        .into_iter()
        .map(|i| scan.point(i))
        .collect()
}

/// The `min(k, |scan|)` points closest to `p`, ascending; ties go to the lower index.
pub fn k_nearest(scan: &CartesianScan, p: Point2, k: usize) -> Vec<Point2> {
    scan.k_nearest_indices(p, k)
        .into_iter()
        .map(|(i, _)| scan.point(i))
        .collect()
}

pub fn nearest(scan: &CartesianScan, p: Point2) -> Result<Point2> {
    scan.nearest_index(p)
        .map(|(i, _)| scan.point(i))
        .ok_or(Error::EmptyScan)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    fn scan_of(points: &[(f64, f64)]) -> CartesianScan {
        CartesianScan::from_points(points.iter().map(|&(x, y)| Point2::new(x, y)).collect())
    }

    #[test]
    fn polar_examples() {
        let polar = PolarScan::new(
            vec![
                Reading { range: 1.0, angle: 0.0 },
                Reading {
                    range: 2f64.sqrt(),
                    angle: FRAC_PI_4,
                },
                Reading {
                    range: 2.0,
                    angle: FRAC_PI_2,
                },
            ],
            10.0,
        )
        .unwrap();
        let c = polar_to_cartesian(&polar, true);
        let want = [(1.0, 0.0), (1.0, 1.0), (0.0, 2.0)];
        for (p, (x, y)) in c.points().iter().zip(want) {
            assert_abs_diff_eq!(p.x, x, epsilon = 1e-12);
            assert_abs_diff_eq!(p.y, y, epsilon = 1e-12);
        }
    }

    #[test]
    fn max_range_dropped_only_on_request() {
        let polar = PolarScan::from_ranges(&[1.0, 5.0, 2.0], &[0.0, 0.1, 0.2], 5.0).unwrap();
        assert_eq!(polar_to_cartesian(&polar, true).len(), 2);
        assert_eq!(polar_to_cartesian(&polar, false).len(), 3);
    }

    #[test]
    fn polar_validation() {
        assert!(PolarScan::from_ranges(&[1.0, 1.0], &[0.2, 0.1], 5.0).is_err());
        assert!(PolarScan::new(vec![Reading { range: 6.0, angle: 0.0 }], 5.0).is_err());
        assert!(PolarScan::new(
            vec![Reading {
                range: -0.1,
                angle: 0.0
            }],
            5.0
        )
        .is_err());
        assert!(PolarScan::from_ranges(&[1.0], &[0.0, 1.0], 5.0).is_err());
    }

    #[test]
    fn neighbor_set_examples() {
        let o = Point2::ORIGIN;
        assert_eq!(
            neighbor_set(&scan_of(&[(0.5, 0.0)]), o, 0.1, 1.0),
            vec![Point2::new(0.5, 0.0)]
        );
        assert!(neighbor_set(&scan_of(&[(0.05, 0.0)]), o, 0.1, 1.0).is_empty());
        assert!(neighbor_set(&scan_of(&[(2.0, 0.0)]), o, 0.1, 1.0).is_empty());
    }

    #[test]
    fn neighbor_set_excludes_query_point() {
        let s = scan_of(&[(0.0, 0.0), (0.2, 0.0), (0.0, 0.3)]);
        let n = neighbor_set(&s, s.point(0), 0.05, 0.5);
        assert_eq!(n, vec![Point2::new(0.2, 0.0), Point2::new(0.0, 0.3)]);
    }

    #[test]
    fn k_nearest_examples() {
        let s = scan_of(&[(1.0, 0.0), (3.0, 0.0), (2.0, 0.0)]);
        assert_eq!(
            k_nearest(&s, Point2::ORIGIN, 2),
            vec![Point2::new(1.0, 0.0), Point2::new(2.0, 0.0)]
        );
        assert_eq!(
            k_nearest(&s, Point2::ORIGIN, 10),
            vec![Point2::new(1.0, 0.0), Point2::new(2.0, 0.0), Point2::new(3.0, 0.0)]
        );
        assert!(k_nearest(&scan_of(&[]), Point2::ORIGIN, 3).is_empty());
    }

    #[test]
    fn nearest_tie_and_empty() {
        let s = scan_of(&[(0.0, 1.0), (1.0, 0.0)]);
        assert_eq!(s.nearest_index(Point2::ORIGIN).unwrap().0, 0);
        assert!(matches!(nearest(&scan_of(&[]), Point2::ORIGIN), Err(Error::EmptyScan)));
    }

    #[test]
    fn k_nearest_random_against_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let pts: Vec<Point2> = (0..100)
            .map(|_| Point2::new(rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0)))
            .collect();
        let s = CartesianScan::from_points(pts.clone());
        for _ in 0..50 {
            let q = Point2::new(rng.random_range(-6.0..6.0), rng.random_range(-6.0..6.0));
            let mut brute = pts.clone();
            brute.sort_by(|a, b| a.distance_squared(q).total_cmp(&b.distance_squared(q)));
            assert_eq!(k_nearest(&s, q, 5), brute[..5].to_vec());
            assert_eq!(nearest(&s, q).unwrap(), brute[0]);
        }
    }

    proptest! {
        #[test]
        fn cartesian_norm_recovers_range(ranges in prop::collection::vec(0.01..30.0f64, 1..200)) {
            let n = ranges.len();
            let angles: Vec<f64> = (0..n).map(|i| -3.0 + 6.0 * i as f64 / n as f64).collect();
            let polar = PolarScan::from_ranges(&ranges, &angles, 30.0).unwrap();
            let c = polar_to_cartesian(&polar, false);
            for (p, d) in c.points().iter().zip(&ranges) {
                prop_assert!((p.norm() - d).abs() <= 1e-12 * d.max(1.0));
            }
        }
    }
}
