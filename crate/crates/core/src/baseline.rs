//! Iterative point matchers used as reference baselines: ICP and IDC.
//!
//! ICP pairs every transformed current point with its closest reference
//! point. IDC keeps that rule for the translation but takes the rotation
//! from matching-range pairs (IMRP), which tolerate large rotations about
//! the sensor.

use crate::error::{Error, Result};
use crate::geometry::{angle_diff, normalize_angle, Point2, Transform2};
use crate::scan::CartesianScan;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterativeParams {
    pub max_iterations: usize,
    /// Closest-point pairs farther apart than this are discarded (m).
    pub correspondence_cutoff: f64,
    pub convergence_eps_t: f64,
    pub convergence_eps_r: f64,
    /// Half-width of the IMRP bearing window (rad).
    pub angular_window: f64,
}

impl Default for IterativeParams {
    fn default() -> Self {
        Self {
            max_iterations: 50,
            correspondence_cutoff: 1.0,
            convergence_eps_t: 1e-6,
            convergence_eps_r: 1e-6,
            angular_window: 20f64.to_radians(),
        }
    }
}

impl IterativeParams {
    pub fn validate(&self) -> Result<()> {
        let checks = [
            ("correspondence_cutoff", self.correspondence_cutoff),
            ("convergence_eps_t", self.convergence_eps_t),
            ("convergence_eps_r", self.convergence_eps_r),
        ];
        for (name, v) in checks {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter {
                    name,
                    reason: "must be positive".into(),
                });
            }
        }
        if !(self.angular_window >= 0.0 && self.angular_window.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "angular_window",
                reason: "must be non-negative".into(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterativeResult {
    pub transform: Transform2,
    pub iterations: usize,
    pub converged: bool,
    /// Set when an iteration found fewer than two usable pairs; the
    /// transform is then the last estimate that had support.
    pub degraded: bool,
}

/// Closed-form least-squares rigid transform mapping `src[i]` onto `dst[i]`.
/// `None` for fewer than two pairs.
pub fn fit_rigid(pairs: &[(Point2, Point2)]) -> Option<Transform2> {
    let (src_c, dst_c) = centroids(pairs)?;
    let (mut sin, mut cos) = (0.0, 0.0);
    for &(s, d) in pairs {
        let (a, b) = (s - src_c, d - dst_c);
        sin += a.cross(b);
        cos += a.dot(b);
    }
    let theta = sin.atan2(cos);
    Some(translation_for(theta, src_c, dst_c))
}

fn centroids(pairs: &[(Point2, Point2)]) -> Option<(Point2, Point2)> {
    if pairs.len() < 2 {
        return None;
    }
    let inv = 1.0 / pairs.len() as f64;
    let (s, d) = pairs
        .iter()
        .fold((Point2::ORIGIN, Point2::ORIGIN), |(s, d), &(a, b)| (s + a, d + b));
    Some((s * inv, d * inv))
}

/// Translation that best aligns the pairs once the rotation is fixed.
fn translation_for(theta: f64, src_c: Point2, dst_c: Point2) -> Transform2 {
    let rotated = Transform2::new(Point2::ORIGIN, theta).apply(src_c);
    Transform2::new(dst_c - rotated, theta)
}

/// Closest-point pairs `(current, reference)` under `estimate`, within `cutoff`.
pub fn closest_point_pairs(
    current: &CartesianScan,
    reference: &CartesianScan,
    estimate: &Transform2,
    cutoff: f64,
) -> Vec<(Point2, Point2)> {
    let cutoff2 = cutoff * cutoff;
    current
        .points()
        .iter()
        .filter_map(|&p| {
            let (j, d2) = reference.nearest_index(estimate.apply(p))?;
            (d2 <= cutoff2).then(|| (p, reference.point(j)))
        })
        .collect()
}

/// Neighbouring beams whose range slope implies a steeper surface than this
/// are treated as a depth discontinuity and not interpolated.
const MAX_INCIDENCE: f64 = 75.0 * std::f64::consts::PI / 180.0;

/// Reference points sorted by bearing, for windowed range lookups.
struct BearingIndex {
    /// `(bearing, range, point)` ascending in bearing.
    entries: Vec<(f64, f64, Point2)>,
}

impl BearingIndex {
    fn new(reference: &CartesianScan) -> Self {
        let mut entries: Vec<(f64, f64, Point2)> =
            reference.points().iter().map(|&p| (p.angle(), p.norm(), p)).collect();
        entries.sort_by(|a, b| a.0.total_cmp(&b.0));
        Self { entries }
    }

    /// Point of the reference polar curve within `window` of `bearing` whose
    /// range is closest to `range`, preferring the smallest bearing offset
    /// among equals. Consecutive entries are joined linearly in polar
    /// coordinates, so exact range crossings between beams are found.
    fn best_match(&self, bearing: f64, range: f64, window: f64) -> Option<Point2> {
        let n = self.entries.len();
        if n == 0 || window <= 0.0 {
            return None;
        }
        let mut best: Option<(f64, f64, Point2)> = None;
        let mut offer = |gap: f64, at: f64, point: Point2| {
            let off = angle_diff(at, bearing).abs();
            if off > window {
                return;
            }
            if best.is_none_or(|(g, o, _)| (gap, off) < (g, o)) {
                best = Some((gap, off, point));
            }
        };
        let mut visit = |k: usize| {
            let (a0, r0, p0) = self.entries[k];
            offer((r0 - range).abs(), a0, p0);
            if n < 2 {
                return;
            }
            let (a1, r1, _) = self.entries[(k + 1) % n];
            let span = angle_diff(a1, a0);
            if span <= 0.0 || span > window || (r0 - range) * (r1 - range) > 0.0 || r0 == r1 {
                return;
            }
            if (r1 - r0).abs() > MAX_INCIDENCE.tan() * r0.min(r1) * span {
                // a depth jump, not a surface
                return;
            }
            let s = (range - r0) / (r1 - r0);
            if !(s > 0.0 && s < 1.0) {
                // endpoints are offered as entries themselves
                return;
            }
            let at = normalize_angle(a0 + s * span);
            offer(0.0, at, Point2::from_angle(at) * range);
        };
        if window >= std::f64::consts::PI {
            (0..n).for_each(&mut visit);
        } else {
            // the window may wrap past ±π; start one entry early so the
            // segment entering the window is seen
            let lo = normalize_angle(bearing - window);
            let hi = normalize_angle(bearing + window);
            let start = self.entries.partition_point(|e| e.0 < lo);
            let end = self.entries.partition_point(|e| e.0 <= hi);
            let prev = (start + n - 1) % n;
            visit(prev);
            if lo <= hi {
                (start..end).filter(|&k| k != prev).for_each(&mut visit);
            } else {
                (start..n).chain(0..end).filter(|&k| k != prev).for_each(&mut visit);
            }
        }
        best.map(|(_, _, p)| p)
    }
}

/// Matching-range pairs `(current, reference)`: for each current point under
/// `estimate`, the reference point within `angular_window` of its bearing
/// whose range is most similar. Points with an empty window are skipped.
pub fn imrp_correspondence(
    current: &CartesianScan,
    reference: &CartesianScan,
    estimate: &Transform2,
    angular_window: f64,
) -> Vec<(Point2, Point2)> {
    imrp_pairs(&BearingIndex::new(reference), current, estimate, angular_window)
}

fn imrp_pairs(
    index: &BearingIndex,
    current: &CartesianScan,
    estimate: &Transform2,
    angular_window: f64,
) -> Vec<(Point2, Point2)> {
    current
        .points()
        .iter()
        .filter_map(|&p| {
            let q = estimate.apply(p);
            index.best_match(q.angle(), q.norm(), angular_window).map(|r| (p, r))
        })
        .collect()
}

fn check_inputs(current: &CartesianScan, reference: &CartesianScan, params: &IterativeParams) -> Result<()> {
    if current.is_empty() || reference.is_empty() {
        return Err(Error::EmptyScan);
    }
    params.validate()
}

fn iterate(
    init: Transform2,
    params: &IterativeParams,
    mut step: impl FnMut(&Transform2) -> Option<Transform2>,
) -> IterativeResult {
    let mut estimate = init;
    for it in 1..=params.max_iterations {
        let Some(next) = step(&estimate) else {
            return IterativeResult {
                transform: estimate,
                iterations: it,
                converged: false,
                degraded: true,
            };
        };
        let dt = next.translation.distance(estimate.translation);
        let dr = angle_diff(next.rotation(), estimate.rotation()).abs();
        estimate = next;
        if dt < params.convergence_eps_t && dr < params.convergence_eps_r {
            return IterativeResult {
                transform: estimate,
                iterations: it,
                converged: true,
                degraded: false,
            };
        }
    }
    IterativeResult {
        transform: estimate,
        iterations: params.max_iterations,
        converged: false,
        degraded: false,
    }
}

/// Classic point-to-point ICP from `init`.
pub fn icp_match(
    current: &CartesianScan,
    reference: &CartesianScan,
    init: Transform2,
    params: &IterativeParams,
) -> Result<IterativeResult> {
    check_inputs(current, reference, params)?;
    Ok(iterate(init, params, |est| {
        fit_rigid(&closest_point_pairs(
            current,
            reference,
            est,
            params.correspondence_cutoff,
        ))
    }))
}

/// Iterative dual correspondence: rotation from IMRP pairs, then the
/// translation that best aligns the closest-point pairs under that rotation.
/// Falls back to the ICP rotation when the IMRP pairs are too few.
pub fn idc_match(
    current: &CartesianScan,
    reference: &CartesianScan,
    init: Transform2,
    params: &IterativeParams,
) -> Result<IterativeResult> {
    check_inputs(current, reference, params)?;
    let index = BearingIndex::new(reference);
    Ok(iterate(init, params, |est| {
        let icp = closest_point_pairs(current, reference, est, params.correspondence_cutoff);
        let fit = fit_rigid(&icp)?;
        let theta = fit_rigid(&imrp_pairs(&index, current, est, params.angular_window))
            .map_or(fit.rotation(), |t| t.rotation());
        let (src_c, dst_c) = centroids(&icp)?;
        Some(translation_for(theta, src_c, dst_c))
    }))
}
