use super::{Candidate, Cluster, MatchResult};
use crate::error::{Error, Result};
use crate::geometry::Transform2;
use crate::scan::CartesianScan;

/// Mean squared distance from each transformed current point to its
/// nearest reference point.
pub fn average_squared_residual(t: &Transform2, current: &CartesianScan, reference: &CartesianScan) -> f64 {
    if current.is_empty() || reference.is_empty() {
        return f64::INFINITY;
    }
    let sum: f64 = current
        .points()
        .iter()
        .map(|&p| reference.nearest_index(t.apply(p)).map_or(f64::INFINITY, |(_, d2)| d2))
        .sum();
    sum / current.len() as f64
}

/// Weights each cluster by inverse ASR, normalised to one and sorted
/// descending. Clusters with zero residual share all the weight.
pub fn weight_clusters(
    clusters: &[Cluster],
    current: &CartesianScan,
    reference: &CartesianScan,
) -> Result<MatchResult> {
    if clusters.is_empty() {
        return Err(Error::NoClusters);
    }
    let asrs: Vec<f64> = clusters
        .iter()
        .map(|c| average_squared_residual(&c.transform(), current, reference))
        .collect();
    let raw = inverse_weights(&asrs);
    let mut candidates: Vec<Candidate> = clusters
        .iter()
        .zip(asrs)
        .zip(raw)
        .map(|((c, asr), weight)| Candidate {
            transform: c.transform(),
            weight,
            asr,
            members: c.members,
        })
        .collect();
    candidates.sort_by(|a, b| b.weight.total_cmp(&a.weight));
    Ok(MatchResult { candidates })
}

fn inverse_weights(asrs: &[f64]) -> Vec<f64> {
    let zeros = asrs.iter().filter(|&&a| a == 0.0).count();
    if zeros > 0 {
        let share = 1.0 / zeros as f64;
        return asrs.iter().map(|&a| if a == 0.0 { share } else { 0.0 }).collect();
    }
    let inv: Vec<f64> = asrs
        .iter()
        .map(|&a| if a.is_finite() { a.recip() } else { 0.0 })
        .collect();
    let total: f64 = inv.iter().sum();
    if total > 0.0 && total.is_finite() {
        inv.iter().map(|v| v / total).collect()
    } else {
        vec![1.0 / asrs.len() as f64; asrs.len()]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point2;
    use approx::assert_abs_diff_eq;

    #[test]
    fn inverse_asr_ratio() {
        let w = inverse_weights(&[1.0, 3.0]);
        assert_abs_diff_eq!(w[0], 0.75, epsilon = 1e-15);
        assert_abs_diff_eq!(w[1], 0.25, epsilon = 1e-15);
        // scale invariance
        let w2 = inverse_weights(&[1e-4, 3e-4]);
        assert_abs_diff_eq!(w2[0], 0.75, epsilon = 1e-12);
    }

    #[test]
    fn zero_residual_takes_everything() {
        assert_eq!(inverse_weights(&[0.5, 0.0, 2.0]), vec![0.0, 1.0, 0.0]);
    }

    #[test]
    fn weight_clusters_orders_and_normalises() {
        let pts: Vec<Point2> = (0..20).map(|i| Point2::new(i as f64 * 0.1, (i % 3) as f64)).collect();
        let scan = CartesianScan::from_points(pts);
        let clusters = vec![
            Cluster::new(Point2::new(0.3, 0.0), 0.0, 0.1, 1.0),
            Cluster::new(Point2::new(0.02, 0.0), 0.0, 0.1, 1.0),
        ];
        let r = weight_clusters(&clusters, &scan, &scan).unwrap();
        assert_eq!(r.candidates.len(), 2);
        assert!(r.candidates[0].weight >= r.candidates[1].weight);
        assert_abs_diff_eq!(r.candidates[0].transform.translation.x, 0.02, epsilon = 1e-15);
        let total: f64 = r.candidates.iter().map(|c| c.weight).sum();
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-12);

        let single = weight_clusters(&clusters[..1], &scan, &scan).unwrap();
        assert_eq!(single.candidates[0].weight, 1.0);
        assert!(weight_clusters(&[], &scan, &scan).is_err());
    }
}
