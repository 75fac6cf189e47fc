use super::kernel::{prepare, update_prepared, Prepared};
use super::{Cluster, ClusterParams};
use crate::error::{Error, Result};
use crate::geometry::angle_diff;
use crate::hypothesis::Hypothesis;

/// Outcome of refining a single seed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Refined {
    /// `None` when the cluster died.
    pub cluster: Option<Cluster>,
    pub iterations: usize,
    pub converged: bool,
}

/// Iterates [`update_cluster`](super::update_cluster) until the shift stays below both thresholds
/// for `stable_iters` consecutive steps, or `max_iterations` is reached.
pub fn refine_cluster(seed: &Cluster, hyps: &[Hypothesis], params: &ClusterParams) -> Refined {
    refine_prepared(seed, &prepare(hyps), params, &mut Vec::new())
}

fn refine_prepared(seed: &Cluster, hyps: &[Prepared], params: &ClusterParams, scratch: &mut Vec<f64>) -> Refined {
    let mut c = *seed;
    let mut stable = 0;
    for it in 1..=params.max_iterations {
        let Some(next) = update_prepared(&c, hyps, params, scratch) else {
            return Refined {
                cluster: None,
                iterations: it,
                converged: false,
            };
        };
        let small = c.mu.distance(next.mu) < params.d_thr && angle_diff(c.theta, next.theta).abs() < params.r_thr;
        stable = if small { stable + 1 } else { 0 };
        c = next;
        if stable >= params.stable_iters {
            return Refined {
                cluster: Some(c),
                iterations: it,
                converged: true,
            };
        }
    }
    Refined {
        cluster: Some(c),
        iterations: params.max_iterations,
        converged: false,
    }
}

/// Refines every seed independently and drops the dead ones.
pub fn refine(seeds: &[Cluster], hyps: &[Hypothesis], params: &ClusterParams) -> Result<Vec<Cluster>> {
    if seeds.is_empty() {
        return Err(Error::NoClusters);
    }
    let prepared = prepare(hyps);
    let mut scratch = Vec::with_capacity(hyps.len());
    let alive: Vec<Cluster> = seeds
        .iter()
        .filter_map(|s| refine_prepared(s, &prepared, params, &mut scratch).cluster)
        .collect();
    if alive.is_empty() {
        Err(Error::AllClustersDead)
    } else {
        Ok(alive)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point2;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn blob(center: Point2, std: f64, n: usize, seed: u64) -> Vec<Hypothesis> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noise = Normal::new(0.0, std).unwrap();
        (0..n)
            .map(|i| Hypothesis {
                delta_t: center + Point2::new(noise.sample(&mut rng), noise.sample(&mut rng)),
                delta_theta: 0.01 * noise.sample(&mut rng),
                // alternate wall normals so both axes are observed
                psi: if i % 2 == 0 {
                    Point2::new(1.0, 0.0)
                } else {
                    Point2::new(0.0, 1.0)
                },
            })
            .collect()
    }

    #[test]
    fn tight_blob_converges_fast() {
        let hyps = blob(Point2::new(0.3, -0.4), 0.01, 200, 1);
        let seed = Cluster::new(Point2::new(0.3, -0.4), 0.0, 0.1, 10.0);
        let r = refine_cluster(&seed, &hyps, &ClusterParams::default());
        assert!(r.converged, "{r:?}");
        assert!(r.iterations <= 5, "took {} iterations", r.iterations);
        assert!(r.cluster.unwrap().mu.distance(Point2::new(0.3, -0.4)) < 0.005);
    }

    #[test]
    fn zero_iterations_returns_seeds() {
        let hyps = blob(Point2::ORIGIN, 0.05, 20, 2);
        let seeds = vec![Cluster::new(Point2::new(0.5, 0.5), 0.1, 0.1, 10.0)];
        let params = ClusterParams {
            max_iterations: 0,
            ..ClusterParams::default()
        };
        assert_eq!(refine(&seeds, &hyps, &params).unwrap(), seeds);
    }

    #[test]
    fn two_blobs_two_modes() {
        let (a, b) = (Point2::new(-1.0, 0.0), Point2::new(1.0, 0.5));
        let mut hyps = blob(a, 0.02, 150, 3);
        hyps.extend(blob(b, 0.02, 150, 4));
        // oracle: plain per-blob means
        let mean = |hs: &[Hypothesis]| {
            let s = hs.iter().fold(Point2::ORIGIN, |acc, h| acc + h.delta_t);
            s * (1.0 / hs.len() as f64)
        };
        let (ma, mb) = (mean(&hyps[..150]), mean(&hyps[150..]));
        let seeds = vec![
            Cluster::new(a + Point2::new(0.05, 0.0), 0.0, 0.1, 10.0),
            Cluster::new(b - Point2::new(0.0, 0.05), 0.0, 0.1, 10.0),
        ];
        let out = refine(&seeds, &hyps, &ClusterParams::default()).unwrap();
        assert!(out[0].mu.distance(ma) < 0.02, "{:?} vs {:?}", out[0].mu, ma);
        assert!(out[1].mu.distance(mb) < 0.02, "{:?} vs {:?}", out[1].mu, mb);
    }

    #[test]
    fn all_dead_is_an_error() {
        let hyps = blob(Point2::new(100.0, 100.0), 0.01, 10, 5);
        let mut seed = Cluster::new(Point2::ORIGIN, 0.0, 0.001, 0.0);
        seed.sigma *= 1e-4;
        assert!(matches!(
            refine(&[seed], &hyps, &ClusterParams::default()),
            Err(Error::AllClustersDead)
        ));
    }
}
