use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Cluster, ClusterParams};
use crate::error::{Error, Result};
use crate::geometry::angle_diff;
use crate::hypothesis::Hypothesis;

/// Mixed translation/rotation squared distance, `‖Δμ‖² + (λ·Δθ)²`.
pub fn seed_distance_squared(a: &Hypothesis, b: &Hypothesis, angle_scale: f64) -> f64 {
    let dt = a.delta_t.distance_squared(b.delta_t);
    let da = angle_scale * angle_diff(a.delta_theta, b.delta_theta);
    dt + da * da
}

/// Picks `min(n_seeds, |hyps|)` seeds: the first `⌈fraction·n⌉` (at least
/// one) uniformly without replacement, the rest by D² weighting against
/// all seeds chosen so far.
pub fn seed_clusters(hyps: &[Hypothesis], params: &ClusterParams, rng_seed: u64) -> Result<Vec<Cluster>> {
    if hyps.is_empty() {
        return Err(Error::NoHypotheses);
    }
    let n = params.n_seeds.min(hyps.len());
    let n_uniform = ((params.uniform_seed_fraction * n as f64).ceil() as usize).clamp(1, n);
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);

    let mut chosen: Vec<usize> = rand::seq::index::sample(&mut rng, hyps.len(), n_uniform).into_vec();

    let mut nearest = vec![f64::INFINITY; hyps.len()];
    let absorb = |nearest: &mut [f64], seed: usize| {
        for (d, h) in nearest.iter_mut().zip(hyps) {
            *d = d.min(seed_distance_squared(h, &hyps[seed], params.seed_angle_scale));
        }
    };
    for &s in &chosen {
        absorb(&mut nearest, s);
    }
    while chosen.len() < n {
        let next = match WeightedIndex::new(&nearest) {
            Ok(dist) => dist.sample(&mut rng),
            // every hypothesis coincides with a seed
            Err(_) => rng.random_range(0..hyps.len()),
        };
        chosen.push(next);
        absorb(&mut nearest, next);
    }

    Ok(chosen
        .into_iter()
        .map(|i| Cluster::new(hyps[i].delta_t, hyps[i].delta_theta, params.sigma0, params.kappa0))
        .collect())
}
