//! Monte-Carlo generation of roto-translation hypotheses from point-pair
//! correspondences.
//!
//! A pair of neighbouring points `(p, q)` in the current scan is matched
//! against each of the `K` reference points `p'` closest to `p`. Taking `p`
//! congruent to `p'`, the image of `q` is looked up in the reference scan to
//! get `q'`; the angle between `pq` and `p'q'` gives the rotation and the
//! residual `q' - R·q` gives the translation. Every hypothesis maps
//! current-scan coordinates into reference-scan coordinates.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{angle_diff, rotate, Point2, Transform2};
use crate::scan::CartesianScan;

/// Failed sampling attempts tolerated per requested hypothesis.
pub const STALL_FACTOR: usize = 50;

/// One candidate displacement with its contribution direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hypothesis {
    pub delta_t: Point2,
    pub delta_theta: f64,
    /// Unit normal of the matched reference segment, sign-canonical
    /// (`x > 0`, or `x == 0` and `y ≥ 0`).
    pub psi: Point2,
}

impl Hypothesis {
    pub fn transform(&self) -> Transform2 {
        Transform2::new(self.delta_t, self.delta_theta)
    }

    /// Translation projected onto the contribution direction, `(ψ·ΔT)ψ`.
    pub fn weighted_translation(&self) -> Point2 {
        self.psi * self.psi.dot(self.delta_t)
    }
}

/// Sign-canonical unit normal of the segment direction `angle`.
pub fn contribution_direction(angle: f64) -> Point2 {
    let n = Point2::from_angle(angle).perp();
    if n.x > 0.0 || (n.x == 0.0 && n.y >= 0.0) {
        n
    } else {
        -n
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenParams {
    pub n_hypotheses: usize,
    pub d_min: f64,
    pub d_max: f64,
    pub k: usize,
    pub rng_seed: u64,
}

impl Default for GenParams {
    fn default() -> Self {
        Self {
            n_hypotheses: 500,
            d_min: 0.05,
            d_max: 0.5,
            k: 4,
            rng_seed: 0,
        }
    }
}

impl GenParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |name, reason: &str| {
            Err(Error::InvalidParameter {
                name,
                reason: reason.to_string(),
            })
        };
        if self.n_hypotheses == 0 {
            return bad("n_hypotheses", "must be at least 1");
        }
        if self.k == 0 {
            return bad("k", "must be at least 1");
        }
        if !(self.d_min > 0.0 && self.d_min < self.d_max && self.d_max.is_finite()) {
            return bad("d_min/d_max", "need 0 < d_min < d_max");
        }
        Ok(())
    }
}

/// Builds the hypothesis for `p ≅ p_prime`, or `None` when the matched
/// reference segment is degenerate (`q' == p'`).
pub fn pair_hypothesis(p: Point2, q: Point2, p_prime: Point2, reference: &CartesianScan) -> Option<Hypothesis> {
    let (qi, _) = reference.nearest_index(p_prime + (q - p))?;
    let q_prime = reference.point(qi);
    let matched = q_prime - p_prime;
    if matched.norm_squared() == 0.0 {
        return None;
    }
    let theta = (q - p).angle();
    let theta_prime = matched.angle();
    let delta_theta = angle_diff(theta_prime, theta);
    let delta_t = q_prime - rotate(q, delta_theta);
    Some(Hypothesis {
        delta_t,
        delta_theta,
        psi: contribution_direction(theta_prime),
    })
}

/// Draws hypotheses until at least `params.n_hypotheses` exist.
///
/// The output length lies in `[N, N + K - 1]`. Generation is a single
/// ChaCha stream seeded from `params.rng_seed`.
pub fn generate_hypotheses(
    current: &CartesianScan,
    reference: &CartesianScan,
    params: &GenParams,
) -> Result<Vec<Hypothesis>> {
    params.validate()?;
    for scan in [current, reference] {
        if scan.len() < 2 {
            return Err(Error::TooFewPoints {
                needed: 2,
                found: scan.len(),
            });
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(params.rng_seed);
    let budget = STALL_FACTOR * params.n_hypotheses;
    let mut failures = 0usize;
    let mut out = Vec::with_capacity(params.n_hypotheses + params.k);

    while out.len() < params.n_hypotheses {
        if failures >= budget {
            return Err(Error::GenerationStalled {
                attempts: failures,
                generated: out.len(),
                requested: params.n_hypotheses,
            });
        }
        let p = current.point(rng.random_range(0..current.len()));
        let neighbors = current.neighbor_indices(p, params.d_min, params.d_max);
        let Some(&qi) = neighbors.choose(&mut rng) else {
            failures += 1;
            continue;
        };
        let q = current.point(qi);
        for (pi, _) in reference.k_nearest_indices(p, params.k) {
            match pair_hypothesis(p, q, reference.point(pi), reference) {
                Some(h) => out.push(h),
                None => failures += 1,
            }
        }
    }
    Ok(out)
}
