//! End-to-end multi-hypothesis scan matching.

use crate::cluster::{merge_connected, refine, seed_clusters, weight_clusters, ClusterParams, MatchResult};
use crate::error::{Error, Result};
use crate::hypothesis::{generate_hypotheses, GenParams};
use crate::scan::CartesianScan;

/// Estimates the transform mapping `current` into `reference` coordinates.
///
/// Hypotheses are generated, seeded, refined, merged and finally weighted
/// by inverse average squared residual. Deterministic for fixed
/// `gen.rng_seed` and `clus.rng_seed`.
pub fn match_scans(
    current: &CartesianScan,
    reference: &CartesianScan,
    gen: &GenParams,
    clus: &ClusterParams,
) -> Result<MatchResult> {
    clus.validate()?;
    for scan in [current, reference] {
        if scan.len() < 2 {
            return Err(Error::TooFewPoints {
                needed: 2,
                found: scan.len(),
            });
        }
    }
    let hyps = generate_hypotheses(current, reference, gen)?;
    let seeds = seed_clusters(&hyps, clus, clus.rng_seed)?;
    let refined = refine(&seeds, &hyps, clus)?;
    let merged = merge_connected(&refined, clus);
    weight_clusters(&merged, current, reference)
}
