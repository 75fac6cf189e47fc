//! Hybrid Gaussian × von Mises mean-shift over roto-translation hypotheses.
//!
//! Each cluster carries a planar Gaussian over the translation and a von
//! Mises kernel over the rotation. A hypothesis only informs the
//! translation along its contribution direction `ψ`, so distances and
//! updates are taken through `ψ`.
//!
//! Pipeline: [`seed_clusters`] → [`refine`] → [`merge_connected`] →
//! [`weight_clusters`].

mod kernel;
mod merge;
mod refine;
mod seed;
mod weight;

use nalgebra::Matrix2;

use crate::error::{Error, Result};
use crate::geometry::{Point2, Transform2};

pub use kernel::{membership_weight, update_cluster};
pub use merge::merge_connected;
pub use refine::{refine, refine_cluster, Refined};
pub use seed::{seed_clusters, seed_distance_squared};
pub use weight::{average_squared_residual, weight_clusters};

/// How contribution directions enter the mean and covariance updates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ContributionMode {
    /// Each hypothesis constrains the mean only along `ψ`: the new mean is
    /// the weighted least-squares point of the normal constraints
    /// `ψᵢ·μ = ψᵢ·xᵢ`, and deviations are projected onto `ψᵢ`.
    #[default]
    Projected,
    /// Per-axis confidence `|ψᵢ|` as componentwise weights.
    PerAxis,
}

/// Kernel state of one cluster.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cluster {
    pub mu: Point2,
    pub sigma: Matrix2<f64>,
    pub theta: f64,
    pub kappa: f64,
    /// Refined seeds fused into this cluster.
    pub members: usize,
}

impl Cluster {
    pub fn new(mu: Point2, theta: f64, sigma0: f64, kappa0: f64) -> Self {
        Self {
            mu,
            sigma: Matrix2::identity() * (sigma0 * sigma0),
            theta: crate::geometry::normalize_angle(theta),
            kappa: kappa0,
            members: 1,
        }
    }

    pub fn transform(&self) -> Transform2 {
        Transform2::new(self.mu, self.theta)
    }

    /// `Σ⁻¹`, regularising with `eps·I` first if `Σ` is not invertible.
    pub fn precision(&self, eps: f64) -> Matrix2<f64> {
        match self.sigma.try_inverse() {
            Some(inv) if inv.iter().all(|v| v.is_finite()) && self.sigma.determinant() > 0.0 => inv,
            _ => (self.sigma + Matrix2::identity() * eps)
                .try_inverse()
                .unwrap_or_else(|| Matrix2::identity() / eps),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClusterParams {
    pub n_seeds: usize,
    pub uniform_seed_fraction: f64,
    /// Initial isotropic translation std (m).
    pub sigma0: f64,
    pub kappa0: f64,
    pub max_iterations: usize,
    /// Translational convergence threshold (m).
    pub d_thr: f64,
    /// Rotational convergence threshold (rad).
    pub r_thr: f64,
    pub stable_iters: usize,
    pub merge_dist: f64,
    pub merge_angle: f64,
    /// Added to every covariance update (m²).
    pub regularization_eps: f64,
    /// Meters per radian when mixing angular distance into seeding distances.
    pub seed_angle_scale: f64,
    pub contribution: ContributionMode,
    pub rng_seed: u64,
}

impl Default for ClusterParams {
    fn default() -> Self {
        Self {
            n_seeds: 32,
            uniform_seed_fraction: 0.25,
            sigma0: 0.3,
            kappa0: 10.0,
            max_iterations: 30,
            d_thr: 1e-3,
            r_thr: 1e-3,
            stable_iters: 2,
            merge_dist: 0.05,
            merge_angle: 2f64.to_radians(),
            regularization_eps: 1e-6,
            seed_angle_scale: 1.0,
            contribution: ContributionMode::Projected,
            rng_seed: 0,
        }
    }
}

impl ClusterParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |name, reason: &str| {
            Err(Error::InvalidParameter {
                name,
                reason: reason.to_string(),
            })
        };
        if self.n_seeds == 0 {
            return bad("n_seeds", "must be at least 1");
        }
        if !(0.0..=1.0).contains(&self.uniform_seed_fraction) {
            return bad("uniform_seed_fraction", "must lie in [0, 1]");
        }
        let positive = [
            ("sigma0", self.sigma0),
            ("kappa0", self.kappa0),
            ("d_thr", self.d_thr),
            ("r_thr", self.r_thr),
            ("merge_dist", self.merge_dist),
            ("merge_angle", self.merge_angle),
            ("regularization_eps", self.regularization_eps),
            ("seed_angle_scale", self.seed_angle_scale),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return bad(name, "must be positive");
            }
        }
        if self.stable_iters == 0 {
            return bad("stable_iters", "must be at least 1");
        }
        Ok(())
    }
}

/// One ranked alignment candidate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub transform: Transform2,
    pub weight: f64,
    /// Average squared residual of the current scan under `transform` (m²).
    pub asr: f64,
    pub members: usize,
}

/// Candidates sorted by weight, descending; weights sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchResult {
    pub candidates: Vec<Candidate>,
}

impl MatchResult {
    pub fn best(&self) -> Option<&Candidate> {
        self.candidates.first()
    }
}
