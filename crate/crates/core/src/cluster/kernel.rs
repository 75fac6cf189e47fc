use nalgebra::{Matrix2, Vector2};

use super::{Cluster, ClusterParams, ContributionMode};
use crate::geometry::{angle_diff, normalize_angle, Point2};
use crate::hypothesis::Hypothesis;

/// Below this total membership a cluster is considered dead.
pub(crate) const DEAD_WEIGHT: f64 = 1e-12;

/// Eigenvalues of the contribution matrix below this fraction of the largest
/// are treated as unconstrained.
const RANK_TOL: f64 = 1e-9;

fn vec2(p: Point2) -> Vector2<f64> {
    Vector2::new(p.x, p.y)
}

/// `exp(-½m² + v)` with `m` the Mahalanobis length of the ψ-projected offset
/// and `v = κ·cos(Δθ)`.
pub fn membership_weight(h: &Hypothesis, c: &Cluster) -> f64 {
    weight_with(h, c, &c.precision(ClusterParams::default().regularization_eps))
}

pub(crate) fn weight_with(h: &Hypothesis, c: &Cluster, precision: &Matrix2<f64>) -> f64 {
    let along = h.psi.dot(h.delta_t - c.mu);
    let projected = vec2(h.psi * along);
    let m2 = projected.dot(&(precision * projected));
    let v = c.kappa * angle_diff(h.delta_theta, c.theta).cos();
    (-0.5 * m2 + v).exp()
}

/// Per-hypothesis quantities that stay fixed across refinement steps.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Prepared {
    t: Point2,
    psi: Point2,
    /// `ψ·ΔT`
    psi_t: f64,
    /// `ψψᵀ` as `(xx, xy, yy)`
    outer: (f64, f64, f64),
    sin: f64,
    cos: f64,
}

pub(crate) fn prepare(hyps: &[Hypothesis]) -> Vec<Prepared> {
    hyps.iter()
        .map(|h| {
            let (sin, cos) = h.delta_theta.sin_cos();
            let psi = h.psi;
            Prepared {
                t: h.delta_t,
                psi,
                psi_t: psi.dot(h.delta_t),
                outer: (psi.x * psi.x, psi.x * psi.y, psi.y * psi.y),
                sin,
                cos,
            }
        })
        .collect()
}

/// One refinement step. Returns `None` when the cluster has lost all support.
pub fn update_cluster(c: &Cluster, hyps: &[Hypothesis], params: &ClusterParams) -> Option<Cluster> {
    update_prepared(c, &prepare(hyps), params, &mut Vec::new())
}

/// [`update_cluster`] over prepared hypotheses; `weights` is scratch space.
pub(crate) fn update_prepared(
    c: &Cluster,
    hyps: &[Prepared],
    params: &ClusterParams,
    weights: &mut Vec<f64>,
) -> Option<Cluster> {
    let p = c.precision(params.regularization_eps);
    let (p00, p01, p11) = (p[(0, 0)], p[(0, 1)], p[(1, 1)]);
    let (sin_c, cos_c) = c.theta.sin_cos();
    let psi_mu = |h: &Prepared, mu: Point2| h.psi_t - h.psi.dot(mu);

    weights.clear();
    let (mut total, mut s, mut co) = (0.0, 0.0, 0.0);
    let mut info = Matrix2::zeros();
    let mut rhs = Vector2::zeros();
    let (mut nx, mut ny, mut sx, mut sy) = (0.0, 0.0, 0.0, 0.0);
    for h in hyps {
        let a = psi_mu(h, c.mu);
        let (xx, xy, yy) = h.outer;
        let m2 = a * a * (p00 * xx + 2.0 * p01 * xy + p11 * yy);
        let w = (-0.5 * m2 + c.kappa * (h.cos * cos_c + h.sin * sin_c)).exp();
        weights.push(w);
        total += w;
        s += w * h.sin;
        co += w * h.cos;
        match params.contribution {
            ContributionMode::Projected => {
                info[(0, 0)] += w * xx;
                info[(0, 1)] += w * xy;
                info[(1, 1)] += w * yy;
                rhs += vec2(h.psi) * (w * a);
            }
            ContributionMode::PerAxis => {
                let (ax, ay) = (w * h.psi.x.abs(), w * h.psi.y.abs());
                nx += ax;
                ny += ay;
                sx += ax * h.t.x;
                sy += ay * h.t.y;
            }
        }
    }
    if !(total >= DEAD_WEIGHT) || !total.is_finite() {
        return None;
    }
    let eta = total.recip();
    info[(1, 0)] = info[(0, 1)];

    let mu = match params.contribution {
        ContributionMode::Projected => c.mu + min_norm_solve(&info, &rhs),
        ContributionMode::PerAxis => Point2::new(
            if nx > 0.0 { sx / nx } else { c.mu.x },
            if ny > 0.0 { sy / ny } else { c.mu.y },
        ),
    };

    let mut sigma = Matrix2::zeros();
    for (h, &w) in hyps.iter().zip(weights.iter()) {
        if w == 0.0 {
            continue;
        }
        let dev = match params.contribution {
            ContributionMode::Projected => vec2(h.psi * psi_mu(h, mu)),
            ContributionMode::PerAxis => {
                let d = h.t - mu;
                Vector2::new(h.psi.x.abs() * d.x, h.psi.y.abs() * d.y)
            }
        };
        sigma += dev * dev.transpose() * w;
    }
    sigma *= eta;
    if params.contribution == ContributionMode::Projected {
        // directions the weighted contributions do not cover keep their spread
        let free = Matrix2::identity() - info * eta;
        sigma += free * c.sigma * free.transpose();
    }
    sigma += Matrix2::identity() * params.regularization_eps;
    // exact symmetry
    let off = 0.5 * (sigma[(0, 1)] + sigma[(1, 0)]);
    sigma[(0, 1)] = off;
    sigma[(1, 0)] = off;

    let theta = if s.hypot(co) > DEAD_WEIGHT * total {
        normalize_angle(s.atan2(co))
    } else {
        c.theta
    };
    // Σ wᵢ cos(θᵢ − θ') expanded through the sums above
    let (sin_t, cos_t) = theta.sin_cos();
    let kappa = eta * (co * cos_t + s * sin_t);

    Some(Cluster {
        mu,
        sigma,
        theta,
        kappa: kappa.max(0.0),
        members: c.members,
    })
}

/// Minimum-norm solution of `info · x = rhs`, ignoring directions whose
/// eigenvalue is negligible.
fn min_norm_solve(info: &Matrix2<f64>, rhs: &Vector2<f64>) -> Point2 {
    let eig = info.symmetric_eigen();
    let cutoff = RANK_TOL * eig.eigenvalues.amax();
    let mut step = Vector2::zeros();
    for k in 0..2 {
        let lambda = eig.eigenvalues[k];
        if lambda > cutoff && lambda > 0.0 {
            let u = eig.eigenvectors.column(k);
            step += u * (u.dot(rhs) / lambda);
        }
    }
    Point2::new(step.x, step.y)
}
