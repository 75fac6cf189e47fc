use nalgebra::Matrix2;

use super::{Cluster, ClusterParams};
use crate::geometry::{angle_diff, normalize_angle, Point2};

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

fn linked(a: &Cluster, b: &Cluster, params: &ClusterParams) -> bool {
    a.mu.distance(b.mu) < params.merge_dist && angle_diff(a.theta, b.theta).abs() < params.merge_angle
}

fn merge_once(clusters: &[Cluster], params: &ClusterParams) -> Vec<Cluster> {
    let n = clusters.len();
    let mut parent: Vec<usize> = (0..n).collect();
    for i in 0..n {
        for j in i + 1..n {
            if linked(&clusters[i], &clusters[j], params) {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri.max(rj)] = ri.min(rj);
                }
            }
        }
    }

    // components in order of their first member
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        if slot[r] == usize::MAX {
            slot[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[r]].push(i);
    }

    groups
        .into_iter()
        .map(|g| {
            if g.len() == 1 {
                return clusters[g[0]];
            }
            let inv = 1.0 / g.len() as f64;
            let (mut mu, mut sigma, mut s, mut c, mut kappa, mut members) =
                (Point2::ORIGIN, Matrix2::zeros(), 0.0, 0.0, 0.0, 0);
            for &i in &g {
                let k = &clusters[i];
                mu += k.mu;
                sigma += k.sigma;
                let (sin, cos) = k.theta.sin_cos();
                s += sin;
                c += cos;
                kappa += k.kappa;
                members += k.members;
            }
            Cluster {
                mu: mu * inv,
                sigma: sigma * inv,
                theta: normalize_angle(s.atan2(c)),
                kappa: kappa * inv,
                members,
            }
        })
        .collect()
}

/// Fuses clusters linked (transitively) by sub-threshold translation and
/// rotation distances into their unweighted component means. Repeats until
/// no pair of outputs is linked.
pub fn merge_connected(clusters: &[Cluster], params: &ClusterParams) -> Vec<Cluster> {
    let mut current = clusters.to_vec();
    loop {
        let next = merge_once(&current, params);
        if next.len() == current.len() {
            return next;
        }
        current = next;
    }
}
