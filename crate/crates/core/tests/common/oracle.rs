use mhsm::{Cluster, Hypothesis};

/// The projected-mode step written out with scalar arithmetic.
pub struct Oracle {
    pub mu: [f64; 2],
    pub sigma: [[f64; 2]; 2],
    pub theta: f64,
    pub kappa: f64,
}

fn inv2(m: [[f64; 2]; 2]) -> Option<[[f64; 2]; 2]> {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    (det.abs() > 1e-300).then(|| [[m[1][1] / det, -m[0][1] / det], [-m[1][0] / det, m[0][0] / det]])
}

pub fn oracle(c: &Cluster, hyps: &[Hypothesis], eps: f64) -> Option<Oracle> {
    let s = [[c.sigma[(0, 0)], c.sigma[(0, 1)]], [c.sigma[(1, 0)], c.sigma[(1, 1)]]];
    let p = inv2(s)?;
    let mut w = Vec::new();
    for h in hyps {
        let (px, py) = (h.psi.x, h.psi.y);
        let a = px * (h.delta_t.x - c.mu.x) + py * (h.delta_t.y - c.mu.y);
        let (vx, vy) = (a * px, a * py);
        let m2 = vx * (p[0][0] * vx + p[0][1] * vy) + vy * (p[1][0] * vx + p[1][1] * vy);
        w.push((-0.5 * m2 + c.kappa * (h.delta_theta - c.theta).cos()).exp());
    }
    let total: f64 = w.iter().sum();
    if total < 1e-12 {
        return None;
    }
    let eta = 1.0 / total;
    let mut big_w = [[0.0; 2]; 2];
    let mut b = [0.0; 2];
    for (h, &wi) in hyps.iter().zip(&w) {
        let (px, py) = (h.psi.x, h.psi.y);
        let a = px * (h.delta_t.x - c.mu.x) + py * (h.delta_t.y - c.mu.y);
        big_w[0][0] += wi * px * px;
        big_w[0][1] += wi * px * py;
        big_w[1][0] += wi * py * px;
        big_w[1][1] += wi * py * py;
        b[0] += wi * px * a;
        b[1] += wi * py * a;
    }
    // rank-deficient systems take the minimum-norm path, not covered here
    let tr = big_w[0][0] + big_w[1][1];
    if big_w[0][0] * big_w[1][1] - big_w[0][1] * big_w[1][0] < 1e-6 * tr * tr {
        return None;
    }
    let wi = inv2(big_w)?;
    let mu = [
        c.mu.x + wi[0][0] * b[0] + wi[0][1] * b[1],
        c.mu.y + wi[1][0] * b[0] + wi[1][1] * b[1],
    ];
    let (mut sn, mut cs) = (0.0, 0.0);
    for (h, &wi) in hyps.iter().zip(&w) {
        sn += wi * h.delta_theta.sin();
        cs += wi * h.delta_theta.cos();
    }
    let theta = sn.atan2(cs);
    let kappa: f64 = eta
        * hyps
            .iter()
            .zip(&w)
            .map(|(h, &wi)| wi * (h.delta_theta - theta).cos())
            .sum::<f64>();

    let mut sigma = [[0.0; 2]; 2];
    for (h, &wi) in hyps.iter().zip(&w) {
        let (px, py) = (h.psi.x, h.psi.y);
        let a = px * (h.delta_t.x - mu[0]) + py * (h.delta_t.y - mu[1]);
        let d = [a * px, a * py];
        for r in 0..2 {
            for k in 0..2 {
                sigma[r][k] += eta * wi * d[r] * d[k];
            }
        }
    }
    let f = [
        [1.0 - eta * big_w[0][0], -eta * big_w[0][1]],
        [-eta * big_w[1][0], 1.0 - eta * big_w[1][1]],
    ];
    // F·Σ·Fᵀ
    for r in 0..2 {
        for k in 0..2 {
            let mut acc = 0.0;
            for i in 0..2 {
                for j in 0..2 {
                    acc += f[r][i] * s[i][j] * f[k][j];
                }
            }
            sigma[r][k] += acc;
        }
        sigma[r][r] += eps;
    }
    Some(Oracle {
        mu,
        sigma,
        theta,
        kappa: kappa.max(0.0),
    })
}
