#![allow(dead_code)]

pub mod oracle;

use mhsm::sim::{raytrace_scan, Environment, SensorModel};
use mhsm::{polar_to_cartesian, CartesianScan, Pose2, Transform2};

pub const DEG: f64 = std::f64::consts::PI / 180.0;

/// Scans of the 6 m × 4 m room from `reference` and from `reference ∘ motion`.
/// Returns `(current, reference, truth)`.
pub fn room_pair(
    reference: Pose2,
    motion: Transform2,
    noise: f64,
    seed: u64,
) -> (CartesianScan, CartesianScan, Transform2) {
    let env = Environment::rectangle(6.0, 4.0);
    let current = reference.compose(&motion);
    let s = SensorModel {
        noise_std: noise,
        rng_seed: seed,
        ..SensorModel::default()
    };
    let r = polar_to_cartesian(&raytrace_scan(&env, &reference, &s).unwrap(), true);
    let c = polar_to_cartesian(
        &raytrace_scan(
            &env,
            &current,
            &SensorModel {
                rng_seed: seed ^ 0x5eed,
                ..s
            },
        )
        .unwrap(),
        true,
    );
    (c, r, reference.relative(&current))
}

pub fn errors(estimate: &Transform2, truth: &Transform2) -> (f64, f64) {
    mhsm::bench::pair_errors(truth, estimate)
}
