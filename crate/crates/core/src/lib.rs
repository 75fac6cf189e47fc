//! Multi-hypothesis 2D scan matching.
//!
//! Candidate roto-translations are sampled from random point-pair
//! correspondences between two range scans, then clustered with a mean-shift
//! whose kernel is a planar Gaussian over translation times a von Mises
//! density over rotation. The crate also carries ICP/IDC baselines, a
//! raytrace simulator, a CARMEN log reader and a benchmark harness.

pub mod baseline;
pub mod bench;
pub mod carmen;
pub mod cluster;
pub mod config;
pub mod error;
pub mod geometry;
pub mod hypothesis;
mod kdtree;
pub mod matcher;
pub mod scan;
pub mod sim;

pub use cluster::{Candidate, Cluster, ClusterParams, ContributionMode, MatchResult};
pub use error::{Error, Result};
pub use geometry::{angle_diff, apply_transform, normalize_angle, rotate, Point2, Pose2, Transform2};
pub use hypothesis::{GenParams, Hypothesis};
pub use matcher::match_scans;
pub use scan::{polar_to_cartesian, CartesianScan, PolarScan, Reading};
