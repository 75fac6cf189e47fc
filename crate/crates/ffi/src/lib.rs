//! C ABI for the mhsm scan matcher.
//!
//! Every fallible function returns an [`MhsmStatus`]; on failure the
//! message is available from [`mhsm_last_error_message`] on the same
//! thread. Scans and match results are opaque handles released with their
//! `_free` function. Panics never cross the boundary.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use mhsm::baseline::{icp_match, idc_match, IterativeParams, IterativeResult};
use mhsm::{
    match_scans, polar_to_cartesian, CartesianScan, ClusterParams, ContributionMode, Error, GenParams, MatchResult,
    Point2, PolarScan, Transform2,
};

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MhsmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    TooFewPoints = 3,
    MatchFailed = 4,
    OutOfRange = 5,
    Panic = 6,
}

/// Rigid transform `p ↦ R(theta)·p + (x, y)`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MhsmTransform {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl From<Transform2> for MhsmTransform {
    fn from(t: Transform2) -> Self {
        Self {
            x: t.translation.x,
            y: t.translation.y,
            theta: t.rotation(),
        }
    }
}

impl From<MhsmTransform> for Transform2 {
    fn from(t: MhsmTransform) -> Self {
        Transform2::from_xyt(t.x, t.y, t.theta)
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MhsmGenParams {
    pub n_hypotheses: usize,
    pub d_min: f64,
    pub d_max: f64,
    pub k: usize,
    pub rng_seed: u64,
}

impl From<MhsmGenParams> for GenParams {
    fn from(p: MhsmGenParams) -> Self {
        GenParams {
            n_hypotheses: p.n_hypotheses,
            d_min: p.d_min,
            d_max: p.d_max,
            k: p.k,
            rng_seed: p.rng_seed,
        }
    }
}

/// `contribution`: 0 projected, 1 per-axis.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MhsmClusterParams {
    pub n_seeds: usize,
    pub uniform_seed_fraction: f64,
    pub sigma0: f64,
    pub kappa0: f64,
    pub max_iterations: usize,
    pub d_thr: f64,
    pub r_thr: f64,
    pub stable_iters: usize,
    pub merge_dist: f64,
    pub merge_angle: f64,
    pub regularization_eps: f64,
    pub seed_angle_scale: f64,
    pub contribution: u32,
    pub rng_seed: u64,
}

impl TryFrom<MhsmClusterParams> for ClusterParams {
    type Error = Error;

    fn try_from(p: MhsmClusterParams) -> Result<Self, Error> {
        let contribution = match p.contribution {
            0 => ContributionMode::Projected,
            1 => ContributionMode::PerAxis,
            _ => {
                return Err(Error::InvalidParameter {
                    name: "contribution",
                    reason: "expected 0 (projected) or 1 (per-axis)".into(),
                })
            }
        };
        Ok(ClusterParams {
            n_seeds: p.n_seeds,
            uniform_seed_fraction: p.uniform_seed_fraction,
            sigma0: p.sigma0,
            kappa0: p.kappa0,
            max_iterations: p.max_iterations,
            d_thr: p.d_thr,
            r_thr: p.r_thr,
            stable_iters: p.stable_iters,
            merge_dist: p.merge_dist,
            merge_angle: p.merge_angle,
            regularization_eps: p.regularization_eps,
            seed_angle_scale: p.seed_angle_scale,
            contribution,
            rng_seed: p.rng_seed,
        })
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MhsmIterativeParams {
    pub max_iterations: usize,
    pub correspondence_cutoff: f64,
    pub convergence_eps_t: f64,
    pub convergence_eps_r: f64,
    pub angular_window: f64,
}

impl From<MhsmIterativeParams> for IterativeParams {
    fn from(p: MhsmIterativeParams) -> Self {
        IterativeParams {
            max_iterations: p.max_iterations,
            correspondence_cutoff: p.correspondence_cutoff,
            convergence_eps_t: p.convergence_eps_t,
            convergence_eps_r: p.convergence_eps_r,
            angular_window: p.angular_window,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MhsmCandidate {
    pub transform: MhsmTransform,
    pub weight: f64,
    pub asr: f64,
    pub members: usize,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MhsmIterativeResult {
    pub transform: MhsmTransform,
    pub iterations: usize,
    pub converged: bool,
    pub degraded: bool,
}

impl From<IterativeResult> for MhsmIterativeResult {
    fn from(r: IterativeResult) -> Self {
        Self {
            transform: r.transform.into(),
            iterations: r.iterations,
            converged: r.converged,
            degraded: r.degraded,
        }
    }
}

/// A Cartesian scan with its search index.
pub struct MhsmScan(CartesianScan);

/// Ranked candidates of one match.
pub struct MhsmMatchResult(MatchResult);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let c = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> MhsmStatus {
    match e {
        Error::TooFewPoints { .. } | Error::EmptyScan => MhsmStatus::TooFewPoints,
        Error::InvalidParameter { .. } | Error::InvalidScan(_) | Error::Config(_) => MhsmStatus::InvalidArgument,
        _ => MhsmStatus::MatchFailed,
    }
}

/// Runs `f`, recording any error or panic for [`mhsm_last_error_message`].
fn guard(f: impl FnOnce() -> Result<(), (MhsmStatus, String)>) -> MhsmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => MhsmStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(panic) => {
            let msg = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("internal panic: {msg}"));
            MhsmStatus::Panic
        }
    }
}

fn lib_err(e: Error) -> (MhsmStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (MhsmStatus, String) {
    (MhsmStatus::NullPointer, format!("`{what}` is null"))
}

unsafe fn slice<'a>(p: *const f64, n: usize, what: &str) -> Result<&'a [f64], (MhsmStatus, String)> {
    if n == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, n))
}

/// Message of the last failure on this thread, or null if none. Valid until
/// the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn mhsm_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version, a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn mhsm_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

#[no_mangle]
pub extern "C" fn mhsm_gen_params_default() -> MhsmGenParams {
    let p = GenParams::default();
    MhsmGenParams {
        n_hypotheses: p.n_hypotheses,
        d_min: p.d_min,
        d_max: p.d_max,
        k: p.k,
        rng_seed: p.rng_seed,
    }
}

#[no_mangle]
pub extern "C" fn mhsm_cluster_params_default() -> MhsmClusterParams {
    let p = ClusterParams::default();
    MhsmClusterParams {
        n_seeds: p.n_seeds,
        uniform_seed_fraction: p.uniform_seed_fraction,
        sigma0: p.sigma0,
        kappa0: p.kappa0,
        max_iterations: p.max_iterations,
        d_thr: p.d_thr,
        r_thr: p.r_thr,
        stable_iters: p.stable_iters,
        merge_dist: p.merge_dist,
        merge_angle: p.merge_angle,
        regularization_eps: p.regularization_eps,
        seed_angle_scale: p.seed_angle_scale,
        contribution: match p.contribution {
            ContributionMode::Projected => 0,
            ContributionMode::PerAxis => 1,
        },
        rng_seed: p.rng_seed,
    }
}

#[no_mangle]
pub extern "C" fn mhsm_iterative_params_default() -> MhsmIterativeParams {
    let p = IterativeParams::default();
    MhsmIterativeParams {
        max_iterations: p.max_iterations,
        correspondence_cutoff: p.correspondence_cutoff,
        convergence_eps_t: p.convergence_eps_t,
        convergence_eps_r: p.convergence_eps_r,
        angular_window: p.angular_window,
    }
}

/// Builds a scan from `n` points given as separate coordinate arrays.
#[no_mangle]
pub unsafe extern "C" fn mhsm_scan_from_points(
    xs: *const f64,
    ys: *const f64,
    n: usize,
    out: *mut *mut MhsmScan,
) -> MhsmStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let (xs, ys) = (slice(xs, n, "xs")?, slice(ys, n, "ys")?);
        let pts: Vec<Point2> = xs.iter().zip(ys).map(|(&x, &y)| Point2::new(x, y)).collect();
        if let Some(i) = pts.iter().position(|p| !p.is_finite()) {
            return Err((MhsmStatus::InvalidArgument, format!("point {i} is not finite")));
        }
        *out = Box::into_raw(Box::new(MhsmScan(CartesianScan::from_points(pts))));
        Ok(())
    })
}

/// Builds a scan from `n` polar readings with strictly increasing bearings.
/// Ranges above `max_range` (or NaN) are clamped to it; with
/// `drop_max_range` those readings are left out.
#[no_mangle]
pub unsafe extern "C" fn mhsm_scan_from_polar(
    ranges: *const f64,
    angles: *const f64,
    n: usize,
    max_range: f64,
    drop_max_range: bool,
    out: *mut *mut MhsmScan,
) -> MhsmStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let (r, a) = (slice(ranges, n, "ranges")?, slice(angles, n, "angles")?);
        let polar = PolarScan::from_ranges(r, a, max_range).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(MhsmScan(polar_to_cartesian(&polar, drop_max_range))));
        Ok(())
    })
}

/// Number of points, 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn mhsm_scan_len(scan: *const MhsmScan) -> usize {
    scan.as_ref().map_or(0, |s| s.0.len())
}

/// Releases a scan; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn mhsm_scan_free(scan: *mut MhsmScan) {
    if !scan.is_null() {
        drop(Box::from_raw(scan));
    }
}

/// Multi-hypothesis match of `current` into `reference` coordinates. Null
/// parameter pointers select the defaults.
#[no_mangle]
pub unsafe extern "C" fn mhsm_match(
    current: *const MhsmScan,
    reference: *const MhsmScan,
    gen: *const MhsmGenParams,
    clus: *const MhsmClusterParams,
    out: *mut *mut MhsmMatchResult,
) -> MhsmStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let cur = current.as_ref().ok_or_else(|| null("current"))?;
        let reference = reference.as_ref().ok_or_else(|| null("reference"))?;
        let gen = gen.as_ref().map_or_else(GenParams::default, |&g| g.into());
        let clus = match clus.as_ref() {
            Some(&c) => ClusterParams::try_from(c).map_err(lib_err)?,
            None => ClusterParams::default(),
        };
        let r = match_scans(&cur.0, &reference.0, &gen, &clus).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(MhsmMatchResult(r)));
        Ok(())
    })
}

/// Number of candidates, 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn mhsm_match_result_len(result: *const MhsmMatchResult) -> usize {
    result.as_ref().map_or(0, |r| r.0.candidates.len())
}

/// Candidate `index`, ranked by descending weight.
#[no_mangle]
pub unsafe extern "C" fn mhsm_match_result_get(
    result: *const MhsmMatchResult,
    index: usize,
    out: *mut MhsmCandidate,
) -> MhsmStatus {
    guard(|| {
        let r = result.as_ref().ok_or_else(|| null("result"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let c = r.0.candidates.get(index).ok_or_else(|| {
            (
                MhsmStatus::OutOfRange,
                format!("candidate {index} of {}", r.0.candidates.len()),
            )
        })?;
        *out = MhsmCandidate {
            transform: c.transform.into(),
            weight: c.weight,
            asr: c.asr,
            members: c.members,
        };
        Ok(())
    })
}

/// Releases a match result; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn mhsm_match_result_free(result: *mut MhsmMatchResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

unsafe fn iterative(
    current: *const MhsmScan,
    reference: *const MhsmScan,
    init: *const MhsmTransform,
    params: *const MhsmIterativeParams,
    out: *mut MhsmIterativeResult,
    run: fn(&CartesianScan, &CartesianScan, Transform2, &IterativeParams) -> mhsm::Result<IterativeResult>,
) -> MhsmStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let cur = current.as_ref().ok_or_else(|| null("current"))?;
        let reference = reference.as_ref().ok_or_else(|| null("reference"))?;
        let init = init.as_ref().map_or(Transform2::IDENTITY, |&t| t.into());
        let params = params.as_ref().map_or_else(IterativeParams::default, |&p| p.into());
        *out = run(&cur.0, &reference.0, init, &params).map_err(lib_err)?.into();
        Ok(())
    })
}

/// Point-to-point ICP. Null `init` means identity; null `params` the defaults.
#[no_mangle]
pub unsafe extern "C" fn mhsm_icp(
    current: *const MhsmScan,
    reference: *const MhsmScan,
    init: *const MhsmTransform,
    params: *const MhsmIterativeParams,
    out: *mut MhsmIterativeResult,
) -> MhsmStatus {
    iterative(current, reference, init, params, out, icp_match)
}

/// Iterative dual correspondence. Null `init` means identity; null `params`
/// the defaults.
#[no_mangle]
pub unsafe extern "C" fn mhsm_idc(
    current: *const MhsmScan,
    reference: *const MhsmScan,
    init: *const MhsmTransform,
    params: *const MhsmIterativeParams,
    out: *mut MhsmIterativeResult,
) -> MhsmStatus {
    iterative(current, reference, init, params, out, idc_match)
}
