//! Tracing the Hopf locus of the trivial branch in the (drive, delay) plane.
//!
//! For each delay on a grid, the drive at which the rightmost eigenvalue pair
//! crosses the imaginary axis is bracketed by bisection on the certified sign
//! of `max lambda_re`. The sign queries only need a winding count over a
//! right-half rectangle, which keeps the bisection cheap; the crossing
//! frequency is then read off a certified root search around the axis.

use num_complex::Complex64;

use super::{linearize_at, steady_states, Branch, ClassicalError, ClassicalParams};
use crate::params::SystemParams;
use crate::rootfind::{winding_number, Region, RootFindError};
use crate::stability;

/// Whether the pump mode is kept dynamical or frozen at its steady value.
///
/// Frozen-pump linearisation reproduces the linear (undepleted) model with
/// effective pump `kappa x`; the depleted variant uses the full
/// four-dimensional Jacobian. Below threshold the two agree exactly, which is
/// used as a cross-check between independent code paths.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PumpModel {
    Depleted,
    Frozen,
}

/// One located Hopf point: at delay `tau`, the trivial branch changes
/// stability at drive `x` with a marginal pair at `± i omega`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HopfPoint {
    pub x: f64,
    pub tau: f64,
    pub omega: f64,
    /// Characteristic-function magnitude at the located marginal root.
    pub residual: f64,
}

const BISECTION_TOL_X: f64 = 1e-6;

fn char_closure<'a>(
    p: &'a ClassicalParams,
    x: f64,
    model: PumpModel,
) -> Result<Box<dyn Fn(Complex64) -> Complex64 + 'a>, ClassicalError> {
    let at_x = p.with_x(x)?;
    match model {
        PumpModel::Frozen => {
            let undepleted = SystemParams::builder()
                .kappa_b(p.kappa_b())
                .kappa_c(p.kappa_c())
                .loss(p.loss())
                .phi(p.phi())
                .tau(p.tau())
                .eps_mag(p.kappa() * x)
                .build()
                .expect("classical params validate the shared fields");
            Ok(Box::new(move |z| {
                stability::characteristic_function(&undepleted, z)
            }))
        }
        PumpModel::Depleted => {
            let trivial = steady_states(&at_x)
                .into_iter()
                .find(|s| s.branch == Branch::Trivial)
                .expect("trivial branch always exists");
            let lin = linearize_at(&at_x, &trivial)?;
            Ok(Box::new(move |z| lin.characteristic_function(z)))
        }
    }
}

/// Right-half rectangle guaranteed to contain every root with nonnegative
/// real part: such roots satisfy `|lambda + kappa| <= k + sqrt((kappa x)^2 + k^2)`.
fn right_region(p: &ClassicalParams, x_max: f64) -> Region {
    let kappa = p.kappa();
    let k = p.feedback_strength();
    let reach = k + ((kappa * x_max).powi(2) + k * k).sqrt() + kappa;
    Region::new(1e-12 * kappa, reach, -reach, reach)
}

fn is_unstable(
    p: &ClassicalParams,
    x: f64,
    model: PumpModel,
    region: &Region,
) -> Result<bool, ClassicalError> {
    let f = char_closure(p, x, model)?;
    let phase_rate = 2.5 * p.tau() + 8.0 / p.kappa();
    // A marginal root can sit numerically on the left edge; nudge it a few
    // times before giving up on this query.
    let mut shift = 0.0;
    for _ in 0..5 {
        let probe = Region::new(
            region.re_min + shift,
            region.re_max,
            region.im_min,
            region.im_max,
        );
        match winding_number(f.as_ref(), &probe, phase_rate) {
            Ok(count) => return Ok(count > 0),
            Err(RootFindError::ContourThroughRoot) => {
                shift += 3e-9 * p.kappa();
            }
            Err(e) => return Err(e.into()),
        }
    }
    Err(RootFindError::ContourThroughRoot.into())
}

/// Marginal-pair frequency at the located crossing.
fn crossing_frequency(
    p: &ClassicalParams,
    x: f64,
    model: PumpModel,
    region: &Region,
) -> Option<(f64, f64)> {
    let f = char_closure(p, x, model).ok()?;
    let search = crate::rootfind::RootSearch {
        f: f.as_ref(),
        df: None,
        scale: p.kappa(),
        residual_tol: match model {
            PumpModel::Frozen => 1e-9 * p.kappa().powi(2),
            PumpModel::Depleted => 1e-7 * p.kappa().powi(4),
        },
        seed_step: p.kappa() / 8.0,
        extra_seeds: vec![],
        phase_rate: 2.5 * p.tau() + 8.0 / p.kappa(),
        cluster_radius: 1e-3 * p.kappa(),
    };
    // Narrow band around the imaginary axis: the crossing pair sits within
    // bisection resolution of it, every other root is far left.
    let band = Region::new(
        -0.05 * p.kappa(),
        region.re_max,
        region.im_min,
        region.im_max,
    );
    let roots = search.find_all(&band).ok()?;
    let marginal = roots
        .iter()
        .filter(|r| r.z.im > 1e-6 * p.kappa())
        .min_by(|a, b| a.z.re.abs().total_cmp(&b.z.re.abs()))?;
    (marginal.z.re.abs() < 1e-4 * p.kappa()).then_some((marginal.z.im, marginal.residual))
}

/// Hopf points of the trivial branch over a delay grid.
///
/// At each delay the drive is bisected inside `x_range` for the sign change
/// of the rightmost eigenvalue's real part (tolerance 1e-6 in `x`). Delays
/// whose crossing lies outside the range, or where the crossing is a real
/// root rather than a conjugate pair, are omitted.
pub fn hopf_locus(
    p: &ClassicalParams,
    taus: &[f64],
    x_range: (f64, f64),
    model: PumpModel,
) -> Result<Vec<HopfPoint>, ClassicalError> {
    let (x_lo, x_hi) = x_range;
    if !(x_lo >= 0.0 && x_hi > x_lo) {
        return Err(ClassicalError::NegativeDrive(x_lo.min(x_hi)));
    }
    let mut points = Vec::new();
    for &tau in taus {
        if tau < 0.0 {
            return Err(ClassicalError::NegativeDelay(tau));
        }
        let at_tau = p.with_tau(tau)?;
        let region = right_region(&at_tau, x_hi);
        let Ok(lo_unstable) = is_unstable(&at_tau, x_lo, model, &region) else {
            continue;
        };
        let Ok(hi_unstable) = is_unstable(&at_tau, x_hi, model, &region) else {
            continue;
        };
        if lo_unstable || !hi_unstable {
            // No sign change inside the range at this delay.
            continue;
        }
        let (mut lo, mut hi) = (x_lo, x_hi);
        while hi - lo > BISECTION_TOL_X {
            let mid = 0.5 * (lo + hi);
            match is_unstable(&at_tau, mid, model, &region) {
                Ok(true) => hi = mid,
                Ok(false) => lo = mid,
                Err(_) => break,
            }
        }
        if hi - lo > 10.0 * BISECTION_TOL_X {
            continue;
        }
        let x_star = 0.5 * (lo + hi);
        if let Some((omega, residual)) = crossing_frequency(&at_tau, x_star, model, &region) {
            points.push(HopfPoint {
                x: x_star,
                tau,
                omega,
                residual,
            });
        }
    }
    Ok(points)
}
