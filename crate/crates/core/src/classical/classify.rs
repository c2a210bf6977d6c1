//! Long-time classification of integrated trajectories.
//!
//! The verdict is read off the final fifth of the run: a collapsed
//! peak-to-peak signal magnitude means convergence, a steady oscillation is
//! reported with its period estimated from zero-crossing intervals of the
//! detrended signal, and an envelope still growing past ten times the initial
//! magnitude means runaway growth. Anything in between (for instance an
//! envelope still visibly decaying) is refused as undecidable rather than
//! guessed.

use super::{ClassicalError, ClassicalTrajectory};

/// Long-time verdict for a trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LongTimeBehavior {
    Converged,
    Oscillating { period: f64 },
    Growing,
}

const CONVERGED_PTP: f64 = 1e-6;
const GROWTH_FACTOR: f64 = 10.0;
/// Envelope drift allowed over the classification window for a verdict of
/// sustained oscillation (relative peak-to-peak change between half-windows).
const ENVELOPE_DRIFT_TOL: f64 = 0.02;
/// Spread allowed among zero-crossing intervals, relative to their mean.
const PERIOD_SPREAD_TOL: f64 = 0.05;

/// Classify the long-time behaviour of a trajectory.
///
/// Requires a span of at least `50 / kappa`, or ten delay spans when those
/// are longer than the fixed floor is.
pub fn classify_longtime(traj: &ClassicalTrajectory) -> Result<LongTimeBehavior, ClassicalError> {
    let p = traj.params();
    let kappa = p.kappa();
    let t_end = traj.t_end();
    let required = (50.0 / kappa).min(if p.tau() > 0.0 {
        10.0 * p.tau()
    } else {
        f64::INFINITY
    });
    if t_end < required {
        return Err(ClassicalError::TrajectoryTooShort { t_end, required });
    }

    let n = traj.len();
    let window_start = n - n / 5;
    let abs: Vec<f64> = (window_start..n).map(|i| traj.signal_abs(i)).collect();
    let (min, max) = abs
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    let ptp = max - min;
    if ptp < CONVERGED_PTP {
        return Ok(LongTimeBehavior::Converged);
    }

    let half = abs.len() / 2;
    let ptp_of = |slice: &[f64]| {
        let (lo, hi) = slice
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            });
        hi - lo
    };
    let first_ptp = ptp_of(&abs[..half]);
    let second_ptp = ptp_of(&abs[half..]);

    let initial_scale = traj.signal_abs(0).max(1e-12);
    if max > GROWTH_FACTOR * initial_scale && second_ptp > first_ptp * (1.0 + ENVELOPE_DRIFT_TOL) {
        return Ok(LongTimeBehavior::Growing);
    }

    let drift = (second_ptp - first_ptp).abs() / ptp.max(1e-300);
    if drift <= ENVELOPE_DRIFT_TOL {
        if let Some(period) = estimate_period(traj, window_start) {
            return Ok(LongTimeBehavior::Oscillating { period });
        }
    }
    Err(ClassicalError::Undecidable)
}

/// Period from upward zero crossings of the detrended signal component with
/// the larger swing (the signed component keeps the full period even when the
/// orbit is symmetric under sign flip, where the magnitude repeats twice per
/// cycle).
fn estimate_period(traj: &ClassicalTrajectory, window_start: usize) -> Option<f64> {
    let re = &traj.signal_re()[window_start..];
    let im = &traj.signal_im()[window_start..];
    let swing = |series: &[f64]| {
        let (lo, hi) = series
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            });
        hi - lo
    };
    let series = if swing(re) >= swing(im) { re } else { im };
    let mean = series.iter().sum::<f64>() / series.len() as f64;
    let h = traj.step();

    let mut crossings = Vec::new();
    for i in 1..series.len() {
        let prev = series[i - 1] - mean;
        let here = series[i] - mean;
        if prev < 0.0 && here >= 0.0 {
            let frac = prev / (prev - here);
            crossings.push((window_start + i - 1) as f64 * h + frac * h);
        }
    }
    if crossings.len() < 3 {
        return None;
    }
    let intervals: Vec<f64> = crossings.windows(2).map(|w| w[1] - w[0]).collect();
    let mean_interval = intervals.iter().sum::<f64>() / intervals.len() as f64;
    let consistent = intervals
        .iter()
        .all(|&iv| (iv - mean_interval).abs() <= PERIOD_SPREAD_TOL * mean_interval);
    consistent.then_some(mean_interval)
}
