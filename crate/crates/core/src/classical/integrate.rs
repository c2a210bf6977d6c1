//! Method-of-steps integration of the classical delay equations.
//!
//! Classical fourth-order Runge-Kutta with a fixed step no larger than the
//! delay, so every delayed lookup lands in already-computed history. Delayed
//! values between nodes come from cubic Hermite interpolation on the stored
//! node values and derivatives, which preserves the fourth-order accuracy of
//! the stepper. The history before the start is the constant initial state.
//!
//! The requested step is honoured exactly; a single shorter step lands on the
//! final time. Keeping the step exact matters because the constant history
//! plants derivative kinks at every multiple of the delay, and a step that
//! divides the delay keeps those kinks on nodes where they cost no accuracy.

use num_complex::Complex64;

use super::{dde_rhs, ClassicalError, ClassicalParams, ClassicalState};

#[derive(Debug, Clone, Copy)]
struct Node {
    y: [f64; 4],
    f: [f64; 4],
}

/// Ring of the most recent nodes, wide enough to cover one delay span.
#[derive(Debug, Clone)]
struct DenseWindow {
    nodes: Vec<Node>,
    /// Global index of the first retained node.
    first: usize,
    capacity: usize,
}

impl DenseWindow {
    fn new(capacity: usize) -> Self {
        Self {
            nodes: Vec::with_capacity(capacity),
            first: 0,
            capacity,
        }
    }

    fn push(&mut self, node: Node) {
        if self.nodes.len() == self.capacity {
            self.nodes.remove(0);
            self.first += 1;
        }
        self.nodes.push(node);
    }

    fn get(&self, global_index: usize) -> Option<&Node> {
        global_index
            .checked_sub(self.first)
            .and_then(|i| self.nodes.get(i))
    }
}

/// A computed trajectory of the classical model.
///
/// Node values are kept at full resolution for the whole run; the dense
/// Hermite data used for delayed lookups is retained over a rolling window of
/// at least one delay span ending at the final time.
#[derive(Debug, Clone)]
pub struct ClassicalTrajectory {
    params: ClassicalParams,
    step: f64,
    /// Width of the final step; equal to `step` when the horizon is an exact
    /// multiple of it.
    last_step: f64,
    sig_re: Vec<f64>,
    sig_im: Vec<f64>,
    pump_re: Vec<f64>,
    pump_im: Vec<f64>,
    window: DenseWindow,
}

impl ClassicalTrajectory {
    pub fn params(&self) -> &ClassicalParams {
        &self.params
    }

    /// The uniform step of the run (the final step may be shorter; see
    /// [`Self::time`]).
    pub fn step(&self) -> f64 {
        self.step
    }

    /// Number of stored nodes, including the initial state.
    pub fn len(&self) -> usize {
        self.sig_re.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sig_re.is_empty()
    }

    pub fn time(&self, index: usize) -> f64 {
        if index + 1 == self.len() {
            self.t_end()
        } else {
            index as f64 * self.step
        }
    }

    pub fn t_end(&self) -> f64 {
        (self.len() - 2) as f64 * self.step + self.last_step
    }

    pub fn state(&self, index: usize) -> ClassicalState {
        ClassicalState {
            signal: Complex64::new(self.sig_re[index], self.sig_im[index]),
            pump: Complex64::new(self.pump_re[index], self.pump_im[index]),
        }
    }

    pub fn final_state(&self) -> ClassicalState {
        self.state(self.len() - 1)
    }

    pub(crate) fn signal_re(&self) -> &[f64] {
        &self.sig_re
    }

    pub(crate) fn signal_im(&self) -> &[f64] {
        &self.sig_im
    }

    pub fn signal_abs(&self, index: usize) -> f64 {
        self.sig_re[index].hypot(self.sig_im[index])
    }

    /// Delayed signal value `e(t - tau)` for a query time `t - tau` inside
    /// the retained dense window (or before the start, where the history is
    /// the constant initial state). Node queries reproduce node values
    /// exactly.
    pub fn delayed_signal(&self, query_time: f64) -> Option<Complex64> {
        if query_time <= 0.0 {
            return Some(Complex64::new(self.sig_re[0], self.sig_im[0]));
        }
        let uniform_end = (self.len() - 2) as f64 * self.step;
        if query_time > self.t_end() + 1e-9 * self.step {
            return None;
        }
        if query_time > uniform_end {
            // Final short interval.
            let s = ((query_time - uniform_end) / self.last_step).min(1.0);
            let n0 = self.window.get(self.len() - 2)?;
            let n1 = self.window.get(self.len() - 1)?;
            return Some(hermite_signal(n0, n1, s, self.last_step));
        }
        let position = query_time / self.step;
        if position < self.window.first as f64 - 1e-9 {
            return None;
        }
        let (j, s) = split_position(position);
        let n0 = self.window.get(j)?;
        if s == 0.0 {
            return Some(Complex64::new(n0.y[0], n0.y[1]));
        }
        let n1 = self.window.get(j + 1)?;
        Some(hermite_signal(n0, n1, s, self.step))
    }
}

fn split_position(position: f64) -> (usize, f64) {
    let mut j = position.floor();
    let mut s = position - j;
    // Snap to the nearest node so that node queries are exact.
    if s < 1e-9 {
        s = 0.0;
    } else if s > 1.0 - 1e-9 {
        j += 1.0;
        s = 0.0;
    }
    (j as usize, s)
}

fn hermite_signal(n0: &Node, n1: &Node, s: f64, width: f64) -> Complex64 {
    let s2 = s * s;
    let s3 = s2 * s;
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    let eval =
        |i: usize| h00 * n0.y[i] + width * h10 * n0.f[i] + h01 * n1.y[i] + width * h11 * n1.f[i];
    Complex64::new(eval(0), eval(1))
}

fn rhs_array(y: [f64; 4], delayed_signal: Complex64, p: &ClassicalParams) -> [f64; 4] {
    let state = ClassicalState::from_array(y);
    let delayed = ClassicalState {
        signal: delayed_signal,
        pump: Complex64::new(0.0, 0.0),
    };
    dde_rhs(&state, &delayed, p).to_array()
}

fn add_scaled(y: [f64; 4], k: [f64; 4], factor: f64) -> [f64; 4] {
    [
        y[0] + factor * k[0],
        y[1] + factor * k[1],
        y[2] + factor * k[2],
        y[3] + factor * k[3],
    ]
}

/// Integrate from the constant-history initial state up to `t_end`.
///
/// The requested `step` must not exceed the delay when the delay is positive
/// (delayed lookups must stay in computed history); a single shorter final
/// step lands exactly on `t_end`. Overflowing states abort with a diagnostic
/// rather than propagating non-finite values.
pub fn integrate(
    p: &ClassicalParams,
    initial: ClassicalState,
    t_end: f64,
    step: f64,
) -> Result<ClassicalTrajectory, ClassicalError> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(ClassicalError::NonPositiveStep(step));
    }
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(ClassicalError::NonPositiveHorizon(t_end));
    }
    if p.tau() > 0.0 && step > p.tau() * (1.0 + 1e-12) {
        return Err(ClassicalError::StepExceedsDelay { step, tau: p.tau() });
    }
    let h = step;
    let mut n_full = (t_end / h + 1e-9).floor() as usize;
    let mut remainder = t_end - n_full as f64 * h;
    if remainder <= 1e-9 * h {
        // Horizon is an exact multiple of the step: fold the last interval
        // back into the uniform part.
        if n_full == 0 {
            n_full = 1;
        }
        remainder = 0.0;
    }
    let last_step = if remainder > 0.0 { remainder } else { h };
    let n_total = n_full + usize::from(remainder > 0.0);

    let tau_steps = p.tau() / h;
    let capacity = if p.tau() > 0.0 {
        tau_steps.ceil() as usize + 3
    } else {
        4
    };
    let mut window = DenseWindow::new(capacity.max(4));

    let mut sig_re = Vec::with_capacity(n_total + 1);
    let mut sig_im = Vec::with_capacity(n_total + 1);
    let mut pump_re = Vec::with_capacity(n_total + 1);
    let mut pump_im = Vec::with_capacity(n_total + 1);

    let initial_signal = initial.signal;
    let mut y = initial.to_array();

    let record = |y: &[f64; 4],
                  sig_re: &mut Vec<f64>,
                  sig_im: &mut Vec<f64>,
                  pump_re: &mut Vec<f64>,
                  pump_im: &mut Vec<f64>| {
        sig_re.push(y[0]);
        sig_im.push(y[1]);
        pump_re.push(y[2]);
        pump_im.push(y[3]);
    };
    record(&y, &mut sig_re, &mut sig_im, &mut pump_re, &mut pump_im);

    // Delayed signal at fractional node position `q` (in units of h).
    let lookup = |q: f64, window: &DenseWindow| -> Complex64 {
        if q <= 1e-12 {
            return initial_signal;
        }
        let (j, s) = split_position(q);
        let n0 = window.get(j).expect("delayed lookup inside stored window");
        if s == 0.0 {
            return Complex64::new(n0.y[0], n0.y[1]);
        }
        let n1 = window
            .get(j + 1)
            .expect("delayed lookup inside stored window");
        hermite_signal(n0, n1, s, h)
    };

    for i in 0..n_total {
        // Width of this step and stage offsets in units of h.
        let (width, base) = if i < n_full {
            (h, i as f64)
        } else {
            (last_step, i as f64)
        };
        let half_frac = 0.5 * width / h;
        let full_frac = width / h;

        let k1 = if p.tau() > 0.0 {
            rhs_array(y, lookup(base - tau_steps, &window), p)
        } else {
            rhs_array(y, ClassicalState::from_array(y).signal, p)
        };
        window.push(Node { y, f: k1 });

        let (k2, k3, k4) = if p.tau() > 0.0 {
            let delayed_half = lookup(base + half_frac - tau_steps, &window);
            let delayed_full = lookup(base + full_frac - tau_steps, &window);
            let k2 = rhs_array(add_scaled(y, k1, width / 2.0), delayed_half, p);
            let k3 = rhs_array(add_scaled(y, k2, width / 2.0), delayed_half, p);
            let k4 = rhs_array(add_scaled(y, k3, width), delayed_full, p);
            (k2, k3, k4)
        } else {
            let stage2 = add_scaled(y, k1, width / 2.0);
            let k2 = rhs_array(stage2, ClassicalState::from_array(stage2).signal, p);
            let stage3 = add_scaled(y, k2, width / 2.0);
            let k3 = rhs_array(stage3, ClassicalState::from_array(stage3).signal, p);
            let stage4 = add_scaled(y, k3, width);
            let k4 = rhs_array(stage4, ClassicalState::from_array(stage4).signal, p);
            (k2, k3, k4)
        };

        for c in 0..4 {
            y[c] += width / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
        }
        if y.iter().any(|v| !v.is_finite() || v.abs() > 1e12) {
            return Err(ClassicalError::NonFiniteState {
                t: i as f64 * h + width,
            });
        }
        record(&y, &mut sig_re, &mut sig_im, &mut pump_re, &mut pump_im);
    }

    // Final node derivative completes the dense window.
    let k_final = if p.tau() > 0.0 {
        let q = (n_full as f64 * h + if remainder > 0.0 { remainder } else { 0.0 } - p.tau()) / h;
        rhs_array(y, lookup(q, &window), p)
    } else {
        rhs_array(y, ClassicalState::from_array(y).signal, p)
    };
    window.push(Node { y, f: k_final });

    Ok(ClassicalTrajectory {
        params: *p,
        step: h,
        last_step,
        sig_re,
        sig_im,
        pump_re,
        pump_im,
        window,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig_oscillation_params(x: f64) -> ClassicalParams {
        ClassicalParams::builder().tau(1.8833).x(x).build().unwrap()
    }

    fn half_initial() -> ClassicalState {
        ClassicalState::new(Complex64::new(0.5, 0.0), Complex64::new(0.0, 0.0))
    }

    #[test]
    fn rejects_bad_stepping() {
        let p = fig_oscillation_params(0.5);
        assert!(matches!(
            integrate(&p, half_initial(), 10.0, 2.0),
            Err(ClassicalError::StepExceedsDelay { .. })
        ));
        assert!(matches!(
            integrate(&p, half_initial(), 10.0, 0.0),
            Err(ClassicalError::NonPositiveStep(_))
        ));
        assert!(matches!(
            integrate(&p, half_initial(), -1.0, 0.1),
            Err(ClassicalError::NonPositiveHorizon(_))
        ));
    }

    #[test]
    fn horizon_is_hit_exactly() {
        let p = fig_oscillation_params(0.5);
        // Non-commensurate horizon: one short final step.
        let traj = integrate(&p, half_initial(), 10.0, 0.3).unwrap();
        assert!((traj.t_end() - 10.0).abs() < 1e-12);
        assert_eq!(traj.len(), 35); // 33 full steps + short step + initial
        assert!((traj.time(34) - 10.0).abs() < 1e-12);
        assert!((traj.time(33) - 9.9).abs() < 1e-12);
        // Commensurate horizon: uniform all the way.
        let traj = integrate(&p, half_initial(), 9.0, 0.3).unwrap();
        assert_eq!(traj.len(), 31);
        assert!((traj.t_end() - 9.0).abs() < 1e-12);
    }

    #[test]
    fn zero_drive_decays_to_origin() {
        for tau in [0.0, 0.7, 2.5] {
            let p = ClassicalParams::builder().tau(tau).build().unwrap();
            let step = if tau > 0.0 {
                (tau / 40.0).min(0.01)
            } else {
                0.01
            };
            let traj = integrate(&p, half_initial(), 150.0, step).unwrap();
            let end = traj.final_state();
            assert!(end.signal.norm() < 1e-6, "tau={tau}");
            assert!(end.pump.norm() < 1e-6, "tau={tau}");
        }
    }

    #[test]
    fn below_hopf_decays_above_hopf_oscillates() {
        // Drive just below the delay-induced instability: envelope decays.
        let p = fig_oscillation_params(0.745);
        let traj = integrate(&p, half_initial(), 400.0, 0.01).unwrap();
        let n = traj.len();
        let early: f64 = (n / 4..n / 2)
            .map(|i| traj.signal_abs(i))
            .fold(0.0, f64::max);
        let late: f64 = (3 * n / 4..n)
            .map(|i| traj.signal_abs(i))
            .fold(0.0, f64::max);
        assert!(late < early, "late={late} early={early}");

        // Slightly above: the envelope settles to a sustained oscillation.
        let p = fig_oscillation_params(0.78);
        let traj = integrate(&p, half_initial(), 400.0, 0.01).unwrap();
        let n = traj.len();
        let late_max: f64 = (3 * n / 4..n)
            .map(|i| traj.signal_abs(i))
            .fold(0.0, f64::max);
        let late_min: f64 = (3 * n / 4..n)
            .map(|i| traj.signal_abs(i))
            .fold(f64::INFINITY, f64::min);
        assert!(late_max - late_min > 0.05, "oscillation ptp too small");
    }

    #[test]
    fn delayed_lookup_reproduces_nodes() {
        let p = fig_oscillation_params(0.6);
        let traj = integrate(&p, half_initial(), 20.0, 0.05).unwrap();
        let n = traj.len();
        // Node queries inside the retained window return stored values.
        for index in (n - 30)..n {
            let t = traj.time(index);
            let looked_up = traj.delayed_signal(t).unwrap();
            let stored = traj.state(index).signal;
            assert!(
                (looked_up - stored).norm() < 1e-13,
                "node {index}: {looked_up} vs {stored}"
            );
        }
        // Pre-history queries return the initial state.
        assert_eq!(traj.delayed_signal(-1.0).unwrap(), Complex64::new(0.5, 0.0));
        // Queries before the rolling window report their absence.
        assert!(traj.delayed_signal(0.5).is_none());
    }

    #[test]
    fn fourth_order_convergence() {
        // Steps that divide the delay keep the history kinks on nodes; the
        // step-halving error ratio then sits at the clean fourth-order value.
        let p = fig_oscillation_params(0.745);
        let tau = p.tau();
        let t_end = 30.0;
        let reference = integrate(&p, half_initial(), t_end, tau / 128.0)
            .unwrap()
            .final_state();
        let coarse = integrate(&p, half_initial(), t_end, tau / 16.0)
            .unwrap()
            .final_state();
        let fine = integrate(&p, half_initial(), t_end, tau / 32.0)
            .unwrap()
            .final_state();
        let err = |s: ClassicalState| {
            ((s.signal - reference.signal).norm_sqr() + (s.pump - reference.pump).norm_sqr()).sqrt()
        };
        let ratio = err(coarse) / err(fine);
        assert!(
            (8.0..=32.0).contains(&ratio),
            "step-halving ratio {ratio} outside [8, 32]"
        );
    }

    #[test]
    fn overflow_is_diagnosed() {
        // The flow itself is globally bounded, so overflow can only be
        // numerical: a stiff pump with a step far beyond the stability limit
        // of the stepper must abort with a diagnostic, not emit NaNs.
        let p = ClassicalParams::builder()
            .tau(1.0)
            .x(0.5)
            .kappa_p(1000.0)
            .build()
            .unwrap();
        let start = ClassicalState::new(Complex64::new(0.5, 0.0), Complex64::new(0.0, 0.0));
        match integrate(&p, start, 50.0, 0.05) {
            Err(ClassicalError::NonFiniteState { t }) => assert!(t > 0.0),
            other => panic!("expected overflow diagnostic, got {other:?}"),
        }
    }
}
