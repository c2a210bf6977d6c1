//! Classical nonlinear model with pump depletion.
//!
//! Replacing operators by their expectation values and keeping the pump mode
//! dynamical gives a pair of complex delay-differential equations for the
//! signal amplitude `e(t)` and pump amplitude `e_p(t)`:
//!
//! ```text
//! e'(t)   = -kappa e(t) + kappa e*(t) e_p(t) - e^{i phi} k e(t - tau)
//! e_p'(t) = -kappa_p (e_p(t) + e(t)^2 - x)
//! ```
//!
//! with dimensionless drive `x` (the driving amplitude in units of the decay
//! rate). The module integrates the equations by the method of steps, lists
//! the steady-state branches with their pitchfork threshold, linearises about
//! a steady state, traces the Hopf locus, and classifies long-time behaviour.

mod classify;
mod hopf;
mod integrate;
mod linearize;

pub use classify::{classify_longtime, LongTimeBehavior};
pub use hopf::{hopf_locus, HopfPoint, PumpModel};
pub use integrate::{integrate, ClassicalTrajectory};
pub use linearize::{linearize_at, DelayedLinearization};

use num_complex::Complex64;
use thiserror::Error;

use crate::rootfind::RootFindError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ClassicalError {
    #[error("mirror decay rates must be nonnegative and sum to a positive total")]
    InvalidDecayRates { kappa_b: f64, kappa_c: f64 },
    #[error("feedback-loop loss must lie in [0, 1], got {0}")]
    LossOutOfRange(f64),
    #[error("feedback delay must be nonnegative, got {0}")]
    NegativeDelay(f64),
    #[error("pump decay rate must be positive, got {0}")]
    NonPositivePumpDecay(f64),
    #[error("drive must be nonnegative, got {0}")]
    NegativeDrive(f64),
    #[error("parameter `{0}` is not finite")]
    NonFinite(&'static str),
    #[error("integration step {step} exceeds the delay {tau}; delayed lookups need step <= tau")]
    StepExceedsDelay { step: f64, tau: f64 },
    #[error("integration step must be positive, got {0}")]
    NonPositiveStep(f64),
    #[error("integration horizon must be positive, got {0}")]
    NonPositiveHorizon(f64),
    #[error("state overflowed or became non-finite at t = {t}")]
    NonFiniteState { t: f64 },
    #[error("not a steady state: right-hand-side residual {residual}")]
    NotASteadyState { residual: f64 },
    #[error("trajectory too short to classify: t_end = {t_end}, need at least {required}")]
    TrajectoryTooShort { t_end: f64, required: f64 },
    #[error("long-time behaviour undecidable on this span; integrate further")]
    Undecidable,
    #[error(transparent)]
    RootFind(#[from] RootFindError),
}

/// Parameters of the depleted-pump model: the cavity and loop of the linear
/// model (minus the pump amplitude, which is now dynamical) plus the pump
/// decay rate `kappa_p` and the dimensionless drive `x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassicalParams {
    kappa_b: f64,
    kappa_c: f64,
    loss: f64,
    phi: f64,
    tau: f64,
    kappa_p: f64,
    x: f64,
}

/// Builder for [`ClassicalParams`]; `kappa_p` defaults to the total cavity
/// decay rate.
#[derive(Debug, Clone, Copy, Default)]
pub struct ClassicalParamsBuilder {
    kappa_b: Option<f64>,
    kappa_c: Option<f64>,
    loss: Option<f64>,
    phi: Option<f64>,
    tau: Option<f64>,
    kappa_p: Option<f64>,
    x: Option<f64>,
}

macro_rules! classical_setters {
    ($($(#[$doc:meta])* $name:ident),* $(,)?) => {
        $(
            $(#[$doc])*
            pub fn $name(mut self, value: f64) -> Self {
                self.$name = Some(value);
                self
            }
        )*
    };
}

impl ClassicalParamsBuilder {
    classical_setters! {
        /// Field decay rate of the left mirror.
        kappa_b,
        /// Field decay rate of the right (fed-back) mirror.
        kappa_c,
        /// Power-loss fraction of the feedback loop.
        loss,
        /// Loop phase shift (rad).
        phi,
        /// Feedback time delay.
        tau,
        /// Pump decay rate; defaults to the total cavity decay rate.
        kappa_p,
        /// Dimensionless drive.
        x,
    }

    pub fn build(self) -> Result<ClassicalParams, ClassicalError> {
        let kappa_b = self.kappa_b.unwrap_or(0.5);
        let kappa_c = self.kappa_c.unwrap_or(0.5);
        let loss = self.loss.unwrap_or(0.0);
        let phi = self.phi.unwrap_or(0.0);
        let tau = self.tau.unwrap_or(0.0);
        let kappa_p = self.kappa_p.unwrap_or(kappa_b + kappa_c);
        let x = self.x.unwrap_or(0.0);
        let fields = [
            (kappa_b, "kappa_b"),
            (kappa_c, "kappa_c"),
            (loss, "loss"),
            (phi, "phi"),
            (tau, "tau"),
            (kappa_p, "kappa_p"),
            (x, "x"),
        ];
        for (value, name) in fields {
            if !value.is_finite() {
                return Err(ClassicalError::NonFinite(name));
            }
        }
        if kappa_b < 0.0 || kappa_c < 0.0 || kappa_b + kappa_c <= 0.0 {
            return Err(ClassicalError::InvalidDecayRates { kappa_b, kappa_c });
        }
        if !(0.0..=1.0).contains(&loss) {
            return Err(ClassicalError::LossOutOfRange(loss));
        }
        if tau < 0.0 {
            return Err(ClassicalError::NegativeDelay(tau));
        }
        if kappa_p <= 0.0 {
            return Err(ClassicalError::NonPositivePumpDecay(kappa_p));
        }
        if x < 0.0 {
            return Err(ClassicalError::NegativeDrive(x));
        }
        Ok(ClassicalParams {
            kappa_b,
            kappa_c,
            loss,
            phi,
            tau,
            kappa_p,
            x,
        })
    }
}

impl ClassicalParams {
    pub fn builder() -> ClassicalParamsBuilder {
        ClassicalParamsBuilder::default()
    }

    pub fn kappa_b(&self) -> f64 {
        self.kappa_b
    }

    pub fn kappa_c(&self) -> f64 {
        self.kappa_c
    }

    pub fn loss(&self) -> f64 {
        self.loss
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn kappa_p(&self) -> f64 {
        self.kappa_p
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    /// Copy with a different drive, keeping everything else.
    pub fn with_x(&self, x: f64) -> Result<Self, ClassicalError> {
        if !x.is_finite() {
            return Err(ClassicalError::NonFinite("x"));
        }
        if x < 0.0 {
            return Err(ClassicalError::NegativeDrive(x));
        }
        Ok(Self { x, ..*self })
    }

    /// Copy with a different delay, keeping everything else.
    pub fn with_tau(&self, tau: f64) -> Result<Self, ClassicalError> {
        if !tau.is_finite() {
            return Err(ClassicalError::NonFinite("tau"));
        }
        if tau < 0.0 {
            return Err(ClassicalError::NegativeDelay(tau));
        }
        Ok(Self { tau, ..*self })
    }

    pub fn kappa(&self) -> f64 {
        self.kappa_b + self.kappa_c
    }

    pub fn feedback_strength(&self) -> f64 {
        2.0 * (self.kappa_b * self.kappa_c * (1.0 - self.loss)).sqrt()
    }

    /// Drive at which the trivial branch loses stability through the
    /// pitchfork: `x_th = |1 + (k/kappa) e^{i phi}|`.
    pub fn x_threshold(&self) -> f64 {
        let ratio = self.feedback_strength() / self.kappa();
        Complex64::new(1.0 + ratio * self.phi.cos(), ratio * self.phi.sin()).norm()
    }
}

/// Signal and pump amplitudes at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassicalState {
    pub signal: Complex64,
    pub pump: Complex64,
}

impl ClassicalState {
    pub fn new(signal: Complex64, pump: Complex64) -> Self {
        Self { signal, pump }
    }

    pub(crate) fn from_array(v: [f64; 4]) -> Self {
        Self {
            signal: Complex64::new(v[0], v[1]),
            pump: Complex64::new(v[2], v[3]),
        }
    }

    pub(crate) fn to_array(self) -> [f64; 4] {
        [self.signal.re, self.signal.im, self.pump.re, self.pump.im]
    }
}

/// Time derivative of the classical model given the current state and the
/// delayed state.
pub fn dde_rhs(
    state: &ClassicalState,
    delayed: &ClassicalState,
    p: &ClassicalParams,
) -> ClassicalState {
    let kappa = p.kappa();
    let feedback = (Complex64::i() * p.phi()).exp() * p.feedback_strength() * delayed.signal;
    ClassicalState {
        signal: -kappa * state.signal + kappa * state.signal.conj() * state.pump - feedback,
        pump: -p.kappa_p() * (state.pump + state.signal * state.signal - p.x()),
    }
}

/// Steady-state branch labels: the trivial branch and the two pitchfork
/// branches above threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Trivial,
    Upper,
    Lower,
}

/// One steady state of the classical equations. Equilibria do not depend on
/// the delay, only their stability does.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyState {
    pub branch: Branch,
    pub amplitude: Complex64,
    pub pump: Complex64,
    pub x: f64,
}

impl SteadyState {
    pub fn state(&self) -> ClassicalState {
        ClassicalState::new(self.amplitude, self.pump)
    }
}

/// Maximum right-hand-side component norm at the candidate state; zero for a
/// true equilibrium.
pub fn steady_residual(p: &ClassicalParams, ss: &SteadyState) -> f64 {
    let state = ss.state();
    let rhs = dde_rhs(&state, &state, p);
    rhs.signal.norm().max(rhs.pump.norm())
}

/// All steady states at the current drive: the trivial branch always, the two
/// pitchfork branches for `x` above [`ClassicalParams::x_threshold`].
pub fn steady_states(p: &ClassicalParams) -> Vec<SteadyState> {
    let mut states = vec![SteadyState {
        branch: Branch::Trivial,
        amplitude: Complex64::new(0.0, 0.0),
        pump: Complex64::new(p.x(), 0.0),
        x: p.x(),
    }];
    let x = p.x();
    if x <= p.x_threshold() {
        return states;
    }
    let ratio = p.feedback_strength() / p.kappa();
    let sin_part = ratio * p.phi().sin();
    let xi_sq = x * x - sin_part * sin_part;
    if xi_sq < 0.0 {
        return states;
    }
    let xi = xi_sq.sqrt();
    let zeta = xi - (1.0 + ratio * p.phi().cos());
    if zeta < 0.0 {
        return states;
    }
    // amplitude^2 = (zeta / x)(xi - i (k/kappa) sin phi); pump = x - amplitude^2.
    let amp_sq = zeta / x * Complex64::new(xi, -sin_part);
    let amplitude = amp_sq.sqrt();
    let pump = x - amp_sq;
    states.push(SteadyState {
        branch: Branch::Upper,
        amplitude,
        pump,
        x,
    });
    states.push(SteadyState {
        branch: Branch::Lower,
        amplitude: -amplitude,
        pump,
        x,
    });
    states
}
