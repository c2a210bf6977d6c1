//! Squeezing spectra and delayed-feedback dynamics of a degenerate
//! parametric amplifier whose output is coherently fed back with a time
//! delay.
//!
//! A two-sided cavity containing a parametric gain medium has its right
//! output routed into its left input through a loop with delay `tau`, phase
//! `phi` and power loss `L`. Below the oscillation threshold the homodyne
//! spectrum of the detected output is known in closed form; this crate
//! evaluates it together with everything the analysis hangs on:
//!
//! - [`params`] — parameter sets and the complex cavity response functions;
//! - [`spectrum`] — the output quadrature spectrum and the closed-form
//!   resonance variances used to cross-check it;
//! - [`critical`] — the sideband/delay pairs of perfect squeezing, their
//!   loss floor and tunability bounds;
//! - [`stability`] — rightmost characteristic roots of the linear delayed
//!   system, certified by contour winding counts;
//! - [`classical`] — the depleted-pump nonlinear model: delay-differential
//!   integration, steady-state branches, linearisation and the Hopf locus;
//! - [`rootfind`] — the argument-principle root machinery shared by the
//!   stability modules.
//!
//! Rates are unit-agnostic; every published result of the analysis depends
//! only on ratios to the total decay rate `kappa = kappa_b + kappa_c`, so the
//! command-line tools and the guide work in units where `kappa = 1`.
//!
//! ```
//! use dpa_feedback::params::SystemParams;
//! use dpa_feedback::critical::characteristic_point;
//!
//! // Symmetric lossless cavity pumped at 3/4 of the decay rate.
//! let p = SystemParams::builder().eps_mag(0.75).build()?;
//! let cp = characteristic_point(&p)?;
//! assert!((cp.nu_c - 0.968).abs() < 5e-4);
//! assert!((cp.tau_c - 1.8833).abs() < 5e-4);
//! assert_eq!(cp.squeezed_floor, 0.0); // lossless loop: perfect squeezing
//! # Ok::<(), Box<dyn std::error::Error>>(())
//! ```

pub mod classical;
pub mod critical;
pub mod grid;
pub mod params;
pub mod rootfind;
pub mod spectrum;
pub mod stability;

pub use classical::{
    classify_longtime, dde_rhs, hopf_locus, integrate, steady_residual, steady_states, Branch,
    ClassicalError, ClassicalParams, ClassicalState, ClassicalTrajectory, HopfPoint,
    LongTimeBehavior, PumpModel, SteadyState,
};
pub use critical::{
    antisqueezed_divergence_check, characteristic_point, feedback_strength_bounds, nu_c_range,
    squeezed_floor, CriticalError, CriticalPoint,
};
pub use params::{ParamsError, ResponseValues, SystemParams};
pub use spectrum::{
    optimal_quadrature_angle, resonance_variance_beamsplitter, resonance_variance_feedback,
    resonance_variance_no_feedback, spectrum_curve, squeezing_spectrum, variance_to_db,
    SpectrumCurve, SpectrumError, SpectrumPoint,
};
pub use stability::{
    characteristic_function, rightmost_roots, stability_boundary_phi0, stability_boundary_phipi,
    BoundaryAssessment, CharacteristicRoot, StabilityError,
};
