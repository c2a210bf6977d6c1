//! Output quadrature squeezing spectra and closed-form resonance variances.
//!
//! The homodyne-detected output of the left mirror has a frequency-resolved
//! quadrature variance built from the cavity response functions. Vacuum sits
//! at 1/4 (0 dB); squeezing pushes the variance below that, antisqueezing
//! above. The full spectrum [`squeezing_spectrum`] covers arbitrary loop
//! phase, loss, delay and detuning; the closed-form resonance variances in
//! this module are independent routes used to cross-check it.

use num_complex::Complex64;
use thiserror::Error;

use crate::params::SystemParams;

/// Vacuum (shot-noise) level of a quadrature variance.
pub const VACUUM_VARIANCE: f64 = 0.25;

/// Divergence guard: a spectrum point is flagged when `|m(nu)|^2 / kappa^4`
/// falls below this threshold, where the spectral formula degenerates to 0/0.
pub const DIVERGENCE_GUARD: f64 = 1e-18;

/// Decibel values are clamped to `[-DB_CLAMP, DB_CLAMP]` so that grids stay
/// rectangular next to singular points.
pub const DB_CLAMP: f64 = 200.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectrumError {
    #[error("pump strength {eps_mag} is at or above the oscillation threshold {threshold}")]
    AboveThreshold { eps_mag: f64, threshold: f64 },
    #[error("beam-splitter reflectivity must lie in [0, 1), got {0}")]
    ReflectivityOutOfRange(f64),
    #[error("detuning magnitude {delta} exceeds the pump strength {eps_mag}")]
    DetuningExceedsPump { delta: f64, eps_mag: f64 },
    #[error("operation requires sin(phi) = 0, got phi = {0}")]
    PhaseNotAxial(f64),
    #[error("operation requires a lossless loop, got loss = {0}")]
    LossyLoop(f64),
    #[error("frequency grid is empty")]
    EmptyGrid,
    #[error("frequency grid must be strictly increasing")]
    NonMonotonicGrid,
}

/// One point of a quadrature spectrum.
///
/// `diverged` marks the singular neighbourhood where the spectral formula is
/// indeterminate; `variance` is NaN there and `decibels` pinned to the clamp.
/// Away from it, `variance >= 0` and `decibels = 10 log10(variance / (1/4))`
/// clamped to `[-200, 200]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumPoint {
    pub nu: f64,
    pub theta_prime: f64,
    pub variance: f64,
    pub decibels: f64,
    pub diverged: bool,
}

/// A spectrum sampled over a frequency grid at one quadrature angle.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumCurve {
    pub theta_prime: f64,
    pub points: Vec<SpectrumPoint>,
}

impl SpectrumCurve {
    /// The non-diverged point with the smallest variance, if any.
    pub fn min_point(&self) -> Option<&SpectrumPoint> {
        self.points
            .iter()
            .filter(|pt| !pt.diverged)
            .min_by(|a, b| a.variance.total_cmp(&b.variance))
    }
}

/// Decibels relative to vacuum, clamped for plotting.
pub fn variance_to_db(variance: f64) -> f64 {
    let db = 10.0 * (variance / VACUUM_VARIANCE).log10();
    if db.is_nan() {
        DB_CLAMP
    } else {
        db.clamp(-DB_CLAMP, DB_CLAMP)
    }
}

/// Output quadrature variance at sideband frequency `nu` and local-oscillator
/// angle `theta_prime`.
///
/// The quadrature angle enters only through `theta - theta_prime`, so the
/// squeezed quadrature sits at `theta_prime = eps_phase + pi` whenever the
/// detuning vanishes. Divergence at the singular points of the response is
/// reported through the flag, not as an error.
pub fn squeezing_spectrum(p: &SystemParams, theta_prime: f64, nu: f64) -> SpectrumPoint {
    let eps = p.eps_mag();
    if eps == 0.0 {
        // Without pump the loop is passive linear optics and the output is
        // exactly vacuum, including at marginal configurations where the
        // response denominator vanishes.
        return SpectrumPoint {
            nu,
            theta_prime,
            variance: VACUUM_VARIANCE,
            decibels: 0.0,
            diverged: false,
        };
    }
    let r = p.response_at(nu);
    let rm = p.response_at(-nu);
    let kappa = p.kappa();
    let m_sq = r.m.norm_sqr();
    let guard = DIVERGENCE_GUARD * kappa.powi(4);

    if m_sq < guard {
        return SpectrumPoint {
            nu,
            theta_prime,
            variance: f64::NAN,
            decibels: DB_CLAMP,
            diverged: true,
        };
    }

    let rotation = (Complex64::i() * (p.eps_phase() - theta_prime)).exp();
    let interference = (rotation * (r.d_plus * rm.d_plus + eps * eps) * r.f_b * rm.f_b).re;
    let direct = eps * (r.d_minus.re * rm.f_b.norm_sqr() + r.d_plus.re * r.f_b.norm_sqr());
    let mut variance = eps / (4.0 * p.kappa_b()) * (interference + direct) / m_sq + VACUUM_VARIANCE;

    let mut diverged = false;
    if !variance.is_finite() || variance < -1e-12 {
        // Catastrophic cancellation right next to a zero of m: the point is
        // inside the singular neighbourhood for all practical purposes.
        variance = f64::NAN;
        diverged = true;
    } else if variance < 0.0 {
        variance = 0.0;
    }

    SpectrumPoint {
        nu,
        theta_prime,
        variance,
        decibels: if diverged {
            DB_CLAMP
        } else {
            variance_to_db(variance)
        },
        diverged,
    }
}

/// Pointwise spectrum over a strictly increasing frequency grid.
pub fn spectrum_curve(
    p: &SystemParams,
    theta_prime: f64,
    nu_grid: &[f64],
) -> Result<SpectrumCurve, SpectrumError> {
    if nu_grid.is_empty() {
        return Err(SpectrumError::EmptyGrid);
    }
    if nu_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(SpectrumError::NonMonotonicGrid);
    }
    Ok(SpectrumCurve {
        theta_prime,
        points: nu_grid
            .iter()
            .map(|&nu| squeezing_spectrum(p, theta_prime, nu))
            .collect(),
    })
}

/// On-resonance phase-quadrature variance of an ideal one-sided amplifier
/// without feedback: `(1/4) (kappa - eps)^2 / (kappa + eps)^2`.
pub fn resonance_variance_no_feedback(kappa: f64, eps_mag: f64) -> Result<f64, SpectrumError> {
    if eps_mag >= kappa {
        return Err(SpectrumError::AboveThreshold {
            eps_mag,
            threshold: kappa,
        });
    }
    let ratio = (kappa - eps_mag) / (kappa + eps_mag);
    Ok(VACUUM_VARIANCE * ratio * ratio)
}

/// On-resonance variance of the earlier beam-splitter feedback scheme, where
/// a mirror loop of reflectivity `r` renormalises the decay rate to
/// `kappa(r) = (1 - r) kappa / (1 + r)`.
pub fn resonance_variance_beamsplitter(
    kappa: f64,
    eps_mag: f64,
    r: f64,
) -> Result<f64, SpectrumError> {
    if !(0.0..1.0).contains(&r) {
        return Err(SpectrumError::ReflectivityOutOfRange(r));
    }
    let effective = (1.0 - r) * kappa / (1.0 + r);
    resonance_variance_no_feedback(effective, eps_mag)
}

/// On-resonance variance of the delayed-feedback setup at axial loop phase
/// and zero loss:
/// `(1/4) [(kappa + k cos(phi) - e) / (kappa + k cos(phi) + e)]^2`
/// with `e = sqrt(eps^2 - delta^2)`.
///
/// The value does not depend on the delay because every loop phase factor
/// drops out on resonance.
pub fn resonance_variance_feedback(p: &SystemParams) -> Result<f64, SpectrumError> {
    if !p.has_axial_phase() {
        return Err(SpectrumError::PhaseNotAxial(p.phi()));
    }
    if p.loss() != 0.0 {
        return Err(SpectrumError::LossyLoop(p.loss()));
    }
    let eps_delta = p
        .detuned_pump_mag()
        .ok_or(SpectrumError::DetuningExceedsPump {
            delta: p.delta(),
            eps_mag: p.eps_mag(),
        })?;
    let effective = p.kappa() + p.feedback_strength() * p.phi().cos();
    if effective <= eps_delta {
        return Err(SpectrumError::AboveThreshold {
            eps_mag: eps_delta,
            threshold: effective,
        });
    }
    let ratio = (effective - eps_delta) / (effective + eps_delta);
    Ok(VACUUM_VARIANCE * ratio * ratio)
}

/// Quadrature angle of perfect squeezing under detuning:
/// `theta + pi - arcsin(delta / eps)`.
pub fn optimal_quadrature_angle(p: &SystemParams) -> Result<f64, SpectrumError> {
    let delta = p.delta();
    let eps = p.eps_mag();
    if delta.abs() > eps {
        return Err(SpectrumError::DetuningExceedsPump {
            delta,
            eps_mag: eps,
        });
    }
    let shift = if delta == 0.0 {
        0.0
    } else {
        (delta / eps).asin()
    };
    Ok(p.eps_phase() + std::f64::consts::PI - shift)
}
