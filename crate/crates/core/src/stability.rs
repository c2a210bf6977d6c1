//! Stability eigenvalues of the linear (undepleted-pump) delayed system.
//!
//! The averaged quadrature amplitudes obey a pair of linear delay equations
//! whose exponential ansatz yields the characteristic function
//!
//! ```text
//! F(lambda) = (lambda + kappa + k cos(phi) e^{-lambda tau})^2 - eps^2
//!             + (delta + k sin(phi) e^{-lambda tau})^2
//! ```
//!
//! Delay systems carry infinitely many roots, but they march leftwards with
//! growing imaginary part, so a bounded rectangle suffices to decide
//! stability. [`rightmost_roots`] locates every root in a rectangle and
//! certifies the count by a boundary winding number.

use num_complex::Complex64;
use thiserror::Error;

use crate::params::SystemParams;
use crate::rootfind::{Region, RootEstimate, RootFindError, RootSearch};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StabilityError {
    #[error("operation requires phi = {expected}, got phi = {phi}")]
    WrongPhase { expected: &'static str, phi: f64 },
    #[error("operation requires zero detuning, got delta = {0}")]
    NonzeroDetuning(f64),
    #[error(transparent)]
    RootFind(#[from] RootFindError),
}

/// One stability eigenvalue `lambda = lambda_re + i lambda_im` with the
/// characteristic-function magnitude left after Newton refinement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharacteristicRoot {
    pub lambda_re: f64,
    pub lambda_im: f64,
    pub residual: f64,
}

impl CharacteristicRoot {
    pub fn lambda(&self) -> Complex64 {
        Complex64::new(self.lambda_re, self.lambda_im)
    }

    fn from_estimate(e: RootEstimate) -> Self {
        Self {
            lambda_re: e.z.re,
            lambda_im: e.z.im,
            residual: e.residual,
        }
    }
}

/// Characteristic function of the linear delayed system.
pub fn characteristic_function(p: &SystemParams, lambda: Complex64) -> Complex64 {
    let k = p.feedback_strength();
    let delayed = (-lambda * p.tau()).exp();
    let diag = lambda + p.kappa() + k * p.phi().cos() * delayed;
    let cross = p.delta() + k * p.phi().sin() * delayed;
    diag * diag - p.eps_mag() * p.eps_mag() + cross * cross
}

/// Analytic derivative of [`characteristic_function`] in `lambda`.
pub fn characteristic_derivative(p: &SystemParams, lambda: Complex64) -> Complex64 {
    let k = p.feedback_strength();
    let tau = p.tau();
    let delayed = (-lambda * tau).exp();
    let diag = lambda + p.kappa() + k * p.phi().cos() * delayed;
    let cross = p.delta() + k * p.phi().sin() * delayed;
    2.0 * diag * (1.0 - k * tau * p.phi().cos() * delayed)
        - 2.0 * cross * k * tau * p.phi().sin() * delayed
}

/// Default search rectangle: `lambda_re` in `[-5 kappa, 2 kappa]`,
/// `|lambda_im|` up to `max(10 kappa, 6 pi / tau)`.
///
/// Roots right of `-5 kappa` always satisfy `|lambda_im|` below that band for
/// pump strengths up to a few `kappa`, so the rectangle captures every root
/// that can decide `sign(max lambda_re)`.
pub fn default_region(p: &SystemParams) -> Region {
    let kappa = p.kappa();
    let im_band = if p.tau() > 0.0 {
        (10.0 * kappa).max(6.0 * std::f64::consts::PI / p.tau())
    } else {
        10.0 * kappa
    };
    Region::symmetric(-5.0 * kappa, 2.0 * kappa, im_band)
}

fn quadratic_roots(p: &SystemParams) -> Vec<Complex64> {
    // tau = 0 or k = 0: (lambda + kappa + k cos phi)^2 = eps^2 - (delta + k sin phi)^2.
    let k = p.feedback_strength();
    let center = -(p.kappa() + k * p.phi().cos());
    let radicand = Complex64::new(
        p.eps_mag() * p.eps_mag() - (p.delta() + k * p.phi().sin()).powi(2),
        0.0,
    );
    let offset = radicand.sqrt();
    vec![center + offset, center - offset]
}

/// All characteristic roots inside `region`, refined by damped Newton,
/// deduplicated, sorted by descending real part, and certified by the
/// argument principle on the region boundary.
///
/// The degenerate cases `tau = 0` and `k = 0` reduce to a quadratic and are
/// solved analytically.
pub fn rightmost_roots(
    p: &SystemParams,
    region: &Region,
) -> Result<Vec<CharacteristicRoot>, StabilityError> {
    let kappa = p.kappa();
    if p.tau() == 0.0 || p.feedback_strength() == 0.0 {
        let mut roots: Vec<CharacteristicRoot> = quadratic_roots(p)
            .into_iter()
            .filter(|z| region.contains(*z, 1e-12 * kappa))
            .map(|z| CharacteristicRoot {
                lambda_re: z.re,
                lambda_im: z.im,
                residual: characteristic_function(p, z).norm(),
            })
            .collect();
        roots.sort_by(|a, b| b.lambda_re.total_cmp(&a.lambda_re));
        return Ok(roots);
    }

    let f = |z: Complex64| characteristic_function(p, z);
    let df = |z: Complex64| characteristic_derivative(p, z);
    let mut extra_seeds = quadratic_roots(p);
    // Roots of the no-feedback limit seed the search as well.
    let no_feedback = Complex64::new(p.eps_mag() * p.eps_mag() - p.delta() * p.delta(), 0.0).sqrt();
    extra_seeds.push(-kappa + no_feedback);
    extra_seeds.push(-kappa - no_feedback);

    let search = RootSearch {
        f: &f,
        df: Some(&df),
        scale: kappa,
        residual_tol: 1e-11 * kappa * kappa,
        seed_step: kappa / 4.0,
        extra_seeds,
        phase_rate: 2.5 * p.tau() + 5.0 / kappa,
        cluster_radius: 2e-4 * kappa,
    };
    let roots = search.find_all(region)?;
    Ok(expand_multiplicities(roots))
}

/// Repeat each estimate according to its certified multiplicity, so the list
/// length matches the winding count.
pub(crate) fn expand_multiplicities(roots: Vec<RootEstimate>) -> Vec<CharacteristicRoot> {
    roots
        .into_iter()
        .flat_map(|e| std::iter::repeat_n(CharacteristicRoot::from_estimate(e), e.multiplicity))
        .collect()
}

/// Stability assessment for the zero-phase loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryAssessment {
    /// Rigorous verdict: `max lambda_re < 0` over the certified roots.
    pub stable: bool,
    /// The folklore zeroth-order inequality `kappa + k cos(nu tau) > eps`
    /// evaluated at its worst sideband; a heuristic kept for comparison.
    pub zeroth_order_stable: bool,
    /// The rightmost certified root, when any lies in the default region.
    pub max_root: Option<CharacteristicRoot>,
}

/// Rigorous and zeroth-order stability verdicts for `phi = 0`, zero detuning.
pub fn stability_boundary_phi0(p: &SystemParams) -> Result<BoundaryAssessment, StabilityError> {
    if !(p.has_axial_phase() && p.phi().cos() > 0.0) {
        return Err(StabilityError::WrongPhase {
            expected: "0",
            phi: p.phi(),
        });
    }
    if p.delta() != 0.0 {
        return Err(StabilityError::NonzeroDetuning(p.delta()));
    }
    let roots = rightmost_roots(p, &default_region(p))?;
    let max_root = roots.first().copied();
    let stable = max_root.is_none_or(|r| r.lambda_re < 0.0);
    let k = p.feedback_strength();
    // With any finite delay some sideband reaches cos(nu tau) = -1; without
    // delay the resonant component has cos = +1.
    let worst_cos = if p.tau() > 0.0 { -1.0 } else { 1.0 };
    let zeroth_order_stable = p.kappa() + k * worst_cos > p.eps_mag();
    Ok(BoundaryAssessment {
        stable,
        zeroth_order_stable,
        max_root,
    })
}

/// Stability for the Pyragas loop (`phi = pi`, zero detuning):
/// `kappa - k > eps`, independent of the delay.
pub fn stability_boundary_phipi(p: &SystemParams) -> Result<bool, StabilityError> {
    if !(p.has_axial_phase() && p.phi().cos() < 0.0) {
        return Err(StabilityError::WrongPhase {
            expected: "pi",
            phi: p.phi(),
        });
    }
    if p.delta() != 0.0 {
        return Err(StabilityError::NonzeroDetuning(p.delta()));
    }
    Ok(p.kappa() - p.feedback_strength() > p.eps_mag())
}
