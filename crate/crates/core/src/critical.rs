//! Operating points of perfect squeezing and their tunability bounds.
//!
//! For an axial loop phase the output spectrum develops a singular pair
//! `(nu_c, tau_c)` where the response zero `m(nu_c) = 0` pins the sideband
//! frequency and delay of maximal squeezing. Without loop loss the squeezed
//! quadrature vanishes there; with loss it bottoms out at a floor set only by
//! the loss, the fed-back mirror and the pump strength.

use thiserror::Error;

use crate::params::SystemParams;
use crate::spectrum::{squeezing_spectrum, VACUUM_VARIANCE};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CriticalError {
    #[error("characteristic points require sin(phi) = 0, got phi = {0}")]
    PhaseNotAxial(f64),
    #[error("detuning magnitude {delta} exceeds the pump strength {eps_mag}")]
    DetuningExceedsPump { delta: f64, eps_mag: f64 },
    #[error(
        "no singular sideband exists here: |eps_detuned - kappa| = {gap} exceeds the \
         feedback strength k = {k}"
    )]
    OutOfReach { gap: f64, k: f64 },
    #[error("the singular sideband frequency degenerates to zero (k = |kappa - eps_detuned|)")]
    DegenerateFrequency,
    #[error(
        "the pi-phase branch (nu_c = {nu_c}, tau_c = {tau_c}) lies in an already unstable \
         regime and is not an operating point"
    )]
    PyragasBranchUnstable { nu_c: f64, tau_c: f64 },
}

/// A singular operating point of the squeezing spectrum.
///
/// At `(nu_c, tau_c)` the real part of the diagonal response equals the
/// detuned pump and its imaginary part vanishes; the squeezed quadrature
/// approaches `squeezed_floor = (1/4) loss * kappa_c / eps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalPoint {
    pub nu_c: f64,
    pub tau_c: f64,
    pub squeezed_floor: f64,
}

/// Locate the singular sideband/delay pair for the current parameters.
///
/// The positive-frequency root is reported; its mirror image at `-nu_c` is
/// implied by the evenness of the spectrum. Loss enters through the feedback
/// strength, shifting both members of the pair. The `phi = pi` branch of the
/// defining equations is computed but rejected: it would require
/// `cos(nu_c tau_c) < 1` in a regime that is already unstable, so it never
/// corresponds to reachable squeezing.
pub fn characteristic_point(p: &SystemParams) -> Result<CriticalPoint, CriticalError> {
    if !p.has_axial_phase() {
        return Err(CriticalError::PhaseNotAxial(p.phi()));
    }
    let eps_delta = p
        .detuned_pump_mag()
        .ok_or(CriticalError::DetuningExceedsPump {
            delta: p.delta(),
            eps_mag: p.eps_mag(),
        })?;
    let kappa = p.kappa();
    let k = p.feedback_strength();
    let gap = (eps_delta - kappa).abs();
    if gap > k {
        return Err(CriticalError::OutOfReach { gap, k });
    }
    let nu_sq = k * k - gap * gap;
    if nu_sq <= 0.0 {
        return Err(CriticalError::DegenerateFrequency);
    }
    let nu_c = nu_sq.sqrt();
    let pyragas_branch = p.phi().cos() < 0.0;
    let cos_arg = if pyragas_branch {
        (kappa - eps_delta) / k
    } else {
        (eps_delta - kappa) / k
    };
    let tau_c = cos_arg.clamp(-1.0, 1.0).acos() / nu_c;
    if pyragas_branch {
        return Err(CriticalError::PyragasBranchUnstable { nu_c, tau_c });
    }
    Ok(CriticalPoint {
        nu_c,
        tau_c,
        squeezed_floor: squeezed_floor_value(p),
    })
}

fn squeezed_floor_value(p: &SystemParams) -> f64 {
    VACUUM_VARIANCE * p.loss() * p.kappa_c() / p.eps_mag()
}

/// Limiting squeezed-quadrature variance at the singular point,
/// `(1/4) loss * kappa_c / eps`; zero for a lossless loop.
pub fn squeezed_floor(p: &SystemParams) -> Result<f64, CriticalError> {
    characteristic_point(p).map(|cp| cp.squeezed_floor)
}

/// Whether the antisqueezed quadrature blows past +40 dB in a frequency
/// window of half-width `window` around `nu_c`, at the delay stored in `p`.
///
/// Returns `false` when no characteristic point exists (for instance without
/// feedback, where the below-threshold spectrum stays bounded).
pub fn antisqueezed_divergence_check(p: &SystemParams, window: f64) -> bool {
    let Ok(cp) = characteristic_point(p) else {
        return false;
    };
    let theta = p.eps_phase();
    let n = 2001;
    (0..n).any(|i| {
        let nu = cp.nu_c - window + 2.0 * window * i as f64 / (n - 1) as f64;
        let pt = squeezing_spectrum(p, theta, nu);
        pt.diverged || pt.decibels > 40.0
    })
}

/// Range of feedback strengths for which a singular sideband exists:
/// `|kappa - eps| <= k <= kappa`.
pub fn feedback_strength_bounds(kappa: f64, eps_mag: f64) -> (f64, f64) {
    ((kappa - eps_mag).abs(), kappa)
}

/// Attainable singular sideband frequencies over the allowed feedback
/// strengths: `0 <= nu_c <= sqrt(eps (2 kappa - eps))`, maximal at
/// `eps = k = kappa`.
pub fn nu_c_range(kappa: f64, eps_mag: f64) -> (f64, f64) {
    (0.0, (eps_mag * (2.0 * kappa - eps_mag)).max(0.0).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn symmetric(eps: f64, tau: f64) -> SystemParams {
        SystemParams::builder()
            .eps_mag(eps)
            .tau(tau)
            .build()
            .unwrap()
    }

    #[test]
    fn quoted_characteristic_pairs() {
        let cases = [
            (0.75, 0.968, 1.8833),
            (0.25, 0.661, 3.657),
            (0.5, 0.866, 2.418),
        ];
        for (eps, nu_expect, tau_expect) in cases {
            let cp = characteristic_point(&symmetric(eps, 0.0)).unwrap();
            assert!(
                (cp.nu_c - nu_expect).abs() < 5e-4,
                "eps={eps}: nu_c={}",
                cp.nu_c
            );
            assert!(
                (cp.tau_c - tau_expect).abs() < 5e-4,
                "eps={eps}: tau_c={}",
                cp.tau_c
            );
        }
    }

    #[test]
    fn residual_of_defining_conditions() {
        // Re d(nu_c) = eps and Im d(nu_c) = 0 at tau = tau_c, closing the
        // loop with the response functions; consequently m(nu_c) = 0.
        for eps in [0.25, 0.5, 0.75, 0.9] {
            for loss in [0.0, 0.05] {
                let probe = SystemParams::builder()
                    .eps_mag(eps)
                    .loss(loss)
                    .build()
                    .unwrap();
                let cp = characteristic_point(&probe).unwrap();
                let at_point = SystemParams::builder()
                    .eps_mag(eps)
                    .loss(loss)
                    .tau(cp.tau_c)
                    .build()
                    .unwrap();
                let r = at_point.response_at(cp.nu_c);
                assert!((r.d_plus.re - eps).abs() < 1e-10);
                assert!(r.d_plus.im.abs() < 1e-10);
                assert!(r.m.norm() < 1e-10);
            }
        }
    }

    #[test]
    fn floor_examples() {
        // Lossless loop: perfect squeezing.
        let cp = characteristic_point(&symmetric(0.5, 0.0)).unwrap();
        assert_eq!(cp.squeezed_floor, 0.0);

        // 5% loss, quarter-kappa pump: floor 0.025 = -10 dB.
        let p = SystemParams::builder()
            .loss(0.05)
            .eps_mag(0.25)
            .build()
            .unwrap();
        assert!((squeezed_floor(&p).unwrap() - 0.025).abs() < 1e-15);

        // 10% loss, half-kappa pump: the same -10 dB floor.
        let p = SystemParams::builder()
            .loss(0.10)
            .eps_mag(0.5)
            .build()
            .unwrap();
        assert!((squeezed_floor(&p).unwrap() - 0.025).abs() < 1e-15);
    }

    #[test]
    fn pyragas_branch_is_rejected_with_values() {
        let p = SystemParams::builder()
            .phi(PI)
            .eps_mag(0.75)
            .build()
            .unwrap();
        match characteristic_point(&p) {
            Err(CriticalError::PyragasBranchUnstable { nu_c, tau_c }) => {
                assert!((nu_c - 0.968_245_836_551_854).abs() < 1e-12);
                assert!(tau_c > 0.0);
            }
            other => panic!("expected the pi-phase rejection, got {other:?}"),
        }
    }

    #[test]
    fn domain_errors() {
        // Zero pump: |eps - kappa| = kappa > k is unreachable for a lossy
        // symmetric cavity.
        let p = SystemParams::builder().loss(0.05).build().unwrap();
        assert!(matches!(
            characteristic_point(&p),
            Err(CriticalError::OutOfReach { .. })
        ));

        // k = |kappa - eps| exactly: the sideband degenerates to resonance.
        let p = SystemParams::builder()
            .kappa_b(1.0)
            .kappa_c(0.0)
            .eps_mag(1.0)
            .build()
            .unwrap();
        assert!(matches!(
            characteristic_point(&p),
            Err(CriticalError::DegenerateFrequency)
        ));

        let p = SystemParams::builder()
            .phi(0.3)
            .eps_mag(0.5)
            .build()
            .unwrap();
        assert!(matches!(
            characteristic_point(&p),
            Err(CriticalError::PhaseNotAxial(_))
        ));

        let p = SystemParams::builder()
            .delta(0.6)
            .eps_mag(0.5)
            .build()
            .unwrap();
        assert!(matches!(
            characteristic_point(&p),
            Err(CriticalError::DetuningExceedsPump { .. })
        ));
    }

    #[test]
    fn divergence_check_examples() {
        // At the characteristic delay the antisqueezed quadrature diverges.
        let eps = 0.75;
        let cp = characteristic_point(&symmetric(eps, 0.0)).unwrap();
        assert!(antisqueezed_divergence_check(
            &symmetric(eps, cp.tau_c),
            0.05
        ));

        // Without feedback there is no singularity below threshold.
        let one_sided = SystemParams::builder()
            .kappa_b(1.0)
            .kappa_c(0.0)
            .eps_mag(0.75)
            .build()
            .unwrap();
        assert!(!antisqueezed_divergence_check(&one_sided, 0.05));

        // At half the characteristic delay the response zero is far away.
        assert!(!antisqueezed_divergence_check(
            &symmetric(eps, cp.tau_c / 2.0),
            0.05
        ));
    }

    #[test]
    fn strength_bounds_examples() {
        assert_eq!(feedback_strength_bounds(1.0, 1.0), (0.0, 1.0));
        assert_eq!(feedback_strength_bounds(1.0, 0.5), (0.5, 1.0));
        assert_eq!(feedback_strength_bounds(1.0, 0.25), (0.75, 1.0));
    }

    #[test]
    fn nu_range_examples() {
        let (lo, hi) = nu_c_range(1.0, 1.0);
        assert_eq!(lo, 0.0);
        assert!((hi - 1.0).abs() < 1e-15);
        assert_eq!(nu_c_range(1.0, 0.0).1, 0.0);
        assert!((nu_c_range(1.0, 0.5).1 - 3.0f64.sqrt() / 2.0).abs() < 1e-15);
    }

    #[test]
    fn detuning_collapse_onto_reduced_pump() {
        // The detuned point equals the undetuned point evaluated at the
        // reduced pump magnitude, by construction of the defining equations.
        let mut rng_state = 0x9e3779b97f4a7c15u64;
        let mut next = move || {
            // splitmix64, deterministic draws
            rng_state = rng_state.wrapping_add(0x9e3779b97f4a7c15);
            let mut z = rng_state;
            z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
            (z ^ (z >> 31)) as f64 / u64::MAX as f64
        };
        let mut checked = 0;
        while checked < 100 {
            let eps = 0.05 + 0.9 * next();
            let delta = eps * next();
            let loss = 0.2 * next();
            let detuned = SystemParams::builder()
                .loss(loss)
                .delta(delta)
                .eps_mag(eps)
                .build()
                .unwrap();
            let eps_delta = detuned.detuned_pump_mag().unwrap();
            let reduced = SystemParams::builder()
                .loss(loss)
                .eps_mag(eps_delta)
                .build()
                .unwrap();
            match (
                characteristic_point(&detuned),
                characteristic_point(&reduced),
            ) {
                (Ok(a), Ok(b)) => {
                    assert_eq!(a.nu_c, b.nu_c);
                    assert_eq!(a.tau_c, b.tau_c);
                    checked += 1;
                }
                (Err(_), Err(_)) => {}
                (a, b) => panic!("validity mismatch: {a:?} vs {b:?}"),
            }
        }
    }

    #[test]
    fn nu_c_traces_the_threshold_circle() {
        // With k = kappa the locus satisfies nu_c^2 + (kappa - eps)^2 = kappa^2.
        for i in 1..40 {
            let eps = i as f64 / 40.0;
            let cp = characteristic_point(&symmetric(eps, 0.0)).unwrap();
            let residual = cp.nu_c * cp.nu_c + (1.0 - eps) * (1.0 - eps) - 1.0;
            assert!(residual.abs() < 1e-12, "eps={eps}: {residual}");
        }
    }
}
