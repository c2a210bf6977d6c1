//! Physical parameters and complex response functions of the feedback cavity.
//!
//! The system is a degenerate parametric amplifier in a two-sided cavity whose
//! right-mirror output is routed back into the left mirror through a loop with
//! time delay `tau`, phase shift `phi` and power loss `loss`. Everything
//! downstream (spectra, critical points, stability eigenvalues) reads the
//! system through [`SystemParams`]; validation happens once, at construction.
//!
//! All rates are expressed in one consistent unit system. The results of the
//! library only depend on ratios to the total decay rate `kappa`, so the CLI
//! fixes `kappa = 1` and the book follows the same convention.

use num_complex::Complex64;
use thiserror::Error;

/// Construction-time validation failures for parameter sets.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamsError {
    #[error(
        "mirror decay rates must be nonnegative, got kappa_b = {kappa_b}, kappa_c = {kappa_c}"
    )]
    NegativeDecayRate { kappa_b: f64, kappa_c: f64 },
    #[error("total decay rate kappa_b + kappa_c must be positive")]
    ZeroTotalDecay,
    #[error("feedback-loop loss must lie in [0, 1], got {0}")]
    LossOutOfRange(f64),
    #[error("feedback delay must be nonnegative, got {0}")]
    NegativeDelay(f64),
    #[error("pump strength must be nonnegative, got {0}")]
    NegativePumpStrength(f64),
    #[error("parameter `{0}` is not finite")]
    NonFinite(&'static str),
}

/// All physical parameters of the feedback cavity.
///
/// `kappa_b` and `kappa_c` are the field decay rates of the left (detected)
/// and right (fed-back) mirrors, `loss` the power-loss fraction of the
/// feedback loop, `phi` its phase shift, `tau` its time delay, `delta` the
/// detuning of the cavity resonance from half the pump frequency, and
/// `eps_mag`/`eps_phase` the magnitude and phase of the pump amplitude.
///
/// Instances are immutable; the derived total decay rate and feedback
/// strength are computed on demand.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    kappa_b: f64,
    kappa_c: f64,
    loss: f64,
    phi: f64,
    tau: f64,
    delta: f64,
    eps_mag: f64,
    eps_phase: f64,
}

/// Builder for [`SystemParams`].
///
/// Defaults describe a symmetric lossless cavity (`kappa_b = kappa_c = 1/2`)
/// with no delay, no detuning and the pump switched off.
#[derive(Debug, Clone, Copy)]
pub struct SystemParamsBuilder {
    kappa_b: f64,
    kappa_c: f64,
    loss: f64,
    phi: f64,
    tau: f64,
    delta: f64,
    eps_mag: f64,
    eps_phase: f64,
}

impl Default for SystemParamsBuilder {
    fn default() -> Self {
        Self {
            kappa_b: 0.5,
            kappa_c: 0.5,
            loss: 0.0,
            phi: 0.0,
            tau: 0.0,
            delta: 0.0,
            eps_mag: 0.0,
            eps_phase: 0.0,
        }
    }
}

macro_rules! builder_setters {
    ($($(#[$doc:meta])* $name:ident),* $(,)?) => {
        $(
            $(#[$doc])*
            pub fn $name(mut self, value: f64) -> Self {
                self.$name = value;
                self
            }
        )*
    };
}

impl SystemParamsBuilder {
    builder_setters! {
        /// Field decay rate of the left (detected) mirror.
        kappa_b,
        /// Field decay rate of the right (fed-back) mirror.
        kappa_c,
        /// Power-loss fraction of the feedback loop, in `[0, 1]`.
        loss,
        /// Phase shift accumulated along the feedback loop (rad).
        phi,
        /// Feedback time delay.
        tau,
        /// Detuning of the cavity resonance from half the pump frequency.
        delta,
        /// Pump strength magnitude.
        eps_mag,
        /// Pump phase (rad).
        eps_phase,
    }

    /// Validate and freeze the parameter set.
    pub fn build(self) -> Result<SystemParams, ParamsError> {
        let fields = [
            (self.kappa_b, "kappa_b"),
            (self.kappa_c, "kappa_c"),
            (self.loss, "loss"),
            (self.phi, "phi"),
            (self.tau, "tau"),
            (self.delta, "delta"),
            (self.eps_mag, "eps_mag"),
            (self.eps_phase, "eps_phase"),
        ];
        for (value, name) in fields {
            if !value.is_finite() {
                return Err(ParamsError::NonFinite(name));
            }
        }
        if self.kappa_b < 0.0 || self.kappa_c < 0.0 {
            return Err(ParamsError::NegativeDecayRate {
                kappa_b: self.kappa_b,
                kappa_c: self.kappa_c,
            });
        }
        if self.kappa_b + self.kappa_c <= 0.0 {
            return Err(ParamsError::ZeroTotalDecay);
        }
        if !(0.0..=1.0).contains(&self.loss) {
            return Err(ParamsError::LossOutOfRange(self.loss));
        }
        if self.tau < 0.0 {
            return Err(ParamsError::NegativeDelay(self.tau));
        }
        if self.eps_mag < 0.0 {
            return Err(ParamsError::NegativePumpStrength(self.eps_mag));
        }
        Ok(SystemParams {
            kappa_b: self.kappa_b,
            kappa_c: self.kappa_c,
            loss: self.loss,
            phi: self.phi,
            tau: self.tau,
            delta: self.delta,
            eps_mag: self.eps_mag,
            eps_phase: self.eps_phase,
        })
    }
}

impl SystemParams {
    /// Start building a parameter set from the symmetric lossless defaults.
    pub fn builder() -> SystemParamsBuilder {
        SystemParamsBuilder::default()
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

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn eps_mag(&self) -> f64 {
        self.eps_mag
    }

    pub fn eps_phase(&self) -> f64 {
        self.eps_phase
    }

    /// Total cavity field decay rate `kappa = kappa_b + kappa_c`.
    pub fn kappa(&self) -> f64 {
        self.kappa_b + self.kappa_c
    }

    /// Effective delayed self-coupling rate
    /// `k = 2 sqrt(kappa_b kappa_c (1 - loss))`.
    ///
    /// Loss in the loop weakens the coupling, so `k` decreases monotonically
    /// with `loss` and is maximal for a symmetric cavity at fixed `kappa`.
    pub fn feedback_strength(&self) -> f64 {
        2.0 * (self.kappa_b * self.kappa_c * (1.0 - self.loss)).sqrt()
    }

    /// Pump magnitude reduced by detuning, `sqrt(eps_mag^2 - delta^2)`.
    ///
    /// Returns `None` when `|delta| > eps_mag`, where the reduction is not
    /// defined.
    pub fn detuned_pump_mag(&self) -> Option<f64> {
        let d2 = self.eps_mag * self.eps_mag - self.delta * self.delta;
        if d2 < 0.0 {
            None
        } else {
            Some(d2.sqrt())
        }
    }

    /// Whether `sin(phi)` vanishes, i.e. the loop phase is 0 or pi (mod 2pi).
    pub fn has_axial_phase(&self) -> bool {
        self.phi.sin().abs() < 1e-9
    }

    /// Evaluate the cavity response functions at sideband frequency `nu`.
    pub fn response_at(&self, nu: f64) -> ResponseValues {
        let kappa = self.kappa();
        let k = self.feedback_strength();
        let i = Complex64::i();
        // d_pm(nu) = kappa - i(nu ± delta) + k e^{∓i(phi ∓ nu tau)}
        let d_plus = kappa - i * (nu + self.delta) + k * (-i * (self.phi - nu * self.tau)).exp();
        let d_minus = kappa - i * (nu - self.delta) + k * (i * (self.phi + nu * self.tau)).exp();
        let m = d_plus * d_minus - self.eps_mag * self.eps_mag;
        let loop_phase = (i * (self.phi + nu * self.tau)).exp();
        let f_b = 2.0 * self.kappa_b + k * loop_phase;
        let f_c = 2.0 * self.kappa_c + k * loop_phase;
        ResponseValues {
            d_plus,
            d_minus,
            m,
            f_b,
            f_c,
            nu,
        }
    }
}

/// The complex cavity response at one sideband frequency.
///
/// `m = d_plus * d_minus - eps_mag^2` is stored alongsides its factors; its
/// zeros are the singular points of the output spectrum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResponseValues {
    pub d_plus: Complex64,
    pub d_minus: Complex64,
    pub m: Complex64,
    pub f_b: Complex64,
    pub f_c: Complex64,
    /// Sideband frequency the values were evaluated at.
    pub nu: f64,
}

impl ResponseValues {
    /// Relative defect of the stored `m` against `d_plus d_minus - eps^2`,
    /// normalised by `kappa^2`.
    pub fn m_consistency(&self, p: &SystemParams) -> f64 {
        let recomputed = self.d_plus * self.d_minus - p.eps_mag() * p.eps_mag();
        (self.m - recomputed).norm() / (p.kappa() * p.kappa())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn symmetric(eps: f64) -> SystemParams {
        SystemParams::builder().eps_mag(eps).build().unwrap()
    }

    #[test]
    fn total_kappa_sums_mirror_rates() {
        assert_eq!(symmetric(0.0).kappa(), 1.0);
        let one_sided = SystemParams::builder()
            .kappa_b(1.0)
            .kappa_c(0.0)
            .build()
            .unwrap();
        assert_eq!(one_sided.kappa(), 1.0);
        let lopsided = SystemParams::builder()
            .kappa_b(0.3)
            .kappa_c(0.7)
            .build()
            .unwrap();
        assert!((lopsided.kappa() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn feedback_strength_special_values() {
        // Symmetric lossless cavity: k = kappa.
        assert!((symmetric(0.0).feedback_strength() - 1.0).abs() < 1e-15);
        // No second mirror, no feedback path.
        let one_sided = SystemParams::builder()
            .kappa_b(1.0)
            .kappa_c(0.0)
            .build()
            .unwrap();
        assert_eq!(one_sided.feedback_strength(), 0.0);
        // 5% loss: k = kappa sqrt(0.95).
        let lossy = SystemParams::builder().loss(0.05).build().unwrap();
        assert!((lossy.feedback_strength() - 0.95f64.sqrt()).abs() < 1e-15);
        assert!((lossy.feedback_strength() - 0.97468).abs() < 1e-5);
    }

    #[test]
    fn feedback_strength_monotone_in_loss_and_maximal_symmetric() {
        let mut previous = f64::INFINITY;
        for i in 0..=20 {
            let loss = i as f64 / 20.0;
            let k = SystemParams::builder()
                .loss(loss)
                .build()
                .unwrap()
                .feedback_strength();
            assert!(k <= previous);
            previous = k;
        }
        let k_symmetric = symmetric(0.0).feedback_strength();
        for i in 1..20 {
            let kappa_b = i as f64 / 20.0;
            let k = SystemParams::builder()
                .kappa_b(kappa_b)
                .kappa_c(1.0 - kappa_b)
                .build()
                .unwrap()
                .feedback_strength();
            assert!(k <= k_symmetric + 1e-15);
        }
    }

    #[test]
    fn response_without_feedback() {
        // kappa_c = 0 kills the loop: d_± = kappa, m = kappa^2 - eps^2,
        // f_b = 2 kappa_b.
        let p = SystemParams::builder()
            .kappa_b(1.0)
            .kappa_c(0.0)
            .eps_mag(0.6)
            .tau(2.0)
            .build()
            .unwrap();
        let r = p.response_at(0.0);
        assert!((r.d_plus - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        assert!((r.d_minus - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        assert!((r.m - Complex64::new(1.0 - 0.36, 0.0)).norm() < 1e-15);
        assert!((r.f_b - Complex64::new(2.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn response_symmetric_on_resonance() {
        // Symmetric lossless cavity at phi = 0, nu = 0: d_± = 2 kappa and
        // f_b = 2 kappa for any delay.
        for tau in [0.0, 0.7, 3.3] {
            let p = SystemParams::builder().tau(tau).build().unwrap();
            let r = p.response_at(0.0);
            assert!((r.d_plus - Complex64::new(2.0, 0.0)).norm() < 1e-14);
            assert!((r.d_minus - Complex64::new(2.0, 0.0)).norm() < 1e-14);
            assert!((r.f_b - Complex64::new(2.0, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn response_vanishing_m_at_quoted_operating_point() {
        // |m| < 1e-3 at the rounded characteristic frequency/delay quoted for
        // the 0.75-kappa pump.
        let p = SystemParams::builder()
            .eps_mag(0.75)
            .tau(1.8833)
            .build()
            .unwrap();
        let r = p.response_at(0.968);
        assert!(r.m.norm() < 1e-3, "|m| = {}", r.m.norm());
    }

    #[test]
    fn d_plus_equals_d_minus_for_axial_phase() {
        for phi in [0.0, std::f64::consts::PI] {
            let p = SystemParams::builder()
                .phi(phi)
                .tau(1.3)
                .eps_mag(0.4)
                .build()
                .unwrap();
            for i in 0..=200 {
                let nu = -3.0 + 6.0 * i as f64 / 200.0;
                let r = p.response_at(nu);
                assert!(
                    (r.d_plus - r.d_minus).norm() < 1e-12,
                    "phi = {phi}, nu = {nu}"
                );
            }
        }
    }

    #[test]
    fn conjugation_symmetry_of_m() {
        let p = SystemParams::builder()
            .tau(1.8833)
            .eps_mag(0.75)
            .build()
            .unwrap();
        for i in 0..=400 {
            let nu = -3.0 + 6.0 * i as f64 / 400.0;
            let r = p.response_at(nu);
            let rm = p.response_at(-nu);
            assert!((r.d_plus.conj() - rm.d_plus).norm() < 1e-12);
            let scale = r.m.norm().max(1e-300);
            assert!((r.m.norm() - rm.m.norm()).abs() / scale < 1e-12);
        }
    }

    #[test]
    fn stored_m_matches_recomputation() {
        let p = SystemParams::builder()
            .kappa_b(0.3)
            .kappa_c(0.7)
            .loss(0.05)
            .phi(-0.3 * std::f64::consts::PI)
            .tau(2.0)
            .delta(0.1)
            .eps_mag(0.5)
            .build()
            .unwrap();
        for nu in [-2.5, -0.4, 0.0, 1.1, 2.9] {
            assert!(p.response_at(nu).m_consistency(&p) < 1e-14);
        }
    }

    #[test]
    fn validation_rejects_bad_inputs() {
        assert!(matches!(
            SystemParams::builder().kappa_b(-0.1).build(),
            Err(ParamsError::NegativeDecayRate { .. })
        ));
        assert!(matches!(
            SystemParams::builder().kappa_b(0.0).kappa_c(0.0).build(),
            Err(ParamsError::ZeroTotalDecay)
        ));
        assert!(matches!(
            SystemParams::builder().loss(1.2).build(),
            Err(ParamsError::LossOutOfRange(_))
        ));
        assert!(matches!(
            SystemParams::builder().tau(-1.0).build(),
            Err(ParamsError::NegativeDelay(_))
        ));
        assert!(matches!(
            SystemParams::builder().eps_mag(-0.5).build(),
            Err(ParamsError::NegativePumpStrength(_))
        ));
        assert!(matches!(
            SystemParams::builder().phi(f64::NAN).build(),
            Err(ParamsError::NonFinite("phi"))
        ));
    }

    #[test]
    fn loss_of_one_blocks_the_loop() {
        let p = SystemParams::builder()
            .loss(1.0)
            .eps_mag(0.3)
            .build()
            .unwrap();
        assert_eq!(p.feedback_strength(), 0.0);
        let r = p.response_at(0.4);
        assert!((r.d_plus - Complex64::new(1.0, -0.4)).norm() < 1e-15);
    }
}
