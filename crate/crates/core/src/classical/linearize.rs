//! Linearisation of the depleted-pump model about a steady state.
//!
//! In the four real coordinates `(Re e, Im e, Re e_p, Im e_p)` the
//! linearised dynamics is `u' = A u + B u(t - tau)`, with the delayed part
//! coming solely from the feedback term. Stability follows from the roots of
//! `det(lambda I - A - B e^{-lambda tau})`.
//!
//! On the trivial branch the pump block decouples, so the determinant
//! factorises into the linear-model characteristic function (at effective
//! pump `kappa x`) times `(lambda + kappa_p)^2`; this exact reduction is what
//! ties the classical Hopf points to the perfect-squeezing points of the
//! undepleted analysis.

use num_complex::Complex64;

use super::{steady_residual, ClassicalError, ClassicalParams, SteadyState};
use crate::rootfind::{Region, RootSearch};
use crate::stability::CharacteristicRoot;

/// The instantaneous and delayed Jacobian blocks of the linearised model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelayedLinearization {
    pub a: [[f64; 4]; 4],
    pub b: [[f64; 4]; 4],
    pub tau: f64,
    /// Cavity decay rate: sets root spacing, seeds and cluster radii.
    kappa: f64,
    /// Reach of the spectrum: the largest rate in the Jacobian, sizing the
    /// default search region.
    reach: f64,
    /// Magnitude of the determinant near its roots, sizing the residual
    /// acceptance.
    f_scale: f64,
}

/// Jacobian pair at a verified steady state.
pub fn linearize_at(
    p: &ClassicalParams,
    ss: &SteadyState,
) -> Result<DelayedLinearization, ClassicalError> {
    let residual = steady_residual(p, ss);
    if residual > 1e-8 * p.kappa() {
        return Err(ClassicalError::NotASteadyState { residual });
    }
    let kappa = p.kappa();
    let kappa_p = p.kappa_p();
    let k = p.feedback_strength();
    let (cos_phi, sin_phi) = (p.phi().cos(), p.phi().sin());
    let s = ss.amplitude;
    let pump = ss.pump;

    // Signal row: de' = -kappa de + kappa (de* e_p + e* de_p) - k e^{i phi} de(t - tau).
    let mut a = [[0.0; 4]; 4];
    a[0][0] = -kappa + kappa * pump.re;
    a[0][1] = kappa * pump.im;
    a[0][2] = kappa * s.re;
    a[0][3] = kappa * s.im;
    a[1][0] = kappa * pump.im;
    a[1][1] = -kappa - kappa * pump.re;
    a[1][2] = -kappa * s.im;
    a[1][3] = kappa * s.re;
    // Pump row: de_p' = -kappa_p (de_p + 2 e de).
    a[2][0] = -2.0 * kappa_p * s.re;
    a[2][1] = 2.0 * kappa_p * s.im;
    a[2][2] = -kappa_p;
    a[3][0] = -2.0 * kappa_p * s.im;
    a[3][1] = -2.0 * kappa_p * s.re;
    a[3][3] = -kappa_p;

    let mut b = [[0.0; 4]; 4];
    b[0][0] = -k * cos_phi;
    b[0][1] = k * sin_phi;
    b[1][0] = -k * sin_phi;
    b[1][1] = -k * cos_phi;

    Ok(DelayedLinearization {
        a,
        b,
        tau: p.tau(),
        kappa,
        reach: kappa.max(kappa_p) + kappa * p.x().max(1.0),
        f_scale: (kappa * (1.0 + p.x().max(1.0))).powi(2) * kappa_p * kappa_p,
    })
}

impl DelayedLinearization {
    /// `det(lambda I - A - B e^{-lambda tau})`.
    pub fn characteristic_function(&self, lambda: Complex64) -> Complex64 {
        let delayed = (-lambda * self.tau).exp();
        let mut m = [[Complex64::new(0.0, 0.0); 4]; 4];
        for (r, row) in m.iter_mut().enumerate() {
            for (c, entry) in row.iter_mut().enumerate() {
                *entry = -self.a[r][c] - self.b[r][c] * delayed;
                if r == c {
                    *entry += lambda;
                }
            }
        }
        det4(m)
    }

    /// All roots of the characteristic determinant inside `region`, certified
    /// by boundary winding.
    pub fn rightmost_roots(
        &self,
        region: &Region,
    ) -> Result<Vec<CharacteristicRoot>, ClassicalError> {
        let f = |z: Complex64| self.characteristic_function(z);
        let search = RootSearch {
            f: &f,
            df: None,
            scale: self.kappa,
            residual_tol: 1e-9 * self.f_scale,
            seed_step: self.kappa / 4.0,
            extra_seeds: vec![],
            phase_rate: 2.5 * self.tau + 8.0 / self.kappa,
            // The determinant can carry roots up to multiplicity four (all
            // four eigenvalues coincide at zero drive without feedback), so
            // the stall cloud scales like tol^(1/4).
            cluster_radius: 2.5e-2 * self.kappa,
        };
        let roots = search.find_all(region)?;
        Ok(crate::stability::expand_multiplicities(roots))
    }

    /// Search rectangle sized from the Jacobian magnitudes.
    pub fn default_region(&self) -> Region {
        let reach = self.reach;
        let im_band = if self.tau > 0.0 {
            (6.0 * reach).max(6.0 * std::f64::consts::PI / self.tau)
        } else {
            6.0 * reach
        };
        Region::symmetric(-5.0 * reach, 2.0 * reach, im_band)
    }

    /// Certified stability verdict: winding count over a right-half
    /// rectangle that provably contains every root with nonnegative real
    /// part. Far cheaper than locating the roots.
    ///
    /// A root sitting numerically on the imaginary axis is treated as
    /// unstable after the contour has been nudged off it a few times.
    pub fn is_stable(&self) -> Result<bool, ClassicalError> {
        let f = |z: Complex64| self.characteristic_function(z);
        let band = 2.0 * self.reach + self.kappa;
        let phase_rate = 2.5 * self.tau + 8.0 / self.kappa;
        let mut shift = 1e-12 * self.kappa;
        for _ in 0..5 {
            let region = Region::new(shift, band, -band, band);
            match crate::rootfind::winding_number(&f, &region, phase_rate) {
                Ok(count) => return Ok(count == 0),
                Err(crate::rootfind::RootFindError::ContourThroughRoot) => {
                    shift += 3e-9 * self.kappa;
                }
                Err(e) => return Err(e.into()),
            }
        }
        // Persistently on the contour: a marginal root, not a stable system.
        Ok(false)
    }
}

/// Determinant of a 4x4 complex matrix by Gaussian elimination with partial
/// pivoting.
fn det4(mut m: [[Complex64; 4]; 4]) -> Complex64 {
    let mut det = Complex64::new(1.0, 0.0);
    for col in 0..4 {
        let pivot_row = (col..4)
            .max_by(|&a, &b| m[a][col].norm_sqr().total_cmp(&m[b][col].norm_sqr()))
            .unwrap();
        if m[pivot_row][col].norm_sqr() == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        if pivot_row != col {
            m.swap(pivot_row, col);
            det = -det;
        }
        let pivot = m[col][col];
        det *= pivot;
        for row in col + 1..4 {
            let factor = m[row][col] / pivot;
            let pivot_row = m[col];
            for (entry, pivot_entry) in m[row][col..].iter_mut().zip(&pivot_row[col..]) {
                *entry -= factor * pivot_entry;
            }
        }
    }
    det
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical::{steady_states, Branch};
    use crate::params::SystemParams;
    use crate::stability;

    fn trivial_linearization(x: f64, tau: f64) -> (ClassicalParams, DelayedLinearization) {
        let p = ClassicalParams::builder().tau(tau).x(x).build().unwrap();
        let ss = steady_states(&p)
            .into_iter()
            .find(|s| s.branch == Branch::Trivial)
            .unwrap();
        let lin = linearize_at(&p, &ss).unwrap();
        (p, lin)
    }

    #[test]
    fn det4_matches_known_value() {
        // Diagonal determinant.
        let mut m = [[Complex64::new(0.0, 0.0); 4]; 4];
        for (i, d) in [2.0, -1.0, 3.0, 0.5].into_iter().enumerate() {
            m[i][i] = Complex64::new(d, 0.0);
        }
        assert!((det4(m) - Complex64::new(-3.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn trivial_branch_factorizes() {
        // det = [(lambda + kappa + k e^{-lambda tau})^2 - (kappa x)^2]
        //       * (lambda + kappa_p)^2 on the trivial branch for phi = 0.
        let (p, lin) = trivial_linearization(0.8, 1.3);
        let undepleted = SystemParams::builder()
            .eps_mag(p.kappa() * p.x())
            .tau(p.tau())
            .build()
            .unwrap();
        for (re, im) in [(0.2, 0.9), (-0.7, 2.4), (0.0, 0.5), (-1.5, -0.8)] {
            let lambda = Complex64::new(re, im);
            let factored = stability::characteristic_function(&undepleted, lambda)
                * (lambda + p.kappa_p())
                * (lambda + p.kappa_p());
            let full = lin.characteristic_function(lambda);
            assert!(
                (full - factored).norm() < 1e-10 * factored.norm().max(1.0),
                "lambda = {lambda}"
            );
        }
    }

    #[test]
    fn trivial_signal_roots_match_linear_model() {
        let (p, lin) = trivial_linearization(0.8, 1.3);
        let undepleted = SystemParams::builder()
            .eps_mag(p.kappa() * p.x())
            .tau(p.tau())
            .build()
            .unwrap();
        let region = Region::symmetric(-2.0, 1.0, 4.0);
        let classical_roots = lin.rightmost_roots(&region).unwrap();
        let linear_roots = stability::rightmost_roots(&undepleted, &region).unwrap();
        // Every linear-model root appears among the classical roots, plus the
        // double pump root at -kappa_p.
        for lr in &linear_roots {
            assert!(
                classical_roots
                    .iter()
                    .any(|cr| (cr.lambda() - lr.lambda()).norm() < 1e-7),
                "missing {:?}",
                lr.lambda()
            );
        }
        // The pump root is double, so Newton stalls inside the |f| < tol
        // disk and its location is only sqrt(tol)-accurate.
        let pump_roots = classical_roots
            .iter()
            .filter(|r| (r.lambda() - Complex64::new(-p.kappa_p(), 0.0)).norm() < 1e-3)
            .count();
        assert_eq!(pump_roots, 2);
    }

    #[test]
    fn stiff_pump_recovers_undepleted_roots() {
        // kappa_p = 100 kappa: the signal-block roots agree with the
        // undepleted model to better than 1e-2 kappa (here exactly, since the
        // trivial branch decouples).
        let p = ClassicalParams::builder()
            .tau(1.3)
            .x(0.8)
            .kappa_p(100.0)
            .build()
            .unwrap();
        let ss = steady_states(&p)[0];
        let lin = linearize_at(&p, &ss).unwrap();
        let undepleted = SystemParams::builder()
            .eps_mag(0.8)
            .tau(1.3)
            .build()
            .unwrap();
        let region = Region::symmetric(-2.0, 1.0, 4.0);
        let classical = lin.rightmost_roots(&region).unwrap();
        let linear = stability::rightmost_roots(&undepleted, &region).unwrap();
        for lr in &linear {
            let best = classical
                .iter()
                .map(|cr| (cr.lambda() - lr.lambda()).norm())
                .fold(f64::INFINITY, f64::min);
            assert!(best < 1e-2, "root {:?} off by {best}", lr.lambda());
        }
    }

    #[test]
    fn trivial_branch_stable_below_threshold_without_delay() {
        let (_, lin) = trivial_linearization(1.9, 0.0);
        let roots = lin.rightmost_roots(&lin.default_region()).unwrap();
        assert!(!roots.is_empty());
        assert!(roots[0].lambda_re < 0.0);
    }

    #[test]
    fn upper_branch_linearization_at_tau_zero() {
        // Above threshold without delay the pitchfork branches are stable.
        let p = ClassicalParams::builder().x(2.5).build().unwrap();
        let upper = steady_states(&p)
            .into_iter()
            .find(|s| s.branch == Branch::Upper)
            .unwrap();
        let lin = linearize_at(&p, &upper).unwrap();
        let roots = lin.rightmost_roots(&lin.default_region()).unwrap();
        assert!(!roots.is_empty());
        assert!(roots[0].lambda_re < 0.0, "rightmost {:?}", roots[0]);
    }

    #[test]
    fn fast_stability_query_matches_root_search() {
        for (x, tau) in [(0.5, 0.0), (1.9, 0.0), (0.6, 2.0), (0.9, 2.6), (0.0, 0.0)] {
            let p = ClassicalParams::builder().tau(tau).x(x).build().unwrap();
            let ss = steady_states(&p)[0];
            let lin = linearize_at(&p, &ss).unwrap();
            let fast = lin.is_stable().unwrap();
            let roots = lin.rightmost_roots(&lin.default_region()).unwrap();
            let slow = roots.first().is_none_or(|r| r.lambda_re < 0.0);
            assert_eq!(fast, slow, "x={x} tau={tau}");
        }
    }

    #[test]
    fn rejects_non_steady_state() {
        let p = ClassicalParams::builder().x(0.5).build().unwrap();
        let fake = SteadyState {
            branch: Branch::Trivial,
            amplitude: Complex64::new(0.3, 0.0),
            pump: Complex64::new(0.5, 0.0),
            x: 0.5,
        };
        assert!(matches!(
            linearize_at(&p, &fake),
            Err(ClassicalError::NotASteadyState { .. })
        ));
    }
}
