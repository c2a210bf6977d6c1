//! Certified root finding for analytic functions on rectangles.
//!
//! Characteristic functions of delayed systems are entire, with infinitely
//! many roots marching into the left half-plane; only the rightmost few decide
//! stability. This module counts the roots inside a rectangle by the argument
//! principle (boundary winding number with adaptive edge subdivision), locates
//! them with damped Newton iteration from a uniform seed grid, measures each
//! located root's multiplicity by a small boundary winding around it, and
//! accepts the result only when the multiplicities sum to the rectangle count.

use num_complex::Complex64;
use thiserror::Error;

/// A closed axis-aligned rectangle in the complex plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Region {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl Region {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Self {
        Self {
            re_min,
            re_max,
            im_min,
            im_max,
        }
    }

    /// Rectangle symmetric about the real axis.
    pub fn symmetric(re_min: f64, re_max: f64, im_half_width: f64) -> Self {
        Self::new(re_min, re_max, -im_half_width, im_half_width)
    }

    pub fn contains(&self, z: Complex64, slack: f64) -> bool {
        z.re >= self.re_min - slack
            && z.re <= self.re_max + slack
            && z.im >= self.im_min - slack
            && z.im <= self.im_max + slack
    }

    fn around(center: Complex64, half_width: f64) -> Self {
        Self::new(
            center.re - half_width,
            center.re + half_width,
            center.im - half_width,
            center.im + half_width,
        )
    }

    fn grown(&self, delta: f64) -> Self {
        Self::new(
            self.re_min - delta,
            self.re_max + delta,
            self.im_min - delta,
            self.im_max + delta,
        )
    }

    fn is_proper(&self) -> bool {
        self.re_min < self.re_max && self.im_min < self.im_max
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RootFindError {
    #[error("search region is empty or inverted")]
    InvalidRegion,
    #[error("contour repeatedly passes through (or too close to) a root")]
    ContourThroughRoot,
    #[error("function overflowed or was not finite on the contour")]
    NonFiniteOnContour,
    #[error("boundary phase accumulation did not close to an integer winding")]
    WindingNotClosed,
    #[error(
        "root count not certified: winding predicts {expected}, Newton located {found} \
         (with multiplicity) after all retries"
    )]
    Incomplete { expected: usize, found: usize },
}

/// A refined root: location, `|f|` at the accepted iterate, and multiplicity
/// measured by a boundary winding around the location.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootEstimate {
    pub z: Complex64,
    pub residual: f64,
    pub multiplicity: usize,
}

/// Winding number of `f` along the counterclockwise boundary of `region`,
/// i.e. the number of enclosed roots counted with multiplicity.
///
/// `phase_rate` bounds the phase speed of `f` along the contour (radians per
/// unit length) and sets the initial sampling density; segments are then
/// halved until each carries less than a quarter turn.
pub fn winding_number(
    f: &dyn Fn(Complex64) -> Complex64,
    region: &Region,
    phase_rate: f64,
) -> Result<i64, RootFindError> {
    if !region.is_proper() {
        return Err(RootFindError::InvalidRegion);
    }
    let corners = [
        Complex64::new(region.re_min, region.im_min),
        Complex64::new(region.re_max, region.im_min),
        Complex64::new(region.re_max, region.im_max),
        Complex64::new(region.re_min, region.im_max),
    ];
    let mut total = 0.0;
    for i in 0..4 {
        total += edge_phase(f, corners[i], corners[(i + 1) % 4], phase_rate)?;
    }
    let winding = total / std::f64::consts::TAU;
    let rounded = winding.round();
    if (winding - rounded).abs() > 0.25 {
        return Err(RootFindError::WindingNotClosed);
    }
    Ok(rounded as i64)
}

fn edge_phase(
    f: &dyn Fn(Complex64) -> Complex64,
    from: Complex64,
    to: Complex64,
    phase_rate: f64,
) -> Result<f64, RootFindError> {
    let length = (to - from).norm();
    let segments = ((length * phase_rate.max(0.1) / std::f64::consts::FRAC_PI_4).ceil() as usize)
        .clamp(8, 2_000_000);
    let mut total = 0.0;
    let mut z0 = from;
    let mut f0 = checked_eval(f, z0)?;
    for i in 1..=segments {
        let t = i as f64 / segments as f64;
        let z1 = from + (to - from) * t;
        let f1 = checked_eval(f, z1)?;
        total += segment_phase(f, z0, f0, z1, f1, 0)?;
        z0 = z1;
        f0 = f1;
    }
    Ok(total)
}

fn segment_phase(
    f: &dyn Fn(Complex64) -> Complex64,
    z0: Complex64,
    f0: Complex64,
    z1: Complex64,
    f1: Complex64,
    depth: u32,
) -> Result<f64, RootFindError> {
    let step = (f1 / f0).arg();
    let magnitude_jump = (f1.norm() / f0.norm()).ln().abs();
    if step.abs() < std::f64::consts::FRAC_PI_2 && (magnitude_jump < 2.0 || depth >= 6) {
        return Ok(step);
    }
    if depth >= 48 {
        // Halving 48 times still turns the phase by a quarter: a root sits on
        // (or numerically on) the contour.
        return Err(RootFindError::ContourThroughRoot);
    }
    let zm = (z0 + z1) / 2.0;
    let fm = checked_eval(f, zm)?;
    Ok(segment_phase(f, z0, f0, zm, fm, depth + 1)? + segment_phase(f, zm, fm, z1, f1, depth + 1)?)
}

fn checked_eval(
    f: &dyn Fn(Complex64) -> Complex64,
    z: Complex64,
) -> Result<Complex64, RootFindError> {
    let v = f(z);
    if !v.re.is_finite() || !v.im.is_finite() {
        return Err(RootFindError::NonFiniteOnContour);
    }
    if v.norm() < 1e-280 {
        return Err(RootFindError::ContourThroughRoot);
    }
    Ok(v)
}

/// Configuration for a certified search of all roots in a region.
pub struct RootSearch<'a> {
    pub f: &'a dyn Fn(Complex64) -> Complex64,
    /// Analytic derivative when available; otherwise a scaled central
    /// difference is used inside the Newton iteration.
    pub df: Option<&'a dyn Fn(Complex64) -> Complex64>,
    /// Magnitude unit of the z-plane, used to scale step and cluster
    /// tolerances.
    pub scale: f64,
    /// Absolute acceptance threshold on `|f|` at a refined root.
    pub residual_tol: f64,
    /// Spacing of the uniform Newton seed grid.
    pub seed_step: f64,
    /// Additional seed points (analytically known roots, warm starts).
    pub extra_seeds: Vec<Complex64>,
    /// Phase-speed bound handed to the winding computations.
    pub phase_rate: f64,
    /// Radius within which located points are treated as one root. Newton
    /// stalls anywhere inside the disk where |f| dips below tolerance, and
    /// for a root of multiplicity m that disk has radius ~ tol^(1/m), so
    /// searches whose function can carry multiple roots need a radius of
    /// that order (locations of such roots are only accurate to it).
    pub cluster_radius: f64,
}

impl<'a> RootSearch<'a> {
    /// All roots of `f` inside `region`, certified against the boundary
    /// winding count. Roots are sorted by descending real part;
    /// multiplicities are reported on each estimate.
    ///
    /// On a count mismatch the seed grid is densified twice; if the contour
    /// runs through a root, or the mismatch persists, the region is grown
    /// slightly and the search repeated, for at most five attempts in total.
    pub fn find_all(&self, region: &Region) -> Result<Vec<RootEstimate>, RootFindError> {
        if !region.is_proper() {
            return Err(RootFindError::InvalidRegion);
        }
        let attempts: [(f64, f64); 5] = [
            (0.0, 1.0),
            (0.0, 0.5),
            (0.0, 0.25),
            (1e-6 * self.scale, 0.5),
            (7e-6 * self.scale, 0.25),
        ];
        let mut last_err = RootFindError::Incomplete {
            expected: 0,
            found: 0,
        };
        for (growth, step_factor) in attempts {
            let attempt_region = region.grown(growth);
            let expected = match winding_number(self.f, &attempt_region, self.phase_rate) {
                Ok(n) => n.max(0) as usize,
                Err(e @ RootFindError::ContourThroughRoot) => {
                    last_err = e;
                    continue;
                }
                Err(e) => return Err(e),
            };
            if expected == 0 {
                return Ok(Vec::new());
            }
            let mut roots = self.hunt(&attempt_region, self.seed_step * step_factor);
            match self.assign_multiplicities(&mut roots) {
                Ok(()) => {}
                Err(e) => {
                    last_err = e;
                    continue;
                }
            }
            let found: usize = roots.iter().map(|r| r.multiplicity).sum();
            if found == expected {
                return Ok(roots);
            }
            last_err = RootFindError::Incomplete { expected, found };
        }
        Err(last_err)
    }

    /// Newton from every seed, clustered by proximity.
    fn hunt(&self, region: &Region, seed_step: f64) -> Vec<RootEstimate> {
        let mut found: Vec<RootEstimate> = Vec::new();
        let cluster_radius = self.cluster_radius;
        let consider = |estimate: RootEstimate, found: &mut Vec<RootEstimate>| {
            if !region.contains(estimate.z, 1e-12 * self.scale) {
                return;
            }
            match found
                .iter_mut()
                .find(|r| (r.z - estimate.z).norm() < cluster_radius)
            {
                Some(existing) => {
                    if estimate.residual < existing.residual {
                        *existing = estimate;
                    }
                }
                None => found.push(estimate),
            }
        };

        for &seed in &self.extra_seeds {
            if let Some(root) = self.newton(seed) {
                consider(root, &mut found);
            }
        }
        let nx = ((region.re_max - region.re_min) / seed_step).ceil() as usize + 1;
        let ny = ((region.im_max - region.im_min) / seed_step).ceil() as usize + 1;
        for ix in 0..=nx {
            for iy in 0..=ny {
                let seed = Complex64::new(
                    region.re_min + (region.re_max - region.re_min) * ix as f64 / nx as f64,
                    region.im_min + (region.im_max - region.im_min) * iy as f64 / ny as f64,
                );
                if let Some(root) = self.newton(seed) {
                    consider(root, &mut found);
                }
            }
        }
        found.sort_by(|a, b| b.z.re.total_cmp(&a.z.re).then(a.z.im.total_cmp(&b.z.im)));
        found
    }

    /// Multiplicity of each located root from a winding count on a small
    /// square around it. The square grows until it captures the root (the
    /// representative of a multiple root can sit anywhere in the stall
    /// cloud) and shrinks or retries when another root crowds the boundary.
    fn assign_multiplicities(&self, roots: &mut [RootEstimate]) -> Result<(), RootFindError> {
        let base = 2.0 * self.cluster_radius;
        for i in 0..roots.len() {
            let center = roots[i].z;
            let nearest_other = roots
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, r)| (r.z - center).norm())
                .fold(f64::INFINITY, f64::min);
            let mut assigned = None;
            for factor in [1.0, 0.5, 1.5, 0.25, 2.0, 0.125, 3.0] {
                let half_width = (base * factor).min(nearest_other * 0.45).max(base * 0.01);
                let square = Region::around(center, half_width);
                match winding_number(self.f, &square, self.phase_rate) {
                    Ok(m) if m >= 1 => {
                        assigned = Some(m as usize);
                        break;
                    }
                    Ok(_) => {}
                    Err(RootFindError::ContourThroughRoot) => {}
                    Err(e) => return Err(e),
                }
            }
            match assigned {
                Some(m) => roots[i].multiplicity = m,
                None => return Err(RootFindError::ContourThroughRoot),
            }
        }
        Ok(())
    }

    fn derivative(&self, z: Complex64) -> Complex64 {
        match self.df {
            Some(df) => df(z),
            None => {
                let h = 1e-6 * (self.scale + z.norm());
                ((self.f)(z + h) - (self.f)(z - h)) / (2.0 * h)
            }
        }
    }

    fn newton(&self, seed: Complex64) -> Option<RootEstimate> {
        let f = self.f;
        let mut z = seed;
        let mut fz = f(z);
        if !fz.re.is_finite() || !fz.im.is_finite() {
            return None;
        }
        for _ in 0..80 {
            if fz.norm() <= self.residual_tol {
                return Some(RootEstimate {
                    z,
                    residual: fz.norm(),
                    multiplicity: 1,
                });
            }
            let d = self.derivative(z);
            if d.norm() == 0.0 || !d.re.is_finite() || !d.im.is_finite() {
                return None;
            }
            let full_step = fz / d;
            let mut advanced = false;
            let mut damping = 1.0;
            for _ in 0..10 {
                let z_next = z - full_step * damping;
                let f_next = f(z_next);
                if f_next.re.is_finite() && f_next.im.is_finite() && f_next.norm() < fz.norm() {
                    z = z_next;
                    fz = f_next;
                    advanced = true;
                    break;
                }
                damping *= 0.5;
            }
            if !advanced {
                break;
            }
            if full_step.norm() * damping < 1e-16 * (self.scale + z.norm()) {
                break;
            }
        }
        (fz.norm() <= self.residual_tol).then_some(RootEstimate {
            z,
            residual: fz.norm(),
            multiplicity: 1,
        })
    }
}
