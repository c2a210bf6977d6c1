//! Uniform grids for spectra and parameter sweeps.

/// `n` evenly spaced points covering `[start, stop]`, endpoints included.
///
/// A single-point grid collapses to `start`.
pub fn linspace(start: f64, stop: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![start],
        _ => {
            let step = (stop - start) / (n - 1) as f64;
            (0..n)
                .map(|i| {
                    if i == n - 1 {
                        stop
                    } else {
                        start + step * i as f64
                    }
                })
                .collect()
        }
    }
}

/// Default sideband grid for spectrum curves: 2001 points over
/// `nu/kappa` in `[-3, 3]`, fine enough to resolve the narrow side peaks
/// that develop at long delays.
pub fn default_nu_grid(kappa: f64) -> Vec<f64> {
    linspace(-3.0 * kappa, 3.0 * kappa, 2001)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoints_are_exact() {
        let g = linspace(-3.0, 3.0, 2001);
        assert_eq!(g.len(), 2001);
        assert_eq!(g[0], -3.0);
        assert_eq!(g[2000], 3.0);
        assert_eq!(g[1000], 0.0);
    }

    #[test]
    fn degenerate_grids() {
        assert!(linspace(1.0, 2.0, 0).is_empty());
        assert_eq!(linspace(1.5, 9.0, 1), vec![1.5]);
    }
}
