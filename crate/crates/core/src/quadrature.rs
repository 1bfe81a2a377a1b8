//! Composite Simpson quadrature on a uniform spatial-frequency grid.

use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::model::{DoubleSlit, GaussianSpectrum};

/// The integrand `S(q)` is negligible (relative e^-32) beyond this many
/// standard deviations.
pub const SPECTRUM_SUPPORT_SIGMAS: f64 = 8.0;

/// Points per resolution cell required by the construction check.
const REQUIRED_POINTS_PER_CELL: f64 = 16.0;
/// Default grids are twice as fine as required.
const DEFAULT_POINTS_PER_CELL: f64 = 2.0 * REQUIRED_POINTS_PER_CELL;

/// Largest q step that resolves both the interference period `2π/d` of
/// `T²` and the spectral width `w`.
pub fn resolution_limit(slit: &DoubleSlit, spectrum: &GaussianSpectrum) -> f64 {
    (TAU / slit.separation()).min(spectrum.bandwidth()) / REQUIRED_POINTS_PER_CELL
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    q_half_range: f64,
    n_points: usize,
}

impl QuadratureConfig {
    pub fn new(q_half_range: f64, n_points: usize) -> Result<Self> {
        if !(q_half_range.is_finite() && q_half_range > 0.0) {
            return Err(Error::invalid(
                "quad_half_range",
                format!("must be positive, got {q_half_range}"),
            ));
        }
        if n_points < 3 || n_points.is_multiple_of(2) {
            return Err(Error::invalid(
                "quad_points",
                format!("must be odd and at least 3, got {n_points}"),
            ));
        }
        Ok(Self { q_half_range, n_points })
    }

    /// Default grid: `±8w`, with twice the point density the resolution
    /// check requires.
    pub fn for_model(slit: &DoubleSlit, spectrum: &GaussianSpectrum) -> Self {
        let q_half_range = SPECTRUM_SUPPORT_SIGMAS * spectrum.bandwidth();
        let step = resolution_limit(slit, spectrum) * REQUIRED_POINTS_PER_CELL / DEFAULT_POINTS_PER_CELL;
        let n_points = odd_point_count(2.0 * q_half_range / step);
        Self { q_half_range, n_points }
    }

    pub fn q_half_range(&self) -> f64 {
        self.q_half_range
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn step(&self) -> f64 {
        2.0 * self.q_half_range / (self.n_points - 1) as f64
    }

    /// Same range, `2n - 1` points (every old node is kept).
    pub fn refined(&self) -> Self {
        Self {
            q_half_range: self.q_half_range,
            n_points: 2 * self.n_points - 1,
        }
    }

    /// Rejects grids too coarse to resolve the integrand.
    pub fn check_resolution(&self, slit: &DoubleSlit, spectrum: &GaussianSpectrum) -> Result<()> {
        let limit = resolution_limit(slit, spectrum);
        let step = self.step();
        if step > limit * (1.0 + 1e-12) {
            return Err(Error::UnderResolved { step, limit });
        }
        Ok(())
    }

    /// Nodes `q_j = (j - c) Δq`, exactly symmetric about zero.
    pub fn nodes(&self) -> Vec<f64> {
        symmetric_nodes(self.n_points, self.step())
    }

    /// Composite Simpson weights `Δq/3 · (1, 4, 2, 4, ..., 4, 1)`.
    pub fn weights(&self) -> Vec<f64> {
        simpson_weights(self.n_points, self.step())
    }
}

/// Smallest odd count whose interval count covers `intervals` (with a
/// little slack for rounding).
pub(crate) fn odd_point_count(intervals: f64) -> usize {
    let mut n = (intervals * (1.0 - 1e-12)).ceil().max(2.0) as usize;
    if n % 2 == 1 {
        n += 1;
    }
    n + 1
}

pub(crate) fn symmetric_nodes(n: usize, step: f64) -> Vec<f64> {
    let center = (n - 1) as f64 / 2.0;
    (0..n).map(|j| (j as f64 - center) * step + 0.0).collect()
}

pub fn simpson_weights(n: usize, step: f64) -> Vec<f64> {
    assert!(n >= 3 && n % 2 == 1, "Simpson's rule needs an odd number of points");
    let third = step / 3.0;
    (0..n)
        .map(|j| {
            if j == 0 || j == n - 1 {
                third
            } else if j % 2 == 1 {
                4.0 * third
            } else {
                2.0 * third
            }
        })
        .collect()
}

/// Composite Simpson integral of `f` over `[a, b]` with `n` (odd) points.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / (n - 1) as f64;
    simpson_weights(n, h)
        .iter()
        .enumerate()
        .map(|(j, w)| w * f(a + j as f64 * h))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn simpson_is_exact_for_cubics() {
        let v = simpson(|x| 3.0 * x * x * x - x * x + 2.0, -1.0, 2.0, 7);
        let exact = 0.75 * (16.0 - 1.0) - (8.0 + 1.0) / 3.0 + 6.0;
        assert!((v - exact).abs() < 1e-12);
    }

    #[test]
    fn simpson_converges_on_sine() {
        let v = simpson(f64::sin, 0.0, PI, 101);
        assert!((v - 2.0).abs() < 1e-7);
    }

    #[test]
    fn config_validation() {
        assert!(QuadratureConfig::new(1.0, 4).is_err());
        assert!(QuadratureConfig::new(1.0, 1).is_err());
        assert!(QuadratureConfig::new(0.0, 5).is_err());
        assert!(QuadratureConfig::new(1.0, 5).is_ok());
    }

    #[test]
    fn default_grid_satisfies_resolution_with_margin() {
        let slit = DoubleSlit::default();
        for nb in [1e-4, 0.1, 0.52, 10.0] {
            let spec = GaussianSpectrum::from_normalized(nb, &slit).unwrap();
            let quad = QuadratureConfig::for_model(&slit, &spec);
            quad.check_resolution(&slit, &spec).unwrap();
            assert!(quad.step() <= 0.5 * resolution_limit(&slit, &spec) * (1.0 + 1e-9));
            assert_eq!(quad.n_points() % 2, 1);
        }
    }

    #[test]
    fn coarse_grid_is_rejected() {
        let slit = DoubleSlit::default();
        let spec = GaussianSpectrum::from_normalized(0.52, &slit).unwrap();
        let quad = QuadratureConfig::new(8.0 * spec.bandwidth(), 33).unwrap();
        assert!(matches!(
            quad.check_resolution(&slit, &spec),
            Err(Error::UnderResolved { .. })
        ));
    }

    #[test]
    fn nodes_are_symmetric() {
        let quad = QuadratureConfig::new(3.0, 9).unwrap();
        let nodes = quad.nodes();
        assert_eq!(nodes[4], 0.0);
        for j in 0..9 {
            assert_eq!(nodes[j], -nodes[8 - j]);
        }
        let total: f64 = quad.weights().iter().sum();
        assert!((total - 6.0).abs() < 1e-14);
    }
}
