//! Optical geometry of the double-slit experiment.
//!
//! Everything is in SI units: lengths in meters, spatial frequencies in
//! rad/m. The slit separation is measured center to center.
//!
//! The far-field amplitude transfer of two slits of width `b` whose centers
//! are `d` apart is
//!
//! ```text
//! T(q) = (2b / sqrt(2π)) · sinc(q b / 2) · cos(q d / 2),   sinc(u) = sin(u) / u
//! ```
//!
//! and a detector at transverse position `x`, a distance `z` behind the slits,
//! sees spatial frequency `k x / z` with `k = 2π / λ`.

use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};

/// Slit width used in the reference experiment (55 µm).
pub const REFERENCE_SLIT_WIDTH: f64 = 55e-6;
/// Center-to-center slit separation of the reference experiment (100 µm).
pub const REFERENCE_SLIT_SEPARATION: f64 = 100e-6;
/// He-Ne wavelength (632.8 nm).
pub const REFERENCE_WAVELENGTH: f64 = 632.8e-9;
/// Slit-to-detector distance (550 mm).
pub const REFERENCE_DISTANCE: f64 = 0.55;
/// Fitted normalized bandwidth `w b / 2π` of the pseudo-thermal source.
pub const REFERENCE_NORMALIZED_BANDWIDTH: f64 = 0.52;

const SINC_SERIES_CUTOFF: f64 = 1e-4;

/// Unnormalized cardinal sine, `sin(u)/u` with `sinc(0) = 1`.
pub fn sinc(u: f64) -> f64 {
    if u.abs() < SINC_SERIES_CUTOFF {
        let u2 = u * u;
        1.0 - u2 / 6.0 + u2 * u2 / 120.0
    } else {
        u.sin() / u
    }
}

fn require_positive(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(
            name,
            format!("must be a positive finite number, got {value}"),
        ))
    }
}

/// Two identical slits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DoubleSlit {
    width: f64,
    separation: f64,
}

impl DoubleSlit {
    pub fn new(width: f64, separation: f64) -> Result<Self> {
        require_positive("slit_width", width)?;
        require_positive("slit_separation", separation)?;
        if separation < width {
            return Err(Error::invalid(
                "slit_separation",
                format!("center-to-center separation {separation:e} m is smaller than the slit width {width:e} m (slits overlap)"),
            ));
        }
        Ok(Self { width, separation })
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn separation(&self) -> f64 {
        self.separation
    }

    /// Far-field amplitude transfer `T(q)`; even in `q`.
    pub fn transfer(&self, q: f64) -> f64 {
        let b = self.width;
        (2.0 * b / TAU.sqrt()) * sinc(0.5 * q * b) * (0.5 * q * self.separation).cos()
    }

    /// `T(0) = 2b/sqrt(2π)`.
    pub fn transfer_peak(&self) -> f64 {
        2.0 * self.width / TAU.sqrt()
    }

    /// Half-width `λz/b` of the central single-slit diffraction lobe in the
    /// detection plane.
    pub fn envelope_half_width(&self, setup: &OpticalSetup) -> f64 {
        setup.wavelength() * setup.distance() / self.width
    }

    /// One-photon fringe spacing `λz/d` for coherent illumination.
    pub fn fringe_spacing(&self, setup: &OpticalSetup) -> f64 {
        setup.wavelength() * setup.distance() / self.separation
    }
}

impl Default for DoubleSlit {
    fn default() -> Self {
        Self {
            width: REFERENCE_SLIT_WIDTH,
            separation: REFERENCE_SLIT_SEPARATION,
        }
    }
}

/// Gaussian spatial-frequency spectrum `S(q)` of the chaotic source,
/// normalized to unit area.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianSpectrum {
    bandwidth: f64,
}

impl GaussianSpectrum {
    /// `bandwidth` is the standard deviation `w` in rad/m.
    pub fn new(bandwidth: f64) -> Result<Self> {
        require_positive("bandwidth", bandwidth)?;
        Ok(Self { bandwidth })
    }

    /// Builds the spectrum from the dimensionless `w b / 2π` used to report
    /// source bandwidths relative to the slit width.
    pub fn from_normalized(normalized: f64, slit: &DoubleSlit) -> Result<Self> {
        require_positive("normalized_bandwidth", normalized)?;
        Self::new(TAU * normalized / slit.width())
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn normalized(&self, slit: &DoubleSlit) -> f64 {
        self.bandwidth * slit.width() / TAU
    }

    pub fn density(&self, q: f64) -> f64 {
        let w = self.bandwidth;
        (-q * q / (2.0 * w * w)).exp() / (TAU.sqrt() * w)
    }
}

/// Wavelength, propagation distance and the overall amplitude constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpticalSetup {
    wavelength: f64,
    distance: f64,
    amplitude: f64,
}

impl OpticalSetup {
    pub fn new(wavelength: f64, distance: f64, amplitude: f64) -> Result<Self> {
        require_positive("wavelength", wavelength)?;
        require_positive("distance", distance)?;
        require_positive("amplitude", amplitude)?;
        Ok(Self {
            wavelength,
            distance,
            amplitude,
        })
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    pub fn distance(&self) -> f64 {
        self.distance
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn wavenumber(&self) -> f64 {
        2.0 * PI / self.wavelength
    }

    /// Spatial frequency `k x / z` seen by a detector at `x`.
    pub fn reduced_frequency(&self, x: f64) -> f64 {
        self.wavenumber() * x / self.distance
    }
}

impl Default for OpticalSetup {
    fn default() -> Self {
        Self {
            wavelength: REFERENCE_WAVELENGTH,
            distance: REFERENCE_DISTANCE,
            amplitude: 1.0,
        }
    }
}

/// Strictly increasing detector positions.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanGrid {
    positions: Vec<f64>,
}

impl ScanGrid {
    pub fn new(positions: Vec<f64>) -> Result<Self> {
        if positions.len() < 2 {
            return Err(Error::invalid("grid", "needs at least 2 positions"));
        }
        if positions.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("grid", "positions must be finite"));
        }
        if positions.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("grid", "positions must be strictly increasing"));
        }
        Ok(Self { positions })
    }

    /// `points` evenly spaced positions covering `[-half_range, half_range]`.
    ///
    /// Positions are generated as `(i - c) h` about the center index `c`, so
    /// the grid is exactly mirror-symmetric and contains `x = 0` whenever
    /// `points` is odd.
    pub fn symmetric(half_range: f64, points: usize) -> Result<Self> {
        require_positive("grid_half_range", half_range)?;
        if points < 2 {
            return Err(Error::invalid("grid_points", "needs at least 2 points"));
        }
        let step = 2.0 * half_range / (points - 1) as f64;
        let center = (points - 1) as f64 / 2.0;
        // `+ 0.0` folds -0.0 into 0.0 at the center.
        let positions = (0..points).map(|i| (i as f64 - center) * step + 0.0).collect();
        Self::new(positions)
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn first(&self) -> f64 {
        self.positions[0]
    }

    pub fn last(&self) -> f64 {
        self.positions[self.positions.len() - 1]
    }

    pub fn span(&self) -> f64 {
        self.last() - self.first()
    }

    /// Index of the position closest to `x`.
    pub fn nearest_index(&self, x: f64) -> usize {
        match self.positions.binary_search_by(|p| p.total_cmp(&x)) {
            Ok(i) => i,
            Err(0) => 0,
            Err(i) if i == self.positions.len() => i - 1,
            Err(i) => {
                if (self.positions[i] - x).abs() < (x - self.positions[i - 1]).abs() {
                    i
                } else {
                    i - 1
                }
            }
        }
    }

    /// Uniform step if the spacing is constant to 1e-9 relative.
    pub fn uniform_step(&self) -> Option<f64> {
        let step = self.span() / (self.len() - 1) as f64;
        self.positions
            .windows(2)
            .all(|w| ((w[1] - w[0]) - step).abs() <= 1e-9 * step)
            .then_some(step)
    }
}
