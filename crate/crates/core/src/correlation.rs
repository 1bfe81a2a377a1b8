//! First- and second-order correlation patterns behind the double slit.
//!
//! For a chaotic source with spectrum `S(q)` the mean intensity and joint
//! intensity at detector positions `x1`, `x2` are
//!
//! ```text
//! G1(x, x)   = A ∫ T²(kx/z - q) S(q) dq
//! Γ(x1, x2)  =   ∫ T(kx1/z - q) T(kx2/z - q) S(q) dq
//! G2(x1, x2) = A² [ G1(x1) G1(x2) / A² + Γ(x1, x2)² ]
//! g2(x1, x2) = G2(x1, x2) / (G1(x1) G1(x2))
//! ```
//!
//! all evaluated here by composite Simpson quadrature. A coherent plane wave
//! gives the closed forms `G1 = A T²(kx/z)` and `G2 = G1(x1) G1(x2)`.

use std::fmt;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{DoubleSlit, GaussianSpectrum, OpticalSetup, ScanGrid};
use crate::quadrature::QuadratureConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CurveKind {
    /// Mean intensity `G1(x, x)`.
    G1,
    /// Joint intensity `G2(x1, x2)`.
    G2,
    /// Normalized `g2(x1, x2)`.
    G2Normalized,
}

impl CurveKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CurveKind::G1 => "G1",
            CurveKind::G2 => "G2",
            CurveKind::G2Normalized => "g2",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "G1" => Some(CurveKind::G1),
            "G2" => Some(CurveKind::G2),
            "g2" => Some(CurveKind::G2Normalized),
            _ => None,
        }
    }
}

impl fmt::Display for CurveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// How the two detectors move as the scan coordinate `x` advances.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScanMode {
    /// One detector, mean intensity at `x`.
    Intensity,
    /// Detectors at `(x, -x)`.
    Antisymmetric,
    /// Detectors at `(x, x)`.
    Symmetric,
    /// Detectors at `(x, 0)`.
    FixedZero,
}

impl ScanMode {
    pub const ALL: [ScanMode; 4] = [
        ScanMode::Intensity,
        ScanMode::Antisymmetric,
        ScanMode::Symmetric,
        ScanMode::FixedZero,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ScanMode::Intensity => "intensity",
            ScanMode::Antisymmetric => "antisymmetric",
            ScanMode::Symmetric => "symmetric",
            ScanMode::FixedZero => "fixed_zero",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        ScanMode::ALL.into_iter().find(|m| m.as_str() == s)
    }

    /// Position of the second detector when the first sits at `x`.
    pub fn partner(self, x: f64) -> f64 {
        match self {
            ScanMode::Intensity | ScanMode::Symmetric => x,
            ScanMode::Antisymmetric => -x + 0.0,
            ScanMode::FixedZero => 0.0,
        }
    }

    /// The curve kinds that make sense for this detector arrangement.
    pub fn check_kind(self, kind: CurveKind) -> Result<()> {
        let ok = match self {
            ScanMode::Intensity => kind == CurveKind::G1,
            _ => kind != CurveKind::G1,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::invalid(
                "kind",
                format!("{} is not available for the {} scan mode", kind, self.as_str()),
            ))
        }
    }
}

impl fmt::Display for ScanMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Source {
    Thermal,
    Coherent,
}

impl Source {
    pub fn as_str(self) -> &'static str {
        match self {
            Source::Thermal => "thermal",
            Source::Coherent => "coherent",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "thermal" => Some(Source::Thermal),
            "coherent" => Some(Source::Coherent),
            _ => None,
        }
    }
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A sampled correlation pattern.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationCurve {
    grid: ScanGrid,
    values: Vec<f64>,
    stderr: Option<Vec<f64>>,
    kind: CurveKind,
    mode: ScanMode,
}

impl CorrelationCurve {
    pub fn new(
        grid: ScanGrid,
        values: Vec<f64>,
        stderr: Option<Vec<f64>>,
        kind: CurveKind,
        mode: ScanMode,
    ) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} values for {} grid positions",
                values.len(),
                grid.len()
            )));
        }
        if let Some(err) = &stderr {
            if err.len() != grid.len() {
                return Err(Error::GridMismatch(format!(
                    "{} standard errors for {} grid positions",
                    err.len(),
                    grid.len()
                )));
            }
            if let Some((i, e)) = err.iter().enumerate().find(|(_, e)| e.is_nan() || **e < 0.0) {
                return Err(Error::invalid(
                    "stderr",
                    format!("negative or NaN standard error {e} at index {i}"),
                ));
            }
        }
        if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !(**v >= 0.0 && v.is_finite())) {
            return Err(Error::invalid(
                "values",
                format!(
                    "{kind} values must be finite and non-negative; got {v} at x = {:e} m",
                    grid.positions()[i]
                ),
            ));
        }
        Ok(Self {
            grid,
            values,
            stderr,
            kind,
            mode,
        })
    }

    pub fn grid(&self) -> &ScanGrid {
        &self.grid
    }

    pub fn positions(&self) -> &[f64] {
        self.grid.positions()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn stderr(&self) -> Option<&[f64]> {
        self.stderr.as_deref()
    }

    pub fn kind(&self) -> CurveKind {
        self.kind
    }

    pub fn mode(&self) -> ScanMode {
        self.mode
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Divides values (and errors) by a positive constant.
    pub fn scaled(&self, divisor: f64) -> Result<Self> {
        if !(divisor.is_finite() && divisor > 0.0) {
            return Err(Error::invalid("divisor", format!("must be positive, got {divisor}")));
        }
        Self::new(
            self.grid.clone(),
            self.values.iter().map(|v| v / divisor).collect(),
            self.stderr.as_ref().map(|e| e.iter().map(|v| v / divisor).collect()),
            self.kind,
            self.mode,
        )
    }

    pub(crate) fn with_values(&self, values: Vec<f64>, stderr: Option<Vec<f64>>, kind: CurveKind) -> Result<Self> {
        Self::new(self.grid.clone(), values, stderr, kind, self.mode)
    }
}

/// The three overlap integrals needed for a detector pair (without the
/// amplitude constant).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairMoments {
    pub first: f64,
    pub second: f64,
    pub cross: f64,
}

/// Coherent mean intensity `A T²(kx/z)`.
pub fn g1_coherent(setup: &OpticalSetup, slit: &DoubleSlit, x: f64) -> f64 {
    let t = slit.transfer(setup.reduced_frequency(x));
    setup.amplitude() * (t * t)
}

/// Coherent joint intensity `A² T²(kx1/z) T²(kx2/z)`.
pub fn g2_coherent(setup: &OpticalSetup, slit: &DoubleSlit, x1: f64, x2: f64) -> f64 {
    g1_coherent(setup, slit, x1) * g1_coherent(setup, slit, x2)
}

/// Normalized coherent `g2`; identically one wherever both marginals are
/// non-zero.
pub fn g2_coherent_normalized(setup: &OpticalSetup, slit: &DoubleSlit, x1: f64, x2: f64) -> Result<f64> {
    let i1 = nonzero_marginal(x1, g1_coherent(setup, slit, x1))?;
    let i2 = nonzero_marginal(x2, g1_coherent(setup, slit, x2))?;
    Ok(g2_coherent(setup, slit, x1, x2) / (i1 * i2))
}

/// Broadband-limit joint intensity, up to its constant prefactor:
/// `T²(0) + T²(k (x1 - x2) / z)`.
///
/// Only ratios of this quantity are meaningful.
pub fn broadband_g2(setup: &OpticalSetup, slit: &DoubleSlit, x1: f64, x2: f64) -> f64 {
    let t0 = slit.transfer_peak();
    let t = slit.transfer(setup.reduced_frequency(x1 - x2));
    t0 * t0 + t * t
}

/// Broadband-limit normalized correlation `1 + T²(k (x1 - x2)/z) / T²(0)`,
/// which swings between 1 and 2.
pub fn broadband_g2_normalized(setup: &OpticalSetup, slit: &DoubleSlit, x1: f64, x2: f64) -> f64 {
    let t0 = slit.transfer_peak();
    broadband_g2(setup, slit, x1, x2) / (t0 * t0)
}

fn nonzero_marginal(x: f64, value: f64) -> Result<f64> {
    if value.is_normal() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::DegenerateDenominator { x, value })
    }
}

/// Double slit illuminated by a Gaussian-spectrum chaotic source, with a
/// fixed quadrature grid.
#[derive(Debug, Clone)]
pub struct Interferometer {
    setup: OpticalSetup,
    slit: DoubleSlit,
    spectrum: GaussianSpectrum,
    quadrature: QuadratureConfig,
    nodes: Vec<f64>,
    /// Simpson weight times `S(q_j)`.
    weights: Vec<f64>,
}

impl Interferometer {
    pub fn new(
        setup: OpticalSetup,
        slit: DoubleSlit,
        spectrum: GaussianSpectrum,
        quadrature: QuadratureConfig,
    ) -> Result<Self> {
        quadrature.check_resolution(&slit, &spectrum)?;
        let nodes = quadrature.nodes();
        let weights = quadrature
            .weights()
            .iter()
            .zip(&nodes)
            .map(|(w, &q)| w * spectrum.density(q))
            .collect();
        Ok(Self {
            setup,
            slit,
            spectrum,
            quadrature,
            nodes,
            weights,
        })
    }

    pub fn with_default_quadrature(setup: OpticalSetup, slit: DoubleSlit, spectrum: GaussianSpectrum) -> Result<Self> {
        let quadrature = QuadratureConfig::for_model(&slit, &spectrum);
        Self::new(setup, slit, spectrum, quadrature)
    }

    pub fn setup(&self) -> &OpticalSetup {
        &self.setup
    }

    pub fn slit(&self) -> &DoubleSlit {
        &self.slit
    }

    pub fn spectrum(&self) -> &GaussianSpectrum {
        &self.spectrum
    }

    pub fn quadrature(&self) -> &QuadratureConfig {
        &self.quadrature
    }

    fn transfer_row(&self, x: f64) -> Vec<f64> {
        let a = self.setup.reduced_frequency(x);
        self.nodes.iter().map(|&q| self.slit.transfer(a - q)).collect()
    }

    fn self_overlap(&self, row: &[f64]) -> f64 {
        row.iter().zip(&self.weights).map(|(t, w)| w * (t * t)).sum()
    }

    /// All three overlap integrals for the pair `(x1, x2)` in one pass.
    ///
    /// When `x1 == x2` the cross term is bitwise equal to the self terms.
    pub fn moments(&self, x1: f64, x2: f64) -> PairMoments {
        let r1 = self.transfer_row(x1);
        if x1 == x2 {
            let v = self.self_overlap(&r1);
            return PairMoments {
                first: v,
                second: v,
                cross: v,
            };
        }
        let r2 = self.transfer_row(x2);
        let mut first = 0.0;
        let mut second = 0.0;
        let mut cross = 0.0;
        for ((t1, t2), w) in r1.iter().zip(&r2).zip(&self.weights) {
            first += w * (t1 * t1);
            second += w * (t2 * t2);
            cross += w * (t1 * t2);
        }
        PairMoments { first, second, cross }
    }

    /// Mean intensity `G1(x, x)` of the chaotic field.
    pub fn g1_thermal(&self, x: f64) -> f64 {
        self.setup.amplitude() * self.self_overlap(&self.transfer_row(x))
    }

    /// Cross overlap `Γ(x1, x2)`; symmetric in its arguments.
    pub fn gamma_cross(&self, x1: f64, x2: f64) -> f64 {
        self.moments(x1, x2).cross
    }

    pub fn g2_thermal(&self, x1: f64, x2: f64) -> f64 {
        let a = self.setup.amplitude();
        Self::joint(a, &self.moments(x1, x2))
    }

    fn joint(amplitude: f64, m: &PairMoments) -> f64 {
        amplitude * amplitude * (m.first * m.second + m.cross * m.cross)
    }

    pub fn g2_normalized(&self, x1: f64, x2: f64) -> Result<f64> {
        let a = self.setup.amplitude();
        let m = self.moments(x1, x2);
        Self::normalized(a, x1, x2, &m)
    }

    fn normalized(amplitude: f64, x1: f64, x2: f64, m: &PairMoments) -> Result<f64> {
        let i1 = nonzero_marginal(x1, amplitude * m.first)?;
        let i2 = nonzero_marginal(x2, amplitude * m.second)?;
        Ok(Self::joint(amplitude, m) / (i1 * i2))
    }

    pub fn g1_coherent(&self, x: f64) -> f64 {
        g1_coherent(&self.setup, &self.slit, x)
    }

    pub fn g2_coherent(&self, x1: f64, x2: f64) -> f64 {
        g2_coherent(&self.setup, &self.slit, x1, x2)
    }

    pub fn broadband_g2(&self, x1: f64, x2: f64) -> f64 {
        broadband_g2(&self.setup, &self.slit, x1, x2)
    }

    /// Value of one curve point for the detector pair `(x1, x2)`.
    pub fn point(&self, kind: CurveKind, source: Source, x1: f64, x2: f64) -> Result<f64> {
        let a = self.setup.amplitude();
        match source {
            Source::Thermal => {
                let m = self.moments(x1, x2);
                match kind {
                    CurveKind::G1 => Ok(a * m.first),
                    CurveKind::G2 => Ok(Self::joint(a, &m)),
                    CurveKind::G2Normalized => Self::normalized(a, x1, x2, &m),
                }
            }
            Source::Coherent => match kind {
                CurveKind::G1 => Ok(self.g1_coherent(x1)),
                CurveKind::G2 => Ok(self.g2_coherent(x1, x2)),
                CurveKind::G2Normalized => g2_coherent_normalized(&self.setup, &self.slit, x1, x2),
            },
        }
    }

    /// Evaluates a full scan; grid points are independent and computed in
    /// parallel, results stay in grid order.
    pub fn scan(&self, grid: &ScanGrid, kind: CurveKind, mode: ScanMode, source: Source) -> Result<CorrelationCurve> {
        mode.check_kind(kind)?;
        let values = grid
            .positions()
            .par_iter()
            .map(|&x| self.point(kind, source, x, mode.partner(x)))
            .collect::<Result<Vec<_>>>()?;
        CorrelationCurve::new(grid.clone(), values, None, kind, mode)
    }
}
