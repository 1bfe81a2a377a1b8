//! Imperfect detection: the `(δ, η)` correction of the normalized
//! correlation, finite-aperture averaging and fringe visibility.

use std::fmt;

use crate::correlation::{CorrelationCurve, CurveKind};
use crate::error::{Error, Result};
use crate::fringes;

/// Offset fitted to the pseudo-thermal measurements.
pub const REFERENCE_DELTA: f64 = 0.04;
/// Efficiency factor fitted to the pseudo-thermal measurements.
pub const REFERENCE_ETA: f64 = 0.66;
/// Side of a square detector with the 0.28 mm² active area of the
/// reference photodiodes.
pub const REFERENCE_DETECTOR_WIDTH: f64 = 5.2915e-4;

/// Reference visibilities reported for the thermal-light measurements.
pub const REFERENCE_VISIBILITY_G2_NORMALIZED: f64 = 0.214;
pub const REFERENCE_VISIBILITY_G2: f64 = 0.160;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Interpretation {
    /// `g → 1 + δ + η² (g - 1)`; the identity at `δ = 0, η = 1`.
    FluctuationScaled,
    /// `g → 1 + δ + η² g`.
    Literal,
}

impl Interpretation {
    pub fn as_str(self) -> &'static str {
        match self {
            Interpretation::FluctuationScaled => "fluctuation_scaled",
            Interpretation::Literal => "literal",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "fluctuation_scaled" => Some(Interpretation::FluctuationScaled),
            "literal" => Some(Interpretation::Literal),
            _ => None,
        }
    }
}

impl fmt::Display for Interpretation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionModel {
    delta: f64,
    eta: f64,
    detector_width: f64,
    interpretation: Interpretation,
}

impl DetectionModel {
    pub fn new(delta: f64, eta: f64, detector_width: f64, interpretation: Interpretation) -> Result<Self> {
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(Error::invalid("eta", format!("must lie in (0, 1], got {eta}")));
        }
        if !(delta >= 0.0 && delta.is_finite()) {
            return Err(Error::invalid("delta", format!("must be non-negative, got {delta}")));
        }
        if !(detector_width >= 0.0 && detector_width.is_finite()) {
            return Err(Error::invalid(
                "detector_width",
                format!("must be non-negative, got {detector_width}"),
            ));
        }
        Ok(Self {
            delta,
            eta,
            detector_width,
            interpretation,
        })
    }

    /// Perfect point detectors and an ideal source.
    pub fn ideal() -> Self {
        Self {
            delta: 0.0,
            eta: 1.0,
            detector_width: 0.0,
            interpretation: Interpretation::FluctuationScaled,
        }
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn detector_width(&self) -> f64 {
        self.detector_width
    }

    pub fn interpretation(&self) -> Interpretation {
        self.interpretation
    }

    /// Maps one ideal `g2` value.
    pub fn modify(&self, g: f64) -> f64 {
        let eta2 = self.eta * self.eta;
        match self.interpretation {
            Interpretation::FluctuationScaled => 1.0 + self.delta + eta2 * (g - 1.0),
            Interpretation::Literal => 1.0 + self.delta + eta2 * g,
        }
    }

    /// Top-hat averaging (when `detector_width > 0`) followed by the
    /// `(δ, η)` correction.
    pub fn apply(&self, curve: &CorrelationCurve) -> Result<CorrelationCurve> {
        let averaged = finite_detector_average(curve, self.detector_width)?;
        apply_detection_model(&averaged, self)
    }
}

impl Default for DetectionModel {
    fn default() -> Self {
        Self {
            delta: REFERENCE_DELTA,
            eta: REFERENCE_ETA,
            detector_width: 0.0,
            interpretation: Interpretation::FluctuationScaled,
        }
    }
}

/// Applies the `(δ, η)` correction to a normalized `g2` curve. Standard
/// errors scale by `η²`.
pub fn apply_detection_model(curve: &CorrelationCurve, model: &DetectionModel) -> Result<CorrelationCurve> {
    if curve.kind() != CurveKind::G2Normalized {
        return Err(Error::WrongKind {
            found: curve.kind().as_str(),
            expected: "g2",
        });
    }
    let eta2 = model.eta * model.eta;
    curve.with_values(
        curve.values().iter().map(|&g| model.modify(g)).collect(),
        curve.stderr().map(|e| e.iter().map(|s| eta2 * s).collect()),
        CurveKind::G2Normalized,
    )
}

/// Multiplies a (modified) normalized curve by the product of mean
/// intensities, giving the joint-intensity curve it implies.
pub fn joint_from_normalized(normalized: &CorrelationCurve, marginal_product: &[f64]) -> Result<CorrelationCurve> {
    if normalized.kind() != CurveKind::G2Normalized {
        return Err(Error::WrongKind {
            found: normalized.kind().as_str(),
            expected: "g2",
        });
    }
    if marginal_product.len() != normalized.len() {
        return Err(Error::GridMismatch(format!(
            "{} marginal products for {} grid points",
            marginal_product.len(),
            normalized.len()
        )));
    }
    normalized.with_values(
        normalized
            .values()
            .iter()
            .zip(marginal_product)
            .map(|(g, m)| g * m)
            .collect(),
        normalized
            .stderr()
            .map(|e| e.iter().zip(marginal_product).map(|(s, m)| s * m).collect()),
        CurveKind::G2,
    )
}

/// Average of the piecewise-linear interpolant of `xs, v` over `[a, b]`
/// (clipped to the grid).
fn window_average(xs: &[f64], v: &[f64], a: f64, b: f64) -> f64 {
    let a = a.max(xs[0]);
    let b = b.min(xs[xs.len() - 1]);
    let start = xs.partition_point(|&x| x <= a).saturating_sub(1);
    let mut integral = 0.0;
    let mut k = start;
    while k + 1 < xs.len() && xs[k] < b {
        let (x0, x1) = (xs[k], xs[k + 1]);
        let lo = a.max(x0);
        let hi = b.min(x1);
        if hi > lo {
            let slope = (v[k + 1] - v[k]) / (x1 - x0);
            let f_lo = v[k] + slope * (lo - x0);
            let f_hi = v[k] + slope * (hi - x0);
            integral += 0.5 * (f_lo + f_hi) * (hi - lo);
        }
        k += 1;
    }
    integral / (b - a)
}

/// Convolves the curve with a unit-area top-hat of the given width along
/// the scan axis. Near the grid edges the kernel is truncated and
/// renormalized. Width zero is the identity.
pub fn finite_detector_average(curve: &CorrelationCurve, width: f64) -> Result<CorrelationCurve> {
    if !(width >= 0.0 && width.is_finite()) {
        return Err(Error::invalid(
            "detector_width",
            format!("must be non-negative, got {width}"),
        ));
    }
    if width == 0.0 {
        return Ok(curve.clone());
    }
    let span = curve.grid().span();
    if width >= span {
        return Err(Error::DetectorTooWide { width, span });
    }
    if curve.grid().uniform_step().is_none() {
        return Err(Error::invalid("grid", "finite detector averaging needs a uniform grid"));
    }
    let xs = curve.positions();
    let average = |v: &[f64]| -> Vec<f64> {
        xs.iter()
            .map(|&x| window_average(xs, v, x - 0.5 * width, x + 0.5 * width))
            .collect()
    };
    let values = average(curve.values());
    // errors of neighbouring points are correlated; averaging them linearly
    // gives a conservative bound
    let stderr = curve.stderr().map(average);
    curve.with_values(values, stderr, curve.kind())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VisibilityResult {
    pub v: f64,
    pub max: f64,
    pub min: f64,
    pub x_max: f64,
    pub x_min: f64,
    pub window: (f64, f64),
}

fn visibility_over(curve: &CorrelationCurve, lo: usize, hi: usize) -> VisibilityResult {
    let xs = curve.positions();
    let v = curve.values();
    let (mut imax, mut imin) = (lo, lo);
    for i in lo..=hi {
        if v[i] > v[imax] {
            imax = i;
        }
        if v[i] < v[imin] {
            imin = i;
        }
    }
    let (max, min) = (v[imax], v[imin]);
    VisibilityResult {
        v: (max - min) / (max + min),
        max,
        min,
        x_max: xs[imax],
        x_min: xs[imin],
        window: (xs[lo], xs[hi]),
    }
}

/// Fringe visibility `(max - min)/(max + min)`.
///
/// With `window = None` the window is the central fringe bounded by its two
/// nearest minima. An explicit window must contain at least three grid
/// points and an interior extremum.
pub fn visibility(curve: &CorrelationCurve, window: Option<(f64, f64)>) -> Result<VisibilityResult> {
    match window {
        None => {
            let (lo, hi) = fringes::central_window(curve, 0)?;
            Ok(visibility_over(curve, lo, hi))
        }
        Some((start, end)) => {
            let xs = curve.positions();
            let lo = xs.partition_point(|&x| x < start);
            let hi = xs.partition_point(|&x| x <= end);
            if hi < lo + 3 {
                return Err(Error::EmptyWindow { start, end });
            }
            let slice = &curve.values()[lo..hi];
            if fringes::is_flat(slice)
                || (fringes::find_peaks(slice).is_empty() && fringes::find_troughs(slice).is_empty())
            {
                return Err(Error::NoFringe);
            }
            Ok(visibility_over(curve, lo, hi - 1))
        }
    }
}

/// Visibility after the fluctuation-scaled correction, in closed form from
/// the ideal extremes `max`, `min`.
pub fn modified_visibility(max: f64, min: f64, delta: f64, eta: f64) -> f64 {
    let eta2 = eta * eta;
    eta2 * (max - min) / (2.0 * (1.0 + delta) + eta2 * (max + min - 2.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::correlation::ScanMode;
    use crate::model::ScanGrid;
    use approx::assert_relative_eq;
    use std::f64::consts::{PI, TAU};

    fn g2_curve(f: impl Fn(f64) -> f64, half: f64, n: usize) -> CorrelationCurve {
        let grid = ScanGrid::symmetric(half, n).unwrap();
        let values = grid.positions().iter().map(|&x| f(x)).collect();
        CorrelationCurve::new(grid, values, None, CurveKind::G2Normalized, ScanMode::Antisymmetric).unwrap()
    }

    #[test]
    fn identity_model_leaves_curve_unchanged() {
        let c = g2_curve(|x| 1.5 + 0.5 * x.cos(), 5.0, 51);
        let out = apply_detection_model(&c, &DetectionModel::ideal()).unwrap();
        assert_eq!(out.values(), c.values());
    }

    #[test]
    fn reference_parameters_on_extremes() {
        let m = DetectionModel::default();
        assert_relative_eq!(m.modify(2.0), 1.4756, max_relative = 1e-12);
        let literal = DetectionModel::new(0.04, 0.66, 0.0, Interpretation::Literal).unwrap();
        assert_relative_eq!(literal.modify(1.0), 1.4756, max_relative = 1e-12);
    }

    #[test]
    fn only_g2_curves_are_modified() {
        let grid = ScanGrid::symmetric(1.0, 5).unwrap();
        let c = CorrelationCurve::new(grid, vec![1.0; 5], None, CurveKind::G2, ScanMode::Antisymmetric).unwrap();
        assert!(matches!(
            apply_detection_model(&c, &DetectionModel::default()),
            Err(Error::WrongKind { .. })
        ));
    }

    #[test]
    fn parameter_validation() {
        assert!(DetectionModel::new(0.0, 0.0, 0.0, Interpretation::Literal).is_err());
        assert!(DetectionModel::new(0.0, 1.1, 0.0, Interpretation::Literal).is_err());
        assert!(DetectionModel::new(-0.1, 0.5, 0.0, Interpretation::Literal).is_err());
        assert!(DetectionModel::new(0.0, 0.5, -1.0, Interpretation::Literal).is_err());
        assert!(DetectionModel::new(0.0, 1.0, 0.0, Interpretation::Literal).is_ok());
    }

    #[test]
    fn zero_width_is_identity_and_constants_survive() {
        let c = g2_curve(|x| 1.5 + 0.5 * x.cos(), 5.0, 51);
        assert_eq!(finite_detector_average(&c, 0.0).unwrap(), c);
        let flat = g2_curve(|_| 1.7, 5.0, 51);
        let avg = finite_detector_average(&flat, 1.3).unwrap();
        for v in avg.values() {
            assert_relative_eq!(*v, 1.7, max_relative = 1e-14);
        }
    }

    #[test]
    fn top_hat_attenuates_cosine_fringes_by_sinc() {
        let period = 1.0;
        let c = g2_curve(|x| (PI * x / period).cos().powi(2), 10.0, 8001);
        let avg = finite_detector_average(&c, period / 2.0).unwrap();
        let v = visibility(&avg, Some((-3.0, 3.0))).unwrap();
        assert_relative_eq!(v.v, 2.0 / PI, max_relative = 1e-4);
    }

    #[test]
    fn too_wide_detector_is_rejected() {
        let c = g2_curve(|x| 1.0 + x * x, 1.0, 11);
        assert!(matches!(
            finite_detector_average(&c, 2.0),
            Err(Error::DetectorTooWide { .. })
        ));
    }

    #[test]
    fn coherent_fringe_has_unit_visibility() {
        let c = g2_curve(|x| (PI * x).cos().powi(2), 3.0, 301);
        let v = visibility(&c, None).unwrap();
        assert!((v.v - 1.0).abs() < 1e-12);
        assert_eq!(v.x_max, 0.0);
    }

    #[test]
    fn flat_curve_reports_no_fringe() {
        let c = g2_curve(|_| 2.0, 3.0, 31);
        assert!(matches!(visibility(&c, None), Err(Error::NoFringe)));
        assert!(matches!(visibility(&c, Some((-1.0, 1.0))), Err(Error::NoFringe)));
        assert!(matches!(
            visibility(&c, Some((0.01, 0.02))),
            Err(Error::EmptyWindow { .. })
        ));
    }

    #[test]
    fn closed_form_visibility_matches_pipeline() {
        let c = g2_curve(|x| 1.5 + 0.5 * (TAU * x / 1.7).cos(), 4.0, 401);
        let ideal = visibility(&c, None).unwrap();
        let m = DetectionModel::default();
        let modified = visibility(&apply_detection_model(&c, &m).unwrap(), None).unwrap();
        assert_relative_eq!(
            modified.v,
            modified_visibility(ideal.max, ideal.min, m.delta(), m.eta()),
            max_relative = 1e-12
        );
        assert_eq!(modified.x_max, ideal.x_max);
        assert_eq!(modified.x_min, ideal.x_min);
    }

    #[test]
    fn averaging_and_correction_commute() {
        let c = g2_curve(|x| 1.4 + 0.6 * (2.3 * x).cos().powi(2), 6.0, 241);
        let m = DetectionModel::default();
        let a = apply_detection_model(&finite_detector_average(&c, 0.8).unwrap(), &m).unwrap();
        let b = finite_detector_average(&apply_detection_model(&c, &m).unwrap(), 0.8).unwrap();
        for (x, y) in a.values().iter().zip(b.values()) {
            assert!((x - y).abs() <= 1e-12 * x.abs());
        }
    }

    #[test]
    fn joint_curve_from_normalized() {
        let c = g2_curve(|_| 2.0, 1.0, 3);
        let j = joint_from_normalized(&c, &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(j.values(), &[2.0, 4.0, 6.0]);
        assert_eq!(j.kind(), CurveKind::G2);
    }
}
