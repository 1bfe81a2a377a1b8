//! Figure presets and the report-producing runs behind the command-line
//! tool.

use std::fmt;
use std::path::{Path, PathBuf};

use crate::config::ExperimentConfig;
use crate::correlation::{CorrelationCurve, CurveKind, ScanMode, Source};
use crate::detection::{
    joint_from_normalized, visibility, DetectionModel, VisibilityResult, REFERENCE_VISIBILITY_G2,
    REFERENCE_VISIBILITY_G2_NORMALIZED,
};
use crate::error::{Error, Result};
use crate::model::ScanGrid;
use crate::output::{curve_to_csv, format_decimal, gnuplot_script, write_atomic, PlotEntry};
use crate::speckle::{compare_with_quadrature, ComparisonReport, EstimateCurve, MonteCarloConfig, Z_THRESHOLD};

pub const TOOL_VERSION: &str = concat!("subfringe ", env!("CARGO_PKG_VERSION"));

/// Bandwidth used by the broadband panels of the first figure.
pub const BROADBAND_NORMALIZED_BANDWIDTH: f64 = 10.0;

/// Fraction of grid points that must lie within the z threshold for a
/// validation run to pass.
pub const VALIDATION_PASS_FRACTION: f64 = 0.99;

const GRID_NOTE: &str =
    "note = the x range is the configured scan grid; figure axis extents are a tool default, not measured data";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Preset {
    Fig1a,
    Fig1b,
    Fig1c,
    Fig1d,
    Fig1e,
    Fig1f,
    Fig3a,
    Fig3b,
    Fig4a,
    Fig4b,
    Fig4c,
    Fig5a,
    Fig5b,
    Fig6,
}

impl Preset {
    pub const ALL: [Preset; 14] = [
        Preset::Fig1a,
        Preset::Fig1b,
        Preset::Fig1c,
        Preset::Fig1d,
        Preset::Fig1e,
        Preset::Fig1f,
        Preset::Fig3a,
        Preset::Fig3b,
        Preset::Fig4a,
        Preset::Fig4b,
        Preset::Fig4c,
        Preset::Fig5a,
        Preset::Fig5b,
        Preset::Fig6,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Preset::Fig1a => "fig1a",
            Preset::Fig1b => "fig1b",
            Preset::Fig1c => "fig1c",
            Preset::Fig1d => "fig1d",
            Preset::Fig1e => "fig1e",
            Preset::Fig1f => "fig1f",
            Preset::Fig3a => "fig3a",
            Preset::Fig3b => "fig3b",
            Preset::Fig4a => "fig4a",
            Preset::Fig4b => "fig4b",
            Preset::Fig4c => "fig4c",
            Preset::Fig5a => "fig5a",
            Preset::Fig5b => "fig5b",
            Preset::Fig6 => "fig6",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|p| p.id() == s)
            .ok_or_else(|| Error::UnknownPreset(s.to_string()))
    }

    pub fn description(self) -> &'static str {
        match self {
            Preset::Fig1a => "G2(x,-x), thermal source, wb/2pi = 10",
            Preset::Fig1b => "G2(x,-x), thermal source, wb/2pi = 0.52",
            Preset::Fig1c => "G2(x,-x), coherent source",
            Preset::Fig1d => "g2(x,-x), thermal source, wb/2pi = 10",
            Preset::Fig1e => "g2(x,-x), thermal source, wb/2pi = 0.52",
            Preset::Fig1f => "g2(x,-x), coherent source",
            Preset::Fig3a => "intensity G1(x,x), thermal source",
            Preset::Fig3b => "intensity G1(x,x), coherent source",
            Preset::Fig4a => "modified g2(x,-x), thermal source",
            Preset::Fig4b => "G2(x,-x) from modified g2, thermal source",
            Preset::Fig4c => "G2(x,-x), coherent source",
            Preset::Fig5a => "modified g2(x,x), thermal source",
            Preset::Fig5b => "G2(x,x), coherent source",
            Preset::Fig6 => "modified g2(x,0), thermal source",
        }
    }

    /// The curve this preset computes under `config`. The first figure's
    /// panels ignore the configured bandwidth and detection model.
    pub fn request(self, config: &ExperimentConfig) -> Result<CurveRequest> {
        use CurveKind::{G2Normalized, G1, G2};
        use ScanMode::{Antisymmetric, FixedZero, Intensity, Symmetric};
        use Source::{Coherent, Thermal};
        let detection = if config.apply_detection {
            Some(config.detection()?)
        } else {
            None
        };
        let nb = config.normalized_bandwidth;
        let (source, kind, mode, bandwidth, detection) = match self {
            Preset::Fig1a => (Thermal, G2, Antisymmetric, BROADBAND_NORMALIZED_BANDWIDTH, None),
            Preset::Fig1b => (Thermal, G2, Antisymmetric, 0.52, None),
            Preset::Fig1c => (Coherent, G2, Antisymmetric, nb, None),
            Preset::Fig1d => (
                Thermal,
                G2Normalized,
                Antisymmetric,
                BROADBAND_NORMALIZED_BANDWIDTH,
                None,
            ),
            Preset::Fig1e => (Thermal, G2Normalized, Antisymmetric, 0.52, None),
            Preset::Fig1f => (Coherent, G2Normalized, Antisymmetric, nb, None),
            Preset::Fig3a => (Thermal, G1, Intensity, nb, None),
            Preset::Fig3b => (Coherent, G1, Intensity, nb, None),
            Preset::Fig4a => (Thermal, G2Normalized, Antisymmetric, nb, detection),
            Preset::Fig4b => (Thermal, G2, Antisymmetric, nb, detection),
            Preset::Fig4c => (Coherent, G2, Antisymmetric, nb, None),
            Preset::Fig5a => (Thermal, G2Normalized, Symmetric, nb, detection),
            Preset::Fig5b => (Coherent, G2, Symmetric, nb, None),
            Preset::Fig6 => (Thermal, G2Normalized, FixedZero, nb, detection),
        };
        Ok(CurveRequest {
            source,
            kind,
            mode,
            normalized_bandwidth: bandwidth,
            detection,
        })
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

/// Everything needed to compute one curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveRequest {
    pub source: Source,
    pub kind: CurveKind,
    pub mode: ScanMode,
    pub normalized_bandwidth: f64,
    /// Applied to thermal `g2` and `G2` curves only.
    pub detection: Option<DetectionModel>,
}

impl CurveRequest {
    /// The scan described by the configuration's own `source`,
    /// `scan_mode` and `kind` keys.
    pub fn from_config(config: &ExperimentConfig) -> Result<Self> {
        Ok(Self {
            source: config.source,
            kind: config.curve_kind(),
            mode: config.scan_mode,
            normalized_bandwidth: config.normalized_bandwidth,
            detection: if config.apply_detection {
                Some(config.detection()?)
            } else {
                None
            },
        })
    }

    fn active_detection(&self) -> Option<&DetectionModel> {
        match (self.source, self.kind) {
            (Source::Thermal, CurveKind::G2 | CurveKind::G2Normalized) => self.detection.as_ref(),
            _ => None,
        }
    }

    fn describe(&self) -> Vec<String> {
        let mut lines = vec![
            format!("source = {}", self.source),
            format!("quantity = {}", self.kind),
            format!("scan = {}", self.mode),
            format!("curve_normalized_bandwidth = {}", self.normalized_bandwidth),
        ];
        match self.active_detection() {
            Some(d) => lines.push(format!(
                "detection = delta {} eta {} width {}m {}",
                d.delta(),
                d.eta(),
                d.detector_width(),
                d.interpretation()
            )),
            None => lines.push("detection = ideal".to_string()),
        }
        lines
    }
}

/// Quadrature evaluation of a request on `grid`.
pub fn evaluate(config: &ExperimentConfig, request: &CurveRequest, grid: &ScanGrid) -> Result<CorrelationCurve> {
    let ifm = config.interferometer_for(request.normalized_bandwidth)?;
    let (kind, mode) = (request.kind, request.mode);
    mode.check_kind(kind)?;
    let Some(model) = request.active_detection() else {
        return ifm.scan(grid, kind, mode, request.source);
    };
    let g2 = model.apply(&ifm.scan(grid, CurveKind::G2Normalized, mode, Source::Thermal)?)?;
    if kind == CurveKind::G2Normalized {
        return Ok(g2);
    }
    let a = config.amplitude;
    let product: Vec<f64> = grid
        .positions()
        .iter()
        .map(|&x| {
            let m = ifm.moments(x, mode.partner(x));
            (a * m.first) * (a * m.second)
        })
        .collect();
    joint_from_normalized(&g2, &product)
}

/// Monte-Carlo evaluation of a request on `grid`.
pub fn evaluate_monte_carlo(
    config: &ExperimentConfig,
    request: &CurveRequest,
    grid: &ScanGrid,
    mc: &MonteCarloConfig,
) -> Result<CorrelationCurve> {
    let (kind, mode) = (request.kind, request.mode);
    mode.check_kind(kind)?;
    let ensemble = config.ensemble_for(request.normalized_bandwidth)?;
    let moments = ensemble.run(grid, mode, request.source, mc)?;
    let a = config.amplitude;
    let Some(model) = request.active_detection() else {
        return moments.curve(kind, mc.error_method, a)?.to_curve();
    };
    let g2 = moments.curve(CurveKind::G2Normalized, mc.error_method, a)?;
    if kind == CurveKind::G2Normalized {
        return model.apply(&g2.to_curve()?);
    }
    if model.detector_width() == 0.0 {
        let (values, stderr) = moments.statistic(mc.error_method, |m1, m2, j| {
            a * a * model.modify(j / (m1 * m2)) * m1 * m2
        });
        return CorrelationCurve::new(grid.clone(), values, Some(stderr), CurveKind::G2, mode);
    }
    let o = moments.overall();
    let product: Vec<f64> = o.first.iter().zip(&o.second).map(|(m1, m2)| a * a * m1 * m2).collect();
    joint_from_normalized(&model.apply(&g2.to_curve()?)?, &product)
}

/// A rendered preset.
#[derive(Debug, Clone, PartialEq)]
pub struct FigureOutput {
    pub preset: Preset,
    pub request: CurveRequest,
    pub curve: CorrelationCurve,
    /// Divisor applied to `G1`/`G2` curves: the quadrature value at the
    /// grid point nearest `x = 0`.
    pub normalization: Option<f64>,
    /// Settings of a Monte-Carlo render.
    pub monte_carlo: Option<MonteCarloConfig>,
}

impl FigureOutput {
    pub fn file_name(&self) -> String {
        match self.monte_carlo {
            Some(_) => format!("{}_mc.csv", self.preset.id()),
            None => format!("{}.csv", self.preset.id()),
        }
    }

    pub fn ylabel(&self) -> String {
        match (self.curve.kind(), self.normalization) {
            (kind, Some(_)) => format!("{kind} / {kind}(0)"),
            (kind, None) => kind.to_string(),
        }
    }

    pub fn to_csv(&self, config: &ExperimentConfig) -> String {
        let mut header = vec![
            TOOL_VERSION.to_string(),
            format!("preset = {}", self.preset.id()),
            format!("description = {}", self.preset.description()),
        ];
        header.extend(self.request.describe());
        match self.normalization {
            Some(n) => header.push(format!("normalized_by = {}", format_decimal(n, 17))),
            None => header.push("normalized_by = none".to_string()),
        }
        header.extend(mc_header(self.monte_carlo.as_ref()));
        header.push(GRID_NOTE.to_string());
        header.extend(config_header(config));
        curve_to_csv(&self.curve, &header)
    }
}

fn mc_header(mc: Option<&MonteCarloConfig>) -> Vec<String> {
    match mc {
        None => vec!["method = quadrature".to_string()],
        Some(mc) => {
            let mut lines = vec![
                "method = monte_carlo".to_string(),
                format!("seed = {}", mc.seed),
                format!("realizations = {}", mc.n_realizations),
                format!("batches = {}", mc.batches),
                format!("error_method = {}", mc.error_method.as_str()),
            ];
            if let Some(m) = &mc.modes {
                lines.push(format!("modes = {}", m.n_modes()));
            }
            lines
        }
    }
}

fn config_header(config: &ExperimentConfig) -> Vec<String> {
    let mut lines = vec![String::new(), "configuration:".to_string()];
    lines.extend(config.to_key_values().into_iter().map(|(k, v)| format!("{k} = {v}")));
    lines.push(String::new());
    lines
}

fn center_value(curve: &CorrelationCurve) -> Result<f64> {
    let i = curve.grid().nearest_index(0.0);
    let v = curve.values()[i];
    if v.is_normal() && v > 0.0 {
        Ok(v)
    } else {
        Err(Error::DegenerateDenominator {
            x: curve.positions()[i],
            value: v,
        })
    }
}

/// Computes a preset with the quadrature model.
pub fn render_figure(preset: Preset, config: &ExperimentConfig) -> Result<FigureOutput> {
    let request = preset.request(config)?;
    let grid = config.grid()?;
    let curve = evaluate(config, &request, &grid)?;
    let (curve, normalization) = match curve.kind() {
        CurveKind::G2Normalized => (curve, None),
        _ => {
            let n = center_value(&curve)?;
            (curve.scaled(n)?, Some(n))
        }
    };
    Ok(FigureOutput {
        preset,
        request,
        curve,
        normalization,
        monte_carlo: None,
    })
}

/// Computes a preset from the speckle ensemble. `G` curves are divided by
/// the same quadrature constant as their quadrature counterparts so the two
/// renders are directly comparable.
pub fn render_figure_monte_carlo(
    preset: Preset,
    config: &ExperimentConfig,
    mc: &MonteCarloConfig,
) -> Result<FigureOutput> {
    let request = preset.request(config)?;
    let grid = config.grid()?;
    let curve = evaluate_monte_carlo(config, &request, &grid, mc)?;
    let (curve, normalization) = match curve.kind() {
        CurveKind::G2Normalized => (curve, None),
        _ => {
            let n = center_value(&evaluate(config, &request, &grid)?)?;
            (curve.scaled(n)?, Some(n))
        }
    };
    Ok(FigureOutput {
        preset,
        request,
        curve,
        normalization,
        monte_carlo: Some(mc.clone()),
    })
}

/// Renders a preset and writes its CSV (and optionally a gnuplot script)
/// into `out_dir`. Returns the written paths.
pub fn run_figure(
    preset: Preset,
    config: &ExperimentConfig,
    out_dir: &Path,
    mc: Option<&MonteCarloConfig>,
    emit_plotscript: bool,
) -> Result<Vec<PathBuf>> {
    let figure = match mc {
        Some(mc) => render_figure_monte_carlo(preset, config, mc)?,
        None => render_figure(preset, config)?,
    };
    let csv_path = out_dir.join(figure.file_name());
    write_atomic(&csv_path, figure.to_csv(config).as_bytes())?;
    let mut written = vec![csv_path];
    if emit_plotscript {
        let script = gnuplot_script(&[PlotEntry {
            csv_file: figure.file_name(),
            title: format!("{}: {}", preset.id(), preset.description()),
            ylabel: figure.ylabel(),
        }]);
        let path = out_dir.join(format!("{}.gp", figure.file_name().trim_end_matches(".csv")));
        write_atomic(&path, script.as_bytes())?;
        written.push(path);
    }
    Ok(written)
}

/// The configured scan, unnormalized, as CSV text.
pub fn run_scan(config: &ExperimentConfig, mc: Option<&MonteCarloConfig>) -> Result<String> {
    let request = CurveRequest::from_config(config)?;
    let grid = config.grid()?;
    let curve = match mc {
        Some(mc) => evaluate_monte_carlo(config, &request, &grid, mc)?,
        None => evaluate(config, &request, &grid)?,
    };
    let mut header = vec![TOOL_VERSION.to_string(), "preset = none".to_string()];
    header.extend(request.describe());
    if curve.kind() != CurveKind::G2Normalized {
        header.push("normalized_by = none (absolute scale depends on the amplitude constant)".to_string());
    }
    header.extend(mc_header(mc));
    header.push(GRID_NOTE.to_string());
    header.extend(config_header(config));
    Ok(curve_to_csv(&curve, &header))
}

/// Outcome of a Monte-Carlo versus quadrature comparison.
#[derive(Debug, Clone)]
pub struct ValidationOutcome {
    pub estimate: EstimateCurve,
    pub reference: CorrelationCurve,
    pub report: ComparisonReport,
    pub passed: bool,
}

impl ValidationOutcome {
    pub fn summary(&self) -> String {
        let r = &self.report;
        let worst = r.argmax_abs_z();
        format!(
            "quantity: {} ({} scan), {} grid points\n\
             realizations: {}, seed: {}\n\
             median standard error: {:.3e}\n\
             points within {} sigma: {:.2}% (required {:.0}%)\n\
             max |z|: {:.3} at x = {:.4e} m\n\
             result: {}\n",
            self.estimate.kind,
            self.estimate.mode,
            r.positions.len(),
            self.estimate.n_realizations,
            self.estimate.seed,
            self.estimate.median_stderr(),
            Z_THRESHOLD,
            100.0 * r.fraction_within,
            100.0 * VALIDATION_PASS_FRACTION,
            r.max_abs_z,
            r.positions[worst],
            if self.passed { "PASS" } else { "FAIL" },
        )
    }

    /// Per-point z-scores as CSV (`value` is z).
    pub fn to_csv(&self, config: &ExperimentConfig) -> Result<String> {
        let z = CorrelationCurve::new(
            self.estimate.grid.clone(),
            self.report.z.iter().map(|z| z.abs()).collect(),
            None,
            self.estimate.kind,
            self.estimate.mode,
        )?;
        let mut header = vec![
            TOOL_VERSION.to_string(),
            "quantity = |z| of Monte-Carlo estimate against quadrature".to_string(),
            format!("compared = {} ({} scan)", self.estimate.kind, self.estimate.mode),
            format!("max_abs_z = {}", self.report.max_abs_z),
            format!("fraction_within = {}", self.report.fraction_within),
            format!("passed = {}", self.passed),
            format!("seed = {}", self.estimate.seed),
            format!("realizations = {}", self.estimate.n_realizations),
        ];
        header.extend(config_header(config));
        Ok(curve_to_csv(&z, &header))
    }
}

/// Runs the configured ideal scan through both routes and compares them.
pub fn run_validation(config: &ExperimentConfig, threads: Option<usize>) -> Result<ValidationOutcome> {
    let mc = config.monte_carlo(threads)?;
    let grid = config.grid()?;
    let kind = config.curve_kind();
    let reference = config
        .interferometer()?
        .scan(&grid, kind, config.scan_mode, config.source)?;
    let estimate = config.ensemble_for(config.normalized_bandwidth)?.estimate(
        &grid,
        kind,
        config.scan_mode,
        config.source,
        &mc,
    )?;
    validate_estimate(estimate, reference)
}

/// Compares an existing estimate with a reference curve.
pub fn validate_estimate(estimate: EstimateCurve, reference: CorrelationCurve) -> Result<ValidationOutcome> {
    let report = compare_with_quadrature(&estimate, &reference)?;
    let passed = report.passes(VALIDATION_PASS_FRACTION);
    Ok(ValidationOutcome {
        estimate,
        reference,
        report,
        passed,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct VisibilityReport {
    pub request: CurveRequest,
    pub result: VisibilityResult,
    /// Measured value reported for the reference experiment, when the
    /// configuration reproduces it.
    pub reference: Option<f64>,
}

impl fmt::Display for VisibilityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r = &self.result;
        writeln!(
            f,
            "curve: {} ({} scan, {} source)",
            self.request.kind, self.request.mode, self.request.source
        )?;
        writeln!(f, "visibility: {:.3}", r.v)?;
        writeln!(f, "maximum: {:.6e} at x = {:.4e} m", r.max, r.x_max)?;
        writeln!(f, "minimum: {:.6e} at x = {:.4e} m", r.min, r.x_min)?;
        writeln!(f, "window: [{:.4e}, {:.4e}] m", r.window.0, r.window.1)?;
        if let Some(target) = self.reference {
            writeln!(f, "reference (measured): {target:.3}")?;
        }
        Ok(())
    }
}

/// Central-fringe visibility of the configured scan.
pub fn run_visibility(config: &ExperimentConfig) -> Result<VisibilityReport> {
    let request = CurveRequest::from_config(config)?;
    let curve = evaluate(config, &request, &config.grid()?)?;
    let result = visibility(&curve, None)?;
    let reproduces_experiment = config.matches_reference_defaults()
        && request.source == Source::Thermal
        && request.mode == ScanMode::Antisymmetric
        && request.active_detection().is_some();
    let reference = match (reproduces_experiment, request.kind) {
        (true, CurveKind::G2Normalized) => Some(REFERENCE_VISIBILITY_G2_NORMALIZED),
        (true, CurveKind::G2) => Some(REFERENCE_VISIBILITY_G2),
        _ => None,
    };
    Ok(VisibilityReport {
        request,
        result,
        reference,
    })
}
