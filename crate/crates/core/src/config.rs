//! Flat `key = value` experiment configuration.
//!
//! One pair per line, `#` starts a comment, blank lines are ignored. Every
//! key is optional; omitted keys take the reference-experiment values.
//! Lengths accept the suffixes `nm`, `um`/`µm`, `mm` and `m` (a bare number
//! is meters).
//!
//! | key | meaning | default |
//! |-----|---------|---------|
//! | `slit_width` | slit width `b` | `55um` |
//! | `slit_separation` | center-to-center separation `d` | `100um` |
//! | `wavelength` | `λ` | `632.8nm` |
//! | `distance` | slit-to-detector distance `z` | `550mm` |
//! | `amplitude` | overall constant `A` | `1` |
//! | `normalized_bandwidth` | `w b / 2π` | `0.52` |
//! | `source` | `thermal` or `coherent` | `thermal` |
//! | `scan_mode` | `intensity`, `antisymmetric`, `symmetric`, `fixed_zero` | `antisymmetric` |
//! | `kind` | `G1`, `G2` or `g2` | `G1` for intensity scans, else `g2` |
//! | `grid_half_range` | scan covers `±grid_half_range` | `5.5mm` |
//! | `grid_points` | number of scan positions | `221` |
//! | `apply_detection` | apply the detection model to thermal `G2`/`g2` | `true` |
//! | `delta`, `eta` | detection offset and efficiency | `0.04`, `0.66` |
//! | `detector_width` | top-hat aperture width (0 = point detector) | `0` |
//! | `interpretation` | `fluctuation_scaled` or `literal` | `fluctuation_scaled` |
//! | `quad_points`, `quad_half_range` | quadrature overrides (rad/m) | automatic |
//! | `mc_realizations` | enables the Monte-Carlo section | absent |
//! | `mc_seed`, `mc_modes`, `mc_batches`, `mc_error` | Monte-Carlo settings | `0x5eed2004`, automatic, `32`, `batch_means` |

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use crate::correlation::{CurveKind, Interferometer, ScanMode, Source};
use crate::detection::{DetectionModel, Interpretation, REFERENCE_DELTA, REFERENCE_ETA};
use crate::error::{Error, Result};
use crate::model::{
    DoubleSlit, GaussianSpectrum, OpticalSetup, ScanGrid, REFERENCE_DISTANCE, REFERENCE_NORMALIZED_BANDWIDTH,
    REFERENCE_SLIT_SEPARATION, REFERENCE_SLIT_WIDTH, REFERENCE_WAVELENGTH,
};
use crate::quadrature::QuadratureConfig;
use crate::speckle::{ErrorMethod, ModeGrid, MonteCarloConfig, SpeckleEnsemble, DEFAULT_BATCHES, DEFAULT_SEED};

pub const DEFAULT_GRID_HALF_RANGE: f64 = 5.5e-3;
pub const DEFAULT_GRID_POINTS: usize = 221;

pub const KEYS: &[&str] = &[
    "slit_width",
    "slit_separation",
    "wavelength",
    "distance",
    "amplitude",
    "normalized_bandwidth",
    "source",
    "scan_mode",
    "kind",
    "grid_half_range",
    "grid_points",
    "apply_detection",
    "delta",
    "eta",
    "detector_width",
    "interpretation",
    "quad_points",
    "quad_half_range",
    "mc_realizations",
    "mc_seed",
    "mc_modes",
    "mc_batches",
    "mc_error",
];

#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloSection {
    pub realizations: usize,
    pub seed: u64,
    pub modes: Option<usize>,
    pub batches: usize,
    pub error_method: ErrorMethod,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub slit_width: f64,
    pub slit_separation: f64,
    pub wavelength: f64,
    pub distance: f64,
    pub amplitude: f64,
    pub normalized_bandwidth: f64,
    pub source: Source,
    pub scan_mode: ScanMode,
    pub kind: Option<CurveKind>,
    pub grid_half_range: f64,
    pub grid_points: usize,
    pub apply_detection: bool,
    pub delta: f64,
    pub eta: f64,
    pub detector_width: f64,
    pub interpretation: Interpretation,
    pub quad_points: Option<usize>,
    pub quad_half_range: Option<f64>,
    pub mc: Option<MonteCarloSection>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            slit_width: REFERENCE_SLIT_WIDTH,
            slit_separation: REFERENCE_SLIT_SEPARATION,
            wavelength: REFERENCE_WAVELENGTH,
            distance: REFERENCE_DISTANCE,
            amplitude: 1.0,
            normalized_bandwidth: REFERENCE_NORMALIZED_BANDWIDTH,
            source: Source::Thermal,
            scan_mode: ScanMode::Antisymmetric,
            kind: None,
            grid_half_range: DEFAULT_GRID_HALF_RANGE,
            grid_points: DEFAULT_GRID_POINTS,
            apply_detection: true,
            delta: REFERENCE_DELTA,
            eta: REFERENCE_ETA,
            detector_width: 0.0,
            interpretation: Interpretation::FluctuationScaled,
            quad_points: None,
            quad_half_range: None,
            mc: None,
        }
    }
}

/// Parses a length with an optional unit suffix into meters.
///
/// The suffix is folded into the decimal exponent before parsing, so
/// `55um` and `5.5e-5` give the same `f64`.
pub fn parse_length(text: &str) -> Option<f64> {
    let t = text.trim();
    const UNITS: &[(&str, i32)] = &[("nm", -9), ("um", -6), ("µm", -6), ("μm", -6), ("mm", -3), ("m", 0)];
    let (number, exponent) = UNITS
        .iter()
        .find_map(|(suffix, e)| t.strip_suffix(suffix).map(|n| (n.trim(), *e)))
        .unwrap_or((t, 0));
    if number.is_empty() {
        return None;
    }
    if number.contains(['e', 'E']) {
        return number.parse::<f64>().ok().map(|v| v * 10f64.powi(exponent));
    }
    format!("{number}e{exponent}").parse().ok()
}

fn parse_error(path: Option<&Path>, line: usize, message: String) -> Error {
    Error::Parse {
        path: path.map(Path::to_path_buf),
        line,
        message,
    }
}

impl ExperimentConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)?;
        Self::parse_with_path(&text, Some(path))
    }

    pub fn parse(text: &str) -> Result<Self> {
        Self::parse_with_path(text, None)
    }

    fn parse_with_path(text: &str, path: Option<&Path>) -> Result<Self> {
        let mut cfg = Self::default();
        let mut seen = HashSet::new();
        let mut mc_realizations = None;
        let mut mc_seed = None;
        let mut mc_modes = None;
        let mut mc_batches = None;
        let mut mc_error = None;

        for (index, raw) in text.lines().enumerate() {
            let line = index + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| parse_error(path, line, format!("expected `key = value`, found `{content}`")))?;
            let (key, value) = (key.trim(), value.trim());
            if !KEYS.contains(&key) {
                return Err(Error::UnknownKey {
                    key: key.to_string(),
                    line,
                });
            }
            if !seen.insert(key.to_string()) {
                return Err(parse_error(path, line, format!("duplicate key `{key}`")));
            }
            let bad = |what: &str| parse_error(path, line, format!("`{key}`: expected {what}, found `{value}`"));
            let length = || parse_length(value).ok_or_else(|| bad("a length such as 55um or 0.55m"));
            let number = || value.parse::<f64>().map_err(|_| bad("a number"));
            let count = || value.parse::<usize>().map_err(|_| bad("a non-negative integer"));

            match key {
                "slit_width" => cfg.slit_width = length()?,
                "slit_separation" => cfg.slit_separation = length()?,
                "wavelength" => cfg.wavelength = length()?,
                "distance" => cfg.distance = length()?,
                "amplitude" => cfg.amplitude = number()?,
                "normalized_bandwidth" => cfg.normalized_bandwidth = number()?,
                "source" => cfg.source = Source::parse(value).ok_or_else(|| bad("`thermal` or `coherent`"))?,
                "scan_mode" => {
                    cfg.scan_mode = ScanMode::parse(value)
                        .ok_or_else(|| bad("`intensity`, `antisymmetric`, `symmetric` or `fixed_zero`"))?
                }
                "kind" => cfg.kind = Some(CurveKind::parse(value).ok_or_else(|| bad("`G1`, `G2` or `g2`"))?),
                "grid_half_range" => cfg.grid_half_range = length()?,
                "grid_points" => cfg.grid_points = count()?,
                "apply_detection" => {
                    cfg.apply_detection = value.parse::<bool>().map_err(|_| bad("`true` or `false`"))?
                }
                "delta" => cfg.delta = number()?,
                "eta" => cfg.eta = number()?,
                "detector_width" => cfg.detector_width = length()?,
                "interpretation" => {
                    cfg.interpretation =
                        Interpretation::parse(value).ok_or_else(|| bad("`fluctuation_scaled` or `literal`"))?
                }
                "quad_points" => cfg.quad_points = Some(count()?),
                "quad_half_range" => cfg.quad_half_range = Some(number()?),
                "mc_realizations" => mc_realizations = Some(count()?),
                "mc_seed" => {
                    let parsed = match value.strip_prefix("0x") {
                        Some(hex) => u64::from_str_radix(&hex.replace('_', ""), 16).ok(),
                        None => value.replace('_', "").parse().ok(),
                    };
                    mc_seed = Some(parsed.ok_or_else(|| bad("a 64-bit unsigned integer"))?);
                }
                "mc_modes" => mc_modes = Some(count()?),
                "mc_batches" => mc_batches = Some(count()?),
                "mc_error" => {
                    mc_error = Some(ErrorMethod::parse(value).ok_or_else(|| bad("`batch_means` or `jackknife`"))?)
                }
                _ => unreachable!("key list and match arms out of sync"),
            }
        }

        match mc_realizations {
            Some(realizations) => {
                cfg.mc = Some(MonteCarloSection {
                    realizations,
                    seed: mc_seed.unwrap_or(DEFAULT_SEED),
                    modes: mc_modes,
                    batches: mc_batches.unwrap_or(DEFAULT_BATCHES),
                    error_method: mc_error.unwrap_or(ErrorMethod::BatchMeans),
                })
            }
            None if mc_seed.is_some() || mc_modes.is_some() || mc_batches.is_some() || mc_error.is_some() => {
                return Err(Error::invalid(
                    "mc_realizations",
                    "Monte-Carlo settings were given without `mc_realizations`",
                ))
            }
            None => {}
        }

        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks every parameter invariant by building the model objects.
    pub fn validate(&self) -> Result<()> {
        self.interferometer()?;
        self.grid()?;
        self.detection()?;
        self.scan_mode.check_kind(self.curve_kind())?;
        if let Some(mc) = &self.mc {
            self.monte_carlo(None)?;
            if mc.realizations < 2 {
                return Err(Error::invalid("mc_realizations", "at least 2 realizations are needed"));
            }
            if mc.batches < 2 {
                return Err(Error::invalid("mc_batches", "at least 2 batches are needed"));
            }
        }
        Ok(())
    }

    pub fn curve_kind(&self) -> CurveKind {
        self.kind.unwrap_or(match self.scan_mode {
            ScanMode::Intensity => CurveKind::G1,
            _ => CurveKind::G2Normalized,
        })
    }

    pub fn setup(&self) -> Result<OpticalSetup> {
        OpticalSetup::new(self.wavelength, self.distance, self.amplitude)
    }

    pub fn slit(&self) -> Result<DoubleSlit> {
        DoubleSlit::new(self.slit_width, self.slit_separation)
    }

    pub fn spectrum_for(&self, normalized_bandwidth: f64) -> Result<GaussianSpectrum> {
        GaussianSpectrum::from_normalized(normalized_bandwidth, &self.slit()?)
    }

    pub fn spectrum(&self) -> Result<GaussianSpectrum> {
        self.spectrum_for(self.normalized_bandwidth)
    }

    pub fn quadrature_for(&self, spectrum: &GaussianSpectrum) -> Result<QuadratureConfig> {
        let slit = self.slit()?;
        let default = QuadratureConfig::for_model(&slit, spectrum);
        match (self.quad_half_range, self.quad_points) {
            (None, None) => Ok(default),
            (half, points) => QuadratureConfig::new(
                half.unwrap_or(default.q_half_range()),
                points.unwrap_or(default.n_points()),
            ),
        }
    }

    /// Quadrature model at an explicit normalized bandwidth.
    pub fn interferometer_for(&self, normalized_bandwidth: f64) -> Result<Interferometer> {
        let spectrum = self.spectrum_for(normalized_bandwidth)?;
        let quadrature = self.quadrature_for(&spectrum)?;
        Interferometer::new(self.setup()?, self.slit()?, spectrum, quadrature)
    }

    pub fn interferometer(&self) -> Result<Interferometer> {
        self.interferometer_for(self.normalized_bandwidth)
    }

    pub fn ensemble_for(&self, normalized_bandwidth: f64) -> Result<SpeckleEnsemble> {
        Ok(SpeckleEnsemble::new(
            self.setup()?,
            self.slit()?,
            self.spectrum_for(normalized_bandwidth)?,
        ))
    }

    pub fn grid(&self) -> Result<ScanGrid> {
        ScanGrid::symmetric(self.grid_half_range, self.grid_points)
    }

    pub fn detection(&self) -> Result<DetectionModel> {
        DetectionModel::new(self.delta, self.eta, self.detector_width, self.interpretation)
    }

    /// Monte-Carlo settings from the `mc_*` keys; `threads` is a run-time
    /// choice and does not affect results.
    pub fn monte_carlo(&self, threads: Option<usize>) -> Result<MonteCarloConfig> {
        let mc = self
            .mc
            .as_ref()
            .ok_or_else(|| Error::invalid("mc_realizations", "the configuration has no Monte-Carlo section"))?;
        let modes = match mc.modes {
            Some(n) => Some(ModeGrid::new(8.0 * self.spectrum()?.bandwidth(), n)?),
            None => None,
        };
        Ok(MonteCarloConfig {
            n_realizations: mc.realizations,
            seed: mc.seed,
            modes,
            batches: mc.batches,
            threads,
            error_method: mc.error_method,
        })
    }

    /// Canonical `(key, value)` listing; parsing the rendered lines gives
    /// back the same configuration.
    pub fn to_key_values(&self) -> Vec<(&'static str, String)> {
        let mut kv = vec![
            ("slit_width", format!("{}m", self.slit_width)),
            ("slit_separation", format!("{}m", self.slit_separation)),
            ("wavelength", format!("{}m", self.wavelength)),
            ("distance", format!("{}m", self.distance)),
            ("amplitude", format!("{}", self.amplitude)),
            ("normalized_bandwidth", format!("{}", self.normalized_bandwidth)),
            ("source", self.source.as_str().to_string()),
            ("scan_mode", self.scan_mode.as_str().to_string()),
            ("kind", self.curve_kind().as_str().to_string()),
            ("grid_half_range", format!("{}m", self.grid_half_range)),
            ("grid_points", self.grid_points.to_string()),
            ("apply_detection", self.apply_detection.to_string()),
            ("delta", format!("{}", self.delta)),
            ("eta", format!("{}", self.eta)),
            ("detector_width", format!("{}m", self.detector_width)),
            ("interpretation", self.interpretation.as_str().to_string()),
        ];
        if let Some(p) = self.quad_points {
            kv.push(("quad_points", p.to_string()));
        }
        if let Some(h) = self.quad_half_range {
            kv.push(("quad_half_range", format!("{h}")));
        }
        if let Some(mc) = &self.mc {
            kv.push(("mc_realizations", mc.realizations.to_string()));
            kv.push(("mc_seed", mc.seed.to_string()));
            if let Some(m) = mc.modes {
                kv.push(("mc_modes", m.to_string()));
            }
            kv.push(("mc_batches", mc.batches.to_string()));
            kv.push(("mc_error", mc.error_method.as_str().to_string()));
        }
        kv
    }

    pub fn render(&self) -> String {
        self.to_key_values()
            .into_iter()
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }

    /// True when geometry, bandwidth and detection parameters are the
    /// reference-experiment values.
    pub fn matches_reference_defaults(&self) -> bool {
        let d = Self::default();
        self.slit_width == d.slit_width
            && self.slit_separation == d.slit_separation
            && self.wavelength == d.wavelength
            && self.distance == d.distance
            && self.normalized_bandwidth == d.normalized_bandwidth
            && self.delta == d.delta
            && self.eta == d.eta
            && self.detector_width == d.detector_width
            && self.interpretation == d.interpretation
    }
}

/// Resolves an optional config path to a configuration.
pub fn load_or_default(path: Option<&PathBuf>) -> Result<ExperimentConfig> {
    match path {
        Some(p) => ExperimentConfig::load(p),
        None => Ok(ExperimentConfig::default()),
    }
}
