//! Far-field correlation patterns of light behind a double slit.
//!
//! The crate computes first- and second-order correlation functions
//! (`G1`, `G2` and normalized `g2`) of thermal-like (Gaussian speckle) and
//! coherent illumination in two independent ways:
//!
//! * [`correlation::Interferometer`] evaluates the overlap integrals over
//!   the transverse wave-vector spectrum by composite Simpson quadrature;
//! * [`speckle::SpeckleEnsemble`] draws random speckle fields mode by mode
//!   and averages intensity products over many realizations.
//!
//! On top sit a detection model with finite efficiency and accidental
//! background ([`detection`]), fringe analysis ([`fringes`]), a flat
//! configuration format ([`config`]), CSV output ([`output`]) and named
//! figure presets ([`presets`]).
//!
//! ```
//! use subfringe::{ExperimentConfig, Preset, render_figure};
//!
//! let config = ExperimentConfig::default();
//! let figure = render_figure(Preset::Fig1f, &config).unwrap();
//! // coherent light: g2 is exactly one everywhere
//! assert!(figure.curve.values().iter().all(|&g| g == 1.0));
//! ```

pub mod config;
pub mod correlation;
pub mod detection;
pub mod error;
pub mod fringes;
pub mod model;
pub mod output;
pub mod presets;
pub mod quadrature;
pub mod speckle;

pub use config::ExperimentConfig;
pub use correlation::{CorrelationCurve, CurveKind, Interferometer, PairMoments, ScanMode, Source};
pub use detection::{visibility, DetectionModel, Interpretation, VisibilityResult};
pub use error::{Error, Result};
pub use model::{DoubleSlit, GaussianSpectrum, OpticalSetup, ScanGrid};
pub use presets::{render_figure, render_figure_monte_carlo, run_figure, Preset};
pub use quadrature::QuadratureConfig;
pub use speckle::{
    compare_with_quadrature, ComparisonReport, ErrorMethod, EstimateCurve, ModeGrid, MonteCarloConfig, SpeckleEnsemble,
};
