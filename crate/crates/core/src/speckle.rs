//! Monte-Carlo speckle ensembles.
//!
//! Each realization draws a chaotic field: independent circular complex
//! Gaussian amplitudes `E(q_j)` with `Var E(q_j) = S(q_j) Δq` on a uniform
//! mode grid. The detected field is `U(x) = Σ_j T(kx/z - q_j) E(q_j)` and
//! the intensity is `|U(x)|²`. Ensemble means of `I(x1)`, `I(x2)` and
//! `I(x1) I(x2)` estimate `G1` and `G2` without using the Gaussian moment
//! theorem, so they serve as an independent check on the quadrature route.
//!
//! Realization `r` always uses ChaCha8 stream `r` of the configured seed, and
//! realizations are grouped into a fixed number of contiguous batches that
//! are reduced in batch order. The result is therefore bit-identical for any
//! thread count.

use std::collections::HashMap;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::correlation::{CorrelationCurve, CurveKind, ScanMode, Source};
use crate::error::{Error, Result};
use crate::model::{DoubleSlit, GaussianSpectrum, OpticalSetup, ScanGrid};
use crate::quadrature::{odd_point_count, resolution_limit, symmetric_nodes, SPECTRUM_SUPPORT_SIGMAS};

pub const DEFAULT_MODES: usize = 257;
pub const DEFAULT_BATCHES: usize = 32;
pub const DEFAULT_SEED: u64 = 0x5eed_2004;

/// Threshold on `|z|` used by the oracle comparison.
pub const Z_THRESHOLD: f64 = 3.0;

/// Uniform spatial-frequency grid carrying the field modes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeGrid {
    half_range: f64,
    n_modes: usize,
}

impl ModeGrid {
    pub fn new(half_range: f64, n_modes: usize) -> Result<Self> {
        if !(half_range.is_finite() && half_range > 0.0) {
            return Err(Error::invalid(
                "mc_half_range",
                format!("must be positive, got {half_range}"),
            ));
        }
        if n_modes < 3 || n_modes.is_multiple_of(2) {
            return Err(Error::invalid(
                "mc_modes",
                format!("must be odd and at least 3, got {n_modes}"),
            ));
        }
        Ok(Self { half_range, n_modes })
    }

    /// `±8w` with at least [`DEFAULT_MODES`] modes, more when the
    /// interference period needs them.
    pub fn for_model(slit: &DoubleSlit, spectrum: &GaussianSpectrum) -> Self {
        let half_range = SPECTRUM_SUPPORT_SIGMAS * spectrum.bandwidth();
        let needed = odd_point_count(2.0 * half_range / resolution_limit(slit, spectrum));
        Self {
            half_range,
            n_modes: needed.max(DEFAULT_MODES),
        }
    }

    pub fn half_range(&self) -> f64 {
        self.half_range
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn step(&self) -> f64 {
        2.0 * self.half_range / (self.n_modes - 1) as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        symmetric_nodes(self.n_modes, self.step())
    }

    fn center(&self) -> usize {
        (self.n_modes - 1) / 2
    }

    /// Per-quadrature standard deviations `sqrt(S(q_j) Δq / 2)`.
    fn quadrature_sigmas(&self, spectrum: &GaussianSpectrum) -> Vec<f64> {
        let dq = self.step();
        self.nodes()
            .iter()
            .map(|&q| (0.5 * spectrum.density(q) * dq).sqrt())
            .collect()
    }
}

/// The generator for realization `index`: stream `index` of `seed`.
pub fn realization_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn draw_into<R: Rng + ?Sized>(sigmas: &[f64], re: &mut [f64], im: &mut [f64], rng: &mut R) {
    for ((s, r), i) in sigmas.iter().zip(re.iter_mut()).zip(im.iter_mut()) {
        let a: f64 = rng.sample(StandardNormal);
        let b: f64 = rng.sample(StandardNormal);
        *r = s * a;
        *i = s * b;
    }
}

/// One field realization on a mode grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SpeckleField {
    nodes: Vec<f64>,
    amplitudes: Vec<Complex64>,
}

impl SpeckleField {
    /// Draws independent circular complex Gaussian mode amplitudes.
    pub fn sample<R: Rng + ?Sized>(spectrum: &GaussianSpectrum, modes: &ModeGrid, rng: &mut R) -> Self {
        let sigmas = modes.quadrature_sigmas(spectrum);
        let mut re = vec![0.0; sigmas.len()];
        let mut im = vec![0.0; sigmas.len()];
        draw_into(&sigmas, &mut re, &mut im, rng);
        Self {
            nodes: modes.nodes(),
            amplitudes: re.into_iter().zip(im).map(|(r, i)| Complex64::new(r, i)).collect(),
        }
    }

    /// Unit-amplitude plane wave along the axis (all power in `q = 0`).
    pub fn plane_wave(modes: &ModeGrid) -> Self {
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); modes.n_modes()];
        amplitudes[modes.center()] = Complex64::new(1.0, 0.0);
        Self {
            nodes: modes.nodes(),
            amplitudes,
        }
    }

    pub fn from_parts(nodes: Vec<f64>, amplitudes: Vec<Complex64>) -> Result<Self> {
        if nodes.len() != amplitudes.len() {
            return Err(Error::GridMismatch(format!(
                "{} amplitudes for {} modes",
                amplitudes.len(),
                nodes.len()
            )));
        }
        Ok(Self { nodes, amplitudes })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        Self {
            nodes: self.nodes.clone(),
            amplitudes: self.amplitudes.iter().map(|a| a * factor).collect(),
        }
    }

    /// Field `U(x) = Σ_j T(kx/z - q_j) E(q_j)` in the detection plane.
    pub fn propagate(&self, slit: &DoubleSlit, setup: &OpticalSetup, x: f64) -> Complex64 {
        let a = setup.reduced_frequency(x);
        self.nodes
            .iter()
            .zip(&self.amplitudes)
            .map(|(&q, e)| e * slit.transfer(a - q))
            .sum()
    }

    pub fn intensity(&self, slit: &DoubleSlit, setup: &OpticalSetup, x: f64) -> f64 {
        self.propagate(slit, setup, x).norm_sqr()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorMethod {
    /// Spread of per-batch statistics.
    BatchMeans,
    /// Delete-one-batch jackknife.
    Jackknife,
}

impl ErrorMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            ErrorMethod::BatchMeans => "batch_means",
            ErrorMethod::Jackknife => "jackknife",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "batch_means" => Some(ErrorMethod::BatchMeans),
            "jackknife" => Some(ErrorMethod::Jackknife),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloConfig {
    pub n_realizations: usize,
    pub seed: u64,
    /// `None` picks [`ModeGrid::for_model`].
    pub modes: Option<ModeGrid>,
    pub batches: usize,
    /// Worker threads; `None` uses the global rayon pool. Results do not
    /// depend on this.
    pub threads: Option<usize>,
    pub error_method: ErrorMethod,
}

impl MonteCarloConfig {
    pub fn new(n_realizations: usize, seed: u64) -> Self {
        Self {
            n_realizations,
            seed,
            modes: None,
            batches: DEFAULT_BATCHES,
            threads: None,
            error_method: ErrorMethod::BatchMeans,
        }
    }

    fn batch_count(&self) -> usize {
        self.batches.min(self.n_realizations)
    }

    fn validate(&self) -> Result<()> {
        if self.n_realizations < 2 {
            return Err(Error::InsufficientRealizations(self.n_realizations));
        }
        if self.batches < 2 {
            return Err(Error::invalid("mc_batches", "at least 2 batches are needed"));
        }
        if self.threads == Some(0) {
            return Err(Error::invalid("mc_threads", "must be at least 1"));
        }
        Ok(())
    }
}

/// Per-grid-point means over a set of realizations.
#[derive(Debug, Clone, PartialEq)]
pub struct Means {
    pub count: usize,
    /// `⟨I(x)⟩` at the first detector.
    pub first: Vec<f64>,
    /// `⟨I(x')⟩` at the partner detector.
    pub second: Vec<f64>,
    /// `⟨I(x) I(x')⟩`.
    pub joint: Vec<f64>,
}

/// Raw ensemble output: overall and per-batch means for one scan.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleMoments {
    grid: ScanGrid,
    mode: ScanMode,
    source: Source,
    seed: u64,
    overall: Means,
    batches: Vec<Means>,
}

impl EnsembleMoments {
    pub fn grid(&self) -> &ScanGrid {
        &self.grid
    }

    pub fn mode(&self) -> ScanMode {
        self.mode
    }

    pub fn n_realizations(&self) -> usize {
        self.overall.count
    }

    pub fn overall(&self) -> &Means {
        &self.overall
    }

    pub fn batches(&self) -> &[Means] {
        &self.batches
    }

    fn deterministic(&self) -> bool {
        self.source == Source::Coherent
    }

    /// Point estimate and standard error of any smooth function of the three
    /// means, evaluated per grid point.
    pub fn statistic<F>(&self, method: ErrorMethod, f: F) -> (Vec<f64>, Vec<f64>)
    where
        F: Fn(f64, f64, f64) -> f64,
    {
        let n = self.grid.len();
        let o = &self.overall;
        let values: Vec<f64> = (0..n).map(|p| f(o.first[p], o.second[p], o.joint[p])).collect();
        if self.deterministic() {
            return (values, vec![0.0; n]);
        }
        let nb = self.batches.len() as f64;
        let stderr = (0..n)
            .map(|p| {
                let samples: Vec<f64> = match method {
                    ErrorMethod::BatchMeans => self
                        .batches
                        .iter()
                        .map(|b| f(b.first[p], b.second[p], b.joint[p]))
                        .collect(),
                    ErrorMethod::Jackknife => {
                        let total = o.count as f64;
                        self.batches
                            .iter()
                            .map(|b| {
                                let c = b.count as f64;
                                let rest = total - c;
                                let drop = |all: f64, part: f64| (total * all - c * part) / rest;
                                f(
                                    drop(o.first[p], b.first[p]),
                                    drop(o.second[p], b.second[p]),
                                    drop(o.joint[p], b.joint[p]),
                                )
                            })
                            .collect()
                    }
                };
                let mean = samples.iter().sum::<f64>() / nb;
                let ss: f64 = samples.iter().map(|s| (s - mean) * (s - mean)).sum();
                match method {
                    ErrorMethod::BatchMeans => (ss / (nb - 1.0) / nb).sqrt(),
                    ErrorMethod::Jackknife => ((nb - 1.0) / nb * ss).sqrt(),
                }
            })
            .collect();
        (values, stderr)
    }

    /// `⟨I1 I2⟩ - ⟨I1⟩⟨I2⟩` with its standard error.
    pub fn covariance(&self, method: ErrorMethod) -> (Vec<f64>, Vec<f64>) {
        self.statistic(method, |m1, m2, j| j - m1 * m2)
    }

    /// Estimate of the requested curve kind. `amplitude` rescales the
    /// unit-amplitude ensemble to the model's `A`.
    pub fn curve(&self, kind: CurveKind, method: ErrorMethod, amplitude: f64) -> Result<EstimateCurve> {
        self.mode.check_kind(kind)?;
        let (values, stderr) = match kind {
            CurveKind::G1 => self.statistic(method, |m1, _, _| amplitude * m1),
            CurveKind::G2 => self.statistic(method, |_, _, j| amplitude * amplitude * j),
            CurveKind::G2Normalized => {
                let o = &self.overall;
                for (p, &x) in self.grid.positions().iter().enumerate() {
                    for (value, at) in [(o.first[p], x), (o.second[p], self.mode.partner(x))] {
                        if !(value.is_normal() && value > 0.0) {
                            return Err(Error::DegenerateDenominator { x: at, value });
                        }
                    }
                }
                self.statistic(method, |m1, m2, j| j / (m1 * m2))
            }
        };
        Ok(EstimateCurve {
            grid: self.grid.clone(),
            values,
            stderr,
            kind,
            mode: self.mode,
            n_realizations: self.overall.count,
            seed: self.seed,
        })
    }
}

/// Monte-Carlo estimate of a correlation curve with per-point standard
/// errors.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateCurve {
    pub grid: ScanGrid,
    pub values: Vec<f64>,
    pub stderr: Vec<f64>,
    pub kind: CurveKind,
    pub mode: ScanMode,
    pub n_realizations: usize,
    pub seed: u64,
}

impl EstimateCurve {
    pub fn to_curve(&self) -> Result<CorrelationCurve> {
        CorrelationCurve::new(
            self.grid.clone(),
            self.values.clone(),
            Some(self.stderr.clone()),
            self.kind,
            self.mode,
        )
    }

    pub fn median_stderr(&self) -> f64 {
        let mut s = self.stderr.clone();
        s.sort_by(f64::total_cmp);
        let n = s.len();
        if n % 2 == 1 {
            s[n / 2]
        } else {
            0.5 * (s[n / 2 - 1] + s[n / 2])
        }
    }
}

/// Monte-Carlo counterpart of the quadrature model.
#[derive(Debug, Clone)]
pub struct SpeckleEnsemble {
    setup: OpticalSetup,
    slit: DoubleSlit,
    spectrum: GaussianSpectrum,
}

struct Layout {
    positions: Vec<f64>,
    first: Vec<usize>,
    second: Vec<usize>,
}

impl Layout {
    /// Unique detector positions touched by the scan, with index maps for
    /// each grid point's detector pair.
    fn new(grid: &ScanGrid, mode: ScanMode) -> Self {
        let mut positions = Vec::new();
        let mut lookup: HashMap<u64, usize> = HashMap::new();
        let mut index_of = |x: f64| -> usize {
            let x = x + 0.0;
            *lookup.entry(x.to_bits()).or_insert_with(|| {
                positions.push(x);
                positions.len() - 1
            })
        };
        let mut first = Vec::with_capacity(grid.len());
        let mut second = Vec::with_capacity(grid.len());
        for &x in grid.positions() {
            first.push(index_of(x));
            second.push(index_of(mode.partner(x)));
        }
        Self {
            positions,
            first,
            second,
        }
    }
}

impl SpeckleEnsemble {
    pub fn new(setup: OpticalSetup, slit: DoubleSlit, spectrum: GaussianSpectrum) -> Self {
        Self { setup, slit, spectrum }
    }

    pub fn setup(&self) -> &OpticalSetup {
        &self.setup
    }

    pub fn default_modes(&self) -> ModeGrid {
        ModeGrid::for_model(&self.slit, &self.spectrum)
    }

    /// Accumulates intensity moments for every grid point of the scan.
    pub fn run(
        &self,
        grid: &ScanGrid,
        mode: ScanMode,
        source: Source,
        config: &MonteCarloConfig,
    ) -> Result<EnsembleMoments> {
        config.validate()?;
        let modes = config.modes.unwrap_or_else(|| self.default_modes());
        let layout = Layout::new(grid, mode);

        let (overall, batches) = match source {
            Source::Coherent => {
                let field = SpeckleField::plane_wave(&modes);
                let intensity: Vec<f64> = layout
                    .positions
                    .iter()
                    .map(|&x| field.intensity(&self.slit, &self.setup, x))
                    .collect();
                let means = gather(&layout, config.n_realizations, |p| {
                    let (a, b) = (intensity[layout.first[p]], intensity[layout.second[p]]);
                    (a, b, a * b)
                });
                (means.clone(), vec![means])
            }
            Source::Thermal => self.run_thermal(&layout, &modes, config)?,
        };

        for (p, &x) in grid.positions().iter().enumerate() {
            if !(overall.first[p].is_finite() && overall.second[p].is_finite() && overall.joint[p].is_finite()) {
                return Err(Error::NonFinite { x });
            }
        }
        Ok(EnsembleMoments {
            grid: grid.clone(),
            mode,
            source,
            seed: config.seed,
            overall,
            batches,
        })
    }

    fn run_thermal(&self, layout: &Layout, modes: &ModeGrid, config: &MonteCarloConfig) -> Result<(Means, Vec<Means>)> {
        let npos = layout.positions.len();
        let nodes = modes.nodes();
        let sigmas = modes.quadrature_sigmas(&self.spectrum);
        // mode-major so the inner loop runs over contiguous positions
        let mut transfer = Vec::with_capacity(nodes.len() * npos);
        for &q in &nodes {
            transfer.extend(
                layout
                    .positions
                    .iter()
                    .map(|&x| self.slit.transfer(self.setup.reduced_frequency(x) - q)),
            );
        }

        let n = config.n_realizations;
        let nb = config.batch_count();
        let work = |b: usize| -> Sums {
            let start = n * b / nb;
            let end = n * (b + 1) / nb;
            let mut sums = Sums::new(npos, layout.first.len());
            let mut re_e = vec![0.0; nodes.len()];
            let mut im_e = vec![0.0; nodes.len()];
            let mut re_u = vec![0.0; npos];
            let mut im_u = vec![0.0; npos];
            let mut intensity = vec![0.0; npos];
            for r in start..end {
                let mut rng = realization_rng(config.seed, r as u64);
                draw_into(&sigmas, &mut re_e, &mut im_e, &mut rng);
                re_u.fill(0.0);
                im_u.fill(0.0);
                for (j, column) in transfer.chunks_exact(npos).enumerate() {
                    let (er, ei) = (re_e[j], im_e[j]);
                    for ((t, ur), ui) in column.iter().zip(re_u.iter_mut()).zip(im_u.iter_mut()) {
                        *ur += t * er;
                        *ui += t * ei;
                    }
                }
                for ((i, ur), ui) in intensity.iter_mut().zip(&re_u).zip(&im_u) {
                    *i = ur * ur + ui * ui;
                }
                sums.add(&intensity, layout);
            }
            sums.count = end - start;
            sums
        };

        let batch_sums: Vec<Sums> = match config.threads {
            Some(t) => rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| Error::invalid("mc_threads", e.to_string()))?
                .install(|| (0..nb).into_par_iter().map(work).collect()),
            None => (0..nb).into_par_iter().map(work).collect(),
        };

        let mut total = Sums::new(npos, layout.first.len());
        for s in &batch_sums {
            total.merge(s);
        }
        let batches = batch_sums.iter().map(|s| s.means(layout)).collect();
        Ok((total.means(layout), batches))
    }

    /// Estimates one curve kind over the scan.
    pub fn estimate(
        &self,
        grid: &ScanGrid,
        kind: CurveKind,
        mode: ScanMode,
        source: Source,
        config: &MonteCarloConfig,
    ) -> Result<EstimateCurve> {
        mode.check_kind(kind)?;
        self.run(grid, mode, source, config)?
            .curve(kind, config.error_method, self.setup.amplitude())
    }
}

fn gather(layout: &Layout, count: usize, f: impl Fn(usize) -> (f64, f64, f64)) -> Means {
    let n = layout.first.len();
    let mut means = Means {
        count,
        first: Vec::with_capacity(n),
        second: Vec::with_capacity(n),
        joint: Vec::with_capacity(n),
    };
    for p in 0..n {
        let (a, b, j) = f(p);
        means.first.push(a);
        means.second.push(b);
        means.joint.push(j);
    }
    means
}

struct Sums {
    count: usize,
    intensity: Vec<f64>,
    joint: Vec<f64>,
}

impl Sums {
    fn new(npos: usize, npairs: usize) -> Self {
        Self {
            count: 0,
            intensity: vec![0.0; npos],
            joint: vec![0.0; npairs],
        }
    }

    fn add(&mut self, intensity: &[f64], layout: &Layout) {
        for (s, i) in self.intensity.iter_mut().zip(intensity) {
            *s += i;
        }
        for ((s, &a), &b) in self.joint.iter_mut().zip(&layout.first).zip(&layout.second) {
            *s += intensity[a] * intensity[b];
        }
    }

    fn merge(&mut self, other: &Sums) {
        self.count += other.count;
        for (s, o) in self.intensity.iter_mut().zip(&other.intensity) {
            *s += o;
        }
        for (s, o) in self.joint.iter_mut().zip(&other.joint) {
            *s += o;
        }
    }

    fn means(&self, layout: &Layout) -> Means {
        let c = self.count as f64;
        gather(layout, self.count, |p| {
            (
                self.intensity[layout.first[p]] / c,
                self.intensity[layout.second[p]] / c,
                self.joint[p] / c,
            )
        })
    }
}

/// Per-point z-scores of a Monte-Carlo estimate against a reference curve.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub positions: Vec<f64>,
    pub estimate: Vec<f64>,
    pub stderr: Vec<f64>,
    pub reference: Vec<f64>,
    pub z: Vec<f64>,
    pub max_abs_z: f64,
    /// Fraction of points with `|z| <= 3`.
    pub fraction_within: f64,
}

impl ComparisonReport {
    pub fn passes(&self, min_fraction: f64) -> bool {
        self.fraction_within >= min_fraction
    }

    pub fn argmax_abs_z(&self) -> usize {
        (0..self.z.len())
            .max_by(|&a, &b| self.z[a].abs().total_cmp(&self.z[b].abs()))
            .unwrap_or(0)
    }
}

pub fn compare_with_quadrature(estimate: &EstimateCurve, reference: &CorrelationCurve) -> Result<ComparisonReport> {
    if estimate.grid != *reference.grid() {
        return Err(Error::GridMismatch(format!(
            "estimate has {} points on [{:e}, {:e}], reference has {} points on [{:e}, {:e}]",
            estimate.grid.len(),
            estimate.grid.first(),
            estimate.grid.last(),
            reference.len(),
            reference.grid().first(),
            reference.grid().last()
        )));
    }
    if estimate.mode != reference.mode() || estimate.kind != reference.kind() {
        return Err(Error::GridMismatch(format!(
            "estimate is {} {}, reference is {} {}",
            estimate.kind,
            estimate.mode,
            reference.kind(),
            reference.mode()
        )));
    }
    let z: Vec<f64> = estimate
        .values
        .iter()
        .zip(&estimate.stderr)
        .zip(reference.values())
        .map(|((&e, &s), &r)| {
            let diff = e - r;
            if s > 0.0 {
                diff / s
            } else if diff.abs() <= 1e-12 * r.abs().max(e.abs()) {
                0.0
            } else {
                diff.signum() * f64::INFINITY
            }
        })
        .collect();
    let max_abs_z = z.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let within = z.iter().filter(|v| v.abs() <= Z_THRESHOLD).count();
    Ok(ComparisonReport {
        positions: estimate.grid.positions().to_vec(),
        estimate: estimate.values.clone(),
        stderr: estimate.stderr.clone(),
        reference: reference.values().to_vec(),
        fraction_within: within as f64 / z.len() as f64,
        z,
        max_abs_z,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::correlation::Interferometer;

    fn reference_parts() -> (OpticalSetup, DoubleSlit, GaussianSpectrum) {
        let slit = DoubleSlit::default();
        let spec = GaussianSpectrum::from_normalized(0.52, &slit).unwrap();
        (OpticalSetup::default(), slit, spec)
    }

    #[test]
    fn default_mode_grid_matches_quadrature_support() {
        let (_, slit, spec) = reference_parts();
        let modes = ModeGrid::for_model(&slit, &spec);
        assert_eq!(modes.n_modes(), 257);
        assert_eq!(modes.half_range(), 8.0 * spec.bandwidth());
        let wide = GaussianSpectrum::from_normalized(10.0, &slit).unwrap();
        let modes = ModeGrid::for_model(&slit, &wide);
        assert!(modes.step() <= resolution_limit(&slit, &wide) * (1.0 + 1e-12));
    }

    #[test]
    fn mode_variance_matches_spectrum() {
        let (_, _, spec) = reference_parts();
        let modes = ModeGrid::new(8.0 * spec.bandwidth(), 9).unwrap();
        let n = 100_000;
        let m = modes.n_modes();
        let mut power = vec![0.0; m];
        let mut power_sq = vec![0.0; m];
        let mut mean_re = vec![0.0; m];
        let mut mean_re_sq = vec![0.0; m];
        for r in 0..n {
            let field = SpeckleField::sample(&spec, &modes, &mut realization_rng(7, r));
            for (j, a) in field.amplitudes().iter().enumerate() {
                let p = a.norm_sqr();
                power[j] += p;
                power_sq[j] += p * p;
                mean_re[j] += a.re;
                mean_re_sq[j] += a.re * a.re;
            }
        }
        let nf = n as f64;
        for (j, &q) in modes.nodes().iter().enumerate() {
            let expected = spec.density(q) * modes.step();
            let mean = power[j] / nf;
            let se = ((power_sq[j] / nf - mean * mean) / nf).sqrt();
            assert!(
                (mean - expected).abs() <= 3.0 * se,
                "mode {j}: {mean} vs {expected} (se {se})"
            );
            let m_re = mean_re[j] / nf;
            let se_re = ((mean_re_sq[j] / nf - m_re * m_re) / nf).sqrt();
            assert!(m_re.abs() <= 3.0 * se_re, "mode {j} mean {m_re} (se {se_re})");
        }
    }

    #[test]
    fn same_seed_same_field() {
        let (_, _, spec) = reference_parts();
        let modes = ModeGrid::for_model(&DoubleSlit::default(), &spec);
        let a = SpeckleField::sample(&spec, &modes, &mut realization_rng(11, 3));
        let b = SpeckleField::sample(&spec, &modes, &mut realization_rng(11, 3));
        let c = SpeckleField::sample(&spec, &modes, &mut realization_rng(11, 4));
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn plane_wave_reproduces_coherent_pattern() {
        let (setup, slit, spec) = reference_parts();
        let modes = ModeGrid::for_model(&slit, &spec);
        let field = SpeckleField::plane_wave(&modes);
        for &x in &[0.0, 0.8e-3, -2.6e-3] {
            let t = slit.transfer(setup.reduced_frequency(x));
            assert_eq!(field.intensity(&slit, &setup, x), t * t);
        }
    }

    #[test]
    fn propagation_is_linear() {
        let (setup, slit, spec) = reference_parts();
        let modes = ModeGrid::for_model(&slit, &spec);
        let field = SpeckleField::sample(&spec, &modes, &mut realization_rng(1, 0));
        let factor = Complex64::new(0.3, -1.7);
        let x = 1.2e-3;
        let lhs = field.scaled(factor).propagate(&slit, &setup, x);
        let rhs = factor * field.propagate(&slit, &setup, x);
        assert!((lhs - rhs).norm() <= 1e-12 * rhs.norm());
    }

    #[test]
    fn batched_propagation_matches_field_propagation() {
        let (setup, slit, spec) = reference_parts();
        let grid = ScanGrid::symmetric(3e-3, 7).unwrap();
        let modes = ModeGrid::new(8.0 * spec.bandwidth(), 65).unwrap();
        let ensemble = SpeckleEnsemble::new(setup, slit, spec);
        let mut cfg = MonteCarloConfig::new(2, 99);
        cfg.modes = Some(modes);
        let moments = ensemble
            .run(&grid, ScanMode::Antisymmetric, Source::Thermal, &cfg)
            .unwrap();
        let fields: Vec<_> = (0..2)
            .map(|r| SpeckleField::sample(&spec, &modes, &mut realization_rng(99, r)))
            .collect();
        for (p, &x) in grid.positions().iter().enumerate() {
            let i1: Vec<f64> = fields.iter().map(|f| f.intensity(&slit, &setup, x)).collect();
            let i2: Vec<f64> = fields.iter().map(|f| f.intensity(&slit, &setup, -x)).collect();
            let m1 = (i1[0] + i1[1]) / 2.0;
            let joint = (i1[0] * i2[0] + i1[1] * i2[1]) / 2.0;
            let o = moments.overall();
            assert!((o.first[p] - m1).abs() <= 1e-10 * m1);
            assert!((o.joint[p] - joint).abs() <= 1e-10 * joint);
        }
    }

    #[test]
    fn coherent_ratio_is_exactly_one() {
        let (setup, slit, spec) = reference_parts();
        let grid = ScanGrid::symmetric(5e-3, 41).unwrap();
        let ensemble = SpeckleEnsemble::new(setup, slit, spec);
        for mode in [ScanMode::Antisymmetric, ScanMode::Symmetric, ScanMode::FixedZero] {
            let est = ensemble
                .estimate(
                    &grid,
                    CurveKind::G2Normalized,
                    mode,
                    Source::Coherent,
                    &MonteCarloConfig::new(10, 1),
                )
                .unwrap();
            assert!(est.values.iter().all(|&v| v == 1.0));
            assert!(est.stderr.iter().all(|&s| s == 0.0));
        }
    }

    #[test]
    fn too_few_realizations() {
        let (setup, slit, spec) = reference_parts();
        let grid = ScanGrid::symmetric(1e-3, 5).unwrap();
        let ensemble = SpeckleEnsemble::new(setup, slit, spec);
        let err = ensemble
            .estimate(
                &grid,
                CurveKind::G1,
                ScanMode::Intensity,
                Source::Thermal,
                &MonteCarloConfig::new(1, 0),
            )
            .unwrap_err();
        assert!(matches!(err, Error::InsufficientRealizations(1)));
    }

    #[test]
    fn intensity_mean_matches_quadrature() {
        let (setup, slit, spec) = reference_parts();
        let grid = ScanGrid::symmetric(5.5e-3, 23).unwrap();
        let ensemble = SpeckleEnsemble::new(setup, slit, spec);
        let est = ensemble
            .estimate(
                &grid,
                CurveKind::G1,
                ScanMode::Intensity,
                Source::Thermal,
                &MonteCarloConfig::new(20_000, 5),
            )
            .unwrap();
        let quad = Interferometer::with_default_quadrature(setup, slit, spec).unwrap();
        let reference = quad
            .scan(&grid, CurveKind::G1, ScanMode::Intensity, Source::Thermal)
            .unwrap();
        let report = compare_with_quadrature(&est, &reference).unwrap();
        assert!(report.max_abs_z < 4.0, "max |z| = {}", report.max_abs_z);
    }

    #[test]
    fn self_comparison_is_zero() {
        let (setup, slit, spec) = reference_parts();
        let grid = ScanGrid::symmetric(4e-3, 9).unwrap();
        let ensemble = SpeckleEnsemble::new(setup, slit, spec);
        let est = ensemble
            .estimate(
                &grid,
                CurveKind::G2Normalized,
                ScanMode::Antisymmetric,
                Source::Thermal,
                &MonteCarloConfig::new(64, 2),
            )
            .unwrap();
        let report = compare_with_quadrature(&est, &est.to_curve().unwrap()).unwrap();
        assert!(report.z.iter().all(|&z| z == 0.0));
        assert_eq!(report.fraction_within, 1.0);
    }

    #[test]
    fn comparison_rejects_grid_mismatch() {
        let (setup, slit, spec) = reference_parts();
        let ensemble = SpeckleEnsemble::new(setup, slit, spec);
        let est = ensemble
            .estimate(
                &ScanGrid::symmetric(4e-3, 9).unwrap(),
                CurveKind::G1,
                ScanMode::Intensity,
                Source::Thermal,
                &MonteCarloConfig::new(8, 2),
            )
            .unwrap();
        let quad = Interferometer::with_default_quadrature(setup, slit, spec).unwrap();
        let other = quad
            .scan(
                &ScanGrid::symmetric(4e-3, 11).unwrap(),
                CurveKind::G1,
                ScanMode::Intensity,
                Source::Thermal,
            )
            .unwrap();
        assert!(matches!(
            compare_with_quadrature(&est, &other),
            Err(Error::GridMismatch(_))
        ));
    }

    #[test]
    fn jackknife_and_batch_errors_agree_roughly() {
        let (setup, slit, spec) = reference_parts();
        let grid = ScanGrid::symmetric(3e-3, 13).unwrap();
        let ensemble = SpeckleEnsemble::new(setup, slit, spec);
        let moments = ensemble
            .run(
                &grid,
                ScanMode::Antisymmetric,
                Source::Thermal,
                &MonteCarloConfig::new(4000, 8),
            )
            .unwrap();
        let bm = moments
            .curve(CurveKind::G2Normalized, ErrorMethod::BatchMeans, 1.0)
            .unwrap();
        let jk = moments
            .curve(CurveKind::G2Normalized, ErrorMethod::Jackknife, 1.0)
            .unwrap();
        assert_eq!(bm.values, jk.values);
        let ratio = jk.median_stderr() / bm.median_stderr();
        assert!((0.7..1.4).contains(&ratio), "jackknife/batch ratio {ratio}");
    }
}
