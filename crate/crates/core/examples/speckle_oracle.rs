//! Draws random speckle fields and checks the ensemble averages against the
//! quadrature model point by point.
//!
//! Usage: `cargo run --release --example speckle_oracle [realizations]`

use subfringe::speckle::compare_with_quadrature;
use subfringe::{CurveKind, ExperimentConfig, MonteCarloConfig, ScanMode, Source};

fn main() -> subfringe::Result<()> {
    let n = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(20_000);
    let cfg = ExperimentConfig::default();
    let grid = cfg.grid()?;
    let mc = MonteCarloConfig::new(n, 2024);
    for mode in [ScanMode::Antisymmetric, ScanMode::FixedZero] {
        let estimate = cfg.ensemble_for(cfg.normalized_bandwidth)?.estimate(
            &grid,
            CurveKind::G2Normalized,
            mode,
            Source::Thermal,
            &mc,
        )?;
        let reference = cfg
            .interferometer()?
            .scan(&grid, CurveKind::G2Normalized, mode, Source::Thermal)?;
        let report = compare_with_quadrature(&estimate, &reference)?;
        let worst = report.argmax_abs_z();
        println!(
            "{mode:>13}: {n} realizations, {:.1}% within 3 sigma, max |z| {:.2} at x = {:.2} mm (estimate {:.4} +/- {:.4}, exact {:.4})",
            100.0 * report.fraction_within,
            report.max_abs_z,
            report.positions[worst] * 1e3,
            report.estimate[worst],
            report.stderr[worst],
            report.reference[worst]
        );
    }
    Ok(())
}
