//! Two detectors moved to mirror positions: the intensity correlation of
//! broadband thermal light has fringes at half the coherent spacing.

use subfringe::fringes::central_peak_spacing;
use subfringe::{CurveKind, ExperimentConfig, ScanMode, Source};

fn main() -> subfringe::Result<()> {
    for nb in [10.0, 0.52] {
        let cfg = ExperimentConfig {
            normalized_bandwidth: nb,
            ..ExperimentConfig::default()
        };
        let grid = cfg.grid()?;
        let ifm = cfg.interferometer()?;
        let g2 = ifm.scan(&grid, CurveKind::G2Normalized, ScanMode::Antisymmetric, Source::Thermal)?;
        let coherent = ifm.scan(&grid, CurveKind::G1, ScanMode::Intensity, Source::Coherent)?;
        let s2 = central_peak_spacing(&g2)?;
        let s1 = central_peak_spacing(&coherent)?;
        println!(
            "wb/2pi = {nb:>5}: g2(x,-x) in [{:.4}, {:.4}], peak spacing {:.3} mm vs coherent {:.3} mm (ratio {:.3})",
            g2.min(),
            g2.max(),
            s2 * 1e3,
            s1 * 1e3,
            s2 / s1
        );
    }
    let setup = ExperimentConfig::default().setup()?;
    let slit = ExperimentConfig::default().slit()?;
    println!(
        "nominal coherent period lambda z / d = {:.4} mm",
        slit.fringe_spacing(&setup) * 1e3
    );
    Ok(())
}
