//! Mean intensity behind the slits for a coherent plane wave and for
//! broadband thermal light, with the number of fringes in each.

use subfringe::fringes::{count_fringes, region_above};
use subfringe::{CurveKind, ExperimentConfig, ScanMode, Source};

fn main() -> subfringe::Result<()> {
    let cfg = ExperimentConfig::default();
    let grid = cfg.grid()?;
    let ifm = cfg.interferometer()?;
    let coherent = ifm.scan(&grid, CurveKind::G1, ScanMode::Intensity, Source::Coherent)?;
    let thermal = ifm.scan(&grid, CurveKind::G1, ScanMode::Intensity, Source::Thermal)?;

    let envelope = cfg.slit()?.envelope_half_width(&cfg.setup()?);
    println!(
        "coherent: {} fringes inside the central envelope |x| < {:.2} mm",
        count_fringes(&coherent, -envelope, envelope, 0.01),
        envelope * 1e3
    );
    let (lo, hi) = region_above(&thermal, 0.5);
    println!(
        "thermal: {} peak(s), half-maximum region [{:.2}, {:.2}] mm",
        count_fringes(&thermal, lo, hi, 0.01),
        lo * 1e3,
        hi * 1e3
    );

    println!("\n{:>8} {:>12} {:>12}", "x (mm)", "coherent", "thermal");
    let (c0, t0) = (coherent.max(), thermal.max());
    for i in (0..grid.len()).step_by(10) {
        println!(
            "{:8.2} {:12.4} {:12.4}",
            grid.positions()[i] * 1e3,
            coherent.values()[i] / c0,
            thermal.values()[i] / t0
        );
    }
    Ok(())
}
