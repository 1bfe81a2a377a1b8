//! Visibility of the central fringe after finite detection efficiency,
//! accidental background and a finite detector aperture.

use subfringe::detection::{finite_detector_average, modified_visibility, REFERENCE_DETECTOR_WIDTH};
use subfringe::presets::CurveRequest;
use subfringe::{visibility, DetectionModel, ExperimentConfig, Interpretation};

fn main() -> subfringe::Result<()> {
    let cfg = ExperimentConfig::default();
    let grid = cfg.grid()?;
    let request = CurveRequest {
        detection: None,
        ..CurveRequest::from_config(&cfg)?
    };
    let ideal = subfringe::presets::evaluate(&cfg, &request, &grid)?;
    let v = visibility(&ideal, None)?;
    println!("ideal g2(x,-x): v = {:.4} (max {:.4}, min {:.4})", v.v, v.max, v.min);

    for interpretation in [Interpretation::FluctuationScaled, Interpretation::Literal] {
        let model = DetectionModel::new(cfg.delta, cfg.eta, 0.0, interpretation)?;
        println!(
            "{interpretation:>18}: v = {:.4}",
            visibility(&model.apply(&ideal)?, None)?.v
        );
    }
    println!(
        "closed form from the ideal extrema: {:.4}",
        modified_visibility(v.max, v.min, cfg.delta, cfg.eta)
    );

    let averaged = finite_detector_average(&ideal, REFERENCE_DETECTOR_WIDTH)?;
    let model = DetectionModel::new(
        cfg.delta,
        cfg.eta,
        REFERENCE_DETECTOR_WIDTH,
        Interpretation::FluctuationScaled,
    )?;
    println!(
        "with a {:.2} mm detector: ideal v = {:.4}, modified v = {:.4}",
        REFERENCE_DETECTOR_WIDTH * 1e3,
        visibility(&averaged, None)?.v,
        visibility(&model.apply(&ideal)?, None)?.v
    );
    Ok(())
}
