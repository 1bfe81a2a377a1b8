use subfringe::config::ExperimentConfig;
use subfringe::fringes::central_peak_spacing;
use subfringe::output::parse_csv;
use subfringe::presets::{render_figure, run_figure, run_scan, Preset};
use subfringe::CurveKind;

fn ideal() -> ExperimentConfig {
    ExperimentConfig {
        apply_detection: false,
        ..ExperimentConfig::default()
    }
}

fn coherent_period(cfg: &ExperimentConfig) -> f64 {
    cfg.wavelength * cfg.distance / cfg.slit_separation
}

#[test]
fn every_preset_renders() {
    let cfg = ExperimentConfig::default();
    for p in Preset::ALL {
        let fig = render_figure(p, &cfg).unwrap();
        assert_eq!(fig.curve.len(), 221, "{p}");
        assert!(fig.curve.values().iter().all(|v| v.is_finite() && *v >= 0.0), "{p}");
        if fig.curve.kind() != CurveKind::G2Normalized {
            let c = &fig.curve;
            assert_eq!(c.values()[c.grid().nearest_index(0.0)], 1.0, "{p}");
        }
    }
}

#[test]
fn broadband_g2_oscillates_between_one_and_two() {
    let fig = render_figure(Preset::Fig1d, &ExperimentConfig::default()).unwrap();
    let c = &fig.curve;
    assert!(c.max() <= 2.0 + 1e-12 && c.max() > 1.99);
    assert!(c.min() >= 1.0 - 1e-12 && c.min() < 1.01);
    // the refined side peaks sit closer than the nominal period because of the
    // single-slit envelope; the ratio to the coherent spacing is what halves
    let spacing = central_peak_spacing(c).unwrap();
    let coherent = central_peak_spacing(
        &render_figure(Preset::Fig3b, &ExperimentConfig::default())
            .unwrap()
            .curve,
    )
    .unwrap();
    assert!((spacing / coherent - 0.5).abs() < 0.01, "{spacing} {coherent}");
    assert!(spacing < 0.5 * coherent_period(&ExperimentConfig::default()));
}

#[test]
fn symmetric_thermal_scan_is_flat_before_detection() {
    let c = render_figure(Preset::Fig5a, &ideal()).unwrap().curve;
    assert!(c.max() - c.min() < 1e-6);
    assert!((c.max() - 2.0).abs() < 1e-9);
    // with detection it stays flat at the modified coincidence value
    let m = render_figure(Preset::Fig5a, &ExperimentConfig::default())
        .unwrap()
        .curve;
    assert!(m.max() - m.min() < 1e-6);
    assert!((m.max() - (1.04 + 0.66 * 0.66)).abs() < 1e-9);
}

#[test]
fn fixed_detector_scan_has_coherent_period() {
    let cfg = ExperimentConfig::default();
    let c = render_figure(Preset::Fig6, &cfg).unwrap().curve;
    let coherent = render_figure(Preset::Fig3b, &cfg).unwrap().curve;
    let s6 = central_peak_spacing(&c).unwrap();
    let s3 = central_peak_spacing(&coherent).unwrap();
    assert!((s6 / s3 - 1.0).abs() < 0.1, "{s6} vs {s3}");
    let anti = render_figure(Preset::Fig4a, &cfg).unwrap().curve;
    let s4 = central_peak_spacing(&anti).unwrap();
    assert!(s4 < 0.7 * s6, "{s4} vs {s6}");
}

#[test]
fn coherent_g2_is_unity() {
    let c = render_figure(Preset::Fig1f, &ExperimentConfig::default())
        .unwrap()
        .curve;
    assert!(c.values().iter().all(|&g| g == 1.0));
}

#[test]
fn csv_files_round_trip_and_repeat_byte_identically() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig::default();
    let paths = run_figure(Preset::Fig4b, &cfg, dir.path(), None, true).unwrap();
    assert_eq!(paths.len(), 2);
    let first = std::fs::read(&paths[0]).unwrap();
    run_figure(Preset::Fig4b, &cfg, dir.path(), None, true).unwrap();
    assert_eq!(first, std::fs::read(&paths[0]).unwrap());

    let table = parse_csv(std::str::from_utf8(&first).unwrap()).unwrap();
    let fig = render_figure(Preset::Fig4b, &cfg).unwrap();
    assert_eq!(table.header_value("preset"), Some("fig4b"));
    assert_eq!(table.header_value("eta"), Some("0.66"));
    for (read, exact) in table.value.iter().zip(fig.curve.values()) {
        assert!((read - exact).abs() <= 5e-9 * exact.abs(), "{read} vs {exact}");
    }
    for (read, exact) in table.x.iter().zip(fig.curve.positions()) {
        assert!((read - exact).abs() <= 5e-9 * exact.abs());
    }
    let script = std::fs::read_to_string(&paths[1]).unwrap();
    assert!(script.contains("fig4b.csv"));
}

#[test]
fn scan_output_reflects_config() {
    let cfg = ExperimentConfig::parse("scan_mode = intensity\nsource = coherent\ngrid_points = 11").unwrap();
    let text = run_scan(&cfg, None).unwrap();
    let table = parse_csv(&text).unwrap();
    assert_eq!(table.value.len(), 11);
    assert_eq!(table.header_value("quantity"), Some("G1"));
    assert!(table.stderr.is_none());
}

#[test]
fn monte_carlo_scan_carries_errors_and_seed() {
    let cfg = ExperimentConfig::parse("grid_points = 21\nmc_realizations = 400\nmc_seed = 99").unwrap();
    let mc = cfg.monte_carlo(None).unwrap();
    let table = parse_csv(&run_scan(&cfg, Some(&mc)).unwrap()).unwrap();
    assert_eq!(table.header_value("seed"), Some("99"));
    assert_eq!(table.header_value("realizations"), Some("400"));
    assert_eq!(table.stderr.as_ref().unwrap().len(), 21);
}
