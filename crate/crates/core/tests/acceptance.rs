//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any
//! fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use subfringe::config::ExperimentConfig;
use subfringe::detection::{REFERENCE_VISIBILITY_G2, REFERENCE_VISIBILITY_G2_NORMALIZED};
use subfringe::fringes::{central_peak_spacing, central_window, count_fringes, region_above};
use subfringe::presets::{render_figure, render_figure_monte_carlo, run_validation, Preset};
use subfringe::{CorrelationCurve, CurveKind, ScanMode, Source};

type Criterion = (&'static str, fn() -> Outcome, Duration);

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn quadrature_curve(nb: f64, kind: CurveKind, mode: ScanMode, source: Source) -> CorrelationCurve {
    let cfg = ExperimentConfig {
        normalized_bandwidth: nb,
        ..ExperimentConfig::default()
    };
    cfg.interferometer()
        .unwrap()
        .scan(&cfg.grid().unwrap(), kind, mode, source)
        .unwrap()
}

fn window_extrema(curve: &CorrelationCurve, (lo, hi): (usize, usize)) -> (f64, f64) {
    let v = &curve.values()[lo..=hi];
    (
        v.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        v.iter().copied().fold(f64::INFINITY, f64::min),
    )
}

fn halving() -> Outcome {
    let g2 = quadrature_curve(10.0, CurveKind::G2Normalized, ScanMode::Antisymmetric, Source::Thermal);
    let g1 = quadrature_curve(10.0, CurveKind::G1, ScanMode::Intensity, Source::Coherent);
    let s2 = central_peak_spacing(&g2).unwrap();
    let s1 = central_peak_spacing(&g1).unwrap();
    let ratio = s2 / s1;
    outcome(
        (ratio - 0.5).abs() <= 0.02 * 0.5,
        format!(
            "g2(x,-x) spacing {:.4} mm, coherent G1 spacing {:.4} mm, ratio {ratio:.4} (target 0.5 +/- 2%)",
            s2 * 1e3,
            s1 * 1e3
        ),
    )
}

fn broadband_range() -> Outcome {
    let g2 = quadrature_curve(10.0, CurveKind::G2Normalized, ScanMode::Antisymmetric, Source::Thermal);
    let window = central_window(&g2, 1).unwrap();
    let (max, min) = window_extrema(&g2, window);
    outcome(
        (1.95..=2.0).contains(&max) && (1.0..=1.05).contains(&min),
        format!(
            "max {max:.6} in [1.95, 2.0], min {min:.6} in [1.0, 1.05] over x in [{:.3}, {:.3}] mm",
            g2.positions()[window.0] * 1e3,
            g2.positions()[window.1] * 1e3
        ),
    )
}

fn fringe_counts() -> Outcome {
    let cfg = ExperimentConfig::default();
    let coherent = render_figure(Preset::Fig3b, &cfg).unwrap().curve;
    let envelope = cfg.slit().unwrap().envelope_half_width(&cfg.setup().unwrap());
    let n_coherent = count_fringes(&coherent, -envelope, envelope, 0.01);

    let thermal = render_figure(Preset::Fig1e, &cfg).unwrap().curve;
    let intensity = render_figure(Preset::Fig3a, &cfg).unwrap().curve;
    let (lo, hi) = region_above(&intensity, 0.5);
    let n_thermal = count_fringes(&thermal, lo, hi, 0.01);
    outcome(
        n_coherent == 3 && n_thermal == 5,
        format!(
            "coherent intensity: {n_coherent} fringes in |x| < {:.3} mm (expect 3); \
             thermal g2(x,-x): {n_thermal} fringes in [{:.3}, {:.3}] mm (expect 5)",
            envelope * 1e3,
            lo * 1e3,
            hi * 1e3
        ),
    )
}

fn visibility_targets() -> Outcome {
    let cfg = ExperimentConfig::default();
    let normalized = render_figure(Preset::Fig4a, &cfg).unwrap().curve;
    let joint = render_figure(Preset::Fig4b, &cfg).unwrap().curve;
    let v_norm = subfringe::visibility(&normalized, None).unwrap().v;
    let v_joint = subfringe::visibility(&joint, None).unwrap().v;
    outcome(
        (v_norm - REFERENCE_VISIBILITY_G2_NORMALIZED).abs() <= 0.05
            && (v_joint - REFERENCE_VISIBILITY_G2).abs() <= 0.05,
        format!(
            "modified g2(x,-x) v = {v_norm:.4} (target {REFERENCE_VISIBILITY_G2_NORMALIZED} +/- 0.05); \
             G2(x,-x) v = {v_joint:.4} (target {REFERENCE_VISIBILITY_G2} +/- 0.05)"
        ),
    )
}

fn coherent_identities() -> Outcome {
    let g2 = quadrature_curve(0.52, CurveKind::G2Normalized, ScanMode::Antisymmetric, Source::Coherent);
    let dev_norm = g2.values().iter().map(|g| (g - 1.0).abs()).fold(0.0, f64::max);
    let joint = quadrature_curve(0.52, CurveKind::G2, ScanMode::Symmetric, Source::Coherent);
    let g1 = quadrature_curve(0.52, CurveKind::G1, ScanMode::Intensity, Source::Coherent);
    let dev_square = joint
        .values()
        .iter()
        .zip(g1.values())
        .map(|(j, i)| {
            if *j == 0.0 && *i == 0.0 {
                0.0
            } else {
                (j - i * i).abs() / (i * i)
            }
        })
        .fold(0.0, f64::max);
    outcome(
        dev_norm <= 1e-12 && dev_square <= 1e-12,
        format!("max |g2 - 1| = {dev_norm:.1e}; max relative |G2(x,x) - G1^2| = {dev_square:.1e} (limit 1e-12)"),
    )
}

fn coincident_law() -> Outcome {
    let mut worst: f64 = 0.0;
    for nb in [0.1, 0.52, 10.0] {
        let g2 = quadrature_curve(nb, CurveKind::G2Normalized, ScanMode::Symmetric, Source::Thermal);
        worst = g2.values().iter().map(|g| (g - 2.0).abs()).fold(worst, f64::max);
    }
    outcome(
        worst <= 1e-9,
        format!("max |g2(x,x) - 2| over wb/2pi in {{0.1, 0.52, 10}} = {worst:.1e} (limit 1e-9)"),
    )
}

fn oracle_equivalence() -> Outcome {
    let cfg = ExperimentConfig::parse("mc_realizations = 100000\nscan_mode = antisymmetric\nkind = g2").unwrap();
    let v = run_validation(&cfg, None).unwrap();
    let r = &v.report;
    outcome(
        v.passed,
        format!(
            "n = {}, seed = {:#x}: {:.2}% of {} points within 3 sigma (need 99%), max |z| = {:.2}",
            v.estimate.n_realizations,
            v.estimate.seed,
            100.0 * r.fraction_within,
            r.positions.len(),
            r.max_abs_z
        ),
    )
}

fn narrowband_convergence() -> Outcome {
    let thermal = quadrature_curve(1e-4, CurveKind::G1, ScanMode::Intensity, Source::Thermal);
    let coherent = quadrature_curve(1e-4, CurveKind::G1, ScanMode::Intensity, Source::Coherent);
    let sup = coherent.max();
    let dev = thermal
        .values()
        .iter()
        .zip(coherent.values())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
        / sup;
    outcome(
        dev < 1e-3,
        format!("sup |G1_thermal - G1_coherent| / sup G1_coherent = {dev:.2e} at wb/2pi = 1e-4 (limit 1e-3)"),
    )
}

fn determinism() -> Outcome {
    let cfg = ExperimentConfig::parse("mc_realizations = 10000\nmc_seed = 12345").unwrap();
    let render = |threads| {
        let mc = cfg.monte_carlo(Some(threads)).unwrap();
        render_figure_monte_carlo(Preset::Fig4a, &cfg, &mc)
            .unwrap()
            .to_csv(&cfg)
    };
    let one = render(1);
    let two = render(2);
    let again = render(1);
    outcome(
        one == two && one == again,
        format!(
            "fig4a Monte-Carlo CSV ({} bytes): threads 1 vs 2 identical = {}, repeat identical = {}",
            one.len(),
            one == two,
            one == again
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("1 sub-wavelength halving", halving, Duration::from_secs(5)),
        ("2 broadband range", broadband_range, Duration::from_secs(5)),
        ("3 fringe counts", fringe_counts, Duration::from_secs(5)),
        ("4 visibility targets", visibility_targets, Duration::from_secs(10)),
        ("5 coherent identities", coherent_identities, Duration::from_secs(5)),
        ("6 coincident-point law", coincident_law, Duration::from_secs(10)),
        ("7 oracle equivalence", oracle_equivalence, Duration::from_secs(300)),
        (
            "8 narrowband convergence",
            narrowband_convergence,
            Duration::from_secs(5),
        ),
        ("9 determinism", determinism, Duration::from_secs(300)),
    ];
    let mut failures = 0;
    for (name, check, budget) in criteria {
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let in_time = elapsed <= budget;
        let passed = result.passed && in_time;
        if !passed {
            failures += 1;
        }
        println!(
            "{} [{name}] {} ({:.2} s, budget {} s{})",
            if passed { "PASS" } else { "FAIL" },
            result.detail,
            elapsed.as_secs_f64(),
            budget.as_secs(),
            if in_time { "" } else { ", over budget" }
        );
    }
    println!("acceptance: {} of 9 criteria passed", 9 - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
