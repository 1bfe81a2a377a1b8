//! Writes every figure preset as CSV plus a gnuplot script.
//!
//! Usage: `cargo run --example figure_presets [output-dir]`

use std::path::PathBuf;

use subfringe::presets::{run_figure, Preset};
use subfringe::ExperimentConfig;

fn main() -> subfringe::Result<()> {
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("figures"));
    let cfg = ExperimentConfig::default();
    for preset in Preset::ALL {
        for path in run_figure(preset, &cfg, &out, None, true)? {
            println!("{preset:>6}  {}", path.display());
        }
    }
    Ok(())
}
