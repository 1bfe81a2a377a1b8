//! Loads a configuration file and prints its canonical form and the
//! central-fringe visibility it implies.
//!
//! Usage: `cargo run --example config_file [path]`

use subfringe::presets::run_visibility;
use subfringe::ExperimentConfig;

fn main() {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/examples/configs/reference.conf").to_string());
    let cfg = match ExperimentConfig::load(&path) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("{path}: {e}");
            std::process::exit(e.exit_code());
        }
    };
    print!("{}", cfg.render());
    match run_visibility(&cfg) {
        Ok(report) => print!("\n{report}"),
        Err(e) => println!("\nvisibility: {e}"),
    }
}
