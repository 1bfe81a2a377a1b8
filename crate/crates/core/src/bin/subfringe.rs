use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use subfringe::config::load_or_default;
use subfringe::output::write_atomic;
use subfringe::presets::{run_scan, run_validation, run_visibility};
use subfringe::{run_figure, Error, ExperimentConfig, MonteCarloConfig, Preset};

#[derive(Parser)]
#[command(
    name = "subfringe",
    version,
    about = "Double-slit correlation patterns of thermal and coherent light"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute a named figure preset and write it as CSV.
    Figure {
        /// Preset id: fig1a..fig1f, fig3a, fig3b, fig4a..fig4c, fig5a, fig5b, fig6.
        id: String,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory.
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Also write a gnuplot script next to the CSV.
        #[arg(long)]
        emit_plotscript: bool,
        /// Use the speckle ensemble instead of quadrature (needs `mc_realizations`).
        #[arg(long)]
        monte_carlo: bool,
        /// Worker threads for the speckle ensemble; results do not depend on it.
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Compute the scan described by the configuration.
    Scan {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output file; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        monte_carlo: bool,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Compare the speckle ensemble against quadrature on the configured scan.
    Validate {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Write per-point |z| values to this CSV file.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Report the central-fringe visibility of the configured scan.
    Visibility {
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

fn monte_carlo(
    config: &ExperimentConfig,
    enabled: bool,
    threads: Option<usize>,
) -> Result<Option<MonteCarloConfig>, Error> {
    enabled.then(|| config.monte_carlo(threads)).transpose()
}

fn run(cli: Cli) -> Result<bool, Error> {
    match cli.command {
        Command::Figure {
            id,
            config,
            out,
            emit_plotscript,
            monte_carlo: mc,
            threads,
        } => {
            let preset = Preset::parse(&id)?;
            let config = load_or_default(config.as_ref())?;
            let mc = monte_carlo(&config, mc, threads)?;
            for path in run_figure(preset, &config, &out, mc.as_ref(), emit_plotscript)? {
                println!("wrote {}", path.display());
            }
            Ok(true)
        }
        Command::Scan {
            config,
            out,
            monte_carlo: mc,
            threads,
        } => {
            let config = load_or_default(config.as_ref())?;
            let mc = monte_carlo(&config, mc, threads)?;
            let csv = run_scan(&config, mc.as_ref())?;
            match out {
                Some(path) => {
                    write_atomic(&path, csv.as_bytes())?;
                    println!("wrote {}", path.display());
                }
                None => std::io::stdout().write_all(csv.as_bytes())?,
            }
            Ok(true)
        }
        Command::Validate { config, out, threads } => {
            let config = load_or_default(config.as_ref())?;
            let outcome = run_validation(&config, threads)?;
            print!("{}", outcome.summary());
            if let Some(path) = out {
                write_atomic(&path, outcome.to_csv(&config)?.as_bytes())?;
                println!("wrote {}", path.display());
            }
            Ok(outcome.passed)
        }
        Command::Visibility { config } => {
            let config = load_or_default(config.as_ref())?;
            print!("{}", run_visibility(&config)?);
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
