use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use tera_tc::experiment::{single_link_curve, DistanceGrid, RunOptions};
use tera_tc::{load_scenario, output, run_to_dir};
use tera_tc_core::channel::{Carrier, LinkParams};
use tera_tc_core::strategies::Strategy;
use tera_tc_core::units::dbm_to_watt;
use tera_tc_core::SolverConfig;

#[derive(Parser)]
#[command(
    name = "tera-tc",
    version,
    about = "Transport-capacity allocation experiments for THz links"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment in a scenario file and write CSV tables plus metadata.json.
    Run {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Overrides solver.seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Comma-separated list, e.g. proposed,distmax,nonadaptive,exhaustive.
        #[arg(long, value_delimiter = ',')]
        strategies: Option<Vec<Strategy>>,
        /// Worker threads.
        #[arg(long)]
        parallel: Option<usize>,
    },
    /// Parse and validate a scenario file without running it.
    Validate {
        #[arg(long)]
        spec: PathBuf,
    },
    /// Print T(d) for a single link as CSV.
    LinkCurve {
        /// Carrier frequency, Hz.
        #[arg(long = "f")]
        frequency: f64,
        /// Absorption coefficient, 1/m.
        #[arg(long)]
        kabs: f64,
        /// Transmit power, dBm.
        #[arg(long)]
        power: f64,
        /// Subwindow bandwidth, Hz.
        #[arg(long, default_value_t = 1e9)]
        bandwidth: f64,
        /// Gain of each antenna, dBi.
        #[arg(long, default_value_t = 15.0)]
        gain: f64,
        /// Noise spectral density, dBm/Hz.
        #[arg(long, default_value_t = -168.0, allow_negative_numbers = true)]
        n0: f64,
        #[arg(long, default_value_t = 0.01)]
        d_min: f64,
        #[arg(long, default_value_t = 100.0)]
        d_max: f64,
        #[arg(long, default_value_t = 1000)]
        points: usize,
        /// Write the curve here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run {
            spec,
            out,
            seed,
            strategies,
            parallel,
        } => {
            let loaded = load_scenario(&spec)?;
            let options = RunOptions {
                seed,
                strategies,
                threads: parallel,
            };
            let result = run_to_dir(&loaded, &options, &out)?;
            let failed = result.summary.iter().filter(|r| r.status != "ok").count();
            eprintln!(
                "{}: {} rows written to {} ({} failed)",
                loaded.file.experiment.id(),
                result.summary.len(),
                out.display(),
                failed
            );
        }
        Command::Validate { spec } => {
            let loaded = load_scenario(&spec)?;
            let scenario = loaded.validate()?;
            println!(
                "{}: ok ({} devices, {} subwindows, experiment {})",
                spec.display(),
                scenario.num_devices(),
                scenario.band.len(),
                loaded.file.experiment.kind()
            );
        }
        Command::LinkCurve {
            frequency,
            kabs,
            power,
            bandwidth,
            gain,
            n0,
            d_min,
            d_max,
            points,
            out,
        } => {
            let p = dbm_to_watt(power);
            let params = LinkParams::from_db(gain, gain, n0, power)?;
            let carrier = Carrier::new(frequency, kabs, bandwidth);
            let grid = DistanceGrid {
                min_m: d_min,
                max_m: d_max,
                points,
            };
            anyhow::ensure!(
                d_min > 0.0 && d_max > d_min && points >= 2,
                "need 0 < d-min < d-max and points >= 2"
            );
            let (curve, optimum) =
                single_link_curve(&carrier, p, &params, &grid, &SolverConfig::default())?;
            match out {
                Some(path) => {
                    output::write_csv(&path, &curve)?;
                }
                None => {
                    let mut w = csv::Writer::from_writer(io::stdout().lock());
                    for row in &curve {
                        w.serialize(row)?;
                    }
                    w.flush()?;
                }
            }
            let mut err = io::stderr().lock();
            for o in &optimum {
                writeln!(
                    err,
                    "{}: d = {} m, T = {} m*bps",
                    o.method, o.distance_m, o.tc_m_bps
                )
                .context("writing to stderr")?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
