use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use dstbc_core::analysis::{property_suite, snr_at_ber};
use dstbc_core::decode::DecoderKind;
use dstbc_core::sim::{emit_csv, run_sweep, write_csv_file, BerPoint, SimConfig};
use dstbc_core::Error;

#[derive(Parser)]
#[command(name = "dstbc", version, about = "Distributed 4x2 Golden/Alamouti STBC toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the algebraic property suite.
    Verify {
        /// Also write the report as CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo BER/SER sweep over the config's grid.
    Ber {
        #[arg(long)]
        config: PathBuf,
        /// Override the config's decoder.
        #[arg(long)]
        decoder: Option<DecoderKind>,
        /// CSV destination (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// SNR needed to reach a target BER at each imbalance level.
    SweepImbalance {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        decoder: Option<DecoderKind>,
        /// CSV destination for the underlying BER points.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 1e-3)]
        target_ber: f64,
    },
}

enum Failure {
    Violation,
    Config(Error),
    Runtime(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) => Failure::Config(e),
            other => Failure::Runtime(other),
        }
    }
}

fn load(path: &Path, decoder: Option<DecoderKind>) -> Result<SimConfig, Failure> {
    let mut cfg = SimConfig::load(path)?;
    if let Some(d) = decoder {
        cfg.decoder = d;
        cfg.validate()?;
    }
    Ok(cfg)
}

fn write_points(points: &[BerPoint], out: Option<&Path>) -> Result<(), Failure> {
    match out {
        Some(path) => write_csv_file(points, path)?,
        None => emit_csv(points, std::io::stdout().lock())?,
    }
    Ok(())
}

fn verify(out: Option<&Path>) -> Result<(), Failure> {
    let suite = property_suite()?;
    print!("{suite}");
    if let Some(path) = out {
        std::fs::write(path, suite.to_csv()).map_err(Error::from)?;
    }
    if suite.all_passed() {
        println!("all {} checks passed", suite.checks.len());
        Ok(())
    } else {
        Err(Failure::Violation)
    }
}

fn sweep_imbalance(cfg: &SimConfig, out: Option<&Path>, target: f64) -> Result<(), Failure> {
    if !(target > 0.0 && target < 1.0) {
        return Err(Failure::Config(Error::Config(format!("target BER {target} outside (0, 1)"))));
    }
    let points = run_sweep(cfg)?;
    if let Some(path) = out {
        write_csv_file(&points, path)?;
    }
    let crossing = |delta: f64| {
        let curve: Vec<BerPoint> = points.iter().filter(|p| p.imbalance_db == delta).cloned().collect();
        snr_at_ber(&curve, target)
    };
    let reference = crossing(0.0);
    println!("imbalance_db,snr_at_target_db,loss_db");
    for &delta in &cfg.imbalance_db {
        let snr = crossing(delta);
        let fmt = |x: Option<f64>| x.map_or_else(|| "nan".to_owned(), |v| format!("{v:.3}"));
        let loss = snr.zip(reference).map(|(s, r)| s - r);
        println!("{delta},{},{}", fmt(snr), fmt(loss));
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Verify { out } => verify(out.as_deref()),
        Command::Ber { config, decoder, out } => {
            let cfg = load(&config, decoder)?;
            write_points(&run_sweep(&cfg)?, out.as_deref())
        }
        Command::SweepImbalance {
            config,
            decoder,
            out,
            target_ber,
        } => sweep_imbalance(&load(&config, decoder)?, out.as_deref(), target_ber),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Violation) => {
            eprintln!("property violation");
            ExitCode::from(1)
        }
        Err(Failure::Config(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
