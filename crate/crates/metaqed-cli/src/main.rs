//! `metaqed` command-line front end.
//!
//! Exit codes: 0 success, 2 configuration error, 3 I/O or parse error,
//! 4 numerical failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use metaqed::commands::{cmd_dispersion, cmd_fano, cmd_localization, cmd_qubit_sweep, cmd_transmission, RunContext};
use metaqed::config::RunConfig;
use metaqed::Error;

#[derive(Parser)]
#[command(name = "metaqed", version, about = "Resonator-loaded metamaterial waveguide models")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the seed in the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides the output directory in the configuration.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for parallel sweeps (1 runs sequentially).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Exact band structure over the first Brillouin zone.
    Dispersion,
    /// Finite-cascade S-parameters, optionally fitting a measured trace.
    Transmission {
        /// Measured trace (.s2p Touchstone or .csv) to fit.
        #[arg(long)]
        fit: Option<PathBuf>,
    },
    /// Monte Carlo localization profile across the gap.
    Localization,
    /// Lamb shift and lifetimes of a flux-tuned transmon.
    QubitSweep,
    /// Fano fit of one resonance in a measured trace.
    Fano {
        /// Frequency window in GHz, as f1:f2.
        #[arg(long, value_parser = parse_window)]
        window: (f64, f64),
        /// Measured trace (.s2p Touchstone or .csv).
        #[arg(long)]
        data: PathBuf,
    },
}

fn parse_window(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(':').ok_or("expected f1:f2")?;
    let lo: f64 = a.trim().parse().map_err(|_| format!("invalid frequency {a}"))?;
    let hi: f64 = b.trim().parse().map_err(|_| format!("invalid frequency {b}"))?;
    Ok((lo, hi))
}

fn load_config(global: &Global, required: bool) -> Result<RunContext, Error> {
    let mut inputs = Vec::new();
    let mut config = match &global.config {
        Some(path) => {
            inputs.push(path.clone());
            RunConfig::load(path)?
        }
        None if required => return Err(Error::Config("--config is required for this command".into())),
        None => RunConfig::from_toml("")?,
    };
    if let Some(seed) = global.seed {
        config.seed = seed;
    }
    if let Some(out) = &global.out {
        config.output_dir = out.clone();
    }
    let mut ctx = RunContext::new(config);
    ctx.inputs = inputs;
    Ok(ctx)
}

fn run(cli: Cli) -> Result<Vec<String>, Error> {
    let mut ctx = load_config(&cli.global, !matches!(cli.command, Command::Fano { .. }))?;
    if let Some(threads) = cli.global.threads {
        if threads == 0 {
            return Err(Error::Config("--threads must be at least 1".into()));
        }
        if threads == 1 {
            ctx.exec = metaqed::Execution::Sequential;
        } else {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build_global()
                .map_err(|e| Error::Config(e.to_string()))?;
        }
    }
    let outputs = match &cli.command {
        Command::Dispersion => cmd_dispersion(&ctx)?,
        Command::Transmission { fit } => cmd_transmission(&ctx, fit.as_deref())?,
        Command::Localization => cmd_localization(&ctx)?,
        Command::QubitSweep => cmd_qubit_sweep(&ctx)?,
        Command::Fano { window, data } => cmd_fano(&ctx, data, *window)?,
    };
    let mut lines = outputs.summary;
    lines.extend(outputs.files.iter().map(|f| format!("wrote {}", f.display())));
    Ok(lines)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(lines) => {
            for line in lines {
                println!("{line}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
