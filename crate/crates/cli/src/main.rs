use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use boussinesq::commands::{cmd_bench, cmd_converge, cmd_run_all};
use boussinesq::config::{parse_config, preset_configs, RunConfig, PRESETS};
use boussinesq::Result;
use clap::{Args, Parser, Subcommand};

/// Finite-element solver for Boussinesq systems on rectangles.
#[derive(Parser)]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Source {
    /// Configuration file.
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Named preset.
    #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(PRESETS))]
    preset: Option<String>,
    /// Output directory; overrides the configuration.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Final time; overrides the configuration.
    #[arg(long)]
    t_end: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Time-step one configuration (or every member of a preset).
    Run(Source),
    /// Manufactured-solution convergence study.
    Converge(Source),
    /// Timing of both algorithms with and without operator reuse and adaptation.
    Bench(Source),
    /// Print a preset as a configuration file.
    Show {
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(PRESETS))]
        preset: String,
    },
}

fn load(src: &Source, fallback: &str) -> Result<(Vec<RunConfig>, PathBuf)> {
    let mut configs = match (&src.config, &src.preset) {
        (Some(path), _) => vec![parse_config(&std::fs::read_to_string(path)?)?],
        (None, Some(name)) => preset_configs(name)?,
        (None, None) => preset_configs(fallback)?,
    };
    for c in &mut configs {
        if let Some(t) = src.t_end {
            c.t_end = t;
        }
        c.validate()?;
    }
    let dir = src
        .out
        .clone()
        .unwrap_or_else(|| Path::new(&configs[0].output.directory).to_path_buf());
    Ok((configs, dir))
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(src) => {
            let (configs, dir) = load(&src, "reflection")?;
            for (c, o) in configs.iter().zip(cmd_run_all(&configs, &dir)?) {
                println!(
                    "{}: t = {} after {} steps, mass_eta = {}, max_eta = {}",
                    c.family, o.t, o.summary.steps, o.conserved.mass_eta, o.conserved.max_eta
                );
            }
        }
        Command::Converge(src) => {
            let (configs, dir) = load(&src, "convergence")?;
            print!("{}", cmd_converge(&configs[0], &dir)?.to_csv());
        }
        Command::Bench(src) => {
            let (configs, dir) = load(&src, "benchmark")?;
            print!("{}", cmd_bench(&configs[0], &dir)?.to_csv());
        }
        Command::Show { preset } => {
            let mut out = std::io::stdout().lock();
            for c in preset_configs(&preset)? {
                if let Err(e) = writeln!(out, "{}", c.render()) {
                    if e.kind() == std::io::ErrorKind::BrokenPipe {
                        break;
                    }
                    return Err(e.into());
                }
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

