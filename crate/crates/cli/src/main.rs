use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use siolab::harness::specs::measure_from_config;
use siolab::harness::{
    error_exit_code, run_scenario_with_threads, Config, ScenarioConfig, ScenarioKind, EXIT_CONFIG,
};
use siolab::measure::{build, write_text};
use siolab::Error;

#[derive(Parser)]
#[command(name = "siolab", version, about = "Singular integral experiments on discrete measures")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Override the seed given in the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Directory for CSV reports.
    #[arg(long, global = true, env = "SIOLAB_OUT", default_value = "siolab-out")]
    out_dir: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Run the scenario described by a configuration file.
    Run { config: PathBuf },
    /// Check a kernel's size, smoothness and antisymmetry (reads `[kernel]`).
    ValidateKernel { config: PathBuf },
    /// Build the measure of `[measure]` and write it as text.
    BuildMeasure {
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a principal-value convergence scenario.
    Pv { config: PathBuf },
}

fn load(path: &Path, kind: Option<ScenarioKind>, seed: Option<u64>) -> siolab::Result<ScenarioConfig> {
    let mut cfg = Config::load(path)?;
    if let Some(kind) = kind {
        match cfg.raw("scenario", "kind") {
            None => cfg.set("scenario", "kind", kind.tag()),
            Some(k) if k == kind.tag() => {}
            Some(k) => {
                return Err(Error::Config(format!(
                    "this command runs {} scenarios, the file asks for {k}",
                    kind.tag()
                )))
            }
        }
    }
    if let Some(seed) = seed {
        cfg.set("scenario", "seed", seed.to_string());
    }
    ScenarioConfig::from_config(&cfg)
}

fn run(cli: &Cli, path: &Path, kind: Option<ScenarioKind>) -> siolab::Result<i32> {
    let config = load(path, kind, cli.seed)?;
    let threads = cli.threads.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let report = run_scenario_with_threads(&config, threads)?;
    let paths = report.write(&cli.out_dir)?;
    print!("{}", report.summary());
    for p in paths {
        println!("  wrote {}", p.display());
    }
    Ok(report.exit_code())
}

fn build_measure(path: &Path, out: &Path) -> siolab::Result<i32> {
    let cfg = Config::load(path)?;
    let spec = measure_from_config(&cfg)?;
    cfg.reject_unused()?;
    let mu = build(&spec)?;
    let file = std::io::BufWriter::new(std::fs::File::create(out)?);
    write_text(&mu, file)?;
    println!("wrote {} atoms to {}", mu.len(), out.display());
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.threads == Some(0) {
        eprintln!("error: --threads must be at least 1");
        return ExitCode::from(EXIT_CONFIG as u8);
    }
    let result = match &cli.command {
        Command::Run { config } => run(&cli, config, None),
        Command::ValidateKernel { config } => run(&cli, config, Some(ScenarioKind::KernelValidation)),
        Command::Pv { config } => run(&cli, config, Some(ScenarioKind::PvConvergence)),
        Command::BuildMeasure { config, out } => build_measure(config, out),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(error_exit_code(&e) as u8)
        }
    }
}
