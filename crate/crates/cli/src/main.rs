use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use evigrid::{run, ConfigFile, Overrides, RunConfig, RunError};

#[derive(Parser)]
#[command(name = "evigrid", version, about = "Map-aided evidential occupancy grid fusion")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario through the fusion pipeline.
    Run {
        #[arg(long)]
        scenario: PathBuf,
        /// Parameter file; defaults apply to anything it leaves out.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Number of frames to process.
        #[arg(long)]
        frames: Option<usize>,
        /// Overrides the scenario's noise seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Ignore the prior map.
        #[arg(long)]
        no_map: bool,
        /// Write a CSV of every cell's masses per frame.
        #[arg(long)]
        dump_masses: bool,
        /// Write composite and per-class images per frame.
        #[arg(long)]
        images: bool,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    let Command::Run {
        scenario,
        config,
        out,
        frames,
        seed,
        no_map,
        dump_masses,
        images,
    } = cli.command;

    let overrides = Overrides {
        frames,
        seed,
        no_map,
        dump_masses,
        images,
    };
    let resolved = config
        .as_deref()
        .map(ConfigFile::load)
        .unwrap_or_else(|| Ok(ConfigFile::default()))
        .and_then(|file| RunConfig::resolve(&scenario, file, &out, &overrides));
    let config = match resolved {
        Ok(c) => c,
        Err(e) => {
            eprintln!("evigrid: configuration error: {e:#}");
            return ExitCode::from(1);
        }
    };
    match run(&config) {
        Ok(report) => {
            println!(
                "evigrid: {} frames, {} cell decisions, metrics in {}",
                report.frames_evaluated,
                report.total_count,
                config.out_dir.join("metrics.json").display()
            );
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("evigrid: {e}");
            match e {
                RunError::Config(_) => ExitCode::from(1),
                RunError::Runtime(_) => ExitCode::from(2),
            }
        }
    }
}
