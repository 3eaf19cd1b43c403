use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use motesel::commands::{cmd_experiment, cmd_ingest, cmd_report, cmd_simulate};
use motesel::config::RunConfig;

/// Sensor selection, sink prediction and adaptive routing for wireless
/// sensor networks.
#[derive(Parser)]
#[command(name = "motesel", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Config file (TOML); flags override its keys.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Raw sensor log.
    #[arg(long, global = true)]
    data: Option<PathBuf>,

    /// Positions file ("mote_id x y" lines).
    #[arg(long, global = true)]
    positions: Option<PathBuf>,

    /// Measurement field: temperature, humidity, light or voltage.
    #[arg(long, global = true)]
    field: Option<String>,

    /// Sink sensor id.
    #[arg(long, global = true)]
    sink: Option<u32>,

    /// Comma-separated window lengths, e.g. 35,2700,5400.
    #[arg(long, global = true)]
    windows: Option<String>,

    /// Fold count: "auto" or an integer.
    #[arg(long, global = true)]
    k: Option<String>,

    /// Seed for shuffled fold assignment.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Gap policy: drop_row, forward_fill or column_mean.
    #[arg(long, global = true)]
    gap: Option<String>,

    /// RMSE-percent threshold for adopting a re-selection.
    #[arg(long, global = true)]
    threshold: Option<f64>,

    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Parse the raw log into an aligned epoch-by-sensor matrix.
    Ingest,
    /// Cross-validate each window with and without sensor selection.
    Experiment {
        /// Run the all-sensors arm only.
        #[arg(long)]
        no_selection: bool,
    },
    /// Run the adaptive selection/routing loop and the energy simulation.
    Simulate,
    /// Pretty-print existing outputs.
    Report,
}

fn build_config(cli: &Cli) -> motesel::Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    if let Some(p) = &cli.data {
        cfg.data.path = Some(p.clone());
    }
    if let Some(p) = &cli.positions {
        cfg.data.positions = Some(p.clone());
    }
    if let Some(f) = &cli.field {
        cfg.data.field = f.clone();
    }
    if let Some(s) = cli.sink {
        cfg.data.sink = s;
    }
    if let Some(w) = &cli.windows {
        let mut windows = Vec::new();
        for tok in w.split(',') {
            let len: usize = tok.trim().parse().map_err(|_| {
                motesel::Error::Config(format!("bad window length '{tok}'"))
            })?;
            windows.push([0, len]);
        }
        cfg.experiment.windows = windows;
    }
    if let Some(k) = &cli.k {
        cfg.experiment.k = k.clone();
    }
    if let Some(s) = cli.seed {
        cfg.experiment.seed = s;
    }
    if let Some(g) = &cli.gap {
        cfg.ingest.gap_policy = g.clone();
    }
    if let Some(t) = cli.threshold {
        cfg.simulate.rmse_threshold = t;
    }
    if let Some(o) = &cli.out {
        cfg.output.dir = o.clone();
    }
    Ok(cfg)
}

fn run(cli: &Cli) -> motesel::Result<()> {
    let cfg = build_config(cli)?;
    match &cli.command {
        Command::Ingest => cmd_ingest(&cfg),
        Command::Experiment { no_selection } => cmd_experiment(&cfg, *no_selection),
        Command::Simulate => cmd_simulate(&cfg),
        Command::Report => {
            print!("{}", cmd_report(&cfg)?);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("motesel: {e}");
            ExitCode::FAILURE
        }
    }
}
