use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ghmimo_cli::compare::{self, Metrics};
use ghmimo_cli::experiments::{self, Experiment};
use ghmimo_cli::output::Run;
use ghmimo_cli::{CliError, CliResult, Pipeline, ScenarioConfig};

#[derive(Parser)]
#[command(
    name = "ghmimo",
    version,
    about = "Holographic MIMO capacity experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Scenario config (TOML). Built-in desk-scale defaults when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory for CSVs and the run manifest.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Retained degrees of freedom per distance and frequency.
    Dof,
    /// Capacity versus SNR, with Monte Carlo mutual information.
    SnrSweep,
    /// Capacity versus distance.
    DistanceSweep,
    /// Capacity versus transmit surface size.
    AreaSweep,
    /// Capacity versus receive and transmit RF chain counts.
    RfSweep,
    /// Channel eigenvalue spectra.
    Eig,
    /// Gains and gaps derived from earlier CSVs.
    #[command(subcommand)]
    Compare(CompareCommand),
}

#[derive(Subcommand)]
enum CompareCommand {
    /// Percentage change of every column between two rows.
    Gain(GainArgs),
    /// SNR difference between two SNR sweeps at a common rate.
    SnrShift(ShiftArgs),
    /// NUHPM − BHPS gap per K from a transmit RF sweep.
    Gap(GapArgs),
}

#[derive(Args)]
struct GainArgs {
    #[arg(long)]
    csv: PathBuf,
    #[arg(long, default_value = "distance_m")]
    key: String,
    #[arg(long)]
    from: f64,
    #[arg(long)]
    to: f64,
}

#[derive(Args)]
struct ShiftArgs {
    #[arg(long)]
    near: PathBuf,
    #[arg(long)]
    far: PathBuf,
    #[arg(long, default_value = "se_nuhpm_asym")]
    column: String,
    /// Target rate; defaults to the far curve's value at its highest SNR.
    #[arg(long)]
    rate: Option<f64>,
}

#[derive(Args)]
struct GapArgs {
    #[arg(long)]
    csv: PathBuf,
    #[arg(long)]
    snr: f64,
}

fn load_config(cli: &Cli) -> CliResult<ScenarioConfig> {
    let mut cfg = match &cli.config {
        Some(path) => ScenarioConfig::load(path)?,
        None => ScenarioConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn run_compare(cmd: &CompareCommand) -> CliResult<(String, Metrics)> {
    use ghmimo_cli::output::Table;
    Ok(match cmd {
        CompareCommand::Gain(a) => (
            "compare_gain.csv".into(),
            compare::gain(&Table::read(&a.csv)?, &a.key, a.from, a.to)?,
        ),
        CompareCommand::SnrShift(a) => (
            "compare_snr_shift.csv".into(),
            compare::snr_shift(
                &Table::read(&a.near)?,
                &Table::read(&a.far)?,
                &a.column,
                a.rate,
            )?,
        ),
        CompareCommand::Gap(a) => (
            "compare_gap.csv".into(),
            compare::gap(&Table::read(&a.csv)?, a.snr)?,
        ),
    })
}

fn run(cli: &Cli) -> CliResult<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    let cfg = load_config(cli)?;
    let (name, exp): (&str, Experiment) = match &cli.command {
        Command::Compare(cmd) => {
            let (file, metrics) = run_compare(cmd)?;
            let table = compare::metrics_table(&metrics);
            print!("{}", String::from_utf8_lossy(&table.to_bytes()));
            let mut run = Run::start(&cli.out, "compare", &cfg)?;
            run.record(vec![ghmimo_cli::output::Output::ok(
                file,
                table,
                Vec::new(),
            )])?;
            run.finish()?;
            return Ok(());
        }
        cmd => {
            let pipeline = Pipeline::new(cfg.clone());
            match cmd {
                Command::Dof => ("dof", experiments::run_dof_sweep(&pipeline)),
                Command::SnrSweep => ("snr-sweep", experiments::run_snr_sweep(&pipeline)),
                Command::DistanceSweep => {
                    ("distance-sweep", experiments::run_distance_sweep(&pipeline))
                }
                Command::AreaSweep => ("area-sweep", experiments::run_area_sweep(&pipeline)),
                Command::RfSweep => ("rf-sweep", experiments::run_rf_sweep(&pipeline)),
                Command::Eig => ("eig", experiments::run_eig_export(&pipeline)),
                Command::Compare(_) => unreachable!(),
            }
        }
    };
    let mut run = Run::start(&cli.out, name, &cfg)?;
    for (k, v) in exp.notes {
        run.note(&k, v);
    }
    run.record(exp.outputs)?;
    let manifest = run.finish()?;
    for o in &manifest.outputs {
        println!("{}", cli.out.join(&o.file).display());
    }
    for w in &manifest.warnings {
        log::warn!("{w}");
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let line = serde_json::json!({ "error": e.category(), "message": e.to_string() });
            eprintln!("{line}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
