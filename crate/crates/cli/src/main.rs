use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rbc_sched::sim::SchedulerKind;
use rbc_sched_cli::{
    cmd_compare, cmd_profile, cmd_run, cmd_sweep, parse_config_seeded, CliError, Experiment,
    Format, Output,
};

/// Multi-user resonant beam charging: TDMA vs alternative scheduling.
#[derive(Debug, Parser)]
#[command(name = "rbc-sched", version)]
struct Cli {
    /// Configuration file; defaults apply to every key it omits.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Receiver counts, comma separated.
    #[arg(long = "n", global = true, value_delimiter = ',')]
    receivers: Vec<usize>,
    /// Driving powers in watts, comma separated.
    #[arg(long = "drive-power", global = true, value_delimiter = ',')]
    drive_powers: Vec<f64>,
    /// Write only summary tables, no per-run time series.
    #[arg(long, global = true)]
    summary_only: bool,
    /// More log output (RBC_SCHED_LOG overrides).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SchedulerChoice {
    Tdma,
    Alternative,
    Both,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the configured scheduler once.
    Run,
    /// Compare both schedulers over receiver counts.
    Compare,
    /// Sweep receiver counts and driving powers.
    Sweep {
        /// Schedulers to sweep; defaults to the configured one.
        #[arg(long, value_enum)]
        scheduler: Option<SchedulerChoice>,
    },
    /// Emit the battery charging profile.
    Profile {
        #[arg(long, default_value_t = 0.01)]
        soc_step: f64,
    },
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let mut exp = match &cli.config {
        Some(path) => parse_config_seeded(path, cli.seed)?,
        None => Experiment::default(),
    };
    if cli.seed.is_some() {
        exp.sim.seed = cli.seed;
    }
    let receivers = if cli.receivers.is_empty() {
        vec![exp.sim.receivers]
    } else {
        cli.receivers.clone()
    };
    let drive_powers = if cli.drive_powers.is_empty() {
        vec![exp.sim.drive.drive_power]
    } else {
        cli.drive_powers.clone()
    };
    exp.sim.receivers = receivers[0];
    exp.sim.drive.drive_power = drive_powers[0];
    exp.sim
        .validate()
        .map_err(|e| CliError::Usage(e.to_string()))?;

    let out = Output {
        dir: cli.out.clone(),
        format: cli.format,
        series: !cli.summary_only,
    };
    match cli.command {
        Command::Run => {
            let rows = cmd_run(&exp, &out)?;
            for r in rows.iter().filter_map(|r| r.outcome.as_ref().ok()) {
                println!(
                    "{} n={} t_charge={} s avg_multiplexing={}",
                    r.scheduler, r.receivers, r.t_charge, r.average_multiplexing
                );
            }
        }
        Command::Compare => {
            println!("n_receivers,t_alt_s,t_tdma_s,ratio");
            for row in cmd_compare(&exp, &receivers, &out)? {
                println!(
                    "{},{},{},{}",
                    row.n_receivers, row.t_alt_s, row.t_tdma_s, row.ratio
                );
            }
        }
        Command::Sweep { scheduler } => {
            let kinds = match scheduler {
                None => vec![exp.sim.scheduler],
                Some(SchedulerChoice::Tdma) => vec![SchedulerKind::Tdma],
                Some(SchedulerChoice::Alternative) => vec![SchedulerKind::Alternative],
                Some(SchedulerChoice::Both) => {
                    vec![SchedulerKind::Tdma, SchedulerKind::Alternative]
                }
            };
            let rows = cmd_sweep(&exp, &receivers, &drive_powers, &kinds, &out)?;
            println!("{} runs written to {}", rows.len(), out.dir.display());
        }
        Command::Profile { soc_step } => {
            let path = cmd_profile(&exp, soc_step, &out)?;
            println!("{}", path.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let default_level = match cli.verbose {
        0 => "warn",
        1 => "info",
        2 => "debug",
        _ => "trace",
    };
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("RBC_SCHED_LOG", default_level))
        .init();

    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
