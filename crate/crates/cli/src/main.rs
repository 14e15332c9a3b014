//! `modunfold` command-line harness.

use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use modunfold::experiments::{
    emit_csv, emit_m_grid_csv, run_compare_hod, run_m_grid, run_mse_sweep, run_theory_only, write_csv,
    write_m_grid_csv, ExperimentConfig, MGridRow, Preset, ResultRow, RowStatus,
};
use modunfold::{Error, Execution};

#[derive(Parser)]
#[command(name = "modunfold", version, about = "Modulo ADC unfolding experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulated versus predicted MSE over oversampling factors.
    MseSweep(Common),
    /// Sliding-DFT versus higher-order-difference recovery.
    CompareHod(Common),
    /// Monte-Carlo estimate of the residue-map norm over (N, OF, |S|).
    MGrid(Common),
    /// Closed-form predictions only.
    TheoryOnly(Common),
}

#[derive(Clone, Copy, ValueEnum)]
enum PresetArg {
    Desk,
    Paper,
}

#[derive(Args)]
struct Common {
    /// JSON configuration; fields override the preset.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed; overrides the configuration.
    #[arg(long)]
    seed: Option<u64>,
    /// CSV destination; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "desk")]
    preset: PresetArg,
    /// Record per-row wall time (output is then not reproducible byte for byte).
    #[arg(long)]
    timings: bool,
    /// Run on the calling thread only.
    #[arg(long)]
    sequential: bool,
    /// Suppress the summary on standard error.
    #[arg(long, short)]
    quiet: bool,
}

enum Rows {
    Results(Vec<ResultRow>),
    MGrid(Vec<MGridRow>),
}

impl Rows {
    fn statuses(&self) -> Vec<RowStatus> {
        match self {
            Rows::Results(r) => r.iter().map(|x| x.status).collect(),
            Rows::MGrid(r) => r.iter().map(|x| x.status).collect(),
        }
    }
}

fn load(c: &Common) -> Result<ExperimentConfig, Error> {
    let preset = match c.preset {
        PresetArg::Desk => Preset::Desk,
        PresetArg::Paper => Preset::Paper,
    };
    let mut cfg = ExperimentConfig::load(preset, c.config.as_deref())?;
    if let Some(s) = c.seed {
        cfg.seed = Some(s);
    }
    if let Some(o) = &c.out {
        cfg.output = Some(o.clone());
    }
    if c.timings {
        cfg.record_timings = true;
    }
    if c.sequential {
        cfg.execution = Execution::Sequential;
    }
    Ok(cfg)
}

fn fmt_db(v: Option<f64>) -> String {
    v.map(|x| format!("{x:8.2}")).unwrap_or_else(|| format!("{:>8}", "-"))
}

fn summarize(rows: &Rows) {
    let mut err = io::stderr().lock();
    match rows {
        Rows::Results(rows) => {
            let _ = writeln!(
                err,
                "{:>6} {:>3} {:>8} {:>8} {:>8} {:>8} {:>8} {:>6}  status",
                "OF", "b", "delta", "sim_dB", "theo_dB", "conv_dB", "hod_dB", "errs"
            );
            for r in rows {
                let _ = writeln!(
                    err,
                    "{:>6.1} {:>3} {:>8.5} {} {} {} {} {:>6}  {}{}",
                    r.of,
                    r.b,
                    r.delta_sl,
                    fmt_db(r.mse_simulated_db),
                    fmt_db(r.mse_theory_db),
                    fmt_db(r.mse_conventional_db),
                    fmt_db(r.mse_hod_db),
                    r.residue_errors.map(|e| e.to_string()).unwrap_or_else(|| "-".into()),
                    r.status.as_str(),
                    if r.reason.is_empty() {
                        String::new()
                    } else {
                        format!(" ({})", r.reason)
                    },
                );
            }
        }
        Rows::MGrid(rows) => {
            let _ = writeln!(
                err,
                "{:>5} {:>6} {:>5} {:>12} {:>8}  status",
                "N", "OF", "|S|", "M~", "b_extra"
            );
            for r in rows {
                let _ = writeln!(
                    err,
                    "{:>5} {:>6.1} {:>5} {:>12} {:>8}  {}",
                    r.n,
                    r.of,
                    r.s_size,
                    r.m_tilde.map(|m| format!("{m:.4}")).unwrap_or_else(|| "-".into()),
                    r.b_extra.map(|b| format!("{b:.3}")).unwrap_or_else(|| "-".into()),
                    r.status.as_str(),
                );
            }
        }
    }
}

fn run(command: &Command) -> Result<ExitCode, Error> {
    let (common, cfg) = match command {
        Command::MseSweep(c) | Command::CompareHod(c) | Command::MGrid(c) | Command::TheoryOnly(c) => (c, load(c)?),
    };
    let rows = match command {
        Command::MseSweep(_) => Rows::Results(run_mse_sweep(&cfg)?),
        Command::CompareHod(_) => Rows::Results(run_compare_hod(&cfg)?),
        Command::MGrid(_) => Rows::MGrid(run_m_grid(&cfg)?),
        Command::TheoryOnly(_) => Rows::Results(run_theory_only(&cfg)?),
    };
    match (&cfg.output, &rows) {
        (Some(p), Rows::Results(r)) => emit_csv(r, p)?,
        (Some(p), Rows::MGrid(r)) => emit_m_grid_csv(r, p)?,
        (None, Rows::Results(r)) => write_csv(r, io::stdout().lock())?,
        (None, Rows::MGrid(r)) => write_m_grid_csv(r, io::stdout().lock())?,
    }
    if !common.quiet {
        summarize(&rows);
    }
    let statuses = rows.statuses();
    if !statuses.is_empty() && statuses.iter().all(|s| *s == RowStatus::Skipped) {
        eprintln!("error: every grid point is infeasible");
        return Ok(ExitCode::from(3));
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_) | Error::InvalidArgument(_) | Error::Json(_) => ExitCode::from(2),
                Error::Io { ref path, .. } if Some(path) == config_path(&cli.command) => ExitCode::from(2),
                _ => ExitCode::FAILURE,
            }
        }
    }
}

fn config_path(c: &Command) -> Option<&PathBuf> {
    match c {
        Command::MseSweep(c) | Command::CompareHod(c) | Command::MGrid(c) | Command::TheoryOnly(c) => c.config.as_ref(),
    }
}
