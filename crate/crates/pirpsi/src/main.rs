use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use pirpsi::commands::{self, EXIT_CONFIG};
use pirpsi::config::{parse_params, ConfigError};
use pirpsi::{exit_code, ExperimentConfig, Format, HarnessError, RawConfig, Report};
use pirpsi_core::SchemeParams;

#[derive(Parser)]
#[command(version, about = "Multi-server PIR with private side information: demo, audits and simulation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Run one session against a random message store
    Demo,
    /// Verify the probability table and its identities over a grid
    CheckLemmas,
    /// Exact privacy, recoverability and rate audit over a grid
    Audit,
    /// Answer-set census by type
    Census,
    /// Monte Carlo sessions against the exact distributions
    Simulate,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Text,
    Tabular,
}

#[derive(clap::Args)]
struct Opts {
    /// Parameters as N,K,M,L,q
    #[arg(long, global = true, value_parser = parse_params)]
    params: Option<SchemeParams>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    trials: Option<u64>,
    /// File with one N,K,M,L,q tuple per line
    #[arg(long, global = true)]
    grid: Option<PathBuf>,
    /// Ceiling on estimated enumeration branches
    #[arg(long, global = true)]
    budget: Option<u64>,
    /// Write the report here instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<FormatArg>,
    /// key = value settings; flags take precedence
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Demand index W
    #[arg(long, global = true)]
    demand: Option<usize>,
    /// Side information indices, comma separated
    #[arg(long, global = true, value_delimiter = ',')]
    side: Option<Vec<usize>>,
    /// Random stores per tape in the recoverability audit
    #[arg(long, global = true)]
    fills: Option<usize>,
    /// Serve this PIRDB file instead of a random store
    #[arg(long, global = true)]
    load_db: Option<PathBuf>,
    /// Save the demo's message store as a PIRDB file
    #[arg(long, global = true)]
    save_db: Option<PathBuf>,
    #[arg(long, global = true, hide = true, value_parser = parse_fault)]
    inject_m_fault: Option<(usize, usize)>,
}

fn parse_fault(s: &str) -> Result<(usize, usize), String> {
    let (i, j) = s.split_once(',').ok_or("expected I,J")?;
    Ok((i.trim().parse().map_err(|_| "bad I")?, j.trim().parse().map_err(|_| "bad J")?))
}

impl Opts {
    fn into_config(self) -> Result<ExperimentConfig, ConfigError> {
        let file = match &self.config {
            Some(path) => RawConfig::read(path)?,
            None => RawConfig::default(),
        };
        let flags = RawConfig {
            params: self.params,
            seed: self.seed,
            trials: self.trials,
            grid: self.grid,
            budget: self.budget,
            out: self.out,
            format: self.format.map(|f| match f {
                FormatArg::Text => Format::Text,
                FormatArg::Tabular => Format::Tabular,
            }),
            demand: self.demand,
            side: self.side,
            fills: self.fills,
            m_fault: self.inject_m_fault,
            load_db: self.load_db,
            save_db: self.save_db,
        };
        file.overridden_by(flags).resolve()
    }
}

fn run(command: Command, cfg: &ExperimentConfig) -> Result<Report, HarnessError> {
    match command {
        Command::Demo => commands::cmd_demo(cfg),
        Command::CheckLemmas => commands::cmd_check_lemmas(cfg),
        Command::Audit => commands::cmd_audit(cfg),
        Command::Census => commands::cmd_census(cfg),
        Command::Simulate => commands::cmd_simulate(cfg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match cli.opts.into_config() {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("pirpsi: config error: {e}");
            return ExitCode::from(EXIT_CONFIG as u8);
        }
    };
    let result = run(cli.command, &cfg);
    let code = exit_code(&result);
    match &result {
        Ok(report) => {
            let text = report.render(cfg.format);
            match &cfg.out {
                Some(path) => {
                    if let Err(e) = std::fs::write(path, text) {
                        eprintln!("pirpsi: cannot write {}: {e}", path.display());
                        return ExitCode::from(commands::EXIT_FAIL as u8);
                    }
                }
                None => print!("{text}"),
            }
            if !report.passed() {
                eprintln!("pirpsi: {} check(s) failed", report.failures());
            }
        }
        Err(e) => eprintln!("pirpsi: {e}"),
    }
    ExitCode::from(code as u8)
}
