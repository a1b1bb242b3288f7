//! Command-line interface.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use wpcn::instance::{fmt_f64, ScheduleFile};
use wpcn::{sched, Algorithm, Realization};

use crate::config::Config;
use crate::error::{CliError, ConfigError, Result};
use crate::sweep::{run_sweep, write_csv, SweepSpec};
use crate::validate::validate_files;

#[derive(Debug, Parser)]
#[command(
    name = "wpcn",
    version,
    about = "Minimum-length scheduling for wireless-powered networks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Csv,
}

#[derive(Debug, Args)]
pub struct Common {
    /// JSON config file; omitted keys take their defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output file; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a parameter sweep and write one CSV row per run.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Comma-separated algorithms, overriding the config.
        #[arg(long, value_delimiter = ',')]
        algo: Vec<String>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Schedule one instance with one algorithm.
    Schedule {
        /// Instance file; drawn from the config and seed when omitted.
        instance: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "MPA")]
        algo: String,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Check a schedule file against an instance file.
    Validate {
        instance: PathBuf,
        schedule: PathBuf,
    },
    /// Draw one instance and write it as an instance file.
    Gen {
        #[command(flatten)]
        common: Common,
    },
}

fn load_config(common: &Common) -> Result<Config> {
    let mut cfg = match &common.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn parse_algorithm(s: &str) -> Result<Algorithm> {
    s.parse().map_err(|_| {
        CliError::Config(ConfigError {
            line: None,
            field: Some("--algo".into()),
            msg: format!("unknown algorithm '{s}'"),
        })
    })
}

fn write_out(out: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, bytes).map_err(|e| CliError::io(p, e)),
        None => std::io::stdout()
            .write_all(bytes)
            .map_err(|e| CliError::io("<stdout>", e)),
    }
}

fn schedule_csv(s: &ScheduleFile) -> Result<Vec<u8>> {
    let mut wtr = csv::Writer::from_writer(Vec::new());
    wtr.write_record(["user_id", "start_s", "duration_s", "power_w", "energy_j"])?;
    for a in &s.allocations {
        wtr.write_record([
            a.user_id.to_string(),
            fmt_f64(a.start_time_s),
            fmt_f64(a.duration_s),
            fmt_f64(a.power_w),
            fmt_f64(a.energy_used_j),
        ])?;
    }
    wtr.into_inner()
        .map_err(|e| CliError::io("<csv output>", e.into_error()))
}

/// Execute a parsed command. Diagnostics go to `log`.
pub fn execute(cli: Cli, log: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::Sweep {
            common,
            algo,
            format,
        } => {
            let mut cfg = load_config(&common)?;
            if !algo.is_empty() {
                cfg.algorithms = algo;
            }
            let spec = SweepSpec::try_from(cfg)?;
            let outcome = run_sweep(&spec)?;
            let _ = write!(log, "{}", outcome.summary_table());
            match format {
                Format::Csv => {
                    let mut buf = Vec::new();
                    write_csv(outcome.variable, &outcome.results(), &mut buf)?;
                    write_out(common.out.as_deref(), &buf)
                }
                Format::Text => {
                    write_out(common.out.as_deref(), outcome.summary_table().as_bytes())
                }
            }
        }
        Command::Schedule {
            instance,
            common,
            algo,
            format,
        } => {
            let alg = parse_algorithm(&algo)?;
            let cfg = load_config(&common)?;
            let r = match &instance {
                Some(p) => {
                    let text = std::fs::read_to_string(p).map_err(|e| CliError::io(p, e))?;
                    Realization::from_text(&text).map_err(CliError::Core)?
                }
                None => {
                    cfg.check("")?;
                    cfg.base_point()
                        .realization(cfg.seed)
                        .map_err(CliError::Core)?
                }
            };
            let s = sched::run(alg, &r.users, &r.sys, cfg.caps())?;
            let file = ScheduleFile::from(&s);
            let bytes = match format {
                Format::Text => file.to_text().into_bytes(),
                Format::Csv => schedule_csv(&file)?,
            };
            write_out(common.out.as_deref(), &bytes)
        }
        Command::Validate { instance, schedule } => {
            let report = validate_files(&instance, &schedule)?;
            let _ = writeln!(log, "{report}");
            if report.passed() {
                Ok(())
            } else {
                Err(CliError::Validation(report))
            }
        }
        Command::Gen { common } => {
            let cfg = load_config(&common)?;
            cfg.check("")?;
            let r = cfg
                .base_point()
                .realization(cfg.seed)
                .map_err(CliError::Core)?;
            write_out(common.out.as_deref(), r.to_text().as_bytes())
        }
    }
}
