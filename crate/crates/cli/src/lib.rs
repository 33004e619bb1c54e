//! Command-line front end: loads a scenario, runs it and writes reports.
//!
//! Exit status is 0 when every run completed (whatever its verdict), 1 for
//! configuration errors and 2 when a run or report write failed.

pub mod config;
pub mod fixtures;
pub mod runner;

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use elemdyn_core::report::Format;
use elemdyn_core::Mode;

use crate::config::{parse_config, ScenarioConfig, Task};
use crate::runner::{config_hash, render, run_scenario, summary_line, write_report};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "elemdyn",
    version,
    about = "Decay criteria and witnesses for elementary operators F -> W F U"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Scenario file, or the name of a shipped fixture
    pub scenario: String,
    /// Scalar mode, overriding the scenario
    #[arg(long)]
    pub mode: Option<Mode>,
    /// Report directory; without it reports go to stdout
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// json, csv or table; may be repeated
    #[arg(long = "format")]
    pub formats: Vec<Format>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Execute every run of a scenario
    Run(Common),
    /// Execute the criterion runs
    Check {
        #[command(flatten)]
        common: Common,
        /// Only runs of this criterion id
        #[arg(long)]
        criterion: Option<String>,
    },
    /// Execute the witness runs
    Witness(Common),
    /// Execute the orbit runs
    Orbit(Common),
    /// Execute the compression-norm table runs
    Norms(Common),
    /// Parse and validate a scenario without running it
    Validate {
        scenario: String,
    },
    /// List the shipped fixtures
    Fixtures,
}

/// Reads a scenario from disk, falling back to the shipped fixtures.
pub fn load_scenario(name: &str) -> Result<String, String> {
    let path = std::path::Path::new(name);
    if path.exists() {
        return std::fs::read_to_string(path).map_err(|e| format!("{name}: {e}"));
    }
    fixtures::fixture(name)
        .map(str::to_string)
        .ok_or_else(|| format!("'{name}' is neither a file nor a shipped fixture"))
}

fn load(name: &str, err: &mut dyn Write) -> Option<(String, ScenarioConfig)> {
    let text = match load_scenario(name) {
        Ok(t) => t,
        Err(m) => {
            let _ = writeln!(err, "error: {m}");
            return None;
        }
    };
    match parse_config(&text) {
        Ok(cfg) => Some((text, cfg)),
        Err(e) => {
            let _ = writeln!(err, "config error in {name}: {e}");
            None
        }
    }
}

fn execute(
    common: &Common,
    keep: impl Fn(&Task) -> bool,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> i32 {
    let Some((text, mut cfg)) = load(&common.scenario, err) else {
        return EXIT_CONFIG;
    };
    if let Some(m) = common.mode {
        cfg.mode = m;
    }
    cfg.runs.retain(|r| keep(&r.task));
    let hash = config_hash(&text, common.mode);
    let reports = run_scenario(&cfg, &hash);
    let mut status = if reports.iter().any(|r| r.is_error()) {
        EXIT_RUNTIME
    } else {
        EXIT_OK
    };
    let dir = common.out.clone().or_else(|| cfg.output.dir.clone());
    match dir {
        Some(dir) => {
            let formats = if common.formats.is_empty() {
                cfg.output.formats.clone()
            } else {
                common.formats.clone()
            };
            for r in &reports {
                let _ = writeln!(out, "{}", summary_line(r));
                for f in &formats {
                    match write_report(&dir, r, *f) {
                        Ok(p) => {
                            let _ = writeln!(out, "  {}", p.display());
                        }
                        Err(e) => {
                            let _ = writeln!(err, "error writing {} report for {}: {e}", f, r.run);
                            status = EXIT_RUNTIME;
                        }
                    }
                }
            }
        }
        None => {
            let formats = if common.formats.is_empty() {
                vec![Format::Text]
            } else {
                common.formats.clone()
            };
            for r in &reports {
                for f in &formats {
                    match render(r, *f) {
                        Ok(s) => {
                            let _ = write!(out, "{s}");
                            let _ = writeln!(out);
                        }
                        Err(e) => {
                            let _ = writeln!(err, "error rendering {}: {e}", r.run);
                            status = EXIT_RUNTIME;
                        }
                    }
                }
            }
        }
    }
    for r in reports.iter().filter(|r| r.is_error()) {
        let _ = writeln!(err, "run {} failed: {}", r.run, summary_line(r));
    }
    status
}

/// Parses `args` (including the program name) and runs the command.
pub fn run_cli<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = if e.use_stderr() {
                write!(err, "{e}")
            } else {
                write!(out, "{e}")
            };
            return code;
        }
    };
    match cli.command {
        Command::Run(c) => execute(&c, |_| true, out, err),
        Command::Check { common, criterion } => execute(
            &common,
            |t| match t {
                Task::Criterion(c) => criterion.as_deref().is_none_or(|id| c.id() == id),
                _ => false,
            },
            out,
            err,
        ),
        Command::Witness(c) => execute(&c, |t| matches!(t, Task::Witness(_)), out, err),
        Command::Orbit(c) => execute(&c, |t| matches!(t, Task::Orbit(_)), out, err),
        Command::Norms(c) => execute(&c, |t| matches!(t, Task::Norms(_)), out, err),
        Command::Validate { scenario } => match load(&scenario, err) {
            Some((text, cfg)) => {
                let _ = writeln!(
                    out,
                    "{}: ok ({} operators, {} systems, {} runs, sha256:{})",
                    cfg.name,
                    cfg.operators.len(),
                    cfg.systems.len(),
                    cfg.runs.len(),
                    config_hash(&text, None)
                );
                for r in &cfg.runs {
                    let _ = writeln!(out, "  line {:>3}  {:<28} {:<10} system {}", r.line, r.id, r.task.kind(), r.system);
                }
                EXIT_OK
            }
            None => EXIT_CONFIG,
        },
        Command::Fixtures => {
            for n in fixtures::names() {
                let _ = writeln!(out, "{n}");
            }
            EXIT_OK
        }
    }
}
