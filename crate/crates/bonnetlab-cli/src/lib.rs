//! Command-line front end for `bonnetlab`: reads a TOML run configuration,
//! runs the requested analyses and writes a JSON report plus mesh and CSV
//! artifacts.
//!
//! Exit status: 0 when every check passes, 2 for configuration errors, 3
//! when a check fails or a module reports a numerical failure, 1 when the
//! report or artifacts cannot be written.

pub mod commands;
pub mod config;
pub mod export;
pub mod lines;
pub mod report;
pub mod surface;

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, ValueEnum};

use crate::commands::{execute, Context};
use crate::config::{Command, ConfigError, RunConfig};
use crate::report::{Provenance, Report};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_CHECKS: i32 = 3;

/// Environment variable capping the worker threads.
pub const THREADS_VAR: &str = "BONNETLAB_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Action {
    Analyze,
    Classify,
    Lines,
    Index,
    GlobalChecks,
    Mates,
    Deform,
    Verify,
    /// Every command listed under `commands` in the config, in order.
    Run,
}

impl Action {
    fn command(self) -> Option<Command> {
        Some(match self {
            Action::Analyze => Command::Analyze,
            Action::Classify => Command::Classify,
            Action::Lines => Command::Lines,
            Action::Index => Command::Index,
            Action::GlobalChecks => Command::GlobalChecks,
            Action::Mates => Command::Mates,
            Action::Deform => Command::Deform,
            Action::Verify => Command::Verify,
            Action::Run => return None,
        })
    }
}

#[derive(Debug, Parser)]
#[command(name = "bonnetlab", version, about = "Invariants, Bonnet mates and bendings of surfaces in R^4")]
pub struct Cli {
    pub action: Action,
    /// TOML run configuration.
    #[arg(long)]
    pub config: PathBuf,
    /// Artifact directory (overrides `output.dir`); without one the report goes to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Grid size override, e.g. `64x48`.
    #[arg(long)]
    pub grid: Option<String>,
    /// Tolerance override `KEY=VAL`; repeatable.
    #[arg(long = "tol", value_name = "KEY=VAL")]
    pub tol: Vec<String>,
}

/// Parsed and validated inputs of one invocation.
pub struct Plan {
    pub cfg: RunConfig,
    pub commands: Vec<Command>,
    pub threads: Option<usize>,
}

pub fn plan(cli: &Cli, threads_var: Option<&str>) -> Result<Plan, ConfigError> {
    let mut cfg = RunConfig::load(&cli.config)?;
    if let Some(g) = &cli.grid {
        cfg.set_grid(g)?;
    }
    for t in &cli.tol {
        cfg.tolerances.set(t)?;
    }
    if let Some(o) = &cli.out {
        cfg.output.dir = Some(o.clone());
    }
    let commands = match cli.action.command() {
        Some(c) => vec![c],
        None if cfg.commands.is_empty() => return Err(ConfigError::new("'run' needs a nonempty 'commands' list in the config")),
        None => cfg.commands.clone(),
    };
    let threads = match threads_var {
        None => None,
        Some(s) => match s.trim().parse::<usize>() {
            Ok(n) if n > 0 => Some(n),
            _ => return Err(ConfigError::new(format!("{THREADS_VAR} must be a positive integer, got '{s}'"))),
        },
    };
    Ok(Plan { cfg, commands, threads })
}

/// Run the commands and assemble the report; only configuration problems
/// are errors here.
pub fn build_report(cfg: &RunConfig, commands: &[Command]) -> Result<Report, ConfigError> {
    let surface = surface::build_surface(&cfg.surface)?;
    let grid = surface::build_grid(&surface.chart, &cfg.grid)?;
    let out = cfg.output.dir.as_deref();
    if let Some(dir) = out {
        std::fs::create_dir_all(dir).map_err(|e| ConfigError::new(format!("cannot create output directory {}: {e}", dir.display())))?;
    }
    let ctx = Context { cfg, chart: &surface.chart, entry: surface.entry.as_ref(), grid, out };
    let blocks = commands.iter().map(|&c| execute(c, &ctx)).collect();
    let provenance = Provenance {
        tool: "bonnetlab",
        tool_version: env!("CARGO_PKG_VERSION"),
        library_version: bonnetlab::VERSION,
        surface: cfg.surface.clone(),
        chart: surface.chart.name.clone(),
        grid,
        commands: commands.to_vec(),
        tolerances: cfg.tolerances,
    };
    Ok(Report::new(provenance, blocks))
}

pub fn main_with(cli: Cli) -> i32 {
    let plan = match plan(&cli, std::env::var(THREADS_VAR).ok().as_deref()) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    if let Some(n) = plan.threads {
        // fails only if a pool already exists, which cannot happen here
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let report = match build_report(&plan.cfg, &plan.commands) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    let json = report.to_json();
    let written = match &plan.cfg.output.dir {
        Some(dir) => std::fs::write(dir.join(&plan.cfg.output.report), &json),
        None => std::io::stdout().lock().write_all(json.as_bytes()),
    };
    if let Err(e) = written {
        eprintln!("error: writing report: {e}");
        return EXIT_IO;
    }
    for f in &report.summary.failures {
        eprintln!("FAIL {f}");
    }
    if report.summary.pass {
        EXIT_OK
    } else {
        EXIT_CHECKS
    }
}
