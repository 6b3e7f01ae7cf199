#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::commands::Failure;
use crate::config::{Format, Overrides, RunConfig};

#[derive(Parser)]
#[command(name = "birkhoff", version, about = "Multifractal spectra of Birkhoff averages")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Builtin name or path to a TOML file with a [system] section.
    #[arg(long)]
    system: Option<String>,
    /// `lyapunov`, a builtin name, or comma-separated values.
    #[arg(long, allow_hyphen_values = true)]
    family: Option<String>,
    /// TOML config file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Truncation level of infinite systems.
    #[arg(long)]
    truncation: Option<usize>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    #[arg(long)]
    tol_root: Option<f64>,
    #[arg(long)]
    tol_grad: Option<f64>,
}

#[derive(Args, Clone, Default)]
struct GridArgs {
    /// Number of grid points.
    #[arg(long)]
    grid: Option<usize>,
    /// Upper end of the sampled exponent range.
    #[arg(long)]
    xi_cap: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Sample the spectrum t(xi) and write the curve.
    Spectrum {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Tabulate P and its gradient over a rectangle.
    PressureSurface {
        #[command(flatten)]
        common: Common,
        /// `lo:hi`
        #[arg(long, default_value = "0:2", value_parser = parse_range, allow_hyphen_values = true)]
        t_range: (f64, f64),
        /// `lo:hi`
        #[arg(long, default_value = "-2:2", value_parser = parse_range, allow_hyphen_values = true)]
        q_range: (f64, f64),
        /// Samples per axis.
        #[arg(long, default_value_t = 41)]
        steps: usize,
    },
    /// Equilibrium state at (t, q).
    Gibbs {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_hyphen_values = true)]
        t: f64,
        #[arg(long, allow_hyphen_values = true)]
        q: f64,
    },
    /// Run the property checks and print a pass/fail table.
    Diagnostics {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// List the builtin systems.
    ListBuiltins,
}

fn parse_range(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(':').ok_or_else(|| format!("expected lo:hi, got `{s}`"))?;
    let lo: f64 = a.trim().parse().map_err(|_| format!("bad number `{a}`"))?;
    let hi: f64 = b.trim().parse().map_err(|_| format!("bad number `{b}`"))?;
    if !(lo <= hi) {
        return Err(format!("empty range {lo}:{hi}"));
    }
    Ok((lo, hi))
}

fn resolve(common: &Common, grid: &GridArgs) -> Result<RunConfig, Failure> {
    let ov = Overrides {
        config: common.config.clone(),
        system: common.system.clone(),
        family: common.family.clone(),
        truncation: common.truncation,
        grid: grid.grid,
        xi_cap: grid.xi_cap,
        tol_root: common.tol_root,
        tol_grad: common.tol_grad,
    };
    let cfg = RunConfig::resolve(&ov).map_err(Failure::validation)?;
    if let Some(out) = &common.out {
        output::check_writable(out).map_err(Failure::validation)?;
    }
    Ok(cfg)
}

fn run(cli: Cli) -> commands::Outcome {
    match cli.command {
        Command::Spectrum { common, grid } => {
            let cfg = resolve(&common, &grid)?;
            commands::spectrum(&cfg, common.format, common.out.as_deref())
        }
        Command::PressureSurface {
            common,
            t_range,
            q_range,
            steps,
        } => {
            let cfg = resolve(&common, &GridArgs::default())?;
            commands::pressure_surface(&cfg, t_range, q_range, steps, common.format, common.out.as_deref())
        }
        Command::Gibbs { common, t, q } => {
            let cfg = resolve(&common, &GridArgs::default())?;
            commands::gibbs(&cfg, t, q, common.format, common.out.as_deref())
        }
        Command::Diagnostics { common, grid } => {
            let cfg = resolve(&common, &grid)?;
            commands::diagnostics(&cfg, common.out.as_deref())
        }
        Command::ListBuiltins => {
            commands::list_builtins();
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.exit_code())
        }
    }
}
