//! `gridstab` command-line tool.
//!
//! Exit status: 0 success, 1 usage, 2 unreadable or invalid input,
//! 3 numerical failure, 4 counterexample found by an experiment.

mod commands;
mod error;
mod gridfile;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{Format, Kind, SimArgs};
use error::CliError;

#[derive(Parser)]
#[command(name = "gridstab", version, about = "Steady-state stability of synchronous grid topologies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Full analysis of a grid file: Y0, reduced Y, P, spectrum, alpha2.
    Analyze {
        path: PathBuf,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        #[arg(long, default_value_t = 1.0)]
        kappa: f64,
    },
    /// Closed-form vs numeric stability values of odd circulant grids.
    Circulant {
        #[arg(long)]
        n_max: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Quadratic surface fit of a circulant sweep CSV.
    Fit {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Diameter test over all labeled trees on n nodes.
    Trees {
        #[arg(long)]
        n: usize,
        /// Per-tree CSV report.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Adds every absent edge to a tree and ranks by cycle length.
    Cycles {
        #[arg(long)]
        tree: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Ranks every single edge joining two trees.
    Join {
        #[arg(long)]
        t1: PathBuf,
        #[arg(long)]
        t2: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Linearized swing response to a rectangular pulse.
    Simulate {
        #[arg(long)]
        grid: PathBuf,
        #[arg(long, default_value_t = 0.2)]
        gamma: f64,
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        #[arg(long, default_value_t = 13.0)]
        t_end: f64,
        #[arg(long, default_value_t = 0)]
        pulse_gen: usize,
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        pulse_mag: f64,
        #[arg(long, default_value_t = 3.0)]
        t_on: f64,
        #[arg(long, default_value_t = 3.1)]
        t_off: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Writes a named topology as a grid file.
    Gen {
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: Option<usize>,
        /// Branch susceptance.
        #[arg(long, default_value_t = -1.0, allow_negative_numbers = true)]
        b: f64,
        /// Generator shunt susceptance.
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        shunt_b: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<u8, CliError> {
    match cli.command {
        Command::Analyze { path, format, kappa } => commands::analyze_cmd(&path, format, kappa),
        Command::Circulant { n_max, out } => commands::circulant_cmd(n_max, out.as_deref()),
        Command::Fit { input, out } => commands::fit_cmd(&input, out.as_deref()),
        Command::Trees { n, out } => commands::trees_cmd(n, out.as_deref()),
        Command::Cycles { tree, out } => commands::cycles_cmd(&tree, out.as_deref()),
        Command::Join { t1, t2, out } => commands::join_cmd(&t1, &t2, out.as_deref()),
        Command::Simulate {
            grid,
            gamma,
            dt,
            t_end,
            pulse_gen,
            pulse_mag,
            t_on,
            t_off,
            out,
        } => {
            let args = SimArgs {
                gamma,
                dt,
                t_end,
                pulse_gen,
                pulse_mag,
                t_on,
                t_off,
            };
            commands::simulate_cmd(&grid, &args, out.as_deref())
        }
        Command::Gen {
            kind,
            n,
            k,
            b,
            shunt_b,
            out,
        } => commands::gen_cmd(kind, n, k, b, shunt_b, out.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
