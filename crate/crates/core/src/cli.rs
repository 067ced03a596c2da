//! The `walras` command-line tool.
//!
//! Exit codes: 0 when something was found or verified, 1 for a negative
//! result on valid input, 2 for invalid input.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::arrow_debreu::reduce;
use crate::config_lp::{build_dual_lp, build_induced_lp};
use crate::demand::all_demand_sets;
use crate::equilibrium::{
    brute_force_we, solve_fractional_we, solve_we, verify_fractional_we, verify_we, SolveOptions, SolveStatus,
};
use crate::error::{Error, Result};
use crate::io::{load_instance, parse_alloc, parse_frac, parse_instance, parse_prices};
use crate::lp::solve_lp;
use crate::model::{validate_instance, AuctionInstance};
use crate::rational::parse_rational;
use crate::report::{render, BruteReport, DemandReport, ReduceReport, SolveReport, ValidateReport, VerifyReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_INVALID: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "walras", version, about = "Walrasian equilibria for combinatorial auctions, in exact arithmetic")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Mode {
    /// Integral equilibrium.
    We,
    /// Fractional equilibrium only.
    Frac,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check an instance file against every utility invariant.
    Validate { path: PathBuf },
    /// Print every bidder's demand set at the given prices.
    Demand {
        path: PathBuf,
        /// Comma-separated item prices, e.g. `1,3/2`.
        #[arg(long, allow_hyphen_values = true)]
        prices: String,
    },
    /// Search for an equilibrium.
    Solve {
        path: PathBuf,
        /// Grid points per axis on the first pass.
        #[arg(long, default_value_t = 5)]
        grid: usize,
        /// Local refinement rounds.
        #[arg(long, default_value_t = 3)]
        refine: usize,
        /// Bound reported against the best gap when no zero is found.
        #[arg(long, default_value = "1/1000")]
        eps: String,
        #[arg(long, value_enum, default_value = "we")]
        mode: Mode,
        /// Also seed the search with a price adjustment path.
        #[arg(long)]
        tatonnement: bool,
        /// Write the report here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Dump the induced configuration LP (or its dual) at the given prices.
    Configlp {
        path: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        prices: String,
        #[arg(long)]
        dual: bool,
        /// Also solve the program and print the solution.
        #[arg(long)]
        solve: bool,
    },
    /// Print the corresponding exchange market.
    Reduce { path: PathBuf },
    /// Check an integral or fractional allocation at the given prices.
    Verify {
        path: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        prices: String,
        /// Integral allocation, e.g. `1:a+b,2:-`.
        #[arg(long, allow_hyphen_values = true, required_unless_present = "frac", conflicts_with = "frac")]
        alloc: Option<String>,
        /// Fractional allocation, e.g. `1:a+b@1/2,1:@1/2`.
        #[arg(long, allow_hyphen_values = true)]
        frac: Option<String>,
    },
    /// List every equilibrium with prices on a grid of the given step.
    Brute {
        path: PathBuf,
        #[arg(long)]
        step: String,
    },
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn load(path: &Path) -> Result<AuctionInstance> {
    load_instance(&read(path)?)
}

/// Runs the tool on `args` (program name first) and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let rendered = e.render().to_string();
            let _ = if code == 0 {
                out.write_all(rendered.as_bytes())
            } else {
                err.write_all(rendered.as_bytes())
            };
            return if code == 0 { EXIT_OK } else { EXIT_INVALID };
        }
    };
    match dispatch(cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_INVALID
        }
    }
}

fn emit(out: &mut dyn Write, text: &str) -> Result<()> {
    out.write_all(text.as_bytes())
        .map_err(|e| Error::Parse(format!("writing output: {e}")))
}

fn dispatch(command: Command, out: &mut dyn Write) -> Result<i32> {
    match command {
        Command::Validate { path } => {
            let instance = parse_instance(&read(&path)?)?;
            let report = validate_instance(&instance);
            emit(out, &render(&ValidateReport::new(&instance, &report)))?;
            Ok(if report.is_ok() { EXIT_OK } else { EXIT_INVALID })
        }
        Command::Demand { path, prices } => {
            let instance = load(&path)?;
            let prices = parse_prices(&instance, &prices)?;
            let sets = all_demand_sets(&instance, &prices)?;
            emit(out, &render(&DemandReport::new(&instance, &prices, &sets)))?;
            Ok(EXIT_OK)
        }
        Command::Solve {
            path,
            grid,
            refine,
            eps,
            mode,
            tatonnement,
            out: target,
        } => {
            let instance = load(&path)?;
            let options = SolveOptions {
                grid_k: grid,
                refinements: refine,
                eps: parse_rational(&eps)?,
                tatonnement,
            };
            let (label, outcome) = match mode {
                Mode::We => ("we", solve_we(&instance, &options)?),
                Mode::Frac => ("frac", solve_fractional_we(&instance, &options)?),
            };
            let verdict = match (&outcome.integral, &outcome.frac) {
                (Some(alloc), _) => Some(verify_we(&instance, &outcome.prices, alloc)?),
                (None, Some(frac)) => Some(verify_fractional_we(&instance, &outcome.prices, frac)?),
                (None, None) => None,
            };
            let text = render(&SolveReport::new(&instance, label, &options, &outcome, verdict.as_ref()));
            match target {
                Some(file) => std::fs::write(&file, text)
                    .map_err(|e| Error::Parse(format!("{}: {e}", file.display())))?,
                None => emit(out, &text)?,
            }
            let success = match mode {
                Mode::We => outcome.status == SolveStatus::WeFound,
                Mode::Frac => outcome.frac.is_some(),
            };
            Ok(if success { EXIT_OK } else { EXIT_NEGATIVE })
        }
        Command::Configlp {
            path,
            prices,
            dual,
            solve,
        } => {
            let instance = load(&path)?;
            let prices = parse_prices(&instance, &prices)?;
            let lp = if dual {
                build_dual_lp(&instance, &prices)?
            } else {
                build_induced_lp(&instance, &prices)?.lp
            };
            let mut text = lp.to_string();
            if solve {
                text.push_str(&solve_lp(&lp)?.render(&lp));
            }
            emit(out, &text)?;
            Ok(EXIT_OK)
        }
        Command::Reduce { path } => {
            let instance = load(&path)?;
            emit(out, &render(&ReduceReport::new(&reduce(&instance)?)))?;
            Ok(EXIT_OK)
        }
        Command::Verify {
            path,
            prices,
            alloc,
            frac,
        } => {
            let instance = load(&path)?;
            let prices = parse_prices(&instance, &prices)?;
            let report = match (alloc, frac) {
                (Some(text), _) => {
                    let alloc = parse_alloc(&instance, &text)?;
                    let verdict = verify_we(&instance, &prices, &alloc)?;
                    VerifyReport::new(&instance, &prices, Some(&alloc), None, &verdict)
                }
                (None, Some(text)) => {
                    let frac = parse_frac(&instance, &text)?;
                    let verdict = verify_fractional_we(&instance, &prices, &frac)?;
                    VerifyReport::new(&instance, &prices, None, Some(&frac), &verdict)
                }
                (None, None) => return Err(Error::Parse("one of --alloc or --frac is required".into())),
            };
            emit(out, &render(&report))?;
            Ok(if report.verdict.ok { EXIT_OK } else { EXIT_NEGATIVE })
        }
        Command::Brute { path, step } => {
            let instance = load(&path)?;
            let step = parse_rational(&step)?;
            let found = brute_force_we(&instance, &step)?;
            emit(out, &render(&BruteReport::new(&instance, &step, &found)))?;
            Ok(if found.is_empty() { EXIT_NEGATIVE } else { EXIT_OK })
        }
    }
}
