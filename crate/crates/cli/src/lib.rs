//! `cfk`: checks, constructions and JSON reports for `.cfk` documents.
//!
//! Exit codes: 0 when every check passes, 1 when some check fails, 2 for
//! unreadable or invalid input, 3 when a search exceeds its unknown cap.

pub mod commands;
pub mod corpus;
pub mod error;
pub mod report;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use cfk_core::constraints::{Grid, DEFAULT_GRID_CAP};
use cfk_core::structure::DEFAULT_MAX_DEPTH;
use cfk_core::Rational;
use clap::{Args, Parser, Subcommand};

use crate::commands::*;
use crate::corpus::{parse_param, run_corpus, Outcome};
use crate::error::CliError;
use crate::report::{Report, Status};

pub const EXIT_PASS: u8 = 0;
pub const EXIT_FAIL: u8 = 1;
pub const EXIT_INPUT: u8 = 2;
pub const EXIT_CAP: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "cfk", version, about = "Exact checks for finite conformal algebras")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Input {
    /// The `.cfk` document.
    pub file: PathBuf,
    /// Bind a parameter, e.g. `--param a=1/2` (repeatable).
    #[arg(long = "param", value_name = "NAME=RAT", value_parser = parse_param)]
    pub params: Vec<(String, Rational)>,
    /// Write the JSON report here and print a summary instead.
    #[arg(long, value_name = "PATH")]
    pub json: Option<PathBuf>,
}

impl Input {
    fn bindings(&self) -> BTreeMap<String, Rational> {
        self.params.iter().cloned().collect()
    }
}

#[derive(Debug, Args)]
pub struct GridArgs {
    /// Largest numerator magnitude on the grid.
    #[arg(long, default_value_t = 2)]
    pub grid_num: i64,
    /// Largest denominator on the grid.
    #[arg(long, default_value_t = 2)]
    pub grid_den: i64,
    /// Refuse to search more unknowns than this.
    #[arg(long, default_value_t = DEFAULT_GRID_CAP)]
    pub cap: usize,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check axioms, modules, pairs, maps and morphisms.
    Check {
        #[command(flatten)]
        input: Input,
        /// Declarations to check (all when omitted).
        names: Vec<String>,
    },
    /// Build the bicrossed product of a matched pair.
    Bicrossed {
        #[command(flatten)]
        input: Input,
        pair: String,
        /// Where to write the algebra.
        #[arg(short = 'o', value_name = "PATH")]
        out: Option<PathBuf>,
        /// Name of the written algebra.
        #[arg(long, default_value = "E")]
        name: String,
    },
    /// Verify a deformation map and build the deformed algebra.
    Deform {
        #[command(flatten)]
        input: Input,
        pair: String,
        defmap: String,
        #[arg(short = 'o', value_name = "PATH")]
        out: Option<PathBuf>,
        /// Name of the written algebra (default `Q_<defmap>`).
        #[arg(long)]
        name: Option<String>,
    },
    /// Compile deformation-map constraints over a degree ansatz.
    Constraints {
        #[command(flatten)]
        input: Input,
        pair: String,
        #[arg(long, default_value_t = 0)]
        degree: u32,
        /// Where to write the constraint system.
        #[arg(short = 'o', value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Eliminate and grid-search a constraint system.
    Solve {
        system: PathBuf,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, value_name = "PATH")]
        json: Option<PathBuf>,
    },
    /// Check declared equivalences.
    Equiv {
        #[command(flatten)]
        input: Input,
        names: Vec<String>,
    },
    /// Search for an equivalence between two deformation maps.
    Search {
        #[command(flatten)]
        input: Input,
        pair: String,
        phi: String,
        psi: String,
        #[arg(long, default_value_t = 0)]
        degree: u32,
        /// Restrict to diagonal maps.
        #[arg(long)]
        diagonal: bool,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Check morphisms and whether they are isomorphisms.
    Morphism {
        #[command(flatten)]
        input: Input,
        names: Vec<String>,
    },
    /// Derived series and solvability.
    Structure {
        #[command(flatten)]
        input: Input,
        algebra: String,
        #[arg(long, default_value_t = DEFAULT_MAX_DEPTH)]
        max_depth: usize,
    },
    /// Everything about every declaration.
    Report {
        #[command(flatten)]
        input: Input,
    },
    /// Run the golden fixtures.
    Corpus {
        #[arg(default_value = "corpus")]
        dir: PathBuf,
        /// Regenerate the goldens instead of comparing.
        #[arg(long)]
        bless: bool,
    },
}

fn emit(report: &Report, json: Option<&Path>, out: &mut dyn Write) -> Result<u8, CliError> {
    let text = serde_json::to_string_pretty(&report.to_value(true)).expect("json serializes") + "\n";
    match json {
        Some(path) => {
            std::fs::write(path, text).map_err(|source| CliError::Write {
                path: path.display().to_string(),
                source,
            })?;
            let _ = out.write_all(report.summary().as_bytes());
        }
        None => {
            let _ = out.write_all(text.as_bytes());
        }
    }
    Ok(match report.status() {
        Status::Pass => EXIT_PASS,
        Status::Fail => EXIT_FAIL,
    })
}

fn with_input(
    input: &Input,
    err: &mut dyn Write,
    f: impl FnOnce(&Loaded) -> Result<Report, CliError>,
) -> Result<(Report, Option<PathBuf>), CliError> {
    let loaded = load(&input.file, &input.bindings())?;
    for w in &loaded.warnings {
        let _ = writeln!(err, "{w}");
    }
    Ok((f(&loaded)?, input.json.clone()))
}

fn execute(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<u8, CliError> {
    let (report, json) = match cli.command {
        Command::Check { input, names } => with_input(&input, err, |l| cmd_check(l, &names))?,
        Command::Bicrossed { input, pair, out, name } => {
            with_input(&input, err, |l| cmd_bicrossed(l, &pair, out.as_deref(), &name))?
        }
        Command::Deform {
            input,
            pair,
            defmap,
            out,
            name,
        } => {
            let name = name.unwrap_or_else(|| format!("Q_{defmap}"));
            with_input(&input, err, |l| cmd_deform(l, &pair, &defmap, out.as_deref(), &name))?
        }
        Command::Constraints {
            input,
            pair,
            degree,
            out,
        } => with_input(&input, err, |l| cmd_constraints(l, &pair, degree, out.as_deref()).map(|(r, _)| r))?,
        Command::Solve { system, grid, json } => (cmd_solve(&system, grid.grid_num, grid.grid_den, grid.cap)?, json),
        Command::Equiv { input, names } => with_input(&input, err, |l| cmd_equiv(l, &names))?,
        Command::Search {
            input,
            pair,
            phi,
            psi,
            degree,
            diagonal,
            grid,
        } => {
            let grid = Grid {
                max_num: grid.grid_num,
                max_den: grid.grid_den,
                cap: grid.cap,
            };
            with_input(&input, err, |l| cmd_search(l, &pair, &phi, &psi, degree, diagonal, grid))?
        }
        Command::Morphism { input, names } => with_input(&input, err, |l| cmd_morphism(l, &names))?,
        Command::Structure {
            input,
            algebra,
            max_depth,
        } => with_input(&input, err, |l| cmd_structure(l, &algebra, max_depth))?,
        Command::Report { input } => with_input(&input, err, cmd_report)?,
        Command::Corpus { dir, bless } => {
            let results = run_corpus(&dir, bless)?;
            let mut failed = false;
            for r in results {
                let line = match r.outcome {
                    Outcome::Match => format!("ok       {}", r.name),
                    Outcome::Blessed => format!("blessed  {}", r.name),
                    Outcome::Missing => {
                        failed = true;
                        format!("missing  {} (run with --bless)", r.name)
                    }
                    Outcome::Mismatch { line, expected, actual } => {
                        failed = true;
                        format!("DIFF     {} at line {line}\n  expected: {expected}\n  actual:   {actual}", r.name)
                    }
                };
                let _ = writeln!(out, "{line}");
            }
            return Ok(if failed { EXIT_FAIL } else { EXIT_PASS });
        }
    };
    emit(&report, json.as_deref(), out)
}

/// Runs the command line `args` (program name first) and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
                return EXIT_INPUT;
            }
            let _ = write!(out, "{}", e.render());
            return EXIT_PASS;
        }
    };
    match execute(cli, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
