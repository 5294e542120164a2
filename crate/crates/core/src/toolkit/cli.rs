//! `x3hd` command line.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 internal error,
//! 3 solver and oracle disagree.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use super::bench::{self, BenchConfig};
use super::format::{parse, render};
use super::generate::generate;
use super::report::{oracle_json, poly_text, report_json, stats_text};
use crate::model::Formula;
use crate::oracle::{hd_oracle, hd_oracle_with_limit, MAX_ENUMERABLE_VARS};
use crate::solver::{solve, SolveError, SolveOptions, DEFAULT_BASE_THRESHOLD};

pub const EXIT_OK: u8 = 0;
pub const EXIT_USAGE: u8 = 1;
pub const EXIT_INTERNAL: u8 = 2;
pub const EXIT_MISMATCH: u8 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "x3hd",
    version,
    about = "Hamming-distance polynomials of X3SAT instances"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve an instance with the branch-and-reduce solver.
    Solve {
        file: PathBuf,
        #[arg(long)]
        json: bool,
        #[arg(long)]
        stats: bool,
        #[arg(long, default_value_t = DEFAULT_BASE_THRESHOLD)]
        base_threshold: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Evaluate sibling branches on several threads (same output).
        #[arg(long)]
        parallel: bool,
    },
    /// Brute-force reference polynomial.
    Oracle {
        file: PathBuf,
        #[arg(long)]
        json: bool,
        /// Lift the default 24-variable limit.
        #[arg(long)]
        force: bool,
    },
    /// Compare solver and oracle; exit 3 on mismatch.
    Diff { file: PathBuf },
    /// Write a random instance.
    Gen {
        #[arg(long)]
        n: u32,
        /// Defaults to ⌊2n/3⌋.
        #[arg(long)]
        m: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        planted: bool,
        #[arg(short = 'o', long = "output")]
        output: Option<PathBuf>,
    },
    /// Time the solver on planted instances.
    Bench {
        #[arg(long)]
        nmin: u32,
        #[arg(long)]
        nmax: u32,
        #[arg(long, default_value_t = 1)]
        step: u32,
        #[arg(long, default_value_t = 1)]
        trials: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        csv: bool,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl ToString) -> Self {
        Failure {
            code: EXIT_USAGE,
            message: message.to_string(),
        }
    }
}

impl From<SolveError> for Failure {
    fn from(e: SolveError) -> Self {
        let code = match e {
            SolveError::Malformed(_) => EXIT_USAGE,
            SolveError::Internal(_) => EXIT_INTERNAL,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn load(path: &Path) -> Result<Formula, Failure> {
    let text =
        fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    parse(&text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn json_line(v: &serde_json::Value) -> String {
    serde_json::to_string(v).expect("serializable") + "\n"
}

fn execute(cmd: Command) -> Result<(String, u8), Failure> {
    match cmd {
        Command::Solve {
            file,
            json,
            stats,
            base_threshold,
            seed,
            parallel,
        } => {
            let f = load(&file)?;
            let opts = SolveOptions {
                base_threshold,
                seed,
                parallel,
                ..SolveOptions::default()
            };
            let r = solve(&f, &opts)?;
            let out = if json {
                json_line(&report_json(&r))
            } else if stats {
                poly_text(&r.poly) + &stats_text(&r.stats)
            } else {
                poly_text(&r.poly)
            };
            Ok((out, EXIT_OK))
        }
        Command::Oracle { file, json, force } => {
            let f = load(&file)?;
            let poly = if force {
                hd_oracle_with_limit(&f, MAX_ENUMERABLE_VARS)
            } else {
                hd_oracle(&f)
            }
            .map_err(|e| Failure::usage(format!("{e} (use --force to override)")))?;
            let out = if json {
                json_line(&oracle_json(f.n_vars, f.clauses.len(), &poly))
            } else {
                poly_text(&poly)
            };
            Ok((out, EXIT_OK))
        }
        Command::Diff { file } => {
            let f = load(&file)?;
            let expected = hd_oracle(&f).map_err(Failure::usage)?;
            let got = solve(&f, &SolveOptions::default())?.poly;
            if got == expected {
                Ok((format!("ok {got}\n"), EXIT_OK))
            } else {
                Ok((
                    format!("mismatch\nsolver: {got}\noracle: {expected}\n"),
                    EXIT_MISMATCH,
                ))
            }
        }
        Command::Gen {
            n,
            m,
            seed,
            planted,
            output,
        } => {
            let m = m.unwrap_or((2 * n / 3) as usize);
            let text = render(&generate(n, m, seed, planted).map_err(Failure::usage)?);
            match output {
                Some(path) => {
                    fs::write(&path, text)
                        .map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
                    Ok((String::new(), EXIT_OK))
                }
                None => Ok((text, EXIT_OK)),
            }
        }
        Command::Bench {
            nmin,
            nmax,
            step,
            trials,
            seed,
            csv,
        } => {
            if nmin > nmax || step == 0 {
                return Err(Failure::usage("need nmin <= nmax and step >= 1"));
            }
            let cfg = BenchConfig {
                nmin,
                nmax,
                step,
                trials,
                seed,
            };
            let rows = bench::run(&cfg, &SolveOptions::default()).map_err(|e| match e {
                bench::BenchError::Solve(s) => Failure::from(s),
                other => Failure::usage(other),
            })?;
            let out = if csv {
                bench::render_csv(&rows)
            } else {
                bench::render_table(&rows)
            };
            Ok((out, EXIT_OK))
        }
    }
}

/// Runs the CLI, writing to the given streams, and returns the exit code.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = err.write_all(text.as_bytes());
                return EXIT_USAGE;
            }
            let _ = out.write_all(text.as_bytes());
            return EXIT_OK;
        }
    };
    match execute(cli.command) {
        Ok((text, code)) => {
            let _ = out.write_all(text.as_bytes());
            code
        }
        Err(f) => {
            let _ = writeln!(err, "x3hd: {}", f.message);
            f.code
        }
    }
}

pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(args, &mut stdout.lock(), &mut stderr.lock())
}
