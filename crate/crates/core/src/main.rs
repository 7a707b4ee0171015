use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use sib::io::{generate, GenKind, GenParams, InstanceFile, Mode, ResultFile};
use sib::sib::{solve, SibInstance, SolveError, SolverOptions};
use sib::soft::{solve_soft, SoftSibInstance};

const EXIT_CODES: &str = "Exit codes:
  0  success
  1  unreadable, malformed or invalid input, or a bad flag
  2  degenerate instance (the bodies share a common point, optimal radius 0)
  3  iteration cap exhausted; the partial result is still written with \"converged\": false";

#[derive(Debug, Parser)]
#[command(name = "sib", version, about = "Smallest intersecting ball solver", after_help = EXIT_CODES)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve an instance file and write a JSON result.
    #[command(after_help = EXIT_CODES)]
    Solve {
        path: PathBuf,
        /// Relative accuracy; overrides the file.
        #[arg(long)]
        epsilon: Option<f64>,
        /// hard or soft; overrides the file.
        #[arg(long)]
        mode: Option<Mode>,
        /// Slack penalty for soft mode; overrides the file.
        #[arg(long = "C")]
        c: Option<f64>,
        /// Cap on game iterations per run.
        #[arg(long)]
        max_iters: Option<u64>,
        /// Output path, or - for standard output.
        #[arg(long, default_value = "-")]
        output: String,
        /// Worker threads for the per-body oracle calls.
        #[arg(long, default_value_t = 1)]
        threads: usize,
    },
    /// Parse and check an instance file without solving it.
    #[command(after_help = EXIT_CODES)]
    Validate { path: PathBuf },
    /// Write a random instance (ChaCha8 stream seeded with --seed).
    Gen {
        /// polytope, reduced_polytope, aabb, ball or ellipsoid
        kind: GenKind,
        #[arg(long, default_value_t = 10)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        d: usize,
        /// Points per polytope.
        #[arg(long, default_value_t = 4)]
        m: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output path, or - for standard output.
        #[arg(long, default_value = "-")]
        out: String,
    },
}

fn fail(message: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {message}");
    ExitCode::from(1)
}

fn write_output(target: &str, text: &str) -> Result<(), String> {
    if target == "-" {
        print!("{text}");
        Ok(())
    } else {
        std::fs::write(target, text).map_err(|e| format!("cannot write {target}: {e}"))
    }
}

fn load(path: &Path) -> Result<InstanceFile, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    InstanceFile::parse(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn run_solve(mut file: InstanceFile, output: &str, options: &SolverOptions) -> ExitCode {
    let bodies = match file.validate() {
        Ok(b) => b,
        Err(e) => return fail(e),
    };
    let start = Instant::now();
    let elapsed = |start: Instant| start.elapsed().as_secs_f64() * 1e3;
    let (result, code) = match file.mode {
        Mode::Hard => {
            let instance = match SibInstance::new(bodies, file.epsilon) {
                Ok(i) => i,
                Err(e) => return fail(e),
            };
            match solve(&instance, options) {
                Ok(sol) => (ResultFile::from_hard(&sol, true, elapsed(start)), 0),
                Err(SolveError::IterationCapExhausted { partial }) => {
                    eprintln!("warning: iteration cap exhausted before the accuracy target was certified");
                    (ResultFile::from_hard(&partial, false, elapsed(start)), 3)
                }
                Err(e @ SolveError::Degenerate { .. }) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
                Err(e) => return fail(e),
            }
        }
        Mode::Soft => {
            let c = file.c.take().expect("validated");
            let instance = match SoftSibInstance::new(bodies, c, file.epsilon) {
                Ok(i) => i,
                Err(e) => return fail(e),
            };
            match solve_soft(&instance, options) {
                Ok(sol) => (ResultFile::from_soft(&sol, true, elapsed(start)), 0),
                Err(SolveError::IterationCapExhausted { partial }) => {
                    eprintln!("warning: iteration cap exhausted before the accuracy target was certified");
                    (ResultFile::from_soft(&partial, false, elapsed(start)), 3)
                }
                Err(e @ SolveError::Degenerate { .. }) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
                Err(e) => return fail(e),
            }
        }
    };
    match write_output(output, &result.to_json()) {
        Ok(()) => ExitCode::from(code),
        Err(e) => fail(e),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match cli.command {
        Command::Solve { path, epsilon, mode, c, max_iters, output, threads } => {
            let mut file = match load(&path) {
                Ok(f) => f,
                Err(e) => return fail(e),
            };
            if let Some(eps) = epsilon {
                file.epsilon = eps;
            }
            if let Some(mode) = mode {
                file.mode = mode;
            }
            if c.is_some() {
                file.c = c;
            }
            if threads == 0 {
                return fail("--threads must be at least 1");
            }
            let mut options = SolverOptions { threads, ..SolverOptions::default() };
            if let Some(cap) = max_iters {
                if cap == 0 {
                    return fail("--max-iters must be at least 1");
                }
                options.max_iterations_cap = cap;
            }
            run_solve(file, &output, &options)
        }
        Command::Validate { path } => match load(&path).and_then(|f| f.validate().map_err(|e| e.to_string())) {
            Ok(bodies) => {
                eprintln!("ok: {} bodies", bodies.len());
                ExitCode::SUCCESS
            }
            Err(e) => fail(e),
        },
        Command::Gen { kind, n, d, m, seed, out } => {
            if n == 0 || d == 0 || m == 0 {
                return fail("--n, --d and --m must be at least 1");
            }
            let file = generate(&GenParams { kind, n, d, m, seed });
            match write_output(&out, &file.to_json()) {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => fail(e),
            }
        }
    }
}
