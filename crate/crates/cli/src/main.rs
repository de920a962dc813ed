use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use periodic_stein::solvers::Method;
use periodic_stein_cli::commands::{self, Output, SolveFlags};

#[derive(Parser)]
#[command(name = "periodic-stein", version, about = "Solve X = A f(X) B + C for period-n matrix operators f")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Direct,
    Smith,
    SmithL,
    RSmith,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Direct => Method::Direct,
            MethodArg::Smith => Method::Smith,
            MethodArg::SmithL => Method::SmithL,
            MethodArg::RSmith => Method::RSmith,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Solve the equation in FILE and print a JSON report.
    Solve {
        file: PathBuf,
        #[arg(long, value_enum)]
        method: Option<MethodArg>,
        /// Block length for smith-l.
        #[arg(long)]
        ell: Option<usize>,
        /// Power for r-smith (at least 2).
        #[arg(long)]
        r: Option<usize>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        max_iter: Option<usize>,
        /// Write the report here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Spectral solvability diagnostics; never solves.
    Check {
        file: PathBuf,
        #[arg(long, env = "PERIODIC_STEIN_SEED", default_value_t = 0)]
        seed: u64,
    },
    /// Spectra of the Stein coefficients.
    Spectrum { file: PathBuf },
    /// Run a worked example: example1, example2, example3 or counterexample.
    Demo {
        name: String,
        #[arg(long, env = "PERIODIC_STEIN_SEED", default_value_t = 0)]
        seed: u64,
    },
}

fn load(path: &PathBuf) -> Result<periodic_stein_cli::EquationDocument, Output> {
    let text = std::fs::read_to_string(path).map_err(|e| commands::io_error(&path.display().to_string(), &e))?;
    commands::load(&text)
}

fn run(cli: Cli) -> Output {
    match cli.command {
        Command::Solve {
            file,
            method,
            ell,
            r,
            tol,
            max_iter,
            out,
        } => {
            let doc = match load(&file) {
                Ok(d) => d,
                Err(o) => return o,
            };
            let flags = SolveFlags {
                method: method.map(Method::from),
                ell,
                r,
                tol,
                max_iter,
            };
            let mut output = commands::cmd_solve(&doc, &flags);
            if let Some(path) = out {
                if output.code == 0 {
                    if let Err(e) = std::fs::write(&path, &output.stdout) {
                        return commands::io_error(&path.display().to_string(), &e);
                    }
                    output.stdout.clear();
                }
            }
            output
        }
        Command::Check { file, seed } => match load(&file) {
            Ok(doc) => commands::cmd_check(&doc, seed),
            Err(o) => o,
        },
        Command::Spectrum { file } => match load(&file) {
            Ok(doc) => commands::cmd_spectrum(&doc),
            Err(o) => o,
        },
        Command::Demo { name, seed } => commands::cmd_demo(&name, seed),
    }
}

fn main() -> ExitCode {
    let output = run(Cli::parse());
    // a closed pipe is not worth a panic
    let _ = std::io::stdout().write_all(output.stdout.as_bytes());
    let _ = std::io::stderr().write_all(output.stderr.as_bytes());
    ExitCode::from(output.code)
}
