use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Parser, Subcommand};

use pmaxent::commands::{self, Base, CurveArgs, CurveInput, Output, VerifyArgs};
use pmaxent::family::parse_grid;
use pmaxent::suites::Suite;
use pmaxent::CliError;

#[derive(Parser)]
#[command(
    name = "pmaxent",
    version,
    about = "Poisson maximum entropy checks and experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a randomized verification suite and print a JSON report.
    Verify {
        #[arg(value_enum)]
        suite: Suite,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        cases: usize,
        /// Run only this case index (replays a reported failure).
        #[arg(long)]
        case: Option<usize>,
        /// Include wall-clock time in the report.
        #[arg(long)]
        timing: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Emit the entropy curve of U_α X over an α-grid as CSV.
    #[command(group(ArgGroup::new("source").required(true).args(["family", "input"])))]
    Curve {
        /// Named family, e.g. binomial:20,0.25 or poisson:3.
        #[arg(long)]
        family: Option<String>,
        /// JSON file holding {"probs": [...], "deficit": d}.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Target mean; defaults to the mean of the input.
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long, default_value = "0.05:1:0.05")]
        grid: String,
        /// Require a ULC input and a decreasing, concave entropy column.
        #[arg(long)]
        check: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// TV distance from n-fold sums of a base law with mean λ/n to Poisson(λ).
    Accumulate {
        #[arg(long)]
        lambda: f64,
        #[arg(long, value_delimiter = ',', default_value = "1,2,4,8,16,32")]
        n: Vec<usize>,
        /// bernoulli, poisson or binomial:m
        #[arg(long, default_value = "bernoulli")]
        base: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Probe entropies of random Bernoulli sums with n summands and mean λ.
    MaxentProbe {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        lambda: f64,
        #[arg(long, default_value_t = 500)]
        trials: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn execute(command: Command) -> Result<(Output, Option<PathBuf>), CliError> {
    match command {
        Command::Verify {
            suite,
            seed,
            cases,
            case,
            timing,
            out,
        } => {
            let args = VerifyArgs {
                suite,
                seed,
                cases,
                only_case: case,
                timing,
            };
            Ok((commands::verify(&args), out))
        }
        Command::Curve {
            family,
            input,
            lambda,
            grid,
            check,
            out,
        } => {
            let input = match (family, input) {
                (Some(f), _) => CurveInput::Family(f),
                (None, Some(path)) => CurveInput::Json(fs::read_to_string(path)?),
                (None, None) => unreachable!("clap enforces the source group"),
            };
            let args = CurveArgs {
                input,
                lambda,
                grid: parse_grid(&grid)?,
                check,
            };
            Ok((commands::curve(&args)?, out))
        }
        Command::Accumulate {
            lambda,
            n,
            base,
            out,
        } => Ok((commands::accumulate(lambda, &n, Base::parse(&base)?)?, out)),
        Command::MaxentProbe {
            n,
            lambda,
            trials,
            seed,
            out,
        } => Ok((commands::maxent_probe(n, lambda, trials, seed)?, out)),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match execute(cli.command) {
        Ok((output, out)) => {
            let written = match out {
                Some(path) => fs::write(path, &output.body),
                None => std::io::stdout().write_all(output.body.as_bytes()),
            };
            if let Err(e) = written {
                eprintln!("error: {e}");
                return ExitCode::from(pmaxent::EXIT_PRECONDITION as u8);
            }
            if let Some(msg) = &output.message {
                eprintln!("{msg}");
            }
            output.exit_code
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
