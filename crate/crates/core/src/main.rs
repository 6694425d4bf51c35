use std::fs;
use std::io::{self, Read};
use std::path::PathBuf;
use std::process::ExitCode;

use ak_normal_forms::analysis::SampledFunction;
use ak_normal_forms::cli::{
    cmd_abel, cmd_action, cmd_checkgrowth, cmd_compare, cmd_normalform, cmd_roundtrip, CliError,
    CompareInput, Mode, Outcome, ProblemSpec, RunOptions,
};
use ak_normal_forms::series::Sigma;
use clap::{Args, Parser, Subcommand, ValueEnum};

/// Symplectic invariants of A_{k-1} singularities.
#[derive(Parser)]
#[command(name = "aknf", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Truncation order, overriding the problem file.
    #[arg(long, global = true)]
    order: Option<u32>,
    /// Big-float precision in bits.
    #[arg(long, global = true)]
    precision: Option<usize>,
    #[arg(long, global = true, value_enum)]
    mode: Option<ModeArg>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Tolerance of the command's numerical check.
    #[arg(long, global = true)]
    tol: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Analytic,
    Smooth,
}

#[derive(Subcommand)]
enum Command {
    /// Residual, certificate and the three normal forms.
    Normalform { input: Option<PathBuf> },
    /// Compare two problems or emitted normal forms.
    Compare { a: PathBuf, b: PathBuf },
    /// Invariance of the normal form under random H-preserving flows.
    Roundtrip {
        input: Option<PathBuf>,
        #[arg(long)]
        trials: Option<u32>,
    },
    /// Actions and generalized actions at the given levels.
    Action {
        input: Option<PathBuf>,
        /// Energy levels, comma separated.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        h: Vec<f64>,
    },
    /// Invert the Abel transform of sampled generalized actions (CSV h,value).
    Abel {
        input: Option<PathBuf>,
        #[arg(long)]
        k: u32,
        #[arg(long)]
        i: u32,
    },
    /// Check the growth bound of the elimination coefficients.
    CheckGrowth {
        /// Values of k, comma separated.
        #[arg(long, value_delimiter = ',', default_value = "2,3,4,5,6")]
        k: Vec<u32>,
        #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
        sigma: i8,
        #[arg(long, default_value_t = 40)]
        i_max: u32,
        #[arg(long, default_value_t = 40)]
        j_max: u32,
    },
}

/// Read a path, or stdin for `-` or no path.
fn read_input(path: Option<&PathBuf>) -> Result<String, CliError> {
    match path {
        Some(p) if p.as_os_str() != "-" => {
            fs::read_to_string(p).map_err(|e| CliError::Input(format!("{}: {e}", p.display())))
        }
        _ => {
            let mut text = String::new();
            io::stdin()
                .read_to_string(&mut text)
                .map_err(|e| CliError::Input(format!("stdin: {e}")))?;
            Ok(text)
        }
    }
}

fn problem(path: Option<&PathBuf>, run: &RunOptions) -> Result<ProblemSpec, CliError> {
    ProblemSpec::from_json(&read_input(path)?)?.with_overrides(run)
}

fn compare_input(path: &PathBuf, run: &RunOptions) -> Result<CompareInput, CliError> {
    match CompareInput::from_json(&read_input(Some(path))?)? {
        CompareInput::Problem(spec) => Ok(CompareInput::Problem(spec.with_overrides(run)?)),
        form => Ok(form),
    }
}

fn run(cli: Cli) -> Result<Outcome, CliError> {
    let run = RunOptions {
        order: cli.common.order,
        precision: cli.common.precision,
        mode: cli.common.mode.map(|m| match m {
            ModeArg::Analytic => Mode::Analytic,
            ModeArg::Smooth => Mode::Smooth,
        }),
        tol: cli.common.tol,
        seed: cli.common.seed,
    };
    match cli.command {
        Command::Normalform { input } => cmd_normalform(&problem(input.as_ref(), &run)?),
        Command::Compare { a, b } => {
            cmd_compare(&compare_input(&a, &run)?, &compare_input(&b, &run)?, &run)
        }
        Command::Roundtrip { input, trials } => {
            let mut spec = problem(input.as_ref(), &run)?;
            if trials.is_some() {
                spec.options.trials = trials;
            }
            cmd_roundtrip(&spec, &run)
        }
        Command::Action { input, h } => cmd_action(&problem(input.as_ref(), &run)?, &h, &run),
        Command::Abel { input, k, i } => {
            let data = SampledFunction::from_csv(read_input(input.as_ref())?.as_bytes())?;
            cmd_abel(&data, k, i, &run)
        }
        Command::CheckGrowth {
            k,
            sigma,
            i_max,
            j_max,
        } => {
            let sigma = Sigma::try_from(sigma).map_err(CliError::Input)?;
            cmd_checkgrowth(&k, sigma, i_max, j_max)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(outcome) => {
            print!("{}", outcome.render());
            eprintln!("{}", outcome.summary);
            ExitCode::from(outcome.status as u8)
        }
        Err(e) => {
            eprintln!("aknf: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
