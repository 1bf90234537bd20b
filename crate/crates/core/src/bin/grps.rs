use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use grps::cli::{self, emit_csv, SolveOptions, EXIT_PASS, EXIT_SOLVER, EXIT_VERDICT};
use grps::expr::EquivConfig;

#[derive(Parser)]
#[command(
    name = "grps",
    version,
    about = "Fractional power-series solutions of time-fractional PDEs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a problem file and print the coefficient table.
    Solve {
        file: PathBuf,
        /// Truncation order K.
        #[arg(long)]
        order: Option<usize>,
        /// Override the fractional order in the file.
        #[arg(long)]
        alpha: Option<f64>,
        /// Cross-check against the transform-domain oracle and the residual probe.
        #[arg(long)]
        verify: bool,
        /// Use the linear fast path and compare it with the recurrence.
        #[arg(long)]
        linear: bool,
        /// Transform preset used by the oracle.
        #[arg(long, default_value = "laplace")]
        preset: String,
        /// Write the coefficient table as CSV.
        #[arg(long)]
        emit: Option<PathBuf>,
        /// Sample points per equivalence check.
        #[arg(long, default_value_t = 64)]
        samples: usize,
        /// Relative tolerance of equivalence checks.
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        /// Seed of the sample sequence.
        #[arg(long, env = "GRPS_SEED", value_parser = parse_seed)]
        seed: Option<u64>,
    },
    /// List the built-in transform presets.
    ListPresets,
    /// Print the JSON schema of problem files.
    Schema,
}

fn parse_seed(s: &str) -> Result<u64, String> {
    let r = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => s.parse(),
    };
    r.map_err(|e| e.to_string())
}

fn write_out(text: &str) {
    // a closed pipe (e.g. `| head`) is not an error
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

fn main() -> ExitCode {
    let code = match Cli::parse().command {
        Command::ListPresets => {
            write_out(&cli::list_presets());
            EXIT_PASS
        }
        Command::Schema => {
            write_out(cli::schema());
            EXIT_PASS
        }
        Command::Solve {
            file,
            order,
            alpha,
            verify,
            linear,
            preset,
            emit,
            samples,
            tol,
            seed,
        } => {
            let defaults = EquivConfig::default();
            let opts = SolveOptions {
                order,
                alpha,
                verify,
                linear,
                preset,
                equiv: EquivConfig {
                    samples,
                    tol,
                    seed: seed.unwrap_or(defaults.seed),
                },
            };
            match cli::run_solve(&file, &opts) {
                Ok(report) => {
                    write_out(&report.summary());
                    let mut code = if report.passed() {
                        EXIT_PASS
                    } else {
                        EXIT_VERDICT
                    };
                    if let Some(path) = emit {
                        if let Err(e) = emit_csv(&report, &path) {
                            eprintln!("error: cannot write {}: {e}", path.display());
                            code = EXIT_SOLVER;
                        }
                    }
                    code
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    e.exit_code()
                }
            }
        }
    };
    ExitCode::from(code as u8)
}
