use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use realization_core::io::Scalar;
use realization_core::Complex64;
use realization_lab::{
    error_report, format_report, read_input, run, run_batch, tolerances, AnalysisRequest, CliError,
    Command, Format,
};
use serde_json::Value;

/// Minimality analysis of state-space realizations.
#[derive(Parser, Debug)]
#[command(name = "realization-lab", version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,

    /// Input document (JSON).
    #[arg(long, required_unless_present = "batch")]
    input: Option<PathBuf>,

    /// Seed for every randomized construction.
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Relative singular-value cutoff for numeric rank.
    #[arg(long)]
    rank_tol: Option<f64>,

    /// Eigenvalue matching tolerance.
    #[arg(long)]
    eig_tol: Option<f64>,

    /// Polynomial coefficients c0,c1,... (ascending powers) for `family`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    psi: Option<Vec<f64>>,

    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Run every *.json file in this directory, one report per file.
    #[arg(long, conflicts_with = "input")]
    batch: Option<PathBuf>,

    /// Where batch reports go (defaults to the batch directory).
    #[arg(long, requires = "batch")]
    out_dir: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let template = AnalysisRequest {
        command: cli.command,
        seed: cli.seed,
        tolerances: tolerances(cli.rank_tol, cli.eig_tol),
        psi: cli.psi.map(|p| {
            p.into_iter()
                .map(|x| Scalar(Complex64::new(x, 0.0)))
                .collect()
        }),
        input: Value::Null,
    };

    if let Some(dir) = cli.batch {
        let out_dir = cli.out_dir.unwrap_or_else(|| dir.clone());
        return match run_batch(&dir, &out_dir, &template, cli.format) {
            Ok(entries) => {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&entries).expect("serializable")
                );
                let worst = entries.iter().map(|e| e.exit_code).max().unwrap_or(0);
                ExitCode::from(worst as u8)
            }
            Err(e) => fail(&e, cli.format),
        };
    }

    let path = cli.input.expect("clap enforces --input without --batch");
    let input = match read_input(&path) {
        Ok(v) => v,
        Err(e) => return fail(&e, cli.format),
    };
    let (report, code) = run(&AnalysisRequest { input, ..template });
    print!("{}", format_report(&report, cli.format));
    ExitCode::from(code as u8)
}

fn fail(e: &CliError, format: Format) -> ExitCode {
    print!("{}", format_report(&error_report(None, e), format));
    ExitCode::from(e.exit_code() as u8)
}
