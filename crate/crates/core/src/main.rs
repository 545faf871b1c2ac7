use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use crcartan::model::{parse_a_matrices, RatMatrix};
use crcartan::report::{self, AnalysisOptions, Format, Pipeline, PipelineError};

#[derive(Parser)]
#[command(name = "crcartan", version, about = "Cartan equivalence analysis of totally nondegenerate CR models of CR dimension one")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the model, its frame and the Darboux table.
    Build {
        #[arg(long = "codim")]
        k: usize,
        /// JSON file with a list of A-matrices overriding the defaults.
        #[arg(long = "a-matrices")]
        a_matrices: Option<PathBuf>,
    },
    /// Run the full equivalence analysis.
    Analyze {
        #[arg(long = "codim")]
        k: usize,
        /// Also zero every essential torsion as a cross-check of the subsystem.
        #[arg(long)]
        full_torsion: bool,
        #[arg(long, default_value = "json")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Analyze a range of codimensions in parallel and print a summary table.
    Batch {
        #[arg(long)]
        from: usize,
        #[arg(long)]
        to: usize,
    },
    /// Run the invariant audits only.
    Audit {
        #[arg(long = "codim")]
        k: usize,
    },
}

enum Failure {
    OutOfScope(String),
    Internal(String),
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Self {
        if e.is_out_of_scope() {
            Failure::OutOfScope(e.to_string())
        } else {
            Failure::Internal(e.to_string())
        }
    }
}

fn load_override(path: Option<&PathBuf>) -> Result<Option<Vec<RatMatrix>>, Failure> {
    let Some(path) = path else { return Ok(None) };
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Internal(format!("cannot read {}: {e}", path.display())))?;
    parse_a_matrices(&text).map(Some).map_err(|e| Failure::OutOfScope(e.to_string()))
}

fn write_out(text: &str, out: Option<&PathBuf>) -> Result<(), Failure> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| Failure::Internal(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Build { k, a_matrices } => {
            let a = load_override(a_matrices.as_ref())?;
            let r = report::run_build(k, a.as_deref())?;
            write_out(&(serde_json::to_string_pretty(&r).expect("report serializes") + "\n"), None)
        }
        Command::Analyze { k, full_torsion, format, out } => {
            let start = Instant::now();
            let opts = AnalysisOptions { full_torsion, a_override: None };
            let r = report::run_analysis(k, &opts)?;
            eprintln!("analysis of k = {k} took {:.2?}", start.elapsed());
            write_out(&report::render(&r, format), out.as_ref())?;
            if r.audits_pass() {
                Ok(())
            } else {
                Err(Failure::Internal("invariant audit failed".into()))
            }
        }
        Command::Batch { from, to } => {
            if from < 2 || from > to {
                return Err(Failure::OutOfScope(format!("batch range {from}..{to} must satisfy 2 <= from <= to")));
            }
            let results = report::batch(from, to, &AnalysisOptions::default());
            print!("{}", report::batch_summary(&results));
            if results.iter().all(|(_, r)| r.as_ref().is_ok_and(|r| r.audits_pass())) {
                Ok(())
            } else {
                Err(Failure::Internal("some codimensions failed".into()))
            }
        }
        Command::Audit { k } => {
            let p = Pipeline::run(k, None)?;
            let audits = p.audits(true);
            for a in &audits {
                println!("{} {}{}", if a.passed { "pass" } else { "FAIL" }, a.name, if a.detail.is_empty() { String::new() } else { format!(" ({})", a.detail) });
            }
            if audits.iter().all(|a| a.passed) {
                Ok(())
            } else {
                Err(Failure::Internal("invariant audit failed".into()))
            }
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::OutOfScope(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Internal(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}
