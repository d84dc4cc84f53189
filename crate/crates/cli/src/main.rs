use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use monodromy_lab::error::{EXIT_GOLDEN, EXIT_OK};
use monodromy_lab::{acceptance, emit_report, run_scenario, Format, LabError, Report, Scenario};

#[derive(Parser)]
#[command(name = "monodromy-lab", version, about = "Run monodromy scenarios and emit reports")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario file.
    Run {
        scenario: PathBuf,
        /// Overrides the scenario's own format.
        #[arg(long, value_enum)]
        format: Option<FormatArg>,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run every `*.json` scenario directly inside a directory.
    Batch {
        dir: PathBuf,
        /// Compare each json report with `<DIR>/<stem>.json`.
        #[arg(long)]
        golden: Option<PathBuf>,
        /// Rewrite the golden files instead of comparing.
        #[arg(long, requires = "golden")]
        bless: bool,
    },
    /// Run the acceptance suite.
    Selftest,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum FormatArg {
    Json,
    Text,
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), LabError> {
    let io = |e: std::io::Error| LabError::Io(format!("{}: {e}", path.display()));
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

fn with_newline(mut bytes: Vec<u8>) -> Vec<u8> {
    bytes.push(b'\n');
    bytes
}

fn run(path: &Path, format: Option<FormatArg>, out: Option<&Path>) -> i32 {
    let scenario = match Scenario::load(path) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("monodromy-lab: {e}");
            return e.exit_code();
        }
    };
    let format = match format {
        Some(FormatArg::Json) => Format::Json,
        Some(FormatArg::Text) => Format::Text,
        None => scenario.format,
    };
    let report = run_scenario(&scenario);
    let bytes = with_newline(emit_report(&report, format));
    let written = match out {
        Some(p) => write_atomic(p, &bytes),
        None => std::io::stdout().write_all(&bytes).map_err(|e| LabError::Io(e.to_string())),
    };
    if let Err(e) = written {
        eprintln!("monodromy-lab: {e}");
        return e.exit_code();
    }
    if let Some(err) = &report.error {
        eprintln!("monodromy-lab: {} error: {}", err.class, err.message);
    }
    report.exit_code()
}

fn scenario_files(dir: &Path) -> Result<Vec<PathBuf>, LabError> {
    let entries = fs::read_dir(dir).map_err(|e| LabError::Io(format!("{}: {e}", dir.display())))?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|entry| entry.ok().map(|x| x.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    Ok(files)
}

fn evaluate(path: &Path) -> Report {
    match Scenario::load(path) {
        Ok(s) => run_scenario(&s),
        Err(e) => Report::rejected(&e),
    }
}

#[cfg(feature = "parallel")]
fn evaluate_all(files: &[PathBuf]) -> Vec<Report> {
    use rayon::prelude::*;
    files.par_iter().map(|p| evaluate(p)).collect()
}

#[cfg(not(feature = "parallel"))]
fn evaluate_all(files: &[PathBuf]) -> Vec<Report> {
    files.iter().map(|p| evaluate(p)).collect()
}

fn batch(dir: &Path, golden: Option<&Path>, bless: bool) -> i32 {
    let files = match scenario_files(dir) {
        Ok(f) => f,
        Err(e) => {
            eprintln!("monodromy-lab: {e}");
            return e.exit_code();
        }
    };
    let reports = evaluate_all(&files);
    let mut code = EXIT_OK;
    for (path, report) in files.iter().zip(&reports) {
        let stem = path.file_stem().unwrap_or_default().to_string_lossy();
        let mut status = match &report.error {
            None => "ok".to_string(),
            Some(e) => format!("{} error (exit {}): {}", e.class, e.exit_code, e.message),
        };
        code = code.max(report.exit_code());
        if let Some(dir) = golden {
            let bytes = with_newline(emit_report(report, Format::Json));
            let target = dir.join(format!("{stem}.json"));
            if bless {
                if let Err(e) = write_atomic(&target, &bytes) {
                    eprintln!("monodromy-lab: {e}");
                    code = code.max(e.exit_code());
                }
            } else if fs::read(&target).ok().as_deref() != Some(bytes.as_slice()) {
                status.push_str("; golden mismatch");
                code = code.max(EXIT_GOLDEN);
            } else {
                status.push_str("; golden match");
            }
        }
        println!("{stem}: {status}");
    }
    code
}

fn selftest() -> i32 {
    let outcomes = acceptance::run_all();
    for o in &outcomes {
        println!("{o}");
    }
    if outcomes.iter().all(|o| o.passed) {
        EXIT_OK
    } else {
        1
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match &cli.command {
        Command::Run { scenario, format, out } => run(scenario, *format, out.as_deref()),
        Command::Batch { dir, golden, bless } => batch(dir, golden.as_deref(), *bless),
        Command::Selftest => selftest(),
    };
    ExitCode::from(code as u8)
}
