use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use csx_core::config::FrameworkConfig;
use csx_core::report::SimulationReport;
use csx_core::schema::{load_schema, ValidationIssue};
use csx_core::translation::{CatalogBuilder, ErrorClass, SimulationManager, TranslationError};

const EXTENSIONS_ENV: &str = "CSX_EXTENSIONS_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

/// Run a cloud simulation described by a YAML system model script.
#[derive(Debug, Parser)]
#[command(name = "csx", version)]
struct Args {
    /// System model script; overrides `scriptFile` from the config.
    #[arg(long)]
    script: Option<PathBuf>,
    /// Schema document; defaults to the bundled schema.
    #[arg(long)]
    schema: Option<PathBuf>,
    /// `key = value` framework configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Directory of extension libraries to load.
    #[arg(long)]
    extensions_dir: Option<PathBuf>,
    /// Report destination; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

struct Failure {
    class: ErrorClass,
    code: &'static str,
    path: Option<String>,
    message: String,
    issues: Vec<ValidationIssue>,
}

impl Failure {
    fn new(class: ErrorClass, code: &'static str, message: impl Into<String>) -> Self {
        Self {
            class,
            code,
            path: None,
            message: message.into(),
            issues: Vec::new(),
        }
    }
}

impl From<TranslationError> for Failure {
    fn from(e: TranslationError) -> Self {
        Self {
            class: e.class(),
            code: e.code(),
            path: e.path().map(str::to_string),
            message: e.root().to_string(),
            issues: e.issues().to_vec(),
        }
    }
}

/// Fully resolved inputs: flags win over the config file, which wins over
/// the environment.
struct RunConfig {
    script: PathBuf,
    schema: Option<PathBuf>,
    extensions_dir: Option<PathBuf>,
    handler_overrides: std::collections::BTreeMap<String, String>,
}

fn resolve(args: &Args) -> Result<RunConfig, Failure> {
    let config = match &args.config {
        Some(path) => FrameworkConfig::load(path).map_err(|e| Failure::new(ErrorClass::Usage, "bad-config", e.to_string()))?,
        None => FrameworkConfig::default(),
    };
    let script = args
        .script
        .clone()
        .or(config.script_file)
        .ok_or_else(|| Failure::new(ErrorClass::Usage, "startup", "no script given (use --script or scriptFile in --config)"))?;
    let extensions_dir = args
        .extensions_dir
        .clone()
        .or(config.extensions_dir)
        .or_else(|| std::env::var_os(EXTENSIONS_ENV).filter(|v| !v.is_empty()).map(PathBuf::from));
    Ok(RunConfig {
        script,
        schema: args.schema.clone().or(config.schema_file),
        extensions_dir,
        handler_overrides: config.handler_overrides,
    })
}

fn manager(run: RunConfig) -> Result<(SimulationManager, PathBuf), Failure> {
    let schema = match &run.schema {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                Failure::new(ErrorClass::Usage, "startup", format!("cannot read schema {}: {e}", path.display()))
            })?;
            load_schema(&text).map_err(TranslationError::from)?
        }
        None => load_schema(csx_core::assets::DEFAULT_SCHEMA).map_err(TranslationError::from)?,
    };
    let mut builder = CatalogBuilder::with_builtins();
    if let Some(dir) = &run.extensions_dir {
        builder.load_dir(dir)?;
    }
    let manager = SimulationManager::new(schema, builder.build()?, run.handler_overrides)?;
    Ok((manager, run.script))
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    std::fs::write(path, contents)
        .map_err(|e| Failure::new(ErrorClass::Runtime, "write", format!("cannot write {}: {e}", path.display())))
}

/// `report.csv` -> `report.<suffix>.csv`.
fn sidecar(out: &Path, suffix: &str) -> PathBuf {
    out.with_extension(format!("{suffix}.csv"))
}

fn write_report(report: &SimulationReport, format: Format, out: Option<&Path>) -> Result<(), Failure> {
    let body = match format {
        Format::Csv => report.to_csv(),
        Format::Json => report.to_json(),
    };
    match out {
        Some(path) => {
            write_file(path, &body)?;
            write_file(&sidecar(path, "placements"), &report.placements_csv())?;
            if !report.samples.is_empty() {
                write_file(&sidecar(path, "samples"), &report.samples_csv())?;
            }
            println!("overhead_ms={}", report.overhead_ms);
        }
        None => {
            print!("{body}");
            eprintln!("overhead_ms={}", report.overhead_ms);
        }
    }
    Ok(())
}

fn run(args: Args) -> Result<(), Failure> {
    let (manager, script) = manager(resolve(&args)?)?;
    let report = manager.run_file(&script)?;
    write_report(&report, args.format, args.out.as_deref())
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            // error[<class>:<code>] <path>: <message>
            let path = failure.path.as_deref().map(|p| format!(" {p}")).unwrap_or_default();
            eprintln!(
                "error[{}:{}]{path}: {}",
                failure.class.as_str(),
                failure.code,
                failure.message
            );
            for issue in &failure.issues {
                eprintln!("  {} {}: {}", issue.code, issue.path, issue.message);
            }
            ExitCode::from(failure.class.exit_code() as u8)
        }
    }
}
