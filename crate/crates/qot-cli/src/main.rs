use clap::Parser;
use qot_cli::{parse_config, run, BackendTag, CliError, Command, Format, Overrides};
use qot_core::Exec;
use std::path::PathBuf;
use std::process::ExitCode;

/// NLI quality-of-transmission engine for Raman-amplified wideband links.
#[derive(Parser, Debug)]
#[command(name = "qot", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Run configuration (TOML)
    #[arg(long, global = true, default_value = "qot.toml")]
    config: PathBuf,
    /// Output directory, overriding [output].dir
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    backend: Option<BackendTag>,
    #[arg(long, global = true)]
    spans: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Treat warnings (flagged channels, fit ceiling, infeasible search,
    /// out-of-tolerance checks) as errors
    #[arg(long, global = true)]
    strict: bool,
    /// Run on one thread
    #[arg(long, global = true)]
    sequential: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            let line = serde_json::json!({
                "error": e.category(),
                "exit_code": e.exit_code(),
                "message": e.to_string(),
            });
            eprintln!("{line}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn execute(cli: &Cli) -> Result<Vec<PathBuf>, CliError> {
    let overrides = Overrides {
        output: cli.output.as_ref().map(|p| std::env::current_dir().map(|d| d.join(p)).unwrap_or_else(|_| p.clone())),
        backend: cli.backend,
        spans: cli.spans,
        seed: cli.seed,
        format: cli.format,
    };
    let loaded = parse_config(&cli.config)?.with_overrides(&overrides)?;
    let exec = if cli.sequential { Exec::Sequential } else { Exec::Parallel };
    let report = run(cli.command, &loaded, exec)?;
    for w in &report.warnings {
        eprintln!("{}", serde_json::json!({ "warning": w }));
    }
    if cli.strict && !report.warnings.is_empty() {
        return Err(CliError::Strict(report.warnings.len()));
    }
    Ok(report.files)
}
