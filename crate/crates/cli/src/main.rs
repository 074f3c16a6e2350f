use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use ruin_lab::config::OutputFormat;
use ruin_lab::output::sibling_path;
use ruin_lab::{emit_config, parse_config_in, run, Command, CliError, Overrides, Report};

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Csv,
    Json,
}

/// Ruin probabilities for discrete-time, compound Poisson and renewal risk models.
///
/// The run is described by a JSON config file. RUIN_LAB_THREADS caps the
/// number of worker threads.
#[derive(Debug, Parser)]
#[command(name = "ruin-lab", version)]
struct Args {
    /// JSON run config ("-" reads stdin).
    config: PathBuf,
    /// Override the Monte Carlo seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the number of Monte Carlo paths.
    #[arg(long)]
    paths: Option<u64>,
    /// Override the number of work chunks (results do not depend on it).
    #[arg(long)]
    chunks: Option<usize>,
    /// Output file; secondary tables go next to it.
    #[arg(long)]
    out: Option<String>,
    /// Override the output format.
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Print the normalized config (after overrides) and exit.
    #[arg(long)]
    emit_config: bool,
}

fn main() -> ExitCode {
    let args = Args::parse();
    match execute(&args) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{}", e.diagnostic());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn io_err(context: &str, e: std::io::Error) -> CliError {
    CliError::Io(format!("{context}: {e}"))
}

fn execute(args: &Args) -> Result<ExitCode, CliError> {
    if let Ok(threads) = std::env::var("RUIN_LAB_THREADS") {
        let n: usize = threads
            .trim()
            .parse()
            .map_err(|_| CliError::Io(format!("RUIN_LAB_THREADS must be a positive integer, got {threads:?}")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Io(format!("thread pool: {e}")))?;
    }
    let (text, base) = if args.config.as_os_str() == "-" {
        let text = std::io::read_to_string(std::io::stdin()).map_err(|e| io_err("stdin", e))?;
        (text, PathBuf::from("."))
    } else {
        let text = std::fs::read_to_string(&args.config).map_err(|e| io_err(&args.config.display().to_string(), e))?;
        let base = args.config.parent().map(Path::to_path_buf).unwrap_or_default();
        (text, base)
    };
    let mut config = parse_config_in(&text, &base)?;
    Overrides {
        seed: args.seed,
        paths: args.paths,
        chunks: args.chunks,
        out: args.out.clone(),
        format: args.format.map(|f| match f {
            Format::Csv => OutputFormat::Csv,
            Format::Json => OutputFormat::Json,
        }),
    }
    .apply(&mut config);
    if args.emit_config {
        print!("{}", emit_config(&config));
        return Ok(ExitCode::SUCCESS);
    }
    let report = run(&config)?;
    write_report(&report, config.settings.output.path.as_deref(), config.command == Command::Verify)?;
    if report.failures > 0 {
        return Err(CliError::ChecksFailed(report.failures));
    }
    Ok(ExitCode::SUCCESS)
}

fn write_report(report: &Report, out: Option<&str>, verify: bool) -> Result<(), CliError> {
    let stdout = std::io::stdout();
    let mut stdout = stdout.lock();
    match out {
        Some(path) => {
            let path = Path::new(path);
            std::fs::write(path, &report.main).map_err(|e| io_err(&path.display().to_string(), e))?;
            for (suffix, bytes) in &report.extras {
                let p = sibling_path(path, suffix);
                std::fs::write(&p, bytes).map_err(|e| io_err(&p.display().to_string(), e))?;
            }
            for line in &report.summary {
                writeln!(stdout, "{line}").map_err(|e| io_err("stdout", e))?;
            }
        }
        None if verify => {
            for line in &report.summary {
                writeln!(stdout, "{line}").map_err(|e| io_err("stdout", e))?;
            }
        }
        None => {
            stdout.write_all(&report.main).map_err(|e| io_err("stdout", e))?;
            if !report.extras.is_empty() {
                eprintln!("note: secondary tables are written only with --out");
            }
            for line in &report.summary {
                eprintln!("{line}");
            }
        }
    }
    Ok(())
}
