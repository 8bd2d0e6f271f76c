use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use sc3_core::report::{self, Format, ReportError};

#[derive(Parser)]
#[command(
    name = "sc3",
    version,
    about = "Closed-loop satellite control resource allocation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Scenario document (TOML). Defaults apply when omitted.
    #[arg(long, global = true)]
    scenario: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Override the scenario seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Csv)]
    format: OutputFormat,
}

#[derive(Subcommand)]
enum Command {
    /// Uplink/downlink bandwidth split under each scheme.
    SingleLoop,
    /// Power sweep and per-robot allocation under each joint scheme.
    MultiLoop,
    /// Task-oriented cost over the power x compute grid.
    Contour,
    /// Load and validate the scenario, then print its normalized form.
    Validate,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputFormat {
    Csv,
    #[value(name = "csv+svg")]
    CsvSvg,
}

fn run(cli: &Cli) -> Result<i32, ReportError> {
    let scenario = report::load(cli.scenario.as_deref(), cli.seed)?;
    let format = match cli.format {
        OutputFormat::Csv => Format::Csv,
        OutputFormat::CsvSvg => Format::CsvSvg,
    };
    let summary = match cli.command {
        Command::Validate => {
            print!("{}", scenario.dump());
            return Ok(0);
        }
        Command::SingleLoop => report::cmd_single_loop(&scenario, &cli.out, format)?,
        Command::MultiLoop => report::cmd_multi_loop(&scenario, &cli.out, format)?,
        Command::Contour => report::cmd_contour(&scenario, &cli.out, format)?,
    };
    for w in &summary.warnings {
        eprintln!("warning: {w}");
    }
    for n in &summary.non_converged {
        eprintln!("not converged: {n}");
    }
    for f in &summary.files {
        eprintln!("wrote {}", f.display());
    }
    Ok(summary.exit_code())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
