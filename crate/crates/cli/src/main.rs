use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use webtable::ingest::LoadOptions;
use webtable::pipeline::{run_pipeline, RunOptions, EXIT_ERROR};
use webtable::{Origin, PipelineConfig, TableFormat};

/// Convert a webtable into a normalized datatable with a declarative pipeline.
#[derive(Debug, Parser)]
#[command(name = "webtable", version)]
struct Args {
    /// Pipeline config (JSON).
    #[arg(long, value_name = "FILE")]
    pipeline: PathBuf,
    /// Input document, overriding the config's. A file path or http(s) URL.
    #[arg(long, value_name = "PATH|URL")]
    input: Option<String>,
    /// Where to write the table; stdout when neither this nor the config says.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Where to write the run report (JSON).
    #[arg(long, value_name = "FILE")]
    report: Option<PathBuf>,
    #[arg(long, value_name = "tsv|csv")]
    format: Option<TableFormat>,
    /// Locale profile for the hazard scan (en-ground-truth, hu-hazard).
    #[arg(long, value_name = "PROFILE")]
    locale: Option<String>,
    /// List failing rows of every check on stderr.
    #[arg(long)]
    verbose: bool,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let config = match PipelineConfig::from_path(&args.pipeline) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("webtable: {e}");
            return ExitCode::from(EXIT_ERROR as u8);
        }
    };
    let opts = RunOptions {
        input: args.input.as_deref().map(Origin::parse),
        output: args.out,
        report: args.report,
        format: args.format,
        locale: args.locale,
        load: LoadOptions::from_env(),
    };
    let run = match run_pipeline(&config, &opts) {
        Ok(run) => run,
        Err(e) => {
            eprintln!("webtable: {e}");
            return ExitCode::from(EXIT_ERROR as u8);
        }
    };
    if args.verbose {
        for step in &run.report.clean.steps {
            if let Some(listing) = step.outcome.listing() {
                eprintln!("{} [{:?}]", step.step, step.verdict);
                for line in listing.lines() {
                    eprintln!("  {line}");
                }
            }
        }
    }
    for step in run
        .report
        .clean
        .steps
        .iter()
        .filter(|s| !s.verdict.is_pass())
    {
        eprintln!("webtable: check failed at {}", step.step);
    }
    if let Some(abort) = &run.report.abort {
        eprintln!("webtable: aborted at {}: {}", abort.step, abort.error);
    }
    if run.table_path.is_none() {
        if let Some(bytes) = &run.table {
            let mut out = std::io::stdout().lock();
            if out.write_all(bytes).and_then(|_| out.flush()).is_err() {
                return ExitCode::from(EXIT_ERROR as u8);
            }
        }
    }
    ExitCode::from(run.exit_code as u8)
}
