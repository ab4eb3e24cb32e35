use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use evalbench::benchfn;
use evalbench::report::{build_report, export_dashboard_bundle, render_text_summary};
use evalbench::runner::{
    resume_campaign, run_campaign, validate_archive, CampaignArchive, CampaignConfig, RunStatus,
};

#[derive(Parser)]
#[command(name = "bench", version, about = "Benchmark and compare black-box optimizers")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a campaign described by a JSON config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Only execute runs that are missing or failed in an existing archive.
        #[arg(long)]
        resume: bool,
        /// Override the config's worker count.
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Compare two methods of an archive and optionally export a dashboard bundle.
    Report {
        #[arg(long)]
        archive: PathBuf,
        #[arg(long = "a")]
        method_a: String,
        #[arg(long = "b")]
        method_b: String,
        /// Significance level; defaults to the campaign's alpha.
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the benchmark catalog as JSON.
    Catalog,
    /// Recompute traces and metrics from stored evaluations and report mismatches.
    Validate {
        #[arg(long)]
        archive: PathBuf,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Cmd::Run {
            config,
            resume,
            workers,
        } => {
            let mut config = CampaignConfig::from_json_file(&config)?;
            if let Some(w) = workers {
                config.workers = w;
            }
            let (archive, executed) = if resume {
                let outcome = resume_campaign(&config)?;
                (outcome.archive, outcome.executed)
            } else {
                let archive = run_campaign(&config)?;
                let n = archive.records.len();
                (archive, n)
            };
            let failed = archive
                .manifest
                .runs
                .iter()
                .filter(|r| r.status == RunStatus::Failed)
                .count();
            println!(
                "{} runs in archive, {executed} executed, {failed} failed; written to {}",
                archive.manifest.runs.len(),
                config.output_dir.display()
            );
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Report {
            archive,
            method_a,
            method_b,
            alpha,
            out,
        } => {
            let loaded = CampaignArchive::load(&archive)
                .with_context(|| format!("loading archive {}", archive.display()))?;
            let alpha = alpha.unwrap_or(loaded.manifest.config.alpha);
            let bundle = build_report(&loaded, &method_a, &method_b, alpha)?;
            print!("{}", render_text_summary(&bundle));
            if let Some(out) = out {
                let path = export_dashboard_bundle(&bundle, &out)?;
                println!("\nreport written to {}", path.display());
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Catalog => {
            println!("{}", serde_json::to_string_pretty(&benchfn::catalog_json())?);
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Validate { archive } => {
            let loaded = CampaignArchive::load(&archive)
                .with_context(|| format!("loading archive {}", archive.display()))?;
            let report = validate_archive(&loaded);
            for m in &report.mismatches {
                println!(
                    "{}/{}/{}: {}",
                    m.method_id, m.function_id, m.repeat, m.reason
                );
            }
            println!(
                "checked {} records, {} mismatches",
                report.checked,
                report.mismatches.len()
            );
            Ok(if report.is_clean() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
    }
}
