use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use aim_bench::report::REPORT_FILE;
use aim_bench::summary::{read_results, RESULTS_FILE, SUMMARY_FILE};
use aim_bench::{emit_plot_data, emit_summary, run_experiment, verify_dir, ExperimentSpec, Layout};
use anyhow::{bail, Context};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "bench", about = "Run AIM benchmark experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every cell, solver and repetition of an experiment spec.
    Run {
        spec: PathBuf,
        /// Use the full-size L2-Lp grid when the spec lists no cells.
        #[arg(long)]
        full_scale: bool,
        /// Override the spec's base seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the spec's output directory.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Append the published DRSOM figures to the summary.
        #[arg(long)]
        reference: bool,
    },
    /// Check descent and acceptance on every AIM trace below a directory.
    Verify { dir: PathBuf },
    /// Rebuild the summary table from an output directory's results.
    Summarize {
        dir: PathBuf,
        #[arg(long, value_enum, default_value = "by_cell")]
        layout: Layout,
        #[arg(long)]
        reference: bool,
    },
    /// Write (k, f - f_best, gnorm) series for every trace below a directory.
    Plot {
        dir: PathBuf,
        /// Defaults to `<dir>/plot`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Run { spec, full_scale, seed, out, reference } => {
            let mut experiment = ExperimentSpec::from_file(&spec)?;
            experiment.full_scale |= full_scale;
            experiment.include_reference |= reference;
            if let Some(seed) = seed {
                experiment.seed = seed;
            }
            if let Some(out) = out {
                experiment.output_dir = out;
            }
            let result = run_experiment(&experiment)?;
            print!("{}", result.summary);
            let failed = result.rows.iter().filter(|r| r.status != aim_core::RunStatus::Converged).count();
            eprintln!(
                "{} runs, {} not converged; output in {}",
                result.rows.len(),
                failed,
                result.output_dir.display()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { dir } => {
            let report = verify_dir(&dir)?;
            if report.verdicts.is_empty() {
                bail!("no AIM traces found below {}", dir.display());
            }
            let path = dir.join(REPORT_FILE);
            fs::write(&path, report.lines.join("\n") + "\n").with_context(|| path.display().to_string())?;
            for v in &report.verdicts {
                println!("{v}");
            }
            println!(
                "{} traces, {} steps, {} failures, {} baseline traces skipped; details in {}",
                report.verdicts.len(),
                report.total_steps(),
                report.total_failures(),
                report.skipped,
                path.display()
            );
            Ok(if report.passed() { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }
        Command::Summarize { dir, layout, reference } => {
            let rows = read_results(&dir.join(RESULTS_FILE))?;
            let summary = emit_summary(&rows, layout, reference)?;
            let path = dir.join(SUMMARY_FILE);
            fs::write(&path, &summary).with_context(|| path.display().to_string())?;
            print!("{summary}");
            Ok(ExitCode::SUCCESS)
        }
        Command::Plot { dir, out } => {
            let out = out.unwrap_or_else(|| dir.join("plot"));
            let written = emit_plot_data(&dir, &out)?;
            eprintln!("{} series written to {}", written.len(), out.display());
            Ok(ExitCode::SUCCESS)
        }
    }
}
