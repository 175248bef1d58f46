//! Command-line experiment runner for the glmb tracking filter.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use glmb::ospa::OspaParams;
use glmb_cli::config::{load_scenario, scenario_hash, FilterConfigFile};
use glmb_cli::runner::{run_experiment, summarize, RunRecord, TrialResult};
use glmb_cli::summary::{compare_backends, fmt_sig, two_sig, Summary};

#[derive(Parser)]
#[command(name = "glmb", about = "Multi-target tracking experiment harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte Carlo experiment and write record/summary files.
    Run {
        /// Scenario: a preset name (scenario-1, scenario-2) or a TOML file.
        #[arg(long)]
        scenario: String,
        /// Filter configuration TOML file.
        #[arg(long)]
        filter: Option<PathBuf>,
        /// Number of Monte Carlo trials.
        #[arg(long, default_value_t = 1)]
        trials: usize,
        /// Master seed for truth, measurement noise, and the filter.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Truncation backend, overriding the filter config.
        #[arg(long, value_parser = ["ranked", "gibbs"])]
        backend: Option<String>,
        /// Hypothesis cap, overriding the filter config.
        #[arg(long)]
        cap: Option<usize>,
        /// Output directory (created if missing).
        #[arg(long)]
        out: PathBuf,
        /// Number of trials to run concurrently.
        #[arg(long, default_value_t = 1)]
        parallel: usize,
    },
    /// Compare the summaries of two runs over the same scenario.
    Compare {
        /// Summary file of the baseline run (A).
        a: PathBuf,
        /// Summary file of the other run (B).
        b: PathBuf,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<(), String> {
    match cli.command {
        Command::Run {
            scenario,
            filter,
            trials,
            seed,
            backend,
            cap,
            out,
            parallel,
        } => {
            if trials == 0 {
                return Err("--trials must be at least 1".into());
            }
            let scenario = load_scenario(&scenario, seed)?;
            let filter_file = match &filter {
                Some(path) => FilterConfigFile::load(path)?,
                None => FilterConfigFile::default(),
            };
            let config = filter_file.resolve(backend.as_deref(), cap, Some(seed))?;
            let ospa_params = OspaParams {
                cutoff: filter_file.ospa_cutoff.unwrap_or(100.0),
                order: filter_file.ospa_order.unwrap_or(1.0),
            };
            ospa_params.validate().map_err(|e| e.to_string())?;
            let backend_name = match config.backend {
                glmb::filter::Backend::Ranked => "ranked",
                glmb::filter::Backend::Gibbs { .. } => "gibbs",
            };

            let results =
                run_experiment(&scenario, &config, &ospa_params, trials, parallel)?;
            for r in &results {
                if let Err(e) = &r.outcome {
                    eprintln!("warning: trial {} failed: {e}", r.trial);
                }
            }
            if results.iter().all(|r| r.outcome.is_err()) {
                return Err("all trials failed".into());
            }

            fs::create_dir_all(&out)
                .map_err(|e| format!("cannot create {}: {e}", out.display()))?;
            write_records(&out, &results)?;
            let summary = summarize(
                &results,
                scenario_hash(&scenario),
                backend_name,
                scenario.duration,
            );
            fs::write(out.join("summary.txt"), summary.render())
                .map_err(|e| format!("cannot write summary: {e}"))?;
            println!(
                "wrote {} trials ({} failed) to {}",
                trials,
                summary.failed_trials.len(),
                out.display()
            );
            Ok(())
        }
        Command::Compare { a, b } => {
            let a = Summary::load(&a)?;
            let b = Summary::load(&b)?;
            let report = compare_backends(&a, &b)?;
            println!("backend A = {}, backend B = {}", a.backend, b.backend);
            println!("# scan ospa_a ospa_b delta_b_minus_a");
            for (scan, oa, ob, delta) in &report.ospa_deltas {
                println!(
                    "{scan} {} {} {}",
                    fmt_sig(*oa),
                    fmt_sig(*ob),
                    fmt_sig(*delta)
                );
            }
            println!("mean_step_time_ratio_a_over_b = {}", two_sig(report.runtime_ratio));
            Ok(())
        }
    }
}

/// Write `records.csv` (deterministic columns) and `timings.csv` (wall-clock
/// step times, kept separate so the record file is seed-reproducible).
fn write_records(out: &std::path::Path, results: &[TrialResult]) -> Result<(), String> {
    let mut records = String::from(
        "trial,scan,true_cardinality,estimated_cardinality,\
         ospa,ospa_localization,ospa_cardinality,component_count\n",
    );
    let mut timings = String::from("trial,scan,step_seconds\n");
    let push = |buf: &mut String, r: &RunRecord| {
        buf.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.trial,
            r.scan,
            r.true_cardinality,
            r.estimated_cardinality,
            fmt_sig(r.ospa),
            fmt_sig(r.ospa_localization),
            fmt_sig(r.ospa_cardinality),
            r.component_count,
        ));
    };
    for result in results {
        if let Ok(rows) = &result.outcome {
            for r in rows {
                push(&mut records, r);
                timings.push_str(&format!(
                    "{},{},{}\n",
                    r.trial,
                    r.scan,
                    fmt_sig(r.step_seconds)
                ));
            }
        }
    }
    fs::write(out.join("records.csv"), records)
        .map_err(|e| format!("cannot write records: {e}"))?;
    fs::write(out.join("timings.csv"), timings)
        .map_err(|e| format!("cannot write timings: {e}"))?;
    Ok(())
}
