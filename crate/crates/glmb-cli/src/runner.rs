//! Monte Carlo experiment execution: independent trials over a shared
//! ground truth, per-scan records, and aggregate summaries.

use std::time::Instant;

use nalgebra::DVector;
use rayon::prelude::*;

use glmb::filter::{extract_estimate, joint_step, FilterConfig};
use glmb::ospa::{ospa, OspaParams};
use glmb::scenario::Scenario;
use glmb::GlmbDensity;

use crate::summary::{ScanAggregate, Summary};

/// One row of the record file: the per-scan outcome of one trial.
#[derive(Debug, Clone)]
pub struct RunRecord {
    pub trial: usize,
    pub scan: u32,
    pub true_cardinality: usize,
    pub estimated_cardinality: usize,
    pub ospa: f64,
    pub ospa_localization: f64,
    pub ospa_cardinality: f64,
    pub component_count: usize,
    /// Wall-clock filtering time for this scan, in seconds. Serialized to a
    /// separate timing file so the record file stays deterministic.
    pub step_seconds: f64,
}

/// Outcome of one trial: its records, or the error that aborted it.
pub struct TrialResult {
    pub trial: usize,
    pub outcome: Result<Vec<RunRecord>, String>,
}

/// SplitMix64 finalizer for decorrelated per-trial seeds.
fn mix_seed(a: u64, b: u64, c: u64) -> u64 {
    let mut z = a
        .wrapping_add(b.wrapping_mul(0x9e37_79b9_7f4a_7c15))
        .wrapping_add(c.wrapping_mul(0xbf58_476d_1ce4_e5b9));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Run one trial: fresh measurement noise over the shared truth, a full
/// filtering pass, and per-scan OSPA against the truth positions.
pub fn run_trial(
    scenario: &Scenario,
    truth: &[Vec<(glmb::Label, DVector<f64>)>],
    config: &FilterConfig,
    ospa_params: &OspaParams,
    trial: usize,
) -> Result<Vec<RunRecord>, String> {
    let model = scenario.model().map_err(|e| e.to_string())?;
    let birth = scenario.birth_model().map_err(|e| e.to_string())?;
    let scans =
        scenario.generate_all_scans(truth, mix_seed(scenario.seed, trial as u64, 1));
    let trial_config = FilterConfig {
        seed: mix_seed(config.seed, trial as u64, 2),
        ..config.clone()
    };
    let mut posterior = GlmbDensity::initial();
    let mut records = Vec::with_capacity(scans.len());
    for (k, scan) in scans.iter().enumerate() {
        let start = Instant::now();
        let (next, _) = joint_step(&posterior, &scan.measurements, &model, &birth, &trial_config)
            .map_err(|e| format!("scan {k}: {e}"))?;
        posterior = next;
        let estimate = extract_estimate(&posterior).map_err(|e| format!("scan {k}: {e}"))?;
        let step_seconds = start.elapsed().as_secs_f64();

        let truth_positions: Vec<DVector<f64>> = truth[k]
            .iter()
            .map(|(_, x)| DVector::from_column_slice(&[x[0], x[1]]))
            .collect();
        let est_positions = estimate.positions(&model);
        let metric = ospa(&truth_positions, &est_positions, ospa_params)
            .map_err(|e| format!("scan {k}: {e}"))?;
        records.push(RunRecord {
            trial,
            scan: k as u32,
            true_cardinality: truth_positions.len(),
            estimated_cardinality: estimate.cardinality,
            ospa: metric.distance,
            ospa_localization: metric.localization,
            ospa_cardinality: metric.cardinality,
            component_count: posterior.components.len(),
            step_seconds,
        });
    }
    Ok(records)
}

/// Run `trials` independent trials, at most `parallel` concurrently.
/// Results are returned in trial order regardless of completion order, so
/// parallel and sequential execution produce identical output.
pub fn run_experiment(
    scenario: &Scenario,
    config: &FilterConfig,
    ospa_params: &OspaParams,
    trials: usize,
    parallel: usize,
) -> Result<Vec<TrialResult>, String> {
    let truth = scenario.generate_truth().map_err(|e| e.to_string())?;
    let run_one = |trial: usize| TrialResult {
        trial,
        outcome: run_trial(scenario, &truth, config, ospa_params, trial),
    };
    if parallel <= 1 {
        return Ok((0..trials).map(run_one).collect());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallel)
        .build()
        .map_err(|e| e.to_string())?;
    Ok(pool.install(|| (0..trials).into_par_iter().map(run_one).collect()))
}

/// Aggregate trial results into the per-scan summary statistics.
pub fn summarize(
    results: &[TrialResult],
    scenario_hash: u64,
    backend: &str,
    duration: u32,
) -> Summary {
    let succeeded: Vec<&Vec<RunRecord>> = results
        .iter()
        .filter_map(|r| r.outcome.as_ref().ok())
        .collect();
    let failed: Vec<usize> = results
        .iter()
        .filter(|r| r.outcome.is_err())
        .map(|r| r.trial)
        .collect();
    let n = succeeded.len().max(1) as f64;
    let mut scans = Vec::with_capacity(duration as usize);
    for k in 0..duration as usize {
        let mut true_card = 0usize;
        let mut card_sum = 0.0;
        let mut card_sq = 0.0;
        let mut ospa_sum = 0.0;
        let mut time_sum = 0.0;
        for trial in &succeeded {
            let r = &trial[k];
            true_card = r.true_cardinality;
            card_sum += r.estimated_cardinality as f64;
            card_sq += (r.estimated_cardinality as f64).powi(2);
            ospa_sum += r.ospa;
            time_sum += r.step_seconds;
        }
        let mean_card = card_sum / n;
        let var = (card_sq / n - mean_card * mean_card).max(0.0);
        scans.push(ScanAggregate {
            scan: k as u32,
            true_cardinality: true_card,
            mean_cardinality: mean_card,
            std_cardinality: var.sqrt(),
            mean_ospa: ospa_sum / n,
            mean_step_seconds: time_sum / n,
        });
    }
    Summary {
        scenario_hash,
        backend: backend.to_owned(),
        trials: results.len(),
        failed_trials: failed,
        mean_step_seconds: if scans.is_empty() {
            0.0
        } else {
            scans.iter().map(|s| s.mean_step_seconds).sum::<f64>() / scans.len() as f64
        },
        scans,
    }
}
