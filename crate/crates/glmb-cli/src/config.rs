//! Structured-text (TOML) configuration schemas for scenarios and filter
//! settings, plus the scenario hash used to pair comparable runs.

use std::fs;
use std::path::Path;

use serde::Deserialize;

use glmb::filter::{Backend, FilterConfig};
use glmb::gibbs::InitMode;
use glmb::scenario::{BirthSite, Scenario, TruthTrack};

/// One scripted truth target.
#[derive(Debug, Clone, Deserialize)]
pub struct TrackConfig {
    pub birth_scan: u32,
    /// Exclusive death scan.
    pub death_scan: u32,
    /// `[x, y, vx, vy]` at the birth scan.
    pub initial_state: [f64; 4],
}

#[derive(Debug, Clone, Deserialize)]
pub struct BirthSiteConfig {
    pub position: [f64; 2],
    pub existence: f64,
}

/// On-disk scenario description; field names mirror the library scenario.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub duration: u32,
    pub region_min: [f64; 2],
    pub region_max: [f64; 2],
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default)]
    pub truth_process_noise_std: f64,
    pub model_process_noise_std: f64,
    pub meas_noise_std: f64,
    pub survival_prob: f64,
    pub detection_prob: f64,
    /// Mean number of clutter points per scan.
    pub clutter_mean: f64,
    #[serde(default = "default_birth_pos_std")]
    pub birth_pos_std: f64,
    #[serde(default = "default_birth_vel_std")]
    pub birth_vel_std: f64,
    #[serde(default)]
    pub birth_sites: Vec<BirthSiteConfig>,
    #[serde(default)]
    pub tracks: Vec<TrackConfig>,
}

fn default_dt() -> f64 {
    1.0
}
fn default_birth_pos_std() -> f64 {
    10.0
}
fn default_birth_vel_std() -> f64 {
    15.0
}

impl ScenarioConfig {
    pub fn into_scenario(self, seed: u64) -> Scenario {
        Scenario {
            duration: self.duration,
            region_min: self.region_min,
            region_max: self.region_max,
            dt: self.dt,
            truth_process_noise_std: self.truth_process_noise_std,
            model_process_noise_std: self.model_process_noise_std,
            meas_noise_std: self.meas_noise_std,
            survival_prob: self.survival_prob,
            detection_prob: self.detection_prob,
            clutter_mean: self.clutter_mean,
            birth_sites: self
                .birth_sites
                .into_iter()
                .map(|s| BirthSite {
                    position: s.position,
                    existence: s.existence,
                })
                .collect(),
            birth_pos_std: self.birth_pos_std,
            birth_vel_std: self.birth_vel_std,
            tracks: self
                .tracks
                .into_iter()
                .map(|t| TruthTrack {
                    birth_scan: t.birth_scan,
                    death_scan: t.death_scan,
                    initial_state: t.initial_state,
                })
                .collect(),
            seed,
        }
    }
}

/// On-disk filter settings; every field is optional and falls back to the
/// library defaults, so an empty file is valid.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilterConfigFile {
    /// "ranked" or "gibbs".
    pub backend: Option<String>,
    pub max_hypotheses: Option<usize>,
    pub min_weight: Option<f64>,
    pub seed: Option<u64>,
    pub sweeps_per_sample: Option<usize>,
    pub restart_per_sample: Option<bool>,
    pub ospa_cutoff: Option<f64>,
    pub ospa_order: Option<f64>,
}

/// Parse a backend name from the CLI flag or a config file.
pub fn parse_backend(name: &str, file: &FilterConfigFile) -> Result<Backend, String> {
    match name {
        "ranked" => Ok(Backend::Ranked),
        "gibbs" => Ok(Backend::Gibbs {
            sweeps_per_sample: file.sweeps_per_sample.unwrap_or(1),
            init_mode: InitMode::AllMisdetected,
            restart_per_sample: file.restart_per_sample.unwrap_or(false),
        }),
        other => Err(format!("unknown backend '{other}' (expected ranked or gibbs)")),
    }
}

impl FilterConfigFile {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = fs::read_to_string(path)
            .map_err(|e| format!("cannot read filter config {}: {e}", path.display()))?;
        toml::from_str(&text)
            .map_err(|e| format!("invalid filter config {}: {e}", path.display()))
    }

    /// Resolve the effective filter configuration. CLI flags win over file
    /// values, which win over defaults.
    pub fn resolve(
        &self,
        backend_flag: Option<&str>,
        cap_flag: Option<usize>,
        seed_flag: Option<u64>,
    ) -> Result<FilterConfig, String> {
        let defaults = FilterConfig::default();
        let backend_name = backend_flag
            .map(str::to_owned)
            .or_else(|| self.backend.clone())
            .unwrap_or_else(|| "ranked".to_owned());
        let config = FilterConfig {
            backend: parse_backend(&backend_name, self)?,
            max_hypotheses: cap_flag
                .or(self.max_hypotheses)
                .unwrap_or(defaults.max_hypotheses),
            min_weight: self.min_weight.unwrap_or(defaults.min_weight),
            seed: seed_flag.or(self.seed).unwrap_or(defaults.seed),
        };
        config.validate().map_err(|e| e.to_string())?;
        Ok(config)
    }
}

/// Load a scenario: a built-in preset name, otherwise a TOML file path.
pub fn load_scenario(spec: &str, seed: u64) -> Result<Scenario, String> {
    if let Some(preset) = Scenario::preset(spec, seed) {
        return Ok(preset);
    }
    let path = Path::new(spec);
    let text = fs::read_to_string(path).map_err(|e| {
        format!(
            "scenario '{spec}' is neither a preset (scenario-1, scenario-2) \
             nor a readable file: {e}"
        )
    })?;
    let config: ScenarioConfig =
        toml::from_str(&text).map_err(|e| format!("invalid scenario {spec}: {e}"))?;
    let scenario = config.into_scenario(seed);
    scenario.validate().map_err(|e| e.to_string())?;
    Ok(scenario)
}

/// 64-bit FNV-1a hash over the scenario parameters (excluding the seed):
/// runs are comparable when their scenario hashes match.
pub fn scenario_hash(s: &Scenario) -> u64 {
    let mut canon = format!(
        "{};{:?};{:?};{};{};{};{};{};{};{};{};{}",
        s.duration,
        s.region_min,
        s.region_max,
        s.dt,
        s.truth_process_noise_std,
        s.model_process_noise_std,
        s.meas_noise_std,
        s.survival_prob,
        s.detection_prob,
        s.clutter_mean,
        s.birth_pos_std,
        s.birth_vel_std,
    );
    for site in &s.birth_sites {
        canon.push_str(&format!("|{:?}:{}", site.position, site.existence));
    }
    for t in &s.tracks {
        canon.push_str(&format!(
            "|{}..{}@{:?}",
            t.birth_scan, t.death_scan, t.initial_state
        ));
    }
    const PRIME: u64 = 0x100000001b3;
    let mut h = 0xcbf29ce484222325u64;
    for b in canon.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(PRIME);
    }
    h
}
