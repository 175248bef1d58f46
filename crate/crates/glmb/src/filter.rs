//! The joint prediction-update recursion: per-component score-matrix
//! construction, truncation-backend dispatch, posterior assembly, global
//! truncation, and state estimation.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::assignment::murty_ranked;
use crate::assoc::{association_log_weight, CostMatrix, ExtendedAssociation, GammaMatrix, PredictedTracks};
use crate::density::{GlmbComponent, GlmbDensity};
use crate::error::GlmbError;
use crate::gaussian::GaussianDensity;
use crate::gibbs::{gibbs_truncate, GibbsConfig, InitMode};
use crate::label::Label;
use crate::model::{BirthModel, LinearGaussianModel};

/// Truncation backend selecting which associations each component keeps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Backend {
    /// Deterministic: the T best associations by ranked assignment.
    Ranked,
    /// Stochastic: distinct associations visited by a Gibbs chain drawing T
    /// samples.
    Gibbs {
        sweeps_per_sample: usize,
        init_mode: InitMode,
        restart_per_sample: bool,
    },
}

impl Backend {
    /// Gibbs backend with the default chain settings.
    pub fn gibbs() -> Self {
        Backend::Gibbs {
            sweeps_per_sample: 1,
            init_mode: InitMode::AllMisdetected,
            restart_per_sample: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct FilterConfig {
    pub backend: Backend,
    /// Global cap on posterior components (H_max).
    pub max_hypotheses: usize,
    /// Components below this normalized weight are discarded.
    pub min_weight: f64,
    /// Master seed for the stochastic backend; chain seeds are derived per
    /// scan and component.
    pub seed: u64,
}

impl Default for FilterConfig {
    fn default() -> Self {
        Self {
            backend: Backend::Ranked,
            max_hypotheses: 1000,
            min_weight: 1e-5,
            seed: 0,
        }
    }
}

impl FilterConfig {
    pub fn validate(&self) -> Result<(), GlmbError> {
        if self.max_hypotheses == 0 {
            return Err(GlmbError::ZeroCap);
        }
        if !(0.0..1.0).contains(&self.min_weight) {
            return Err(GlmbError::InvalidParameter(
                "min_weight must lie in [0, 1)".into(),
            ));
        }
        if let Backend::Gibbs {
            sweeps_per_sample, ..
        } = self.backend
        {
            if sweeps_per_sample == 0 {
                return Err(GlmbError::InvalidParameter(
                    "sweeps_per_sample must be at least 1".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Point estimate extracted from a posterior density.
#[derive(Debug, Clone)]
pub struct StateEstimate {
    pub scan_index: u32,
    pub cardinality: usize,
    pub tracks: BTreeMap<Label, DVector<f64>>,
}

impl StateEstimate {
    /// Track positions under the model's observation map (for metrics).
    pub fn positions(&self, model: &LinearGaussianModel) -> Vec<DVector<f64>> {
        self.tracks
            .values()
            .map(|x| &model.observation * x)
            .collect()
    }
}

/// Per-component association budgets: proportional to prior weight with a
/// floor of one, so every hypothesis contributes at least one child.
pub fn allocate_budgets(prior: &GlmbDensity, h_max: usize) -> Result<Vec<usize>, GlmbError> {
    if h_max == 0 {
        return Err(GlmbError::ZeroCap);
    }
    Ok(prior
        .components
        .iter()
        .map(|c| ((h_max as f64 * c.log_weight.exp()).round() as usize).max(1))
        .collect())
}

/// SplitMix64 finalizer; decorrelates derived chain seeds.
fn mix_seed(a: u64, b: u64, c: u64) -> u64 {
    let mut z = a
        .wrapping_add(b.wrapping_mul(0x9e37_79b9_7f4a_7c15))
        .wrapping_add(c.wrapping_mul(0xbf58_476d_1ce4_e5b9));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Children of one prior component: its budgeted associations scored and
/// turned into posterior components with unnormalized log-weights.
fn component_children(
    component: &GlmbComponent,
    measurements: &[DVector<f64>],
    model: &LinearGaussianModel,
    birth: &BirthModel,
    config: &FilterConfig,
    scan_index: u32,
    budget: usize,
    chain_seed: u64,
) -> Result<Vec<GlmbComponent>, GlmbError> {
    let tracks = PredictedTracks::from_component(component, birth, model, scan_index)?;
    let meas_count = measurements.len();
    let gamma = if tracks.is_empty() {
        None
    } else {
        Some(GammaMatrix::build(&tracks, measurements, model))
    };
    let associations: Vec<ExtendedAssociation> = match &gamma {
        // No survivors and no birth terms: the only child is the empty one.
        None => vec![ExtendedAssociation::new(Vec::new())],
        Some(gamma) => match config.backend {
            Backend::Ranked => murty_ranked(&CostMatrix::from_gamma(gamma), budget)?
                .into_iter()
                .map(|(assoc, _)| assoc)
                .collect(),
            Backend::Gibbs {
                sweeps_per_sample,
                init_mode,
                restart_per_sample,
            } => gibbs_truncate(
                gamma,
                &GibbsConfig {
                    samples: budget,
                    sweeps_per_sample,
                    init_mode,
                    seed: chain_seed,
                    restart_per_sample,
                },
            )?,
        },
    };
    // The Kalman gain and Joseph-form covariance depend only on the
    // predicted covariance, not on which measurement is assigned; compute
    // them once per track and reuse the updated covariance across all
    // detection decisions.
    struct TrackGain {
        gain: DMatrix<f64>,
        pred_meas: DVector<f64>,
        updated_cov: DMatrix<f64>,
    }
    let mut gains: Vec<Option<TrackGain>> = Vec::new();
    gains.resize_with(tracks.len(), || None);
    // Children repeat (track, decision) pairs across associations; update
    // each pair at most once.
    let mut updated_cache: Vec<Option<Arc<GaussianDensity>>> =
        vec![None; tracks.len() * (meas_count + 1)];
    let mut children = Vec::with_capacity(associations.len());
    for assoc in associations {
        let log_weight = match &gamma {
            Some(g) => association_log_weight(component.log_weight, &assoc, g),
            None => component.log_weight,
        };
        if !log_weight.is_finite() {
            continue;
        }
        let mut labels = BTreeSet::new();
        let mut track_densities = BTreeMap::new();
        for (n, &decision) in assoc.values.iter().enumerate() {
            if decision == meas_count + 1 {
                continue; // track does not exist under this hypothesis
            }
            let label = tracks.labels[n];
            let slot = n * (meas_count + 1) + decision;
            if updated_cache[slot].is_none() {
                let density = if decision == 0 {
                    tracks.densities[n].clone()
                } else {
                    if gains[n].is_none() {
                        let pred = &tracks.densities[n];
                        let h = &model.observation;
                        let innov_cov = h * &pred.covariance * h.transpose()
                            + &model.observation_noise;
                        let chol = innov_cov
                            .cholesky()
                            .ok_or(GlmbError::SingularInnovation)?;
                        let gain = chol.solve(&(h * &pred.covariance)).transpose();
                        let dim = pred.dim();
                        let ikh = DMatrix::identity(dim, dim) - &gain * h;
                        let updated_cov = &ikh * &pred.covariance * ikh.transpose()
                            + &gain * &model.observation_noise * gain.transpose();
                        gains[n] = Some(TrackGain {
                            pred_meas: h * &pred.mean,
                            gain,
                            updated_cov,
                        });
                    }
                    let tg = gains[n].as_ref().unwrap();
                    let innov = &measurements[decision - 1] - &tg.pred_meas;
                    GaussianDensity {
                        mean: &tracks.densities[n].mean + &tg.gain * innov,
                        covariance: tg.updated_cov.clone(),
                    }
                };
                updated_cache[slot] = Some(Arc::new(density));
            }
            labels.insert(label);
            track_densities.insert(label, updated_cache[slot].clone().unwrap());
        }
        let mut history = component.history.clone();
        history.push(assoc.values.clone());
        children.push(GlmbComponent {
            labels,
            history,
            log_weight,
            track_densities,
        });
    }
    Ok(children)
}

/// One filtering step: absorb a measurement scan into the prior density.
///
/// Per prior component: predict survivors, attach birth terms, build the
/// score matrix, obtain the budgeted associations from the configured
/// backend, and score each child. Children are then deduplicated,
/// normalized, and truncated to the hypothesis cap. Returns the posterior
/// and the L1 weight mass discarded by truncation.
pub fn joint_step(
    prior: &GlmbDensity,
    measurements: &[DVector<f64>],
    model: &LinearGaussianModel,
    birth: &BirthModel,
    config: &FilterConfig,
) -> Result<(GlmbDensity, f64), GlmbError> {
    config.validate()?;
    model.validate()?;
    birth.validate()?;
    let scan_index = prior.scan_index + 1;
    let budgets = allocate_budgets(prior, config.max_hypotheses)?;
    let per_component: Vec<Result<Vec<GlmbComponent>, GlmbError>> = prior
        .components
        .par_iter()
        .enumerate()
        .map(|(h, component)| {
            component_children(
                component,
                measurements,
                model,
                birth,
                config,
                scan_index,
                budgets[h],
                mix_seed(config.seed, scan_index as u64, h as u64),
            )
        })
        .collect();
    let mut components = Vec::new();
    for result in per_component {
        components.extend(result?);
    }
    if components.is_empty() {
        return Err(GlmbError::EmptyPosterior);
    }
    let posterior = GlmbDensity {
        components,
        scan_index,
    }
    .merge_duplicates()
    .normalize()?;
    posterior.truncate(config.max_hypotheses, config.min_weight)
}

/// MAP-cardinality estimator: pick the most probable cardinality n* (ties
/// resolved toward the smaller count), then the highest-weight component
/// with exactly n* tracks; report each track's posterior mean.
pub fn extract_estimate(posterior: &GlmbDensity) -> Result<StateEstimate, GlmbError> {
    let rho = posterior.cardinality_distribution();
    let mut best_n = 0;
    for (n, &p) in rho.iter().enumerate() {
        if p > rho[best_n] {
            best_n = n;
        }
    }
    let component = posterior
        .components
        .iter()
        .filter(|c| c.cardinality() == best_n)
        .max_by(|a, b| {
            a.log_weight
                .partial_cmp(&b.log_weight)
                .expect("finite weights")
        })
        .ok_or(GlmbError::EmptyPosterior)?;
    Ok(StateEstimate {
        scan_index: posterior.scan_index,
        cardinality: best_n,
        tracks: component
            .track_densities
            .iter()
            .map(|(l, d)| (*l, d.mean.clone()))
            .collect(),
    })
}
