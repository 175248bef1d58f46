//! Stochastic truncation backend: Gibbs sampling over extended association
//! vectors. Each track's association is resampled in turn from its exact
//! conditional, which is proportional to the track's score-matrix row
//! restricted to measurements not claimed by any other track.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use std::collections::BTreeSet;

use crate::assoc::{CostMatrix, ExtendedAssociation, GammaMatrix, MISDETECTED};
use crate::assignment::optimal_assignment;
use crate::error::GlmbError;

/// Starting point of the chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitMode {
    /// All tracks misdetected; always a valid vector.
    AllMisdetected,
    /// The minimum-cost assignment; lands the chain in the bulk of the
    /// distribution so every sample is usable.
    OptimalAssignment,
    /// All tracks non-existent.
    AllNonexistent,
}

#[derive(Debug, Clone)]
pub struct GibbsConfig {
    /// Number of emitted samples.
    pub samples: usize,
    /// Gibbs sweeps per emitted sample.
    pub sweeps_per_sample: usize,
    pub init_mode: InitMode,
    pub seed: u64,
    /// Re-initialize the chain before every emitted sample (the literal
    /// double-loop reading) instead of continuing the warm chain.
    pub restart_per_sample: bool,
}

impl Default for GibbsConfig {
    fn default() -> Self {
        Self {
            samples: 1,
            sweeps_per_sample: 1,
            init_mode: InitMode::AllMisdetected,
            seed: 0,
            restart_per_sample: false,
        }
    }
}

impl GibbsConfig {
    pub fn validate(&self) -> Result<(), GlmbError> {
        if self.samples == 0 || self.sweeps_per_sample == 0 {
            return Err(GlmbError::InvalidParameter(
                "Gibbs sample and sweep counts must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// Which track currently claims each measurement; `usize::MAX` = free.
fn occupancy(assoc: &ExtendedAssociation, meas_count: usize) -> Vec<usize> {
    let mut occ = vec![usize::MAX; meas_count];
    for (n, &v) in assoc.values.iter().enumerate() {
        if v >= 1 && v <= meas_count {
            occ[v - 1] = n;
        }
    }
    occ
}

/// Exact conditional distribution of track `n`'s association given all other
/// entries: probability of value `j` is proportional to the score-matrix
/// entry, zeroed for measurements held by another track. Returned vector is
/// indexed by association value `0..=M+1` and sums to 1.
pub fn conditional_marginal(
    n: usize,
    assoc: &ExtendedAssociation,
    gamma: &GammaMatrix,
) -> Result<Vec<f64>, GlmbError> {
    let m = gamma.meas_count();
    let occ = occupancy(assoc, m);
    let mut probs = vec![0.0; m + 2];
    let mut total = 0.0;
    for j in 0..=(m + 1) {
        if j >= 1 && j <= m && occ[j - 1] != usize::MAX && occ[j - 1] != n {
            continue;
        }
        let g = gamma.value(n, j);
        probs[j] = g;
        total += g;
    }
    if total <= 0.0 {
        return Err(GlmbError::DegenerateRow(n));
    }
    for p in &mut probs {
        *p /= total;
    }
    Ok(probs)
}

/// Draw from the unnormalized weights by a linear scan over the cumulative
/// sum. `skip` masks measurements owned by other tracks.
fn sample_entry(
    n: usize,
    gamma: &GammaMatrix,
    occ: &[usize],
    rng: &mut impl Rng,
) -> Result<usize, GlmbError> {
    let m = gamma.meas_count();
    let mut total = 0.0;
    for j in 0..=(m + 1) {
        if j >= 1 && j <= m && occ[j - 1] != usize::MAX && occ[j - 1] != n {
            continue;
        }
        total += gamma.value(n, j);
    }
    if total <= 0.0 {
        return Err(GlmbError::DegenerateRow(n));
    }
    let target = rng.gen::<f64>() * total;
    let mut acc = 0.0;
    let mut last = MISDETECTED;
    for j in 0..=(m + 1) {
        if j >= 1 && j <= m && occ[j - 1] != usize::MAX && occ[j - 1] != n {
            continue;
        }
        let g = gamma.value(n, j);
        if g <= 0.0 {
            continue;
        }
        acc += g;
        last = j;
        if target < acc {
            return Ok(j);
        }
    }
    Ok(last) // rounding fell off the end
}

/// One full sweep: resample every entry in order, updating the vector (and
/// the measurement occupancy) between draws.
pub fn gibbs_sweep(
    assoc: &mut ExtendedAssociation,
    gamma: &GammaMatrix,
    rng: &mut impl Rng,
) -> Result<(), GlmbError> {
    let m = gamma.meas_count();
    let mut occ = occupancy(assoc, m);
    sweep_with_occupancy(assoc, gamma, &mut occ, rng)
}

fn sweep_with_occupancy(
    assoc: &mut ExtendedAssociation,
    gamma: &GammaMatrix,
    occ: &mut [usize],
    rng: &mut impl Rng,
) -> Result<(), GlmbError> {
    let m = gamma.meas_count();
    for n in 0..assoc.len() {
        let new = sample_entry(n, gamma, occ, rng)?;
        let old = assoc.values[n];
        if old >= 1 && old <= m {
            occ[old - 1] = usize::MAX;
        }
        if new >= 1 && new <= m {
            occ[new - 1] = n;
        }
        assoc.values[n] = new;
    }
    Ok(())
}

fn initial_vector(
    gamma: &GammaMatrix,
    mode: InitMode,
) -> Result<ExtendedAssociation, GlmbError> {
    let p = gamma.track_count();
    let m = gamma.meas_count();
    match mode {
        InitMode::AllMisdetected => Ok(ExtendedAssociation::new(vec![MISDETECTED; p])),
        InitMode::AllNonexistent => Ok(ExtendedAssociation::new(vec![m + 1; p])),
        InitMode::OptimalAssignment => {
            let cost = CostMatrix::from_gamma(gamma);
            Ok(optimal_assignment(&cost)?.0)
        }
    }
}

/// Run the sampler and return the deduplicated set of emitted association
/// vectors (at most `config.samples` distinct), sorted for determinism.
pub fn gibbs_truncate(
    gamma: &GammaMatrix,
    config: &GibbsConfig,
) -> Result<Vec<ExtendedAssociation>, GlmbError> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let m = gamma.meas_count();
    let mut state = initial_vector(gamma, config.init_mode)?;
    let mut occ = occupancy(&state, m);
    let mut emitted: BTreeSet<ExtendedAssociation> = BTreeSet::new();
    emitted.insert(state.clone());
    for _ in 0..config.samples {
        if config.restart_per_sample {
            state = initial_vector(gamma, config.init_mode)?;
            occ = occupancy(&state, m);
        }
        for _ in 0..config.sweeps_per_sample {
            sweep_with_occupancy(&mut state, gamma, &mut occ, &mut rng)?;
        }
        emitted.insert(state.clone());
    }
    Ok(emitted.into_iter().collect())
}
