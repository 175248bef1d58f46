//! Ground-truth trajectory generation and measurement-scan synthesis:
//! straight-line targets with scripted birth/death times, independent
//! detections with probability `p_D`, and Poisson clutter uniform over the
//! surveillance region. Includes the two standard benchmark presets.

use nalgebra::DVector;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Poisson, StandardNormal};

use crate::error::GlmbError;
use crate::label::Label;
use crate::model::{BirthModel, BirthTerm, LinearGaussianModel};
use crate::gaussian::GaussianDensity;

/// A scripted target: alive on scans `birth_scan..death_scan`, moving in a
/// straight line from `initial_state` (optionally with process noise).
#[derive(Debug, Clone)]
pub struct TruthTrack {
    pub birth_scan: u32,
    /// Exclusive: the track is absent from this scan on.
    pub death_scan: u32,
    /// `[x, y, vx, vy]` at the birth scan.
    pub initial_state: [f64; 4],
}

/// A fixed birth location of the filter's birth model.
#[derive(Debug, Clone)]
pub struct BirthSite {
    pub position: [f64; 2],
    pub existence: f64,
}

#[derive(Debug, Clone)]
pub struct Scenario {
    /// Number of scans; scan indices run `0..duration`.
    pub duration: u32,
    pub region_min: [f64; 2],
    pub region_max: [f64; 2],
    pub dt: f64,
    /// Process noise driving the simulated truth (0 = exact straight lines).
    pub truth_process_noise_std: f64,
    /// Process noise assumed by the filter model.
    pub model_process_noise_std: f64,
    pub meas_noise_std: f64,
    pub survival_prob: f64,
    pub detection_prob: f64,
    /// Mean number of clutter points per scan.
    pub clutter_mean: f64,
    pub birth_sites: Vec<BirthSite>,
    pub birth_pos_std: f64,
    pub birth_vel_std: f64,
    pub tracks: Vec<TruthTrack>,
    pub seed: u64,
}

/// One synthesized scan: measurements in shuffled order, plus a diagnostic
/// side channel mapping each measurement to its source truth track (`None`
/// for clutter). The filter consumes `measurements` only.
#[derive(Debug, Clone)]
pub struct Scan {
    pub measurements: Vec<DVector<f64>>,
    pub provenance: Vec<Option<Label>>,
}

impl Scenario {
    pub fn validate(&self) -> Result<(), GlmbError> {
        if self.duration == 0 {
            return Err(GlmbError::InvalidParameter("duration must be positive".into()));
        }
        if self.region_min[0] >= self.region_max[0]
            || self.region_min[1] >= self.region_max[1]
        {
            return Err(GlmbError::InvalidParameter("empty region".into()));
        }
        for (i, t) in self.tracks.iter().enumerate() {
            if t.birth_scan >= t.death_scan || t.death_scan > self.duration {
                return Err(GlmbError::InvalidParameter(format!(
                    "track {i}: need birth < death <= duration"
                )));
            }
            let [x, y, ..] = t.initial_state;
            if x < self.region_min[0]
                || x > self.region_max[0]
                || y < self.region_min[1]
                || y > self.region_max[1]
            {
                return Err(GlmbError::InvalidParameter(format!(
                    "track {i}: initial state outside region"
                )));
            }
        }
        if self.clutter_mean < 0.0 {
            return Err(GlmbError::InvalidParameter("negative clutter mean".into()));
        }
        Ok(())
    }

    pub fn area(&self) -> f64 {
        (self.region_max[0] - self.region_min[0])
            * (self.region_max[1] - self.region_min[1])
    }

    /// Clutter density: per-scan mean spread uniformly over the region.
    pub fn clutter_intensity(&self) -> f64 {
        self.clutter_mean / self.area()
    }

    /// The filter's dynamical/observation model for this scenario.
    pub fn model(&self) -> Result<LinearGaussianModel, GlmbError> {
        let model = LinearGaussianModel::constant_velocity(
            self.dt,
            self.model_process_noise_std,
            self.meas_noise_std,
            self.survival_prob,
            self.detection_prob,
            self.clutter_intensity(),
        );
        model.validate()?;
        Ok(model)
    }

    /// The filter's birth model: one Gaussian per site, zero-velocity mean.
    pub fn birth_model(&self) -> Result<BirthModel, GlmbError> {
        let terms = self
            .birth_sites
            .iter()
            .enumerate()
            .map(|(i, site)| {
                let mean = DVector::from_column_slice(&[
                    site.position[0],
                    site.position[1],
                    0.0,
                    0.0,
                ]);
                let cov = nalgebra::DMatrix::from_diagonal(&DVector::from_column_slice(&[
                    self.birth_pos_std.powi(2),
                    self.birth_pos_std.powi(2),
                    self.birth_vel_std.powi(2),
                    self.birth_vel_std.powi(2),
                ]));
                Ok(BirthTerm {
                    birth_index: i as u32,
                    existence: site.existence,
                    density: GaussianDensity::new(mean, cov)?,
                })
            })
            .collect::<Result<Vec<_>, GlmbError>>()?;
        let birth = BirthModel { terms };
        birth.validate()?;
        Ok(birth)
    }

    /// Truth states per scan: `result[k]` lists `(label, state)` for every
    /// track alive at scan `k`. Labels are `(birth scan, track index)`.
    /// Deterministic given the scenario seed.
    pub fn generate_truth(&self) -> Result<Vec<Vec<(Label, DVector<f64>)>>, GlmbError> {
        self.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ 0x7472_7574_68u64);
        let f = constant_velocity_transition(self.dt);
        let mut scans = vec![Vec::new(); self.duration as usize];
        for (i, track) in self.tracks.iter().enumerate() {
            let label = Label::new(track.birth_scan, i as u32);
            let mut state = DVector::from_column_slice(&track.initial_state);
            for k in track.birth_scan..track.death_scan {
                scans[k as usize].push((label, state.clone()));
                state = &f * &state;
                if self.truth_process_noise_std > 0.0 {
                    add_process_noise(
                        &mut state,
                        self.dt,
                        self.truth_process_noise_std,
                        &mut rng,
                    );
                }
            }
        }
        Ok(scans)
    }

    /// Synthesize one measurement scan from the given truth states.
    pub fn generate_scan(
        &self,
        truth: &[(Label, DVector<f64>)],
        rng: &mut impl Rng,
    ) -> Scan {
        let sigma = self.meas_noise_std;
        let mut measurements = Vec::new();
        let mut provenance = Vec::new();
        for (label, state) in truth {
            if rng.gen::<f64>() < self.detection_prob {
                let z = DVector::from_column_slice(&[
                    state[0] + sigma * rng.sample::<f64, _>(StandardNormal),
                    state[1] + sigma * rng.sample::<f64, _>(StandardNormal),
                ]);
                measurements.push(z);
                provenance.push(Some(*label));
            }
        }
        let clutter_count = if self.clutter_mean > 0.0 {
            let poisson = Poisson::new(self.clutter_mean).expect("validated mean");
            rng.sample(poisson) as usize
        } else {
            0
        };
        for _ in 0..clutter_count {
            let z = DVector::from_column_slice(&[
                rng.gen_range(self.region_min[0]..self.region_max[0]),
                rng.gen_range(self.region_min[1]..self.region_max[1]),
            ]);
            measurements.push(z);
            provenance.push(None);
        }
        // Shuffle measurements and provenance with the same permutation so
        // the filter sees no ordering hint about measurement origin.
        let mut order: Vec<usize> = (0..measurements.len()).collect();
        order.shuffle(rng);
        Scan {
            measurements: order.iter().map(|&i| measurements[i].clone()).collect(),
            provenance: order.iter().map(|&i| provenance[i]).collect(),
        }
    }

    /// Generate the whole measurement sequence for one Monte Carlo trial.
    /// Different `trial_seed` values give independent scans over the same
    /// truth; identical seeds reproduce byte-identical output.
    pub fn generate_all_scans(
        &self,
        truth: &[Vec<(Label, DVector<f64>)>],
        trial_seed: u64,
    ) -> Vec<Scan> {
        let mut rng = ChaCha8Rng::seed_from_u64(trial_seed);
        truth.iter().map(|t| self.generate_scan(t, &mut rng)).collect()
    }

    /// First benchmark preset: up to eleven straight-line targets over 100
    /// scans with scripted crossings (three tracks at the origin at scan 20,
    /// pairs at (±300, 0) at scan 40) and an average of 66 clutter points
    /// per scan.
    pub fn preset_1(seed: u64) -> Self {
        // Crossing geometry: tracks born at scan 1 on the outer sites reach
        // the origin at scan 20 after 19 steps.
        let v = 400.0 / 19.0;
        let w = 200.0 / 19.0;
        let tracks = vec![
            TruthTrack { birth_scan: 1, death_scan: 67, initial_state: [-400.0, -200.0, v, w] },
            TruthTrack { birth_scan: 1, death_scan: 68, initial_state: [400.0, 200.0, -v, -w] },
            TruthTrack { birth_scan: 20, death_scan: 80, initial_state: [0.0, 0.0, -12.0, 4.0] },
            TruthTrack { birth_scan: 10, death_scan: 100, initial_state: [0.0, 0.0, 10.0, 0.0] },
            TruthTrack { birth_scan: 24, death_scan: 75, initial_state: [0.0, 0.0, 18.75, 0.0] },
            TruthTrack { birth_scan: 10, death_scan: 100, initial_state: [0.0, 0.0, -10.0, 0.0] },
            TruthTrack { birth_scan: 24, death_scan: 77, initial_state: [0.0, 0.0, -18.75, 0.0] },
            TruthTrack { birth_scan: 30, death_scan: 70, initial_state: [-400.0, -200.0, 8.0, 12.0] },
            TruthTrack { birth_scan: 40, death_scan: 100, initial_state: [400.0, 200.0, -12.0, 5.0] },
            TruthTrack { birth_scan: 60, death_scan: 100, initial_state: [0.0, 0.0, 5.0, -14.0] },
            TruthTrack { birth_scan: 40, death_scan: 90, initial_state: [0.0, 0.0, -6.0, -10.0] },
            TruthTrack { birth_scan: 63, death_scan: 100, initial_state: [-400.0, -200.0, 14.0, 3.0] },
        ];
        Scenario {
            duration: 100,
            region_min: [-1000.0, -1000.0],
            region_max: [1000.0, 1000.0],
            dt: 1.0,
            truth_process_noise_std: 0.0,
            model_process_noise_std: 5.0,
            meas_noise_std: 10.0,
            survival_prob: 0.99,
            detection_prob: 0.88,
            clutter_mean: 66.0,
            birth_sites: vec![
                BirthSite { position: [0.0, 0.0], existence: 0.04 },
                BirthSite { position: [-400.0, -200.0], existence: 0.04 },
                BirthSite { position: [400.0, 200.0], existence: 0.04 },
            ],
            birth_pos_std: 10.0,
            birth_vel_std: 15.0,
            tracks,
            seed,
        }
    }

    /// Second benchmark preset: identical geometry with the clutter rate
    /// increased to an average of 100 points per scan.
    pub fn preset_2(seed: u64) -> Self {
        let mut s = Self::preset_1(seed);
        s.clutter_mean = 100.0;
        s
    }

    /// Look up a preset by name.
    pub fn preset(name: &str, seed: u64) -> Option<Self> {
        match name {
            "scenario-1" => Some(Self::preset_1(seed)),
            "scenario-2" => Some(Self::preset_2(seed)),
            _ => None,
        }
    }
}

fn constant_velocity_transition(dt: f64) -> nalgebra::DMatrix<f64> {
    nalgebra::DMatrix::from_row_slice(
        4,
        4,
        &[
            1.0, 0.0, dt, 0.0, //
            0.0, 1.0, 0.0, dt, //
            0.0, 0.0, 1.0, 0.0, //
            0.0, 0.0, 0.0, 1.0,
        ],
    )
}

/// Discrete white-noise-acceleration disturbance with standard deviation
/// `sigma` on the acceleration.
fn add_process_noise(state: &mut DVector<f64>, dt: f64, sigma: f64, rng: &mut impl Rng) {
    let ax: f64 = sigma * rng.sample::<f64, _>(StandardNormal);
    let ay: f64 = sigma * rng.sample::<f64, _>(StandardNormal);
    state[0] += 0.5 * dt * dt * ax;
    state[1] += 0.5 * dt * dt * ay;
    state[2] += dt * ax;
    state[3] += dt * ay;
}
