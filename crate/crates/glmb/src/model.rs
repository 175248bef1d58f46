//! Linear-Gaussian single-target model: Kalman prediction/update and the
//! per-track survival and association likelihood factors consumed by the
//! joint step.

use nalgebra::{DMatrix, DVector};

use crate::error::GlmbError;
use crate::gaussian::{log_gaussian_pdf, GaussianDensity};

/// Constant-parameter linear-Gaussian model. Survival and detection
/// probabilities and the clutter intensity are state-independent.
#[derive(Debug, Clone)]
pub struct LinearGaussianModel {
    /// State transition matrix.
    pub transition: DMatrix<f64>,
    /// Process noise covariance.
    pub process_noise: DMatrix<f64>,
    /// Observation matrix (state -> measurement space).
    pub observation: DMatrix<f64>,
    /// Observation noise covariance.
    pub observation_noise: DMatrix<f64>,
    /// Survival probability.
    pub survival_prob: f64,
    /// Detection probability.
    pub detection_prob: f64,
    /// Clutter intensity per unit observation volume.
    pub clutter_intensity: f64,
}

impl LinearGaussianModel {
    pub fn validate(&self) -> Result<(), GlmbError> {
        let n = self.transition.nrows();
        if self.transition.ncols() != n
            || self.process_noise.nrows() != n
            || self.process_noise.ncols() != n
            || self.observation.ncols() != n
            || self.observation_noise.nrows() != self.observation.nrows()
            || self.observation_noise.ncols() != self.observation.nrows()
        {
            return Err(GlmbError::DimensionMismatch(
                "model matrices are not mutually consistent".into(),
            ));
        }
        for (name, p) in [("survival", self.survival_prob), ("detection", self.detection_prob)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(GlmbError::InvalidParameter(format!(
                    "{name} probability {p} outside [0, 1]"
                )));
            }
        }
        if self.clutter_intensity <= 0.0 {
            return Err(GlmbError::InvalidParameter(
                "clutter intensity must be positive".into(),
            ));
        }
        Ok(())
    }

    /// The constant-velocity model of the experiments: state
    /// `[px, py, vx, vy]`, position-only measurements.
    pub fn constant_velocity(
        dt: f64,
        process_noise_std: f64,
        meas_noise_std: f64,
        survival_prob: f64,
        detection_prob: f64,
        clutter_intensity: f64,
    ) -> Self {
        let mut f = DMatrix::identity(4, 4);
        f[(0, 2)] = dt;
        f[(1, 3)] = dt;
        let s2 = process_noise_std * process_noise_std;
        let mut q = DMatrix::zeros(4, 4);
        let d2 = dt * dt;
        for i in 0..2 {
            q[(i, i)] = s2 * d2 * d2 / 4.0;
            q[(i, i + 2)] = s2 * d2 * dt / 2.0;
            q[(i + 2, i)] = s2 * d2 * dt / 2.0;
            q[(i + 2, i + 2)] = s2 * d2;
        }
        let mut h = DMatrix::zeros(2, 4);
        h[(0, 0)] = 1.0;
        h[(1, 1)] = 1.0;
        let r = DMatrix::identity(2, 2) * meas_noise_std * meas_noise_std;
        Self {
            transition: f,
            process_noise: q,
            observation: h,
            observation_noise: r,
            survival_prob,
            detection_prob,
            clutter_intensity,
        }
    }
}

/// One term of the labeled multi-Bernoulli birth model.
#[derive(Debug, Clone)]
pub struct BirthTerm {
    /// Distinguishes birth terms created at the same scan.
    pub birth_index: u32,
    /// Existence probability of the birth track.
    pub existence: f64,
    /// Initial state density.
    pub density: GaussianDensity,
}

#[derive(Debug, Clone)]
pub struct BirthModel {
    pub terms: Vec<BirthTerm>,
}

impl BirthModel {
    pub fn validate(&self) -> Result<(), GlmbError> {
        for t in &self.terms {
            if !(0.0..=1.0).contains(&t.existence) {
                return Err(GlmbError::InvalidParameter(format!(
                    "birth existence probability {} outside [0, 1]",
                    t.existence
                )));
            }
            t.density.check_covariance()?;
        }
        Ok(())
    }
}

/// Chapman-Kolmogorov prediction: mean' = F mean, cov' = F cov F' + Q.
pub fn kalman_predict(
    prior: &GaussianDensity,
    model: &LinearGaussianModel,
) -> Result<GaussianDensity, GlmbError> {
    if prior.dim() != model.transition.ncols() {
        return Err(GlmbError::DimensionMismatch(format!(
            "state dim {} vs transition {}x{}",
            prior.dim(),
            model.transition.nrows(),
            model.transition.ncols()
        )));
    }
    let mean = &model.transition * &prior.mean;
    let cov =
        &model.transition * &prior.covariance * model.transition.transpose() + &model.process_noise;
    Ok(GaussianDensity {
        mean,
        covariance: cov,
    })
}

/// Survival integral for one track. With state-independent survival
/// probability this is the probability itself.
pub fn survival_likelihood(model: &LinearGaussianModel) -> f64 {
    model.survival_prob
}

/// Association likelihood integral for a predicted track density.
///
/// `assoc` = 0 means misdetection and yields `1 - p_D`; `assoc` = m > 0
/// scores measurement `m` as
/// `p_D * N(z_m; H mean, H cov H' + R) / clutter_intensity`.
pub fn association_likelihood(
    predicted: &GaussianDensity,
    assoc: usize,
    measurements: &[DVector<f64>],
    model: &LinearGaussianModel,
) -> f64 {
    if assoc == 0 {
        return 1.0 - model.detection_prob;
    }
    let z = &measurements[assoc - 1];
    let h = &model.observation;
    let pred_meas = h * &predicted.mean;
    let innov_cov = h * &predicted.covariance * h.transpose() + &model.observation_noise;
    let log_pdf = log_gaussian_pdf(z, &pred_meas, &innov_cov);
    model.detection_prob * log_pdf.exp() / model.clutter_intensity
}

/// Measurement update. Misdetection (`assoc` = 0) leaves the density
/// unchanged; otherwise a Kalman update with the Joseph-form covariance.
pub fn kalman_update(
    predicted: &GaussianDensity,
    assoc: usize,
    measurements: &[DVector<f64>],
    model: &LinearGaussianModel,
) -> Result<GaussianDensity, GlmbError> {
    if assoc == 0 {
        return Ok(predicted.clone());
    }
    let z = &measurements[assoc - 1];
    let h = &model.observation;
    let innov = z - h * &predicted.mean;
    let innov_cov = h * &predicted.covariance * h.transpose() + &model.observation_noise;
    let chol = innov_cov
        .clone()
        .cholesky()
        .ok_or(GlmbError::SingularInnovation)?;
    // K = P H' S^-1 via the Cholesky factor of S.
    let gain = chol
        .solve(&(h * &predicted.covariance))
        .transpose();
    let mean = &predicted.mean + &gain * innov;
    let n = predicted.dim();
    let ikh = DMatrix::identity(n, n) - &gain * h;
    let cov = &ikh * &predicted.covariance * ikh.transpose()
        + &gain * &model.observation_noise * gain.transpose();
    Ok(GaussianDensity {
        mean,
        covariance: cov,
    })
}
