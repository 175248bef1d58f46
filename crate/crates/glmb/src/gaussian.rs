use nalgebra::{DMatrix, DVector};

use crate::error::GlmbError;

/// A single track's kinematic state density: mean vector and covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianDensity {
    pub mean: DVector<f64>,
    pub covariance: DMatrix<f64>,
}

impl GaussianDensity {
    pub fn new(mean: DVector<f64>, covariance: DMatrix<f64>) -> Result<Self, GlmbError> {
        if covariance.nrows() != mean.len() || covariance.ncols() != mean.len() {
            return Err(GlmbError::DimensionMismatch(format!(
                "mean has {} entries but covariance is {}x{}",
                mean.len(),
                covariance.nrows(),
                covariance.ncols()
            )));
        }
        let d = Self { mean, covariance };
        d.check_covariance()?;
        Ok(d)
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// Symmetry within 1e-9 relative and eigenvalues >= -1e-9 * trace.
    pub fn check_covariance(&self) -> Result<(), GlmbError> {
        let c = &self.covariance;
        let scale = c.trace().abs().max(1.0);
        for i in 0..c.nrows() {
            for j in (i + 1)..c.ncols() {
                if (c[(i, j)] - c[(j, i)]).abs() > 1e-9 * scale {
                    return Err(GlmbError::InvalidParameter(format!(
                        "covariance not symmetric at ({i},{j})"
                    )));
                }
            }
        }
        let sym = (c + c.transpose()) * 0.5;
        let eig = sym.symmetric_eigenvalues();
        if eig.iter().any(|&e| e < -1e-9 * scale) {
            return Err(GlmbError::InvalidParameter(
                "covariance has a significantly negative eigenvalue".into(),
            ));
        }
        Ok(())
    }
}

/// Log density of a multivariate normal at `x`.
pub fn log_gaussian_pdf(x: &DVector<f64>, mean: &DVector<f64>, cov: &DMatrix<f64>) -> f64 {
    let dim = x.len() as f64;
    let chol = cov
        .clone()
        .cholesky()
        .unwrap_or_else(|| (cov + DMatrix::identity(x.len(), x.len()) * 1e-12).cholesky().expect("covariance not PSD"));
    let log_det = 2.0 * chol.l().diagonal().iter().map(|d| d.ln()).sum::<f64>();
    let diff = x - mean;
    let solved = chol.solve(&diff);
    let quad = diff.dot(&solved);
    -0.5 * (dim * (2.0 * std::f64::consts::PI).ln() + log_det + quad)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn rejects_dimension_mismatch() {
        let r = GaussianDensity::new(DVector::from_vec(vec![0.0, 0.0]), DMatrix::identity(3, 3));
        assert!(r.is_err());
    }

    #[test]
    fn rejects_asymmetric_covariance() {
        let mut c = DMatrix::identity(2, 2);
        c[(0, 1)] = 0.5;
        let r = GaussianDensity::new(DVector::zeros(2), c);
        assert!(r.is_err());
    }

    #[test]
    fn rejects_indefinite_covariance() {
        let c = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(GaussianDensity::new(DVector::zeros(2), c).is_err());
    }

    #[test]
    fn scalar_pdf_matches_closed_form() {
        let x = DVector::from_vec(vec![1.5]);
        let mean = DVector::from_vec(vec![0.5]);
        let cov = DMatrix::from_element(1, 1, 4.0);
        let expected = (-0.5 * 1.0f64 / 4.0).exp() / (2.0 * std::f64::consts::PI * 4.0).sqrt();
        assert_relative_eq!(
            log_gaussian_pdf(&x, &mean, &cov).exp(),
            expected,
            max_relative = 1e-12
        );
    }
}
