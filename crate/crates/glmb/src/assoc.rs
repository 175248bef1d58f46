//! Extended association vectors, the per-component score matrix over all
//! track/measurement pairings, its negative-log cost form, and component
//! weight evaluation for the joint step.

use nalgebra::{DMatrix, DVector};

use crate::density::GlmbComponent;
use crate::error::GlmbError;
use crate::gaussian::GaussianDensity;
use crate::label::Label;
use crate::model::{
    association_likelihood, kalman_predict, survival_likelihood, BirthModel, LinearGaussianModel,
};

/// Association value meaning "misdetected".
pub const MISDETECTED: usize = 0;

/// An extended association vector: entry `n` maps track `n` of the fixed
/// enumeration (survivors then births) to a measurement `1..=M`, to
/// misdetection (`0`), or to non-existence (`M + 1`).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExtendedAssociation {
    pub values: Vec<usize>,
}

impl ExtendedAssociation {
    pub fn new(values: Vec<usize>) -> Self {
        Self { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// No measurement index may appear twice; all values within `0..=M+1`.
    pub fn is_valid(&self, meas_count: usize) -> bool {
        let mut used = vec![false; meas_count];
        for &v in &self.values {
            if v > meas_count + 1 {
                return false;
            }
            if v >= 1 && v <= meas_count {
                if used[v - 1] {
                    return false;
                }
                used[v - 1] = true;
            }
        }
        true
    }

    /// All valid extended association vectors for `p` tracks and `m`
    /// measurements, in lexicographic order.
    pub fn enumerate_all(p: usize, m: usize) -> Vec<Self> {
        let mut out = Vec::new();
        let mut cur = vec![0usize; p];
        let mut used = vec![false; m];
        fn recurse(
            n: usize,
            p: usize,
            m: usize,
            cur: &mut Vec<usize>,
            used: &mut Vec<bool>,
            out: &mut Vec<ExtendedAssociation>,
        ) {
            if n == p {
                out.push(ExtendedAssociation::new(cur.clone()));
                return;
            }
            for v in 0..=(m + 1) {
                if v >= 1 && v <= m {
                    if used[v - 1] {
                        continue;
                    }
                    used[v - 1] = true;
                }
                cur[n] = v;
                recurse(n + 1, p, m, cur, used, out);
                if v >= 1 && v <= m {
                    used[v - 1] = false;
                }
            }
        }
        recurse(0, p, m, &mut cur, &mut used, &mut out);
        out
    }
}

/// The fixed track enumeration a component's joint step works over:
/// predicted survivor densities first, then birth densities.
#[derive(Debug, Clone)]
pub struct PredictedTracks {
    pub labels: Vec<Label>,
    pub densities: Vec<GaussianDensity>,
    pub survivor_count: usize,
    /// Existence probability per birth track (aligned with the tail of
    /// `labels`).
    pub birth_existence: Vec<f64>,
}

impl PredictedTracks {
    /// Predict the component's survivor densities one scan ahead and append
    /// the birth terms for the new scan.
    pub fn from_component(
        component: &GlmbComponent,
        birth: &BirthModel,
        model: &LinearGaussianModel,
        scan_index: u32,
    ) -> Result<Self, GlmbError> {
        let mut labels = Vec::with_capacity(component.labels.len() + birth.terms.len());
        let mut densities = Vec::with_capacity(labels.capacity());
        for (label, density) in &component.track_densities {
            labels.push(*label);
            densities.push(kalman_predict(density, model)?);
        }
        let survivor_count = labels.len();
        let mut birth_existence = Vec::with_capacity(birth.terms.len());
        for term in &birth.terms {
            let label = Label::new(scan_index, term.birth_index);
            debug_assert!(
                !component.labels.contains(&label),
                "birth label collides with a prior track"
            );
            labels.push(label);
            densities.push(term.density.clone());
            birth_existence.push(term.existence);
        }
        Ok(Self {
            labels,
            densities,
            survivor_count,
            birth_existence,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// Per-track score for one association decision.
///
/// Survivors score `1 - eta_S` for non-existence and `eta_S * eta_Z` for a
/// measurement or misdetection; births score `1 - r` and `r * eta_Z`.
pub fn track_score(
    surviving: bool,
    assoc: usize,
    meas_count: usize,
    eta_s: f64,
    eta_z: impl Fn(usize) -> f64,
    birth_existence: f64,
) -> f64 {
    let exist_weight = if surviving { eta_s } else { birth_existence };
    if assoc == meas_count + 1 {
        1.0 - exist_weight
    } else {
        exist_weight * eta_z(assoc)
    }
}

/// The P x (M + 2P) table of all per-track association scores.
///
/// Only the meaningful entries are stored: a dense P x M detection block plus
/// the misdetection and non-existence scalars per row. The full rectangular
/// layout (dedicated misdetection column `M + n` and non-existence column
/// `M + P + n` per row, zero elsewhere) is exposed through [`Self::logical`]
/// for the assignment solver.
#[derive(Debug, Clone)]
pub struct GammaMatrix {
    detection: Vec<f64>,
    misdetect: Vec<f64>,
    nonexist: Vec<f64>,
    pub labels: Vec<Label>,
    pub survivor_count: usize,
    meas_count: usize,
}

impl GammaMatrix {
    /// Assemble a score matrix from precomputed entries: a row-major P x M
    /// detection block plus per-row misdetection and non-existence scores.
    pub fn from_parts(
        detection: Vec<f64>,
        misdetect: Vec<f64>,
        nonexist: Vec<f64>,
        labels: Vec<Label>,
        survivor_count: usize,
        meas_count: usize,
    ) -> Result<Self, GlmbError> {
        let p = labels.len();
        if detection.len() != p * meas_count
            || misdetect.len() != p
            || nonexist.len() != p
            || survivor_count > p
        {
            return Err(GlmbError::DimensionMismatch(
                "score matrix parts are inconsistent".into(),
            ));
        }
        if detection
            .iter()
            .chain(&misdetect)
            .chain(&nonexist)
            .any(|v| !v.is_finite() || *v < 0.0)
        {
            return Err(GlmbError::InvalidParameter(
                "score entries must be finite and nonnegative".into(),
            ));
        }
        Ok(Self {
            detection,
            misdetect,
            nonexist,
            labels,
            survivor_count,
            meas_count,
        })
    }

    pub fn build(
        tracks: &PredictedTracks,
        measurements: &[DVector<f64>],
        model: &LinearGaussianModel,
    ) -> Self {
        let p = tracks.len();
        let m = measurements.len();
        let eta_s = survival_likelihood(model);
        let mut detection = Vec::with_capacity(p * m);
        let mut misdetect = Vec::with_capacity(p);
        let mut nonexist = Vec::with_capacity(p);
        for n in 0..p {
            let surviving = n < tracks.survivor_count;
            let r = if surviving {
                0.0
            } else {
                tracks.birth_existence[n - tracks.survivor_count]
            };
            let density = &tracks.densities[n];
            // The innovation covariance and its factorization are shared by
            // every measurement of this track; factor once.
            if m > 0 {
                let h = &model.observation;
                let pred_meas = h * &density.mean;
                let innov_cov =
                    h * &density.covariance * h.transpose() + &model.observation_noise;
                let dim = pred_meas.len();
                if dim == 2 {
                    // Planar fast path: closed-form 2x2 inverse quadratic
                    // form, no per-measurement allocations.
                    let (a, b, c) =
                        (innov_cov[(0, 0)], innov_cov[(0, 1)], innov_cov[(1, 1)]);
                    let det = a * c - b * b;
                    let log_norm = 2.0 * (2.0 * std::f64::consts::PI).ln() + det.ln();
                    let (mx, my) = (pred_meas[0], pred_meas[1]);
                    let scale = model.detection_prob / model.clutter_intensity;
                    for z in measurements {
                        let (dx, dy) = (z[0] - mx, z[1] - my);
                        let quad = (c * dx * dx - 2.0 * b * dx * dy + a * dy * dy)
                            / det;
                        let eta_z = scale * (-0.5 * (log_norm + quad)).exp();
                        detection.push(track_score(surviving, 1, m, eta_s, |_| eta_z, r));
                    }
                } else {
                    let chol = innov_cov.clone().cholesky().unwrap_or_else(|| {
                        (innov_cov + DMatrix::identity(dim, dim) * 1e-12)
                            .cholesky()
                            .expect("innovation covariance not PSD")
                    });
                    let log_det =
                        2.0 * chol.l().diagonal().iter().map(|d| d.ln()).sum::<f64>();
                    let log_norm =
                        dim as f64 * (2.0 * std::f64::consts::PI).ln() + log_det;
                    for z in measurements {
                        let diff = z - &pred_meas;
                        let solved = chol.solve(&diff);
                        let log_pdf = -0.5 * (log_norm + diff.dot(&solved));
                        let eta_z = model.detection_prob * log_pdf.exp()
                            / model.clutter_intensity;
                        detection.push(track_score(surviving, 1, m, eta_s, |_| eta_z, r));
                    }
                }
            }
            let eta_z0 = association_likelihood(density, 0, measurements, model);
            misdetect.push(track_score(surviving, 0, m, eta_s, |_| eta_z0, r));
            nonexist.push(track_score(surviving, m + 1, m, eta_s, |_| 0.0, r));
        }
        Self {
            detection,
            misdetect,
            nonexist,
            labels: tracks.labels.clone(),
            survivor_count: tracks.survivor_count,
            meas_count: m,
        }
    }

    pub fn track_count(&self) -> usize {
        self.labels.len()
    }

    pub fn meas_count(&self) -> usize {
        self.meas_count
    }

    /// Number of columns of the logical rectangular layout, `M + 2P`.
    pub fn width(&self) -> usize {
        self.meas_count + 2 * self.labels.len()
    }

    /// Score of association decision `assoc` (0 = misdetected,
    /// `1..=M` = measurement, `M + 1` = non-existent) for track `n`.
    pub fn value(&self, n: usize, assoc: usize) -> f64 {
        let m = self.meas_count;
        if assoc == MISDETECTED {
            self.misdetect[n]
        } else if assoc == m + 1 {
            self.nonexist[n]
        } else {
            self.detection[n * m + (assoc - 1)]
        }
    }

    /// Entry of the logical P x (M + 2P) layout; structural zeros included.
    pub fn logical(&self, n: usize, col: usize) -> f64 {
        match self.col_to_assoc(n, col) {
            Some(assoc) => self.value(n, assoc),
            None => 0.0,
        }
    }

    /// Column of the logical layout holding association `assoc` for row `n`.
    pub fn assoc_to_col(&self, n: usize, assoc: usize) -> usize {
        let (m, p) = (self.meas_count, self.labels.len());
        if assoc == MISDETECTED {
            m + n
        } else if assoc == m + 1 {
            m + p + n
        } else {
            assoc - 1
        }
    }

    /// Inverse of [`Self::assoc_to_col`]; `None` for structurally forbidden
    /// cells (another row's dedicated column).
    pub fn col_to_assoc(&self, n: usize, col: usize) -> Option<usize> {
        let (m, p) = (self.meas_count, self.labels.len());
        if col < m {
            Some(col + 1)
        } else if col == m + n {
            Some(MISDETECTED)
        } else if col == m + p + n {
            Some(m + 1)
        } else {
            None
        }
    }
}

/// Element-wise negative logarithm of the score matrix; structural zeros map
/// to an infinite-cost sentinel so the assignment solver can never pick them.
#[derive(Debug, Clone)]
pub struct CostMatrix {
    gamma: GammaMatrix,
}

impl CostMatrix {
    pub fn from_gamma(gamma: &GammaMatrix) -> Self {
        Self {
            gamma: gamma.clone(),
        }
    }

    pub fn track_count(&self) -> usize {
        self.gamma.track_count()
    }

    pub fn meas_count(&self) -> usize {
        self.gamma.meas_count()
    }

    pub fn width(&self) -> usize {
        self.gamma.width()
    }

    pub fn cost(&self, n: usize, assoc: usize) -> f64 {
        neg_log(self.gamma.value(n, assoc))
    }

    pub fn logical(&self, n: usize, col: usize) -> f64 {
        neg_log(self.gamma.logical(n, col))
    }

    pub fn assoc_to_col(&self, n: usize, assoc: usize) -> usize {
        self.gamma.assoc_to_col(n, assoc)
    }

    pub fn col_to_assoc(&self, n: usize, col: usize) -> Option<usize> {
        self.gamma.col_to_assoc(n, col)
    }
}

fn neg_log(v: f64) -> f64 {
    if v > 0.0 {
        -v.ln()
    } else {
        f64::INFINITY
    }
}

/// Log-weight of the child component generated by `assoc`:
/// `log w_prior + sum_n log Gamma(n, assoc_n)`. Equals
/// `log w_prior - f_c(S)` for the corresponding assignment matrix. Returns
/// negative infinity when any selected score is zero.
pub fn association_log_weight(
    log_prior_weight: f64,
    assoc: &ExtendedAssociation,
    gamma: &GammaMatrix,
) -> f64 {
    let mut lw = log_prior_weight;
    for (n, &v) in assoc.values.iter().enumerate() {
        let g = gamma.value(n, v);
        if g <= 0.0 {
            return f64::NEG_INFINITY;
        }
        lw += g.ln();
    }
    lw
}
