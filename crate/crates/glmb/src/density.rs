//! Hypothesis mixture over labeled track sets: components, weight
//! normalization, cardinality distribution, and minimal-L1 truncation.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

use crate::error::GlmbError;
use crate::gaussian::GaussianDensity;
use crate::label::Label;

/// Per-scan association records for one hypothesis lineage, with a rolling
/// 64-bit hash for fast equality. Full comparison runs on hash collision.
///
/// Stored as a persistent list: sibling hypotheses share their common
/// prefix, so cloning a history is O(1) regardless of run length.
#[derive(Debug, Clone, Default)]
pub struct AssociationHistory {
    node: Option<Arc<HistoryNode>>,
    hash: u64,
    len: usize,
}

#[derive(Debug)]
struct HistoryNode {
    parent: Option<Arc<HistoryNode>>,
    record: Vec<usize>,
}

impl AssociationHistory {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, record: Vec<usize>) {
        // FNV-1a over the record values plus a scan separator.
        const PRIME: u64 = 0x100000001b3;
        let mut h = self.hash ^ 0x9e3779b97f4a7c15;
        h = h.wrapping_mul(PRIME);
        for &v in &record {
            h ^= (v as u64).wrapping_add(1);
            h = h.wrapping_mul(PRIME);
        }
        self.hash = h;
        self.node = Some(Arc::new(HistoryNode {
            parent: self.node.take(),
            record,
        }));
        self.len += 1;
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn hash(&self) -> u64 {
        self.hash
    }

    /// The most recent scan's record.
    pub fn last(&self) -> Option<&Vec<usize>> {
        self.node.as_deref().map(|n| &n.record)
    }

    /// All records, oldest first, reconstructed from the shared chain.
    pub fn records(&self) -> Vec<Vec<usize>> {
        let mut out = Vec::with_capacity(self.len);
        let mut cur = self.node.as_deref();
        while let Some(n) = cur {
            out.push(n.record.clone());
            cur = n.parent.as_deref();
        }
        out.reverse();
        out
    }
}

impl PartialEq for AssociationHistory {
    fn eq(&self, other: &Self) -> bool {
        if self.hash != other.hash || self.len != other.len {
            return false;
        }
        let mut a = self.node.as_deref();
        let mut b = other.node.as_deref();
        while let (Some(x), Some(y)) = (a, b) {
            if std::ptr::eq(x, y) {
                return true; // shared suffix onward
            }
            if x.record != y.record {
                return false;
            }
            a = x.parent.as_deref();
            b = y.parent.as_deref();
        }
        true
    }
}

impl Eq for AssociationHistory {}

/// One hypothesis: a label set, its association history, a log-weight, and
/// one Gaussian density per track.
#[derive(Debug, Clone)]
pub struct GlmbComponent {
    pub labels: BTreeSet<Label>,
    pub history: AssociationHistory,
    pub log_weight: f64,
    /// Shared per-track densities; siblings that leave a track untouched
    /// reuse the same allocation.
    pub track_densities: BTreeMap<Label, Arc<GaussianDensity>>,
}

impl GlmbComponent {
    /// The empty hypothesis (no tracks) with the given log-weight.
    pub fn empty(log_weight: f64) -> Self {
        Self {
            labels: BTreeSet::new(),
            history: AssociationHistory::new(),
            log_weight,
            track_densities: BTreeMap::new(),
        }
    }

    pub fn cardinality(&self) -> usize {
        self.labels.len()
    }

    /// Keys of `track_densities` must equal the label set.
    pub fn check_consistency(&self) -> Result<(), GlmbError> {
        if !self.track_densities.keys().eq(self.labels.iter()) {
            return Err(GlmbError::InvalidParameter(
                "track densities do not match label set".into(),
            ));
        }
        Ok(())
    }

    fn identity_key(&self) -> (u64, &BTreeSet<Label>) {
        (self.history.hash(), &self.labels)
    }
}

/// A weighted mixture of hypotheses at one scan.
#[derive(Debug, Clone)]
pub struct GlmbDensity {
    pub components: Vec<GlmbComponent>,
    pub scan_index: u32,
}

impl GlmbDensity {
    /// The prior used to start a filter run: a single empty hypothesis.
    pub fn initial() -> Self {
        Self {
            components: vec![GlmbComponent::empty(0.0)],
            scan_index: 0,
        }
    }

    /// Rescale weights to sum to 1, in log domain via max-shift.
    pub fn normalize(mut self) -> Result<Self, GlmbError> {
        let max = self
            .components
            .iter()
            .map(|c| c.log_weight)
            .fold(f64::NEG_INFINITY, f64::max);
        if !max.is_finite() {
            return Err(GlmbError::DegenerateDensity);
        }
        let log_sum = max
            + self
                .components
                .iter()
                .map(|c| (c.log_weight - max).exp())
                .sum::<f64>()
                .ln();
        for c in &mut self.components {
            c.log_weight -= log_sum;
        }
        Ok(self)
    }

    /// Probability of each cardinality `0..=n_max`, where `n_max` is the
    /// largest label-set size present. Assumes a normalized density.
    pub fn cardinality_distribution(&self) -> Vec<f64> {
        let n_max = self
            .components
            .iter()
            .map(GlmbComponent::cardinality)
            .max()
            .unwrap_or(0);
        let mut rho = vec![0.0; n_max + 1];
        for c in &self.components {
            rho[c.cardinality()] += c.log_weight.exp();
        }
        rho
    }

    /// Keep the `cap` highest-weight components with weight >= `min_weight`,
    /// renormalize, and report the sum of discarded weights (the L1 distance
    /// between the unnormalized full and truncated densities).
    pub fn truncate(mut self, cap: usize, min_weight: f64) -> Result<(Self, f64), GlmbError> {
        if cap == 0 {
            return Err(GlmbError::ZeroCap);
        }
        self.components.sort_by(|a, b| {
            b.log_weight
                .partial_cmp(&a.log_weight)
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        let log_min = if min_weight > 0.0 {
            min_weight.ln()
        } else {
            f64::NEG_INFINITY
        };
        let mut keep = self.components.len().min(cap);
        while keep > 1 && self.components[keep - 1].log_weight < log_min {
            keep -= 1;
        }
        let discarded: f64 = self.components[keep..]
            .iter()
            .map(|c| c.log_weight.exp())
            .sum();
        self.components.truncate(keep);
        Ok((self.normalize()?, discarded))
    }

    /// Merge components with identical (label set, history), summing weights.
    /// Under the Gibbs backend identical association vectors yield identical
    /// components, so this is equivalent to sample deduplication.
    pub fn merge_duplicates(mut self) -> Self {
        let mut index: HashMap<(u64, BTreeSet<Label>), usize> = HashMap::new();
        let mut merged: Vec<GlmbComponent> = Vec::with_capacity(self.components.len());
        for c in self.components.drain(..) {
            let key = {
                let (h, labels) = c.identity_key();
                (h, labels.clone())
            };
            match index.get(&key) {
                Some(&i) if merged[i].history == c.history => {
                    merged[i].log_weight = log_add(merged[i].log_weight, c.log_weight);
                }
                _ => {
                    index.insert(key, merged.len());
                    merged.push(c);
                }
            }
        }
        self.components = merged;
        self
    }
}

fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}
