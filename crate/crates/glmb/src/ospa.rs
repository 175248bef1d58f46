//! Optimal sub-pattern assignment (OSPA) distance between finite point sets,
//! with the usual localization/cardinality decomposition.

use nalgebra::DVector;

use crate::assignment::solve_dense;
use crate::error::GlmbError;

#[derive(Debug, Clone, Copy)]
pub struct OspaParams {
    /// Cutoff `c`: caps per-point distances and prices unmatched points.
    pub cutoff: f64,
    /// Order `p` of the underlying mean.
    pub order: f64,
}

impl Default for OspaParams {
    fn default() -> Self {
        Self {
            cutoff: 100.0,
            order: 1.0,
        }
    }
}

impl OspaParams {
    pub fn validate(&self) -> Result<(), GlmbError> {
        if !(self.cutoff > 0.0) || !(self.order >= 1.0) {
            return Err(GlmbError::InvalidParameter(
                "OSPA needs cutoff > 0 and order >= 1".into(),
            ));
        }
        Ok(())
    }
}

/// OSPA distance together with its localization and cardinality parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OspaResult {
    pub distance: f64,
    pub localization: f64,
    pub cardinality: f64,
}

/// OSPA distance between two point sets. Both parts of the result are raised
/// to the same mean, so `distance = (localization^p + cardinality^p)^(1/p)`
/// does not hold in general; the decomposition follows the standard split of
/// the sum inside the mean instead.
pub fn ospa(
    a: &[DVector<f64>],
    b: &[DVector<f64>],
    params: &OspaParams,
) -> Result<OspaResult, GlmbError> {
    params.validate()?;
    if a.is_empty() && b.is_empty() {
        return Ok(OspaResult {
            distance: 0.0,
            localization: 0.0,
            cardinality: 0.0,
        });
    }
    // Orient so that `small` indexes rows of the assignment problem.
    let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    let (m, n) = (small.len(), large.len());
    let c = params.cutoff;
    let p = params.order;
    let mut loc_sum = 0.0;
    if m > 0 {
        let mut cost = vec![0.0; m * n];
        for (i, x) in small.iter().enumerate() {
            for (j, y) in large.iter().enumerate() {
                if x.len() != y.len() {
                    return Err(GlmbError::DimensionMismatch(
                        "OSPA points must share a dimension".into(),
                    ));
                }
                cost[i * n + j] = (x - y).norm().min(c).powf(p);
            }
        }
        let (_, total) = solve_dense(&cost, m, n)
            .ok_or(GlmbError::InfeasibleAssignment)?;
        loc_sum = total;
    }
    let card_sum = c.powf(p) * (n - m) as f64;
    let denom = n as f64;
    Ok(OspaResult {
        distance: ((loc_sum + card_sum) / denom).powf(1.0 / p),
        localization: (loc_sum / denom).powf(1.0 / p),
        cardinality: (card_sum / denom).powf(1.0 / p),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn pt(coords: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(coords)
    }

    fn random_set(rng: &mut impl Rng, max_len: usize) -> Vec<DVector<f64>> {
        let len = rng.gen_range(0..=max_len);
        (0..len)
            .map(|_| pt(&[rng.gen_range(-50.0..50.0), rng.gen_range(-50.0..50.0)]))
            .collect()
    }

    /// Brute-force oracle: minimize over all injections of the smaller set
    /// into the larger by enumerating permutations of the larger set.
    fn ospa_brute(a: &[DVector<f64>], b: &[DVector<f64>], params: &OspaParams) -> f64 {
        let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
        let (m, n) = (small.len(), large.len());
        if n == 0 {
            return 0.0;
        }
        let c = params.cutoff;
        let p = params.order;
        let mut idx: Vec<usize> = (0..n).collect();
        let mut best = f64::INFINITY;
        permute(&mut idx, 0, &mut |perm| {
            let loc: f64 = (0..m)
                .map(|i| (&small[i] - &large[perm[i]]).norm().min(c).powf(p))
                .sum();
            best = best.min(loc);
        });
        ((best + c.powf(p) * (n - m) as f64) / n as f64).powf(1.0 / p)
    }

    fn permute(idx: &mut Vec<usize>, k: usize, visit: &mut impl FnMut(&[usize])) {
        if k == idx.len() {
            visit(idx);
            return;
        }
        for i in k..idx.len() {
            idx.swap(k, i);
            permute(idx, k + 1, visit);
            idx.swap(k, i);
        }
    }

    #[test]
    fn identical_sets_zero() {
        let params = OspaParams::default();
        let a = vec![pt(&[1.0, 2.0]), pt(&[-3.0, 4.0])];
        let r = ospa(&a, &a, &params).unwrap();
        assert_relative_eq!(r.distance, 0.0, epsilon = 1e-12);
        assert_relative_eq!(r.localization, 0.0, epsilon = 1e-12);
        assert_relative_eq!(r.cardinality, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn both_empty_zero() {
        let params = OspaParams::default();
        let r = ospa(&[], &[], &params).unwrap();
        assert_eq!(r.distance, 0.0);
    }

    #[test]
    fn empty_vs_singleton_is_cutoff() {
        let params = OspaParams::default();
        let r = ospa(&[], &[pt(&[5.0, 5.0])], &params).unwrap();
        assert_relative_eq!(r.distance, params.cutoff, epsilon = 1e-12);
        assert_relative_eq!(r.cardinality, params.cutoff, epsilon = 1e-12);
        assert_relative_eq!(r.localization, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn hand_computed_example() {
        // One common point, distance 5 between the others, order 1, c = 100:
        // (0 + 5) / 2 = 2.5.
        let params = OspaParams::default();
        let a = vec![pt(&[0.0, 0.0]), pt(&[10.0, 0.0])];
        let b = vec![pt(&[0.0, 0.0]), pt(&[13.0, 4.0])];
        let r = ospa(&a, &b, &params).unwrap();
        assert_relative_eq!(r.distance, 2.5, epsilon = 1e-12);
        assert_relative_eq!(r.localization, 2.5, epsilon = 1e-12);
        // Unequal cardinalities mix both parts: |a| = 1 vs |b| = 2.
        let r2 = ospa(&a[..1], &b, &params).unwrap();
        assert_relative_eq!(r2.distance, 50.0, epsilon = 1e-12);
        assert_relative_eq!(r2.cardinality, 50.0, epsilon = 1e-12);
    }

    #[test]
    fn cutoff_saturates_distance() {
        let params = OspaParams {
            cutoff: 10.0,
            order: 1.0,
        };
        let a = vec![pt(&[0.0, 0.0])];
        let b = vec![pt(&[1e6, 0.0])];
        let r = ospa(&a, &b, &params).unwrap();
        assert_relative_eq!(r.distance, 10.0, epsilon = 1e-12);
    }

    #[test]
    fn symmetric() {
        let params = OspaParams::default();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..200 {
            let a = random_set(&mut rng, 5);
            let b = random_set(&mut rng, 5);
            let ab = ospa(&a, &b, &params).unwrap().distance;
            let ba = ospa(&b, &a, &params).unwrap().distance;
            assert_relative_eq!(ab, ba, epsilon = 1e-10);
        }
    }

    #[test]
    fn triangle_inequality() {
        let params = OspaParams {
            cutoff: 40.0,
            order: 2.0,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..500 {
            let a = random_set(&mut rng, 4);
            let b = random_set(&mut rng, 4);
            let c = random_set(&mut rng, 4);
            let ab = ospa(&a, &b, &params).unwrap().distance;
            let bc = ospa(&b, &c, &params).unwrap().distance;
            let ac = ospa(&a, &c, &params).unwrap().distance;
            assert!(ac <= ab + bc + 1e-9, "{ac} > {ab} + {bc}");
        }
    }

    #[test]
    fn matches_permutation_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..300 {
            let params = OspaParams {
                cutoff: rng.gen_range(5.0..50.0),
                order: *[1.0, 2.0].choose(&mut rng).unwrap(),
            };
            let a = random_set(&mut rng, 5);
            let b = random_set(&mut rng, 5);
            if a.is_empty() && b.is_empty() {
                continue;
            }
            let got = ospa(&a, &b, &params).unwrap().distance;
            let want = ospa_brute(&a, &b, &params);
            assert_relative_eq!(got, want, epsilon = 1e-9, max_relative = 1e-9);
        }
    }

    #[test]
    fn decomposition_consistent_order_one() {
        // For p = 1 the split is exact: distance = localization + cardinality.
        let params = OspaParams::default();
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..100 {
            let a = random_set(&mut rng, 5);
            let b = random_set(&mut rng, 5);
            let r = ospa(&a, &b, &params).unwrap();
            assert_relative_eq!(
                r.distance,
                r.localization + r.cardinality,
                epsilon = 1e-10
            );
        }
    }
}
