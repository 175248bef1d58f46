//! Optimal and ranked k-best assignment over the association cost matrix.
//!
//! The base solver is a Jonker-Volgenant style shortest-augmenting-path
//! method with dual potentials, processing one row at a time. Costs are
//! shifted per row so every entry is nonnegative (a constant offset on every
//! complete assignment, so the ranking is unchanged), which keeps the
//! Dijkstra passes valid. Murty's partitioning re-solves each child
//! subproblem from fresh duals: with more columns than rows, a single warm
//! augmentation after deleting a row is not optimal (the freed column keeps
//! a negative dual that the path cannot repair), so re-solving is required
//! for correctness.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::assoc::{CostMatrix, ExtendedAssociation};
use crate::error::GlmbError;

const UNASSIGNED: usize = usize::MAX;

/// A rectangular min-cost assignment problem with `rows <= cols` and
/// infinite-cost forbidden cells.
#[derive(Debug, Clone)]
pub struct AssignmentProblem {
    /// Original costs, used for reported assignment costs.
    dense: Vec<f64>,
    /// Row-shifted costs (each row minus its minimum), all nonnegative;
    /// used by the solver.
    shifted: Vec<f64>,
    rows: usize,
    cols: usize,
    meas_count: usize,
}

impl AssignmentProblem {
    pub fn new(cost: &CostMatrix) -> Result<Self, GlmbError> {
        let rows = cost.track_count();
        let cols = cost.width();
        let mut dense = vec![f64::INFINITY; rows * cols];
        let mut shifted = vec![f64::INFINITY; rows * cols];
        for r in 0..rows {
            let mut row_min = f64::INFINITY;
            for c in 0..cols {
                let v = cost.logical(r, c);
                dense[r * cols + c] = v;
                row_min = row_min.min(v);
            }
            if !row_min.is_finite() {
                return Err(GlmbError::InfeasibleRow(r));
            }
            for c in 0..cols {
                shifted[r * cols + c] = dense[r * cols + c] - row_min;
            }
        }
        Ok(Self {
            dense,
            shifted,
            rows,
            cols,
            meas_count: cost.meas_count(),
        })
    }

    fn cost_at(&self, r: usize, c: usize) -> f64 {
        self.dense[r * self.cols + c]
    }

    fn shifted_at(&self, r: usize, c: usize) -> f64 {
        self.shifted[r * self.cols + c]
    }

    fn col_to_assoc(&self, r: usize, col: usize) -> Option<usize> {
        let (m, p) = (self.meas_count, self.rows);
        if col < m {
            Some(col + 1)
        } else if col == m + r {
            Some(0)
        } else if col == m + p + r {
            Some(m + 1)
        } else {
            None
        }
    }

    fn to_association(&self, row_to_col: &[usize]) -> ExtendedAssociation {
        ExtendedAssociation::new(
            row_to_col
                .iter()
                .enumerate()
                .map(|(r, &c)| {
                    self.col_to_assoc(r, c)
                        .expect("solver selected a structurally forbidden cell")
                })
                .collect(),
        )
    }

    fn assignment_cost(&self, row_to_col: &[usize]) -> f64 {
        row_to_col
            .iter()
            .enumerate()
            .map(|(r, &c)| self.cost_at(r, c))
            .sum()
    }

    /// Solve the subproblem where `forced` rows keep their columns,
    /// `blocked` columns are unavailable to free rows, and `forbidden`
    /// row/column pairs are excluded. Returns the full row assignment.
    fn solve_constrained(
        &self,
        forced: &[(usize, usize)],
        blocked: &[bool],
        forbidden: &[(usize, usize)],
    ) -> Option<Vec<usize>> {
        let mut matching = Matching::new(self.rows, self.cols);
        for &(r, c) in forced {
            matching.row_to_col[r] = c;
            matching.col_to_row[c] = r;
        }
        let cost_fn = |i: usize, j: usize| {
            if forbidden.contains(&(i, j)) {
                f64::INFINITY
            } else {
                self.shifted_at(i, j)
            }
        };
        for r in 0..self.rows {
            if matching.row_to_col[r] != UNASSIGNED {
                continue;
            }
            if !matching.augment(r, cost_fn, blocked) {
                return None;
            }
        }
        Some(matching.row_to_col)
    }

    /// The minimum-cost valid assignment.
    pub fn optimal(&self) -> Result<(ExtendedAssociation, f64), GlmbError> {
        let blocked = vec![false; self.cols];
        let row_to_col = self
            .solve_constrained(&[], &blocked, &[])
            .ok_or(GlmbError::InfeasibleAssignment)?;
        let cost = self.assignment_cost(&row_to_col);
        Ok((self.to_association(&row_to_col), cost))
    }

    /// Up to `t` lowest-cost assignments in non-decreasing cost order.
    /// Ties break lexicographically on the association vector. Fewer than
    /// `t` results are returned only when fewer valid assignments exist.
    pub fn ranked(&self, t: usize) -> Result<Vec<(ExtendedAssociation, f64)>, GlmbError> {
        if t == 0 {
            return Ok(Vec::new());
        }
        if self.rows == 0 {
            return Ok(vec![(ExtendedAssociation::new(Vec::new()), 0.0)]);
        }

        let mut heap: BinaryHeap<Node> = BinaryHeap::new();
        {
            let blocked = vec![false; self.cols];
            let assignment = self
                .solve_constrained(&[], &blocked, &[])
                .ok_or(GlmbError::InfeasibleAssignment)?;
            let cost = self.assignment_cost(&assignment);
            let assoc = self.to_association(&assignment);
            heap.push(Node {
                cost,
                assoc,
                assignment,
                forced: Vec::new(),
                blocked_cols: blocked,
                forbidden: Vec::new(),
            });
        }

        let mut out = Vec::with_capacity(t);
        while let Some(node) = heap.pop() {
            out.push((node.assoc.clone(), node.cost));
            if out.len() == t {
                break;
            }
            self.partition(&node, &mut heap);
        }
        Ok(out)
    }

    /// Split the solution space of `node` around its optimal assignment:
    /// child `i` keeps the first `i` free rows at their current columns and
    /// forbids the `(i+1)`-th free row's column.
    fn partition(&self, node: &Node, heap: &mut BinaryHeap<Node>) {
        let mut forced = node.forced.clone();
        let mut blocked_cols = node.blocked_cols.clone();
        let already_forced: Vec<bool> = {
            let mut f = vec![false; self.rows];
            for &(r, _) in &node.forced {
                f[r] = true;
            }
            f
        };
        for row in 0..self.rows {
            if already_forced[row] {
                continue;
            }
            let banned_col = node.assignment[row];
            let mut forbidden = node.forbidden.clone();
            forbidden.push((row, banned_col));

            if let Some(assignment) =
                self.solve_constrained(&forced, &blocked_cols, &forbidden)
            {
                let cost = self.assignment_cost(&assignment);
                if cost.is_finite() {
                    let assoc = self.to_association(&assignment);
                    heap.push(Node {
                        cost,
                        assoc,
                        assignment,
                        forced: forced.clone(),
                        blocked_cols: blocked_cols.clone(),
                        forbidden,
                    });
                }
            }
            // Later children inherit this row as forced.
            forced.push((row, banned_col));
            blocked_cols[banned_col] = true;
        }
    }
}

/// Convenience wrapper over [`AssignmentProblem::optimal`].
pub fn optimal_assignment(cost: &CostMatrix) -> Result<(ExtendedAssociation, f64), GlmbError> {
    AssignmentProblem::new(cost)?.optimal()
}

/// Convenience wrapper over [`AssignmentProblem::ranked`].
pub fn murty_ranked(
    cost: &CostMatrix,
    t: usize,
) -> Result<Vec<(ExtendedAssociation, f64)>, GlmbError> {
    AssignmentProblem::new(cost)?.ranked(t)
}

/// Min-cost assignment on an arbitrary dense row-major matrix with
/// `rows <= cols`. Used by the set-distance metric. Returns `None` when no
/// finite-cost assignment exists.
pub fn solve_dense(cost: &[f64], rows: usize, cols: usize) -> Option<(Vec<usize>, f64)> {
    assert_eq!(cost.len(), rows * cols);
    assert!(rows <= cols);
    // Shift each row to nonnegative values so the Dijkstra passes are valid;
    // a per-row constant does not change the optimal assignment.
    let mut shifted = cost.to_vec();
    for r in 0..rows {
        let row_min = shifted[r * cols..(r + 1) * cols]
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        if !row_min.is_finite() {
            return None;
        }
        for v in &mut shifted[r * cols..(r + 1) * cols] {
            *v -= row_min;
        }
    }
    let mut matching = Matching::new(rows, cols);
    let blocked = vec![false; cols];
    for r in 0..rows {
        if !matching.augment(r, |i, j| shifted[i * cols + j], &blocked) {
            return None;
        }
    }
    let total = matching
        .row_to_col
        .iter()
        .enumerate()
        .map(|(r, &c)| cost[r * cols + c])
        .sum();
    Some((matching.row_to_col, total))
}

/// Partial matching with dual potentials, extended one augmenting path at a
/// time. Reduced costs `cost(r,c) - u[r] - v[c]` stay nonnegative with
/// equality on matched edges.
#[derive(Debug, Clone)]
struct Matching {
    u: Vec<f64>,
    v: Vec<f64>,
    row_to_col: Vec<usize>,
    col_to_row: Vec<usize>,
}

impl Matching {
    fn new(rows: usize, cols: usize) -> Self {
        Self {
            u: vec![0.0; rows],
            v: vec![0.0; cols],
            row_to_col: vec![UNASSIGNED; rows],
            col_to_row: vec![UNASSIGNED; cols],
        }
    }

    /// Dijkstra over reduced costs from `start_row` to the nearest free
    /// column, then flip the alternating path. Returns false when every
    /// route has infinite cost.
    fn augment<F>(&mut self, start_row: usize, cost: F, blocked: &[bool]) -> bool
    where
        F: Fn(usize, usize) -> f64,
    {
        let cols = self.v.len();
        let mut min_reduced = vec![f64::INFINITY; cols];
        // Predecessor column in the alternating tree; UNASSIGNED marks an
        // edge straight from `start_row`.
        let mut came_from = vec![UNASSIGNED; cols];
        let mut in_tree = vec![false; cols];
        let mut current: usize = UNASSIGNED; // current column, UNASSIGNED = tree root

        let free_col = loop {
            let row = if current == UNASSIGNED {
                start_row
            } else {
                self.col_to_row[current]
            };
            let mut delta = f64::INFINITY;
            let mut next_col = UNASSIGNED;
            for j in 0..cols {
                if blocked[j] || in_tree[j] {
                    continue;
                }
                let reduced = cost(row, j) - self.u[row] - self.v[j];
                if reduced < min_reduced[j] {
                    min_reduced[j] = reduced;
                    came_from[j] = current;
                }
                if min_reduced[j] < delta
                    || (min_reduced[j] == delta && next_col == UNASSIGNED)
                {
                    delta = min_reduced[j];
                    next_col = j;
                }
            }
            if next_col == UNASSIGNED || !delta.is_finite() {
                return false;
            }
            // Grow potentials inside the tree, shrink slack outside.
            self.u[start_row] += delta;
            for j in 0..cols {
                if blocked[j] {
                    continue;
                }
                if in_tree[j] {
                    self.u[self.col_to_row[j]] += delta;
                    self.v[j] -= delta;
                } else {
                    min_reduced[j] -= delta;
                }
            }
            in_tree[next_col] = true;
            if self.col_to_row[next_col] == UNASSIGNED {
                break next_col;
            }
            current = next_col;
        };

        // Flip matched/unmatched edges back along the tree.
        let mut col = free_col;
        loop {
            let prev = came_from[col];
            if prev == UNASSIGNED {
                self.col_to_row[col] = start_row;
                self.row_to_col[start_row] = col;
                break;
            }
            let row = self.col_to_row[prev];
            self.col_to_row[col] = row;
            self.row_to_col[row] = col;
            col = prev;
        }
        true
    }
}

/// Heap node for Murty partitioning; min-cost first, lexicographic
/// association vector as the tie-break.
struct Node {
    cost: f64,
    assoc: ExtendedAssociation,
    assignment: Vec<usize>,
    /// Rows pinned to their columns in every descendant.
    forced: Vec<(usize, usize)>,
    blocked_cols: Vec<bool>,
    forbidden: Vec<(usize, usize)>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cost == other.cost && self.assoc == other.assoc
    }
}

impl Eq for Node {}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Node {
    fn cmp(&self, other: &Self) -> Ordering {
        // Reversed: BinaryHeap is a max-heap, we want lowest cost first.
        other
            .cost
            .partial_cmp(&self.cost)
            .unwrap_or(Ordering::Equal)
            .then_with(|| other.assoc.cmp(&self.assoc))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assoc::GammaMatrix;
    use crate::label::Label;
    use approx::assert_relative_eq;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn random_gamma(p: usize, m: usize, rng: &mut impl Rng) -> GammaMatrix {
        GammaMatrix::from_parts(
            (0..p * m).map(|_| rng.gen_range(0.01..5.0)).collect(),
            (0..p).map(|_| rng.gen_range(0.01..2.0)).collect(),
            (0..p).map(|_| rng.gen_range(0.01..2.0)).collect(),
            (0..p as u32).map(|i| Label::new(0, i)).collect(),
            rng.gen_range(0..=p),
            m,
        )
        .unwrap()
    }

    fn brute_force(cost: &CostMatrix) -> Vec<(ExtendedAssociation, f64)> {
        let p = cost.track_count();
        let m = cost.meas_count();
        let mut all: Vec<(ExtendedAssociation, f64)> = ExtendedAssociation::enumerate_all(p, m)
            .into_iter()
            .filter_map(|a| {
                let total: f64 = a.values.iter().enumerate().map(|(n, &v)| cost.cost(n, v)).sum();
                total.is_finite().then_some((a, total))
            })
            .collect();
        all.sort_by(|a, b| {
            a.1.partial_cmp(&b.1)
                .unwrap()
                .then_with(|| a.0.cmp(&b.0))
        });
        all
    }

    #[test]
    fn dense_two_by_two() {
        // C = [[0.1, 0.7], [0.4, 0.2]] -> rows to cols (0, 1), cost 0.3;
        // checked against both permutations.
        let (cols, total) = solve_dense(&[0.1, 0.7, 0.4, 0.2], 2, 2).unwrap();
        assert_eq!(cols, vec![0, 1]);
        assert_relative_eq!(total, 0.3, epsilon = 1e-12);
        assert!(0.1 + 0.2 < 0.7 + 0.4);
    }

    #[test]
    fn dense_single_row() {
        let (cols, total) = solve_dense(&[5.0, 1.0, 3.0], 1, 3).unwrap();
        assert_eq!(cols, vec![1]);
        assert_relative_eq!(total, 1.0);
    }

    #[test]
    fn decoupled_rows_pick_row_minimum() {
        // With every measurement score zeroed, each row can only use its
        // dedicated misdetect/non-exist columns, so the optimum is the
        // per-row minimum of the two.
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let p = rng.gen_range(1..=4);
            let m = rng.gen_range(1..=4);
            let mut g = random_gamma(p, m, &mut rng);
            let zero = GammaMatrix::from_parts(
                vec![0.0; p * m],
                (0..p).map(|n| g.value(n, 0)).collect(),
                (0..p).map(|n| g.value(n, m + 1)).collect(),
                g.labels.clone(),
                g.survivor_count,
                m,
            )
            .unwrap();
            g = zero;
            let cost = CostMatrix::from_gamma(&g);
            let (_, total) = optimal_assignment(&cost).unwrap();
            let expected: f64 = (0..p)
                .map(|n| cost.cost(n, 0).min(cost.cost(n, m + 1)))
                .sum();
            assert_relative_eq!(total, expected, epsilon = 1e-9);
        }
    }

    #[test]
    fn optimal_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..100 {
            let p = rng.gen_range(1..=3);
            let m = rng.gen_range(0..=4);
            let g = random_gamma(p, m, &mut rng);
            let cost = CostMatrix::from_gamma(&g);
            let (assoc, total) = optimal_assignment(&cost).unwrap();
            let oracle = brute_force(&cost);
            assert_relative_eq!(total, oracle[0].1, epsilon = 1e-9);
            assert!(assoc.is_valid(m));
        }
    }

    #[test]
    fn ranked_first_equals_optimal() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let g = random_gamma(3, 3, &mut rng);
        let cost = CostMatrix::from_gamma(&g);
        let (opt, opt_cost) = optimal_assignment(&cost).unwrap();
        let ranked = murty_ranked(&cost, 1).unwrap();
        assert_eq!(ranked.len(), 1);
        assert_eq!(ranked[0].0, opt);
        assert_relative_eq!(ranked[0].1, opt_cost, epsilon = 1e-12);
    }

    #[test]
    fn ranked_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..200 {
            let p = rng.gen_range(1..=3);
            let m = rng.gen_range(0..=4);
            let g = random_gamma(p, m, &mut rng);
            let cost = CostMatrix::from_gamma(&g);
            let oracle = brute_force(&cost);
            let t = rng.gen_range(1..=oracle.len() + 2);
            let ranked = murty_ranked(&cost, t).unwrap();
            assert_eq!(ranked.len(), t.min(oracle.len()));
            for w in ranked.windows(2) {
                assert!(w[0].1 <= w[1].1 + 1e-12);
            }
            for (got, want) in ranked.iter().zip(&oracle) {
                assert_relative_eq!(got.1, want.1, epsilon = 1e-9);
                assert!(got.0.is_valid(m));
            }
            // The emitted set must be exactly the brute-force prefix as a
            // multiset of costs (set equality per cost level).
            let mut got_costs: Vec<f64> = ranked.iter().map(|r| r.1).collect();
            let mut want_costs: Vec<f64> =
                oracle.iter().take(ranked.len()).map(|r| r.1).collect();
            got_costs.sort_by(|a, b| a.partial_cmp(b).unwrap());
            want_costs.sort_by(|a, b| a.partial_cmp(b).unwrap());
            for (a, b) in got_costs.iter().zip(&want_costs) {
                assert_relative_eq!(a, b, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn ranked_exhausts_small_space() {
        // P = 1, M = 1 has exactly three valid assignments.
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        let g = random_gamma(1, 1, &mut rng);
        let cost = CostMatrix::from_gamma(&g);
        let ranked = murty_ranked(&cost, 10).unwrap();
        assert_eq!(ranked.len(), 3);
    }

    #[test]
    fn ranked_no_duplicates() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..50 {
            let p = rng.gen_range(1..=3);
            let m = rng.gen_range(0..=3);
            let g = random_gamma(p, m, &mut rng);
            let ranked = murty_ranked(&CostMatrix::from_gamma(&g), 1000).unwrap();
            let mut seen = std::collections::HashSet::new();
            for (a, _) in &ranked {
                assert!(seen.insert(a.values.clone()));
            }
        }
    }

    #[test]
    fn scaling_envelope_is_subcubic() {
        // Doubling M at fixed P, T must grow runtime by no more than the
        // cubic envelope (factor 9 with headroom).
        use std::time::Instant;
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        let p = 6;
        let t = 50;
        let mut times = Vec::new();
        for &m in &[64usize, 128] {
            let g = random_gamma(p, m, &mut rng);
            let cost = CostMatrix::from_gamma(&g);
            // Warm up, then take the best of 5 runs.
            let _ = murty_ranked(&cost, t).unwrap();
            let best = (0..5)
                .map(|_| {
                    let start = Instant::now();
                    let r = murty_ranked(&cost, t).unwrap();
                    assert_eq!(r.len(), t);
                    start.elapsed().as_secs_f64()
                })
                .fold(f64::INFINITY, f64::min);
            times.push(best);
        }
        let factor = times[1] / times[0];
        assert!(factor <= 9.0, "doubling M scaled runtime by {factor:.2}");
    }

    proptest::proptest! {
        #[test]
        fn ranked_outputs_are_valid_and_sorted(seed in 0u64..500) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let p = rng.gen_range(1..=4);
            let m = rng.gen_range(0..=4);
            let g = random_gamma(p, m, &mut rng);
            let ranked = murty_ranked(&CostMatrix::from_gamma(&g), 25).unwrap();
            for (a, _) in &ranked {
                proptest::prop_assert!(a.is_valid(m));
            }
            for w in ranked.windows(2) {
                proptest::prop_assert!(w[0].1 <= w[1].1 + 1e-12);
            }
        }
    }
}
