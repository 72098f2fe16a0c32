//! Minibatch optimal transport: exact assignment between prior and target
//! samples under an alignment-invariant cost.

use crate::motor::Frame;

use super::{kabsch_rmsd, FlowError};

/// An assignment of prior samples to target samples.
#[derive(Clone, Debug, PartialEq)]
pub struct OtPlan {
    /// `permutation[i]` is the target index assigned to prior `i`.
    pub permutation: Vec<usize>,
    /// Total assignment cost.
    pub cost: f64,
}

/// Exact minimum-cost assignment on a square cost matrix (Jonker-Volgenant
/// style potentials, O(n^3)). Returns row -> column.
pub fn hungarian(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    if n == 0 {
        return Vec::new();
    }
    debug_assert!(cost.iter().all(|row| row.len() == n));
    let inf = f64::INFINITY;
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut p = vec![0usize; n + 1]; // column -> assigned row (1-based, 0 free)
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assignment = vec![0usize; n];
    for j in 1..=n {
        assignment[p[j] - 1] = j - 1;
    }
    assignment
}

/// Pairwise cost between two frame lists: Kabsch-aligned RMSD of the CA
/// translations, invariant under rigid motion of either side.
pub fn pair_cost(a: &[Frame], b: &[Frame]) -> Result<f64, FlowError> {
    let pa: Vec<_> = a.iter().map(|f| f.translation).collect();
    let pb: Vec<_> = b.iter().map(|f| f.translation).collect();
    Ok(kabsch_rmsd(&pa, &pb)?.0)
}

/// Optimal whole-sample assignment between a batch of priors and a batch of
/// targets.
pub fn minibatch_ot(priors: &[Vec<Frame>], targets: &[Vec<Frame>]) -> Result<OtPlan, FlowError> {
    if priors.len() != targets.len() {
        return Err(FlowError::LengthMismatch {
            left: priors.len(),
            right: targets.len(),
        });
    }
    if priors.is_empty() {
        return Err(FlowError::EmptyChain);
    }
    let n = priors.len();
    let mut cost = vec![vec![0.0; n]; n];
    for (i, prior) in priors.iter().enumerate() {
        for (j, target) in targets.iter().enumerate() {
            if prior.len() != target.len() {
                return Err(FlowError::LengthMismatch {
                    left: prior.len(),
                    right: target.len(),
                });
            }
            cost[i][j] = pair_cost(prior, target)?;
        }
    }
    let permutation = hungarian(&cost);
    let total = permutation
        .iter()
        .enumerate()
        .map(|(i, &j)| cost[i][j])
        .sum();
    Ok(OtPlan {
        permutation,
        cost: total,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::sample_prior;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn hungarian_on_small_known_matrix() {
        let cost = vec![
            vec![4.0, 1.0, 3.0],
            vec![2.0, 0.0, 5.0],
            vec![3.0, 2.0, 2.0],
        ];
        let assignment = hungarian(&cost);
        let total: f64 = assignment.iter().enumerate().map(|(i, &j)| cost[i][j]).sum();
        assert!((total - 5.0).abs() < 1e-12); // 1 + 2 + 2
    }

    #[test]
    fn hungarian_matches_brute_force() {
        let mut rng = ChaCha20Rng::seed_from_u64(61);
        for n in 1..=6usize {
            for _ in 0..20 {
                let cost: Vec<Vec<f64>> = (0..n)
                    .map(|_| (0..n).map(|_| rng.gen_range(0.0..10.0)).collect())
                    .collect();
                let assignment = hungarian(&cost);
                let total: f64 = assignment.iter().enumerate().map(|(i, &j)| cost[i][j]).sum();
                let best = brute_force_min(&cost);
                assert!(
                    (total - best).abs() < 1e-9,
                    "n={n}: hungarian {total} vs brute {best}"
                );
            }
        }
    }

    pub(super) fn brute_force_min(cost: &[Vec<f64>]) -> f64 {
        fn rec(cost: &[Vec<f64>], row: usize, used: &mut [bool], acc: f64, best: &mut f64) {
            if row == cost.len() {
                *best = best.min(acc);
                return;
            }
            for j in 0..cost.len() {
                if !used[j] {
                    used[j] = true;
                    rec(cost, row + 1, used, acc + cost[row][j], best);
                    used[j] = false;
                }
            }
        }
        let mut best = f64::INFINITY;
        rec(cost, 0, &mut vec![false; cost.len()], 0.0, &mut best);
        best
    }

    #[test]
    fn batch_of_one_is_the_identity() {
        let prior = vec![sample_prior(5, 70).unwrap()];
        let target = vec![sample_prior(5, 71).unwrap()];
        let plan = minibatch_ot(&prior, &target).unwrap();
        assert_eq!(plan.permutation, vec![0]);
    }

    #[test]
    fn permuted_targets_are_recovered_at_zero_cost() {
        let batch: Vec<Vec<Frame>> = (0..4).map(|i| sample_prior(6, 80 + i).unwrap()).collect();
        let perm = [2usize, 0, 3, 1];
        let targets: Vec<Vec<Frame>> = (0..4)
            .map(|j| batch[perm.iter().position(|&p| p == j).unwrap()].clone())
            .collect();
        // targets[perm[i]] == batch[i]
        let plan = minibatch_ot(&batch, &targets).unwrap();
        assert!(plan.cost < 1e-9);
        assert_eq!(plan.permutation, perm.to_vec());
    }

    #[test]
    fn plan_cost_never_exceeds_identity_cost() {
        let priors: Vec<Vec<Frame>> = (0..5).map(|i| sample_prior(4, 90 + i).unwrap()).collect();
        let targets: Vec<Vec<Frame>> = (0..5).map(|i| sample_prior(4, 190 + i).unwrap()).collect();
        let plan = minibatch_ot(&priors, &targets).unwrap();
        let identity: f64 = priors
            .iter()
            .zip(&targets)
            .map(|(a, b)| pair_cost(a, b).unwrap())
            .sum();
        assert!(plan.cost <= identity + 1e-12);
    }
}
