use std::collections::HashSet;

use rand::seq::index;
use rand::Rng;

use crate::error::{Error, Result};
use crate::sim::RepairAction;

/// `C(n, k)`, saturating at `limit + 1`.
pub fn binomial_capped(n: usize, k: usize, limit: u128) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut c: u128 = 1;
    for i in 0..k {
        // c * (n - i) / (i + 1) stays integral at every step.
        c = c * (n - i) as u128 / (i + 1) as u128;
        if c > limit {
            return limit + 1;
        }
    }
    c
}

/// log10 of `C(n, k)`.
pub fn log10_binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    (0..k.min(n - k))
        .map(|i| ((n - i) as f64 / (i + 1) as f64).log10())
        .sum()
}

/// All `k`-subsets of `pool` in lexicographic order.
pub fn combinations(pool: &[usize], k: usize) -> Vec<RepairAction> {
    let mut sorted = pool.to_vec();
    sorted.sort_unstable();
    let n = sorted.len();
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(RepairAction::new(idx.iter().map(|&i| sorted[i]).collect()));
        let Some(i) = (0..k).rev().find(|&i| idx[i] != i + n - k) else {
            break;
        };
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
    out
}

/// Candidate actions for one epoch.
///
/// The result holds at most `cap + 1` actions: every `k`-subset of `pool`
/// when they fit, otherwise distinct uniformly sampled subsets. Each action
/// in `must_include` appears exactly once either way.
pub fn enumerate_actions<R: Rng>(
    pool: &[usize],
    k: usize,
    cap: usize,
    rng: &mut R,
    must_include: &[RepairAction],
) -> Result<Vec<RepairAction>> {
    if cap < 1 {
        return Err(Error::Config("action cap must be at least 1".into()));
    }
    if pool.is_empty() {
        return Err(Error::Config("candidate pool is empty".into()));
    }
    let budget = cap + 1 - must_include.len().clamp(1, cap + 1);
    let total = binomial_capped(pool.len(), k, budget as u128);
    let mut out = if total <= budget as u128 {
        combinations(pool, k)
    } else {
        let mut seen = HashSet::with_capacity(budget);
        let mut sampled = Vec::with_capacity(budget + must_include.len());
        while sampled.len() < budget {
            let pick = index::sample(rng, pool.len(), k);
            let action = RepairAction::new(pick.into_iter().map(|i| pool[i]).collect());
            if seen.insert(action.clone()) {
                sampled.push(action);
            }
        }
        sampled
    };
    for m in must_include {
        if !out.contains(m) {
            out.push(m.clone());
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn binomials() {
        assert_eq!(binomial_capped(4, 2, 1000), 6);
        assert_eq!(binomial_capped(50, 10, u128::MAX / 64), 10_272_278_170);
        assert_eq!(binomial_capped(50, 10, 100_000), 100_001);
        assert_eq!(binomial_capped(3, 5, 10), 0);
        assert!((log10_binomial(50, 10) - 10_272_278_170f64.log10()).abs() < 1e-9);
    }

    #[test]
    fn all_subsets_when_small() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let acts = enumerate_actions(&[3, 1, 4, 9], 2, 10, &mut rng, &[]).unwrap();
        assert_eq!(acts.len(), 6);
        assert_eq!(acts[0].members(), &[1, 3]);
        assert_eq!(acts[5].members(), &[4, 9]);
    }

    #[test]
    fn capped_sampling_is_distinct() {
        let pool: Vec<usize> = (0..50).collect();
        let base = RepairAction::new((0..10).collect());
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let acts = enumerate_actions(&pool, 10, 100_000, &mut rng, std::slice::from_ref(&base)).unwrap();
        assert_eq!(acts.len(), 100_001);
        let set: HashSet<_> = acts.iter().collect();
        assert_eq!(set.len(), acts.len());
        assert_eq!(acts.iter().filter(|a| **a == base).count(), 1);
    }

    #[test]
    fn must_include_appears_once() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let base = RepairAction::new(vec![1, 3]);
        let acts = enumerate_actions(&[1, 2, 3], 2, 10, &mut rng, std::slice::from_ref(&base)).unwrap();
        assert_eq!(acts.len(), 3);
        assert_eq!(acts.iter().filter(|a| **a == base).count(), 1);
        // Outside the pool: appended.
        let outside = RepairAction::new(vec![7, 8]);
        let acts = enumerate_actions(&[1, 2, 3], 2, 10, &mut rng, std::slice::from_ref(&outside)).unwrap();
        assert_eq!(acts.len(), 4);
    }

    #[test]
    fn sampling_is_seeded() {
        let pool: Vec<usize> = (0..30).collect();
        let a = enumerate_actions(&pool, 5, 200, &mut ChaCha8Rng::seed_from_u64(9), &[]).unwrap();
        let b = enumerate_actions(&pool, 5, 200, &mut ChaCha8Rng::seed_from_u64(9), &[]).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 200);
    }

    #[test]
    fn cap_zero_is_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(enumerate_actions(&[1, 2], 1, 0, &mut rng, &[]).is_err());
    }
}
