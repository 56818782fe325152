//! Candidate pools: which damaged components an epoch's actions may draw
//! from. The tree-based pools exploit the serial structure of the network:
//! nothing downstream pays off before its upstream segments are repaired.

use serde::{Deserialize, Serialize};

use crate::network::EpnTree;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Pooling {
    /// Every damaged component.
    Full,
    /// Whole tree levels, shallowest damaged level first.
    #[default]
    OneStep,
    /// One segment at a time, fewest damaged first.
    NStep,
    /// Every damaged component, with action enumeration sampled down to the
    /// cap and the importance heuristic's action always added.
    RandomCap,
}

impl std::str::FromStr for Pooling {
    type Err = crate::error::Error;

    fn from_str(s: &str) -> crate::error::Result<Self> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "full" => Ok(Pooling::Full),
            "one-step" | "1-step" => Ok(Pooling::OneStep),
            "n-step" => Ok(Pooling::NStep),
            "random-cap" | "random" => Ok(Pooling::RandomCap),
            other => Err(crate::error::Error::Config(format!("unknown pooling '{other}'"))),
        }
    }
}

fn damaged_in<'a>(tree: &'a EpnTree, segment: usize, is_damaged: &'a impl Fn(usize) -> bool) -> impl Iterator<Item = usize> + 'a {
    let members = &tree.segments()[segment].members;
    members.iter().copied().filter(move |&u| is_damaged(u))
}

fn first_damaged_level(tree: &EpnTree, is_damaged: &impl Fn(usize) -> bool) -> Option<usize> {
    tree.levels().iter().position(|level| {
        level
            .iter()
            .any(|&s| tree.segments()[s].members.iter().any(|&u| is_damaged(u)))
    })
}

/// Accumulates all damaged components level by level, starting at the
/// shallowest damaged level, until the pool holds at least `n`.
pub fn candidate_pool_one_step(tree: &EpnTree, is_damaged: impl Fn(usize) -> bool, n: usize) -> Vec<usize> {
    let mut pool = Vec::new();
    let Some(start) = first_damaged_level(tree, &is_damaged) else {
        return pool;
    };
    for level in &tree.levels()[start..] {
        for &s in level {
            pool.extend(damaged_in(tree, s, &is_damaged));
        }
        if pool.len() >= n {
            break;
        }
    }
    pool.sort_unstable();
    pool
}

/// Starts like [`candidate_pool_one_step`] with the shallowest damaged
/// level, then adds next-level segments one at a time, fewest damaged
/// components first (ties by label), until the pool holds at least `n`.
pub fn candidate_pool_n_step(tree: &EpnTree, is_damaged: impl Fn(usize) -> bool, n: usize) -> Vec<usize> {
    let mut pool = Vec::new();
    let Some(start) = first_damaged_level(tree, &is_damaged) else {
        return pool;
    };
    for &s in &tree.levels()[start] {
        pool.extend(damaged_in(tree, s, &is_damaged));
    }
    'levels: for level in &tree.levels()[start + 1..] {
        if pool.len() >= n {
            break;
        }
        let mut nodes: Vec<(usize, u32, usize)> = level
            .iter()
            .map(|&s| (damaged_in(tree, s, &is_damaged).count(), tree.segments()[s].label, s))
            .collect();
        nodes.sort_unstable();
        for (_, _, s) in nodes {
            pool.extend(damaged_in(tree, s, &is_damaged));
            if pool.len() >= n {
                break 'levels;
            }
        }
    }
    pool.sort_unstable();
    pool
}

pub fn candidate_pool(
    tree: &EpnTree,
    pooling: Pooling,
    damaged: &[usize],
    is_damaged: impl Fn(usize) -> bool,
    n: usize,
) -> Vec<usize> {
    match pooling {
        Pooling::Full | Pooling::RandomCap => damaged.to_vec(),
        Pooling::OneStep => candidate_pool_one_step(tree, is_damaged, n),
        Pooling::NStep => candidate_pool_n_step(tree, is_damaged, n),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point;
    use crate::network::{Component, ComponentClass};

    fn comp(id: u32, parent: Option<u32>) -> Component {
        Component {
            id,
            class: ComponentClass::Distribution,
            parent,
            location: Point::default(),
        }
    }

    /// Root chain 1..=4, then two branches: 5..=7 and 8..=14.
    fn two_branch() -> EpnTree {
        let mut v = vec![comp(1, None)];
        for id in 2..=4 {
            v.push(comp(id, Some(id - 1)));
        }
        v.push(comp(5, Some(4)));
        v.push(comp(6, Some(5)));
        v.push(comp(7, Some(6)));
        v.push(comp(8, Some(4)));
        for id in 9..=14 {
            v.push(comp(id, Some(id - 1)));
        }
        EpnTree::build(v).unwrap()
    }

    fn ids(tree: &EpnTree, pool: &[usize]) -> Vec<u32> {
        pool.iter().map(|&u| tree.id(u)).collect()
    }

    #[test]
    fn one_step_stops_at_first_sufficient_level() {
        let t = two_branch();
        let all = |_| true;
        assert_eq!(ids(&t, &candidate_pool_one_step(&t, all, 3)), vec![1, 2, 3, 4]);
        // Level 0 holds 4; the next level adds both branches.
        assert_eq!(candidate_pool_one_step(&t, all, 10).len(), 14);
    }

    #[test]
    fn one_step_exhausts() {
        let t = two_branch();
        let damaged = [1usize, 5, 9];
        let pool = candidate_pool_one_step(&t, |u| damaged.contains(&u), 10);
        assert_eq!(pool, vec![1, 5, 9]);
    }

    #[test]
    fn n_step_prefers_small_segments() {
        let t = two_branch();
        // Level 0: 4 damaged. Next level: segment 5..7 (3) and 8..14 (7).
        let pool = candidate_pool_n_step(&t, |_| true, 6);
        assert_eq!(ids(&t, &pool), vec![1, 2, 3, 4, 5, 6, 7]);
        let pool = candidate_pool_n_step(&t, |_| true, 10);
        assert_eq!(pool.len(), 14);
    }

    #[test]
    fn n_step_skips_undamaged_levels() {
        let t = two_branch();
        // Only the deep branch is damaged.
        let pool = candidate_pool_n_step(&t, |u| u >= 7, 2);
        assert_eq!(ids(&t, &pool), (8..=14).collect::<Vec<_>>());
    }

    #[test]
    fn chain_levels_match_one_step() {
        let mut v = vec![comp(1, None)];
        for id in 2..=9 {
            v.push(comp(id, Some(id - 1)));
        }
        let t = EpnTree::build(v).unwrap();
        let d = |u: usize| u.is_multiple_of(2);
        assert_eq!(candidate_pool_n_step(&t, d, 3), candidate_pool_one_step(&t, d, 3));
    }
}
