use std::cmp::Ordering;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{Network, ServiceMode};
use crate::rng::{self, Purpose};
use crate::sim::{RepairAction, SimState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum OrderProvenance {
    Random { seed: u64 },
    Importance,
    Explicit,
}

/// A fixed ranking of every component. The base heuristics repair damaged
/// components strictly in this order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PriorityOrder {
    order: Vec<usize>,
    rank: Vec<u32>,
    provenance: OrderProvenance,
}

impl PriorityOrder {
    pub fn from_indices(order: Vec<usize>, provenance: OrderProvenance) -> Result<Self> {
        let mut rank = vec![u32::MAX; order.len()];
        for (r, &u) in order.iter().enumerate() {
            if u >= order.len() || rank[u] != u32::MAX {
                return Err(Error::Config(
                    "priority order must be a permutation of component indices".into(),
                ));
            }
            rank[u] = r as u32;
        }
        Ok(Self {
            order,
            rank,
            provenance,
        })
    }

    /// Ascending index order.
    pub fn identity(n: usize) -> Self {
        Self::from_indices((0..n).collect(), OrderProvenance::Explicit).expect("identity permutation")
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn rank(&self, idx: usize) -> u32 {
        self.rank[idx]
    }

    pub fn provenance(&self) -> OrderProvenance {
        self.provenance
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// `damaged` re-sorted by priority.
    pub fn sort_by_rank(&self, damaged: &[usize]) -> Vec<usize> {
        let mut v = damaged.to_vec();
        v.sort_unstable_by_key(|&u| self.rank[u]);
        v
    }
}

/// The random heuristic: a seeded shuffle of all components.
pub fn random_order(n: usize, seed: u64) -> PriorityOrder {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng::stream(seed, Purpose::RandomOrder, 0));
    PriorityOrder::from_indices(order, OrderProvenance::Random { seed }).expect("shuffle is a permutation")
}

/// The importance heuristic: components ranked by the population whose
/// supply path crosses them, largest first, ties by ascending id.
pub fn importance_order(network: &Network, mode: ServiceMode) -> PriorityOrder {
    let demand = network.subtree_demand(mode);
    let mut order: Vec<usize> = (0..network.tree.len()).collect();
    // Index order is id order.
    order.sort_by(|&a, &b| match demand[b].total_cmp(&demand[a]) {
        Ordering::Equal => a.cmp(&b),
        o => o,
    });
    PriorityOrder::from_indices(order, OrderProvenance::Importance).expect("sort is a permutation")
}

/// The `min(n, |D|)` damaged components that come first in `order`.
pub fn base_action(order: &PriorityOrder, state: &SimState, n: usize) -> RepairAction {
    let want = n.min(state.damaged().len());
    RepairAction::new(
        order
            .order()
            .iter()
            .copied()
            .filter(|&u| state.is_damaged(u))
            .take(want)
            .collect(),
    )
}

/// Same as [`base_action`] over an explicit damaged set.
pub fn base_action_of(order: &PriorityOrder, damaged: &[usize], n: usize) -> RepairAction {
    RepairAction::new(order.sort_by_rank(damaged).into_iter().take(n).collect())
}
