//! Exhaustive search over every repair string, for small instances.

use super::enumerate::{combinations, log10_binomial};
use super::playout::{score_candidate, Scratch};
use super::{replay, PlanResult};
use crate::damage::DamageScenario;
use crate::error::{Error, Result};
use crate::sim::{Objective, RecoveryModel, RepairAction, ScoreTracker, SimState};

/// Refuse instances whose estimated string count exceeds `10^EXACT_LOG10_LIMIT`.
pub const EXACT_LOG10_LIMIT: f64 = 7.0;
/// Hard cap on complete strings visited, in case the estimate is optimistic.
pub const EXACT_LEAF_BUDGET: u64 = 100_000_000;

fn first_n(state: &SimState, n: usize) -> RepairAction {
    RepairAction::new(state.damaged().iter().copied().take(n).collect())
}

/// log10 of the product of `C(|D_t|, N)` along the string that always
/// repairs the lowest indices first.
pub fn estimate_log10_search_space(model: &RecoveryModel<'_>, scenario: &DamageScenario) -> Result<f64> {
    let n = model.resources();
    let mut state = SimState::new(model, scenario)?;
    let mut total = 0.0;
    while !state.is_trivial(n) {
        total += log10_binomial(state.damaged().len(), n);
        let a = first_n(&state, n);
        state.step(model, &a)?;
    }
    Ok(total)
}

struct Search<'a, 'm> {
    model: &'a RecoveryModel<'m>,
    identity: Vec<usize>,
    scratch: Scratch,
    leaves: u64,
    path: Vec<RepairAction>,
    best_loss: f64,
    best_path: Vec<RepairAction>,
}

impl Search<'_, '_> {
    fn visit(&mut self, state: &SimState, tracker: ScoreTracker) -> Result<()> {
        let n = self.model.resources();
        if state.is_done() || tracker.is_settled() || state.is_trivial(n) {
            self.leaves += 1;
            if self.leaves > EXACT_LEAF_BUDGET {
                return Err(Error::SearchTooLarge(format!(
                    "more than {EXACT_LEAF_BUDGET} repair strings"
                )));
            }
            // Past this point every string scores the same.
            let loss = score_candidate(self.model, state, tracker, &self.identity, None, &mut self.scratch).loss();
            if loss < self.best_loss {
                self.best_loss = loss;
                self.best_path = self.path.clone();
            }
            return Ok(());
        }
        let mut repaired = Vec::new();
        for action in combinations(state.damaged(), n) {
            let mut child = state.clone();
            let mut t = tracker;
            repaired.clear();
            let interval = child.advance(self.model, action.members(), &mut repaired);
            t.record(interval, child.level(), child.clock());
            self.path.push(action);
            self.visit(&child, t)?;
            self.path.pop();
        }
        Ok(())
    }
}

/// The optimal repair string by depth-first enumeration of every action at
/// every epoch. Among optimal strings the lexicographically first wins.
///
/// Fails with [`Error::SearchTooLarge`] when the instance is estimated to
/// hold more than `10^7` strings or the search visits more than
/// [`EXACT_LEAF_BUDGET`].
pub fn exact_plan(model: &RecoveryModel<'_>, scenario: &DamageScenario, objective: Objective) -> Result<PlanResult> {
    let estimate = estimate_log10_search_space(model, scenario)?;
    if estimate > EXACT_LOG10_LIMIT {
        return Err(Error::SearchTooLarge(format!(
            "about 10^{estimate:.1} repair strings, limit 10^{EXACT_LOG10_LIMIT}"
        )));
    }
    let state = SimState::new(model, scenario)?;
    let tracker = ScoreTracker::new(objective, model.total_population(), state.level());
    let mut search = Search {
        model,
        identity: (0..model.component_count()).collect(),
        scratch: Scratch::new(model),
        leaves: 0,
        path: Vec::new(),
        best_loss: f64::INFINITY,
        best_path: Vec::new(),
    };
    search.visit(&state, tracker)?;
    let best = search.best_path;
    let mut result = replay(model, scenario, &best, objective)?;
    result.candidate_counts = result
        .trajectory
        .epochs
        .iter()
        .filter(|e| !e.trivial)
        .map(|e| super::binomial_capped(e.damaged_before, model.resources(), u64::MAX as u128) as usize)
        .collect();
    Ok(result)
}
