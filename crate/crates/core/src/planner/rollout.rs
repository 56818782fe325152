use std::cmp::Ordering;

use super::enumerate::enumerate_actions;
use super::playout::{score_candidate, Scratch};
use super::pool::{candidate_pool, Pooling};
use super::priority::{base_action, importance_order, PriorityOrder};
use super::{PlanResult, PlannerConfig};
use crate::damage::DamageScenario;
use crate::error::{Error, Result};
use crate::par;
use crate::rng::{self, Purpose};
use crate::sim::{EpochRecord, RecoveryModel, RecoveryTrajectory, RepairAction, ScoreTracker, SimState};

struct Planner<'a, 'm> {
    model: &'a RecoveryModel<'m>,
    order: &'a PriorityOrder,
    smart: Option<PriorityOrder>,
    config: &'a PlannerConfig,
}

/// Stream index for candidate sampling, a function of the state alone so
/// that sampling does not depend on the order states are visited in.
fn state_stream(state: &SimState) -> u64 {
    let mut h = rng::mix(state.clock().to_bits());
    for &u in state.damaged() {
        h = rng::mix(h ^ u as u64);
        h = rng::mix(h ^ state.remaining_of(u).to_bits());
    }
    h
}

impl Planner<'_, '_> {
    fn tracker(&self, state: &SimState) -> ScoreTracker {
        ScoreTracker::new(self.config.objective, self.model.total_population(), state.level())
    }

    /// The epoch's candidate actions.
    fn candidates(&self, state: &SimState) -> Result<Vec<RepairAction>> {
        let n = self.model.resources();
        let base = base_action(self.order, state, n);
        let mut must = vec![base];
        if let Some(smart) = &self.smart {
            let alt = base_action(smart, state, n);
            if alt != must[0] {
                must.push(alt);
            }
        }
        let pool = candidate_pool(
            &self.model.network().tree,
            self.config.pooling,
            state.damaged(),
            |u| state.is_damaged(u),
            n,
        );
        let mut rng = rng::stream(self.config.seed, Purpose::Candidates, state_stream(state));
        // Outside the one-to-one phase every pool holds at least N.
        debug_assert!(pool.len() >= n);
        enumerate_actions(&pool, n, self.config.cap, &mut rng, &must)
    }

    fn child(&self, state: &SimState, tracker: ScoreTracker, action: &RepairAction) -> (SimState, ScoreTracker) {
        let mut child = state.clone();
        let mut tracker = tracker;
        let mut repaired = Vec::new();
        let interval = child.advance(self.model, action.members(), &mut repaired);
        tracker.record(interval, child.level(), child.clock());
        (child, tracker)
    }

    /// Best loss reachable from `state` optimizing `depth` more epochs, the
    /// base heuristic completing the rest.
    fn cost_to_go(&self, state: &SimState, tracker: ScoreTracker, depth: usize, scratch: &mut Scratch) -> Result<f64> {
        if state.is_done() || tracker.is_settled() {
            return Ok(tracker.loss());
        }
        if depth == 0 || state.is_trivial(self.model.resources()) {
            let ranked = self.order.sort_by_rank(state.damaged());
            return Ok(score_candidate(self.model, state, tracker, &ranked, None, scratch).loss());
        }
        let mut best = f64::INFINITY;
        for action in self.candidates(state)? {
            let (child, t) = self.child(state, tracker, &action);
            best = best.min(self.cost_to_go(&child, t, depth - 1, scratch)?);
        }
        Ok(best)
    }

    /// Scores every candidate and returns the winner with the candidate count.
    fn choose(&self, state: &SimState, tracker: ScoreTracker) -> Result<(RepairAction, usize)> {
        let actions = self.candidates(state)?;
        let depth = self.config.lookahead.depth();
        let exec = self.config.execution;
        let model = self.model;
        let losses: Vec<Result<f64>> = if depth == 1 {
            let ranked = self.order.sort_by_rank(state.damaged());
            par::map_with(
                &actions,
                exec,
                || Scratch::new(model),
                |scratch, a| Ok(score_candidate(model, state, tracker, &ranked, Some(a.members()), scratch).loss()),
            )
        } else {
            par::map_with(
                &actions,
                exec,
                || Scratch::new(model),
                |scratch, a| {
                    let (child, t) = self.child(state, tracker, a);
                    self.cost_to_go(&child, t, depth - 1, scratch)
                },
            )
        };
        let mut best = 0;
        let mut best_loss = f64::INFINITY;
        for (i, loss) in losses.into_iter().enumerate() {
            let loss = loss?;
            if i == 0 || prefer(loss, &actions[i], best_loss, &actions[best]) {
                best = i;
                best_loss = loss;
            }
        }
        let count = actions.len();
        Ok((actions.into_iter().nth(best).expect("non-empty"), count))
    }
}

/// Total order on candidates: lower loss, then the lexicographically
/// smallest member list.
fn prefer(loss: f64, action: &RepairAction, best_loss: f64, best: &RepairAction) -> bool {
    match loss.total_cmp(&best_loss) {
        Ordering::Less => true,
        Ordering::Greater => false,
        Ordering::Equal => action.members() < best.members(),
    }
}

/// Rollout over a fixed-priority base heuristic.
///
/// Every epoch scores the candidate actions by applying each and letting
/// `order` finish the recovery (or, with a deeper lookahead, optimizing more
/// epochs first), then commits the best. The base heuristic's own action is
/// always scored, so the result never does worse than `order` alone.
pub fn rollout_plan(
    model: &RecoveryModel<'_>,
    scenario: &DamageScenario,
    order: &PriorityOrder,
    config: &PlannerConfig,
) -> Result<PlanResult> {
    config.validate()?;
    if order.len() != model.component_count() {
        return Err(Error::Config(format!(
            "priority order covers {} components, network has {}",
            order.len(),
            model.component_count()
        )));
    }
    let smart = (config.pooling == Pooling::RandomCap).then(|| importance_order(model.network(), model.mode()));
    let planner = Planner {
        model,
        order,
        smart,
        config,
    };
    let n = model.resources();
    let mut state = SimState::new(model, scenario)?;
    let mut tracker = planner.tracker(&state);
    let mut trajectory = RecoveryTrajectory {
        initial_level: state.level(),
        total_population: model.total_population(),
        epochs: Vec::new(),
        terminal: false,
    };
    let mut actions = Vec::new();
    let mut counts = Vec::new();
    while !state.is_done() {
        let trivial = state.is_trivial(n);
        let damaged_before = state.damaged().len();
        let action = if trivial {
            RepairAction::new(state.damaged().to_vec())
        } else if tracker.is_settled() {
            // Every candidate now ties; the smallest one wins.
            counts.push(1);
            RepairAction::new(state.damaged()[..n].to_vec())
        } else {
            let (action, count) = planner.choose(&state, tracker)?;
            counts.push(count);
            action
        };
        let outcome = state.step(model, &action)?;
        tracker.record(outcome.interval, state.level(), state.clock());
        actions.push(action);
        trajectory.epochs.push(EpochRecord {
            epoch: actions.len(),
            interval: outcome.interval,
            level: state.level(),
            clock: state.clock(),
            trivial,
            damaged_before,
        });
    }
    trajectory.terminal = true;
    PlanResult::from_run(model, config.objective, trajectory, actions, counts)
}
