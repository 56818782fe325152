//! Repair planning: fixed-priority base heuristics, rollout over them, and an
//! exhaustive search for small instances.

mod enumerate;
mod exact;
mod playout;
mod pool;
mod priority;
mod rollout;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use enumerate::{binomial_capped, combinations, enumerate_actions, log10_binomial};
pub use exact::{exact_plan, estimate_log10_search_space, EXACT_LEAF_BUDGET, EXACT_LOG10_LIMIT};
pub use playout::{score_candidate, Scratch};
pub use pool::{candidate_pool, candidate_pool_n_step, candidate_pool_one_step, Pooling};
pub use priority::{
    base_action, base_action_of, importance_order, random_order, OrderProvenance, PriorityOrder,
};
pub use rollout::rollout_plan;

use crate::damage::DamageScenario;
use crate::error::{Error, Result};
use crate::par::Execution;
use crate::sim::{run_policy, Objective, RecoveryModel, RecoveryTrajectory, RepairAction, SimState};

/// How many epochs the rollout optimizes jointly before handing over to the
/// base heuristic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawLookahead", into = "String")]
pub enum Lookahead {
    Steps(usize),
    /// Search every epoch up to the one-to-one phase: an exact search.
    Full,
}

impl Lookahead {
    pub(crate) fn depth(self) -> usize {
        match self {
            Lookahead::Steps(n) => n,
            Lookahead::Full => usize::MAX,
        }
    }
}

impl Default for Lookahead {
    fn default() -> Self {
        Lookahead::Steps(1)
    }
}

impl FromStr for Lookahead {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "full" => Ok(Lookahead::Full),
            "1" => Ok(Lookahead::Steps(1)),
            "2" => Ok(Lookahead::Steps(2)),
            other => Err(Error::Config(format!(
                "lookahead must be 1, 2 or full, got '{other}'"
            ))),
        }
    }
}

impl fmt::Display for Lookahead {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Lookahead::Steps(n) => write!(f, "{n}"),
            Lookahead::Full => f.write_str("full"),
        }
    }
}

/// Accepts `lookahead = 2` as well as `lookahead = "full"`.
#[derive(Deserialize)]
#[serde(untagged)]
enum RawLookahead {
    Steps(u64),
    Name(String),
}

impl TryFrom<RawLookahead> for Lookahead {
    type Error = Error;

    fn try_from(raw: RawLookahead) -> Result<Self> {
        match raw {
            RawLookahead::Steps(n) => n.to_string().parse(),
            RawLookahead::Name(s) => s.parse(),
        }
    }
}

impl From<Lookahead> for String {
    fn from(l: Lookahead) -> String {
        l.to_string()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlannerConfig {
    pub objective: Objective,
    pub pooling: Pooling,
    /// Most actions enumerated per epoch, plus the base heuristic's own.
    pub cap: usize,
    pub lookahead: Lookahead,
    /// Seeds candidate sampling when the cap binds.
    pub seed: u64,
    pub execution: Execution,
}

impl PlannerConfig {
    pub fn new(objective: Objective) -> Self {
        Self {
            objective,
            pooling: Pooling::Full,
            cap: 100_000,
            lookahead: Lookahead::Steps(1),
            seed: 0,
            execution: Execution::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.cap < 1 {
            return Err(Error::Config("cap must be at least 1".into()));
        }
        if let Lookahead::Steps(n) = self.lookahead {
            if !(1..=2).contains(&n) {
                return Err(Error::Config("lookahead must be 1, 2 or full".into()));
            }
        }
        if let Objective::F1 { gamma } = self.objective {
            if !(0.0..=1.0).contains(&gamma) {
                return Err(Error::Config(format!("gamma {gamma} outside [0, 1]")));
            }
        }
        Ok(())
    }
}

/// A complete repair string with its evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanResult {
    /// One action per epoch, the one-to-one phase included.
    pub actions: Vec<RepairAction>,
    /// Epochs before the one-to-one phase.
    pub nontrivial_epochs: usize,
    pub objective: Objective,
    pub value: f64,
    pub trajectory: RecoveryTrajectory,
    /// Actions scored at each non-trivial epoch.
    pub candidate_counts: Vec<usize>,
    /// log10 of the product of `|P_N(D_t)|` along the committed string: the
    /// size of the exact cost-to-go table this plan avoided building.
    pub log10_table_size: f64,
}

impl PlanResult {
    pub(crate) fn from_run(
        model: &RecoveryModel<'_>,
        objective: Objective,
        trajectory: RecoveryTrajectory,
        actions: Vec<RepairAction>,
        candidate_counts: Vec<usize>,
    ) -> Result<Self> {
        let value = if trajectory.epochs.is_empty() {
            full_service_value(model, objective)
        } else {
            objective.evaluate(&trajectory)?
        };
        let nontrivial_epochs = trajectory.epochs.iter().filter(|e| !e.trivial).count();
        let n = model.resources();
        let log10_table_size = trajectory
            .epochs
            .iter()
            .filter(|e| !e.trivial)
            .map(|e| log10_binomial(e.damaged_before, n))
            .sum();
        Ok(Self {
            actions,
            nontrivial_epochs,
            objective,
            value,
            trajectory,
            candidate_counts,
            log10_table_size,
        })
    }

    /// Component ids of each action.
    pub fn action_ids(&self, model: &RecoveryModel<'_>) -> Vec<Vec<u32>> {
        let tree = &model.network().tree;
        self.actions
            .iter()
            .map(|a| a.members().iter().map(|&u| tree.id(u)).collect())
            .collect()
    }
}

/// Objective value when nothing is damaged: everyone is served from day 0.
pub fn full_service_value(model: &RecoveryModel<'_>, objective: Objective) -> f64 {
    match objective {
        Objective::F1 { .. } => 0.0,
        Objective::F2 { .. } => model.total_population(),
    }
}

/// Runs the base heuristic alone.
pub fn base_plan(
    model: &RecoveryModel<'_>,
    scenario: &DamageScenario,
    order: &PriorityOrder,
    objective: Objective,
) -> Result<PlanResult> {
    let n = model.resources();
    let run = run_policy(model, scenario, |s| Ok(base_action(order, s, n)))?;
    let counts = vec![1; run.trajectory.epochs.iter().filter(|e| !e.trivial).count()];
    PlanResult::from_run(model, objective, run.trajectory, run.actions, counts)
}

/// Re-simulates a recorded string, falling back to the lexicographically
/// first action once it runs out.
pub fn replay(
    model: &RecoveryModel<'_>,
    scenario: &DamageScenario,
    actions: &[RepairAction],
    objective: Objective,
) -> Result<PlanResult> {
    let n = model.resources();
    let mut next = actions.iter();
    let run = run_policy(model, scenario, |s: &SimState| {
        Ok(next
            .next()
            .cloned()
            .unwrap_or_else(|| RepairAction::new(s.damaged().iter().copied().take(n).collect())))
    })?;
    let counts = vec![1; run.trajectory.epochs.iter().filter(|e| !e.trivial).count()];
    PlanResult::from_run(model, objective, run.trajectory, run.actions, counts)
}
