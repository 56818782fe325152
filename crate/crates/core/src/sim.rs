//! Discrete-event recovery simulation.
//!
//! A decision epoch ends when the first assigned component finishes. Every
//! assigned component progresses by the epoch length; unassigned components
//! keep whatever progress they had, so reassigning a crew never loses work.
//! Once no more components are damaged than there are crews, the remaining
//! components are all assigned at once and stepped to completion.

use serde::{Deserialize, Serialize};

use crate::damage::DamageScenario;
use crate::error::{Error, Result};
use crate::network::{Network, ServiceMode};

/// Remaining repair times at or below this many days count as finished.
pub const COMPLETION_EPS: f64 = 1e-9;

/// Relative slack when comparing a served level against `gamma * p`; the
/// retailer-weighted level only reaches `p` up to rounding.
pub const THRESHOLD_RTOL: f64 = 1e-9;

/// Crew assignment for one epoch: sorted, distinct component indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct RepairAction(Vec<usize>);

impl RepairAction {
    pub fn new(mut members: Vec<usize>) -> Self {
        members.sort_unstable();
        members.dedup();
        Self(members)
    }

    pub fn members(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, idx: usize) -> bool {
        self.0.binary_search(&idx).is_ok()
    }
}

impl From<Vec<usize>> for RepairAction {
    fn from(v: Vec<usize>) -> Self {
        Self::new(v)
    }
}

/// Read-only data the simulator needs: the network, the service mode, the
/// crew count, and for every component the cells and retailers whose supply
/// path crosses it.
#[derive(Debug, Clone)]
pub struct RecoveryModel<'a> {
    network: &'a Network,
    mode: ServiceMode,
    resources: usize,
    total_population: f64,
    cell_path_len: Vec<u32>,
    retailer_path_len: Vec<u32>,
    cells_below: Csr,
    retailers_below: Csr,
}

#[derive(Debug, Clone, Default)]
struct Csr {
    offsets: Vec<u32>,
    items: Vec<u32>,
}

impl Csr {
    fn build(n: usize, pairs: &[(usize, u32)]) -> Self {
        let mut counts = vec![0u32; n + 1];
        for &(u, _) in pairs {
            counts[u + 1] += 1;
        }
        for i in 0..n {
            counts[i + 1] += counts[i];
        }
        let mut fill = counts.clone();
        let mut items = vec![0; pairs.len()];
        for &(u, e) in pairs {
            items[fill[u] as usize] = e;
            fill[u] += 1;
        }
        Self { offsets: counts, items }
    }

    #[inline]
    fn row(&self, u: usize) -> &[u32] {
        &self.items[self.offsets[u] as usize..self.offsets[u + 1] as usize]
    }
}

impl<'a> RecoveryModel<'a> {
    pub fn new(network: &'a Network, mode: ServiceMode, resources: usize) -> Result<Self> {
        if resources == 0 {
            return Err(Error::Config("at least one resource unit is required".into()));
        }
        let tree = &network.tree;
        let mut cell_pairs = Vec::new();
        let mut cell_path_len = Vec::new();
        for (c, &sink) in network.cell_sinks().iter().enumerate() {
            let path = tree.supply_path_indices(sink);
            cell_path_len.push(path.len() as u32);
            cell_pairs.extend(path.into_iter().map(|u| (u, c as u32)));
        }
        let mut retailer_pairs = Vec::new();
        let mut retailer_path_len = Vec::new();
        for (r, &sink) in network.retailer_sinks().iter().enumerate() {
            let path = tree.supply_path_indices(sink);
            retailer_path_len.push(path.len() as u32);
            retailer_pairs.extend(path.into_iter().map(|u| (u, r as u32)));
        }
        Ok(Self {
            network,
            mode,
            resources,
            total_population: network.total_population(),
            cell_path_len,
            retailer_path_len,
            cells_below: Csr::build(tree.len(), &cell_pairs),
            retailers_below: Csr::build(tree.len(), &retailer_pairs),
        })
    }

    pub fn network(&self) -> &'a Network {
        self.network
    }

    pub fn mode(&self) -> ServiceMode {
        self.mode
    }

    pub fn resources(&self) -> usize {
        self.resources
    }

    pub fn total_population(&self) -> f64 {
        self.total_population
    }

    pub fn component_count(&self) -> usize {
        self.network.tree.len()
    }

    pub(crate) fn level_from_blocked(&self, service: &ServiceCounters) -> f64 {
        let cells = &service.cells;
        let retailers = &service.retailers;
        self.network
            .level_with(|c| cells[c] == 0, |r| retailers[r] == 0, self.mode)
    }

    /// Blocked-component counts per cell and retailer for a remaining-time
    /// vector.
    pub(crate) fn counters(&self, remaining: &[f64]) -> ServiceCounters {
        let mut cells = self.cell_path_len.clone();
        let mut retailers = self.retailer_path_len.clone();
        for (u, &rem) in remaining.iter().enumerate() {
            if rem <= 0.0 {
                for &c in self.cells_below.row(u) {
                    cells[c as usize] -= 1;
                }
                for &r in self.retailers_below.row(u) {
                    retailers[r as usize] -= 1;
                }
            }
        }
        ServiceCounters { cells, retailers }
    }

    /// Marks `u` functional. Returns true when some cell or retailer became
    /// energized.
    #[inline]
    pub(crate) fn repair(&self, u: usize, service: &mut ServiceCounters) -> bool {
        let mut changed = false;
        for &c in self.cells_below.row(u) {
            let n = &mut service.cells[c as usize];
            *n -= 1;
            changed |= *n == 0;
        }
        if self.mode == ServiceMode::HouseholdsAndRetailers {
            for &r in self.retailers_below.row(u) {
                let n = &mut service.retailers[r as usize];
                *n -= 1;
                changed |= *n == 0;
            }
        } else {
            for &r in self.retailers_below.row(u) {
                service.retailers[r as usize] -= 1;
            }
        }
        changed
    }
}

/// Number of non-functional components on each cell's and retailer's supply
/// path; an entity is energized at zero.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct ServiceCounters {
    pub(crate) cells: Vec<u32>,
    pub(crate) retailers: Vec<u32>,
}

impl ServiceCounters {
    pub(crate) fn copy_from(&mut self, other: &ServiceCounters) {
        self.cells.clone_from(&other.cells);
        self.retailers.clone_from(&other.retailers);
    }
}

/// Simulation state `D_t` with the clock and per-component remaining work.
#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    clock: f64,
    remaining: Vec<f64>,
    damaged: Vec<usize>,
    service: ServiceCounters,
    level: f64,
}

/// What one epoch did.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    /// Epoch length `k_t` in days.
    pub interval: f64,
    /// Components finished in this epoch, `R_t`, ascending index.
    pub repaired: Vec<usize>,
}

impl SimState {
    pub fn new(model: &RecoveryModel<'_>, scenario: &DamageScenario) -> Result<Self> {
        if scenario.repair_days.len() != model.component_count() {
            return Err(Error::Config(format!(
                "scenario covers {} components, network has {}",
                scenario.repair_days.len(),
                model.component_count()
            )));
        }
        if let Some(d) = scenario.repair_days.iter().find(|d| !(d.is_finite() && **d >= 0.0)) {
            return Err(Error::Config(format!("invalid repair time {d}")));
        }
        let remaining = scenario.repair_days.clone();
        let damaged = (0..remaining.len()).filter(|&u| remaining[u] > 0.0).collect();
        let service = model.counters(&remaining);
        let level = model.level_from_blocked(&service);
        Ok(Self {
            clock: 0.0,
            remaining,
            damaged,
            service,
            level,
        })
    }

    pub fn clock(&self) -> f64 {
        self.clock
    }

    /// Damaged component indices, ascending.
    pub fn damaged(&self) -> &[usize] {
        &self.damaged
    }

    pub fn remaining(&self) -> &[f64] {
        &self.remaining
    }

    pub fn remaining_of(&self, idx: usize) -> f64 {
        self.remaining[idx]
    }

    pub fn is_damaged(&self, idx: usize) -> bool {
        self.remaining[idx] > 0.0
    }

    /// Currently served people.
    pub fn level(&self) -> f64 {
        self.level
    }

    pub fn is_done(&self) -> bool {
        self.damaged.is_empty()
    }

    /// True when every damaged component can be given its own crew.
    pub fn is_trivial(&self, resources: usize) -> bool {
        self.damaged.len() <= resources
    }

    pub(crate) fn service(&self) -> &ServiceCounters {
        &self.service
    }

    pub fn validate_action(&self, model: &RecoveryModel<'_>, action: &RepairAction) -> Result<()> {
        let want = model.resources().min(self.damaged.len());
        if action.len() != want {
            return Err(Error::InvalidAction(format!(
                "expected {want} distinct components, got {}",
                action.len()
            )));
        }
        if let Some(&u) = action.members().iter().find(|&&u| u >= self.remaining.len() || !self.is_damaged(u)) {
            let id = if u < self.remaining.len() {
                model.network().tree.id(u).to_string()
            } else {
                format!("index {u}")
            };
            return Err(Error::InvalidAction(format!("component {id} is not damaged")));
        }
        Ok(())
    }

    /// Applies one repair action after checking it.
    pub fn step(&mut self, model: &RecoveryModel<'_>, action: &RepairAction) -> Result<StepOutcome> {
        self.validate_action(model, action)?;
        let mut repaired = Vec::new();
        let interval = self.advance(model, action.members(), &mut repaired);
        repaired.sort_unstable();
        Ok(StepOutcome { interval, repaired })
    }

    /// Unchecked epoch advance; `assigned` must be distinct damaged indices.
    pub(crate) fn advance(
        &mut self,
        model: &RecoveryModel<'_>,
        assigned: &[usize],
        repaired: &mut Vec<usize>,
    ) -> f64 {
        let interval = assigned
            .iter()
            .map(|&u| self.remaining[u])
            .fold(f64::INFINITY, f64::min);
        let mut changed = false;
        for &u in assigned {
            let rem = &mut self.remaining[u];
            *rem -= interval;
            if *rem <= COMPLETION_EPS {
                *rem = 0.0;
                repaired.push(u);
                changed |= model.repair(u, &mut self.service);
            }
        }
        self.clock += interval;
        if changed {
            self.level = model.level_from_blocked(&self.service);
        }
        let remaining = &self.remaining;
        self.damaged.retain(|&u| remaining[u] > 0.0);
        interval
    }
}

/// One completed epoch of a recovery trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    /// 1-based epoch index `t`.
    pub epoch: usize,
    /// `k_t`, days since the previous completion.
    pub interval: f64,
    /// `h_t`, people served after the epoch's repairs.
    pub level: f64,
    /// Clock after the epoch, days.
    pub clock: f64,
    /// Whether the epoch belonged to the one-to-one assignment phase.
    pub trivial: bool,
    /// Components still damaged when the epoch began.
    pub damaged_before: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryTrajectory {
    pub initial_level: f64,
    pub total_population: f64,
    pub epochs: Vec<EpochRecord>,
    /// Set once every damaged component is repaired.
    pub terminal: bool,
}

impl RecoveryTrajectory {
    pub fn final_clock(&self) -> f64 {
        self.epochs.last().map_or(0.0, |e| e.clock)
    }

    pub fn final_level(&self) -> f64 {
        self.epochs.last().map_or(self.initial_level, |e| e.level)
    }

    /// Served people at time `t`; the level of an epoch applies from its
    /// completion onwards.
    pub fn level_at(&self, t: f64) -> f64 {
        let mut level = self.initial_level;
        for e in &self.epochs {
            if e.clock <= t {
                level = e.level;
            } else {
                break;
            }
        }
        level
    }
}

/// Result of replaying a policy: the trajectory and the actions taken at
/// each epoch, trivial ones included.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyRun {
    pub trajectory: RecoveryTrajectory,
    pub actions: Vec<RepairAction>,
}

/// Steps the scenario to completion, asking `policy` for an action whenever
/// more components are damaged than there are crews.
pub fn run_policy<P>(model: &RecoveryModel<'_>, scenario: &DamageScenario, mut policy: P) -> Result<PolicyRun>
where
    P: FnMut(&SimState) -> Result<RepairAction>,
{
    let mut state = SimState::new(model, scenario)?;
    let mut trajectory = RecoveryTrajectory {
        initial_level: state.level(),
        total_population: model.total_population(),
        epochs: Vec::new(),
        terminal: false,
    };
    let mut actions = Vec::new();
    while !state.is_done() {
        let trivial = state.is_trivial(model.resources());
        let damaged_before = state.damaged().len();
        let action = if trivial {
            RepairAction::new(state.damaged().to_vec())
        } else {
            policy(&state)?
        };
        let outcome = state.step(model, &action).map_err(|e| match e {
            Error::InvalidAction(msg) => {
                Error::InvalidAction(format!("policy at epoch {}: {msg}", actions.len() + 1))
            }
            other => other,
        })?;
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
    Ok(PolicyRun { trajectory, actions })
}

/// How the time-weighted served population is normalized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum F2Normalization {
    /// Divide by the last epoch's interval.
    #[default]
    FinalInterval,
    /// Divide by the total elapsed time.
    CumulativeTime,
}

impl std::str::FromStr for F2Normalization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "final-interval" | "final" => Ok(F2Normalization::FinalInterval),
            "cumulative-time" | "cumulative" => Ok(F2Normalization::CumulativeTime),
            other => Err(Error::Config(format!("unknown F2 normalization '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Objective {
    /// Days until `gamma * p` people are served; minimized.
    F1 { gamma: f64 },
    /// Time-weighted served population; maximized.
    F2 { normalization: F2Normalization },
}

impl Objective {
    pub fn f1(gamma: f64) -> Self {
        Objective::F1 { gamma }
    }

    pub fn f2() -> Self {
        Objective::F2 {
            normalization: F2Normalization::FinalInterval,
        }
    }

    pub fn is_maximized(&self) -> bool {
        matches!(self, Objective::F2 { .. })
    }

    /// Objective value of a complete trajectory.
    pub fn evaluate(&self, trajectory: &RecoveryTrajectory) -> Result<f64> {
        match *self {
            Objective::F1 { gamma } => evaluate_f1(trajectory, gamma),
            Objective::F2 { normalization } => evaluate_f2(trajectory, normalization),
        }
    }

    /// Value mapped so that smaller is always better.
    pub fn loss(&self, value: f64) -> f64 {
        if self.is_maximized() {
            -value
        } else {
            value
        }
    }
}

fn reaches(level: f64, gamma: f64, population: f64) -> bool {
    level >= gamma * population - THRESHOLD_RTOL * population.max(1.0)
}

/// Days until at least `gamma * p` people are served, checked at epoch
/// completions.
pub fn evaluate_f1(trajectory: &RecoveryTrajectory, gamma: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::Domain(format!("gamma {gamma} outside [0, 1]")));
    }
    let p = trajectory.total_population;
    if reaches(trajectory.initial_level, gamma, p) {
        return Ok(0.0);
    }
    trajectory
        .epochs
        .iter()
        .find(|e| reaches(e.level, gamma, p))
        .map(|e| e.clock)
        .ok_or_else(|| {
            Error::UndefinedObjective(format!("served level never reaches gamma = {gamma}"))
        })
}

/// `(1 / k_end) * sum_t h_t k_t`, or normalized by total time.
pub fn evaluate_f2(trajectory: &RecoveryTrajectory, normalization: F2Normalization) -> Result<f64> {
    let last = trajectory
        .epochs
        .last()
        .ok_or_else(|| Error::UndefinedObjective("F2 of an empty trajectory".into()))?;
    let mut weighted = 0.0;
    for e in &trajectory.epochs {
        weighted += e.level * e.interval;
    }
    Ok(match normalization {
        F2Normalization::FinalInterval => weighted / last.interval,
        F2Normalization::CumulativeTime => weighted / last.clock,
    })
}

/// Integral of the served fraction over `[0, t_lc]`, divided by `t_lc`.
pub fn resilience_index(trajectory: &RecoveryTrajectory, t_lc: f64) -> Result<f64> {
    let end = trajectory.final_clock();
    if !(t_lc > 0.0) || t_lc < end {
        return Err(Error::Domain(format!(
            "control time {t_lc} must be positive and cover the recovery ({end} days)"
        )));
    }
    let p = trajectory.total_population;
    if !(p > 0.0) {
        return Err(Error::Domain("total population must be positive".into()));
    }
    let mut area = 0.0;
    let mut t = 0.0;
    let mut level = trajectory.initial_level;
    for e in &trajectory.epochs {
        area += level * (e.clock - t);
        t = e.clock;
        level = e.level;
    }
    area += level * (t_lc - t);
    Ok((area / (p * t_lc)).clamp(0.0, 1.0))
}

/// Incremental objective bookkeeping, updated once per epoch in the same
/// order the trajectory functions use, so both produce identical bits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreTracker {
    objective: Objective,
    population: f64,
    clock: f64,
    weighted: f64,
    last_interval: f64,
    crossing: Option<f64>,
}

impl ScoreTracker {
    pub fn new(objective: Objective, population: f64, initial_level: f64) -> Self {
        let crossing = match objective {
            Objective::F1 { gamma } if reaches(initial_level, gamma, population) => Some(0.0),
            _ => None,
        };
        Self {
            objective,
            population,
            clock: 0.0,
            weighted: 0.0,
            last_interval: 0.0,
            crossing,
        }
    }

    #[inline]
    pub fn record(&mut self, interval: f64, level: f64, clock: f64) {
        self.weighted += level * interval;
        self.last_interval = interval;
        self.clock = clock;
        if self.crossing.is_none() {
            if let Objective::F1 { gamma } = self.objective {
                if reaches(level, gamma, self.population) {
                    self.crossing = Some(clock);
                }
            }
        }
    }

    /// For F1 the score is fixed once the threshold is crossed.
    #[inline]
    pub fn is_settled(&self) -> bool {
        matches!(self.objective, Objective::F1 { .. }) && self.crossing.is_some()
    }

    pub fn value(&self) -> f64 {
        match self.objective {
            Objective::F1 { .. } => self.crossing.unwrap_or(self.clock),
            Objective::F2 { normalization } => match normalization {
                F2Normalization::FinalInterval => self.weighted / self.last_interval,
                F2Normalization::CumulativeTime => self.weighted / self.clock,
            },
        }
    }

    pub fn loss(&self) -> f64 {
        self.objective.loss(self.value())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point;
    use crate::network::{Component, ComponentClass, DemandModel, EpnTree, GridCell};

    /// Star: root 1 with leaves 2..=n, one cell of 100 people per leaf.
    fn star(n: u32) -> Network {
        let mut comps = vec![Component {
            id: 1,
            class: ComponentClass::Substation,
            parent: None,
            location: Point::default(),
        }];
        for id in 2..=n {
            comps.push(Component {
                id,
                class: ComponentClass::Distribution,
                parent: Some(1),
                location: Point::default(),
            });
        }
        let tree = EpnTree::build(comps).unwrap();
        let cells: Vec<GridCell> = (2..=n)
            .map(|id| GridCell {
                id,
                population: 100,
                sink: id,
                centroid: Point::default(),
            })
            .collect();
        let demand = DemandModel {
            decay: -0.1,
            probs: vec![Vec::new(); cells.len()],
        };
        Network::new(tree, cells, Vec::new(), demand).unwrap()
    }

    fn traj(levels: &[(f64, f64)], initial: f64, p: f64) -> RecoveryTrajectory {
        let mut clock = 0.0;
        let epochs = levels
            .iter()
            .enumerate()
            .map(|(i, &(k, h))| {
                clock += k;
                EpochRecord {
                    epoch: i + 1,
                    interval: k,
                    level: h,
                    clock,
                    trivial: false,
                    damaged_before: levels.len() - i,
                }
            })
            .collect();
        RecoveryTrajectory {
            initial_level: initial,
            total_population: p,
            epochs,
            terminal: true,
        }
    }

    #[test]
    fn step_earliest_completion_and_preemption() {
        let net = star(3);
        let model = RecoveryModel::new(&net, ServiceMode::Households, 2).unwrap();
        let scenario = DamageScenario::from_repair_days(vec![0.0, 1.0, 3.0]);
        let mut s = SimState::new(&model, &scenario).unwrap();
        let out = s.step(&model, &RepairAction::new(vec![1, 2])).unwrap();
        assert_eq!(out.interval, 1.0);
        assert_eq!(out.repaired, vec![1]);
        assert_eq!(s.remaining_of(2), 2.0);
        assert_eq!(s.level(), 100.0);
        // Component 2 resumes from 2.0 days.
        let out = s.step(&model, &RepairAction::new(vec![2])).unwrap();
        assert_eq!(out.interval, 2.0);
        assert_eq!(s.clock(), 3.0);
        assert!(s.is_done());
    }

    #[test]
    fn progress_persists_while_unassigned() {
        let net = star(5);
        let model = RecoveryModel::new(&net, ServiceMode::Households, 2).unwrap();
        let scenario = DamageScenario::from_repair_days(vec![0.0, 1.0, 3.0, 2.0, 4.0]);
        let mut s = SimState::new(&model, &scenario).unwrap();
        s.step(&model, &RepairAction::new(vec![1, 2])).unwrap();
        assert_eq!(s.remaining_of(2), 2.0);
        // Crews move to 3 and 4; 2 keeps its progress while idle.
        let out = s.step(&model, &RepairAction::new(vec![3, 4])).unwrap();
        assert_eq!(out.interval, 2.0);
        assert_eq!(s.remaining_of(2), 2.0);
        assert_eq!(s.remaining_of(4), 2.0);
        assert!(s.is_trivial(2));
    }

    #[test]
    fn simultaneous_completion() {
        let net = star(3);
        let model = RecoveryModel::new(&net, ServiceMode::Households, 2).unwrap();
        let scenario = DamageScenario::from_repair_days(vec![0.0, 2.0, 2.0]);
        let mut s = SimState::new(&model, &scenario).unwrap();
        let out = s.step(&model, &RepairAction::new(vec![1, 2])).unwrap();
        assert_eq!((out.interval, out.repaired), (2.0, vec![1, 2]));
    }

    #[test]
    fn invalid_actions_rejected() {
        let net = star(4);
        let model = RecoveryModel::new(&net, ServiceMode::Households, 2).unwrap();
        let scenario = DamageScenario::from_repair_days(vec![0.0, 1.0, 3.0, 2.0]);
        let mut s = SimState::new(&model, &scenario).unwrap();
        assert!(matches!(
            s.step(&model, &RepairAction::new(vec![0, 1])),
            Err(Error::InvalidAction(_))
        ));
        assert!(s.step(&model, &RepairAction::new(vec![1])).is_err());
        assert!(s.step(&model, &RepairAction::new(vec![1, 2, 3])).is_err());
        assert!(s.step(&model, &RepairAction::new(vec![1, 9])).is_err());
        assert_eq!(s.clock(), 0.0);
    }

    #[test]
    fn no_damage_gives_empty_trajectory() {
        let net = star(3);
        let model = RecoveryModel::new(&net, ServiceMode::Households, 2).unwrap();
        let scenario = DamageScenario::from_repair_days(vec![0.0; 3]);
        let run = run_policy(&model, &scenario, |_| unreachable!()).unwrap();
        assert!(run.trajectory.epochs.is_empty());
        assert_eq!(run.trajectory.initial_level, 200.0);
        assert_eq!(evaluate_f1(&run.trajectory, 0.8).unwrap(), 0.0);
        assert!(evaluate_f2(&run.trajectory, F2Normalization::FinalInterval).is_err());
        assert_eq!(resilience_index(&run.trajectory, 10.0).unwrap(), 1.0);
    }

    #[test]
    fn single_minor_distribution_component() {
        let net = star(2);
        let model = RecoveryModel::new(&net, ServiceMode::Households, 1).unwrap();
        let scenario = DamageScenario::from_repair_days(vec![0.0, 0.5]);
        let run = run_policy(&model, &scenario, |_| unreachable!()).unwrap();
        assert_eq!(run.trajectory.epochs.len(), 1);
        assert_eq!(run.trajectory.epochs[0].interval, 0.5);
        assert!(run.trajectory.epochs[0].trivial);
    }

    #[test]
    fn policy_errors_abort() {
        let net = star(4);
        let model = RecoveryModel::new(&net, ServiceMode::Households, 1).unwrap();
        let scenario = DamageScenario::from_repair_days(vec![0.0, 1.0, 3.0, 2.0]);
        let err = run_policy(&model, &scenario, |_| Ok(RepairAction::new(vec![0]))).unwrap_err();
        assert!(err.to_string().contains("epoch 1"), "{err}");
    }

    #[test]
    fn f1_cases() {
        let t = traj(&[(1.5, 20.0), (3.0, 60.0), (0.5, 90.0), (2.0, 100.0)], 0.0, 100.0);
        assert_eq!(evaluate_f1(&t, 0.0).unwrap(), 0.0);
        assert_eq!(evaluate_f1(&t, 1.0).unwrap(), 7.0);
        assert_eq!(evaluate_f1(&t, 0.6).unwrap(), 4.5);
        assert_eq!(evaluate_f1(&t, 0.61).unwrap(), 5.0);
        assert!(evaluate_f1(&t, 1.5).is_err());
    }

    #[test]
    fn f2_cases() {
        let t = traj(&[(2.0, 100.0)], 0.0, 100.0);
        assert_eq!(evaluate_f2(&t, F2Normalization::FinalInterval).unwrap(), 100.0);
        let t = traj(&[(1.0, 50.0), (2.0, 100.0)], 0.0, 100.0);
        assert_eq!(evaluate_f2(&t, F2Normalization::FinalInterval).unwrap(), 125.0);
        let c = evaluate_f2(&t, F2Normalization::CumulativeTime).unwrap();
        assert!((c - 250.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn resilience_cases() {
        let full = traj(&[], 100.0, 100.0);
        assert_eq!(resilience_index(&full, 5.0).unwrap(), 1.0);
        let none = traj(&[], 0.0, 100.0);
        assert_eq!(resilience_index(&none, 5.0).unwrap(), 0.0);
        // 0.2 for 2 days, 0.6 for 3 days, then 1.0 for 5 days: (0.4 + 1.8 + 5) / 10.
        let t = traj(&[(2.0, 60.0), (3.0, 100.0)], 20.0, 100.0);
        assert!((resilience_index(&t, 10.0).unwrap() - 0.72).abs() < 1e-15);
        assert!(resilience_index(&t, 4.0).is_err());
    }

    #[test]
    fn tracker_matches_trajectory_functions() {
        let t = traj(&[(1.5, 20.0), (3.0, 60.0), (0.5, 90.0), (2.0, 100.0)], 0.0, 100.0);
        for obj in [
            Objective::f1(0.7),
            Objective::f2(),
            Objective::F2 {
                normalization: F2Normalization::CumulativeTime,
            },
        ] {
            let mut tr = ScoreTracker::new(obj, 100.0, 0.0);
            for e in &t.epochs {
                tr.record(e.interval, e.level, e.clock);
            }
            assert_eq!(tr.value(), obj.evaluate(&t).unwrap());
        }
    }
}
