//! The rollout kernel: apply one candidate action, then let the base
//! heuristic finish the recovery, and score the completed string.
//!
//! A playout never allocates once its [`Scratch`] has warmed up. The base
//! heuristic's crews always sit on the first damaged components in priority
//! order, so the kernel keeps them in a small window and refills it from a
//! cursor over the epoch's damaged set, sorted by rank once per epoch.

use crate::sim::{RecoveryModel, ScoreTracker, ServiceCounters, SimState, COMPLETION_EPS};

/// Reusable per-worker buffers.
#[derive(Debug, Clone)]
pub struct Scratch {
    remaining: Vec<f64>,
    service: ServiceCounters,
    window: Vec<usize>,
}

impl Scratch {
    pub fn new(model: &RecoveryModel<'_>) -> Self {
        Self {
            remaining: Vec::with_capacity(model.component_count()),
            service: model.counters(&vec![0.0; model.component_count()]),
            window: Vec::with_capacity(model.resources()),
        }
    }
}

struct Run<'s, 'm> {
    model: &'s RecoveryModel<'m>,
    remaining: &'s mut [f64],
    service: &'s mut ServiceCounters,
    level: f64,
    clock: f64,
    damaged: usize,
    tracker: ScoreTracker,
}

impl Run<'_, '_> {
    #[inline]
    fn epoch(&mut self, assigned: &[usize]) {
        let mut interval = f64::INFINITY;
        for &u in assigned {
            interval = interval.min(self.remaining[u]);
        }
        let mut changed = false;
        for &u in assigned {
            let rem = &mut self.remaining[u];
            *rem -= interval;
            if *rem <= COMPLETION_EPS {
                *rem = 0.0;
                self.damaged -= 1;
                changed |= self.model.repair(u, self.service);
            }
        }
        self.clock += interval;
        if changed {
            self.level = self.model.level_from_blocked(self.service);
        }
        self.tracker.record(interval, self.level, self.clock);
    }
}

/// Scores `first` followed by the base heuristic until every component is
/// repaired.
///
/// `ranked` lists the damaged components of `state` in base-priority order
/// and `tracker` carries the objective bookkeeping of the string so far.
pub fn score_candidate(
    model: &RecoveryModel<'_>,
    state: &SimState,
    tracker: ScoreTracker,
    ranked: &[usize],
    first: Option<&[usize]>,
    scratch: &mut Scratch,
) -> ScoreTracker {
    scratch.remaining.clear();
    scratch.remaining.extend_from_slice(state.remaining());
    scratch.service.copy_from(state.service());
    let Scratch {
        remaining,
        service,
        window,
    } = scratch;
    let mut run = Run {
        model,
        remaining,
        service,
        level: state.level(),
        clock: state.clock(),
        damaged: state.damaged().len(),
        tracker,
    };
    if let Some(first) = first {
        if run.damaged == 0 || run.tracker.is_settled() {
            return run.tracker;
        }
        run.epoch(first);
    }

    let n = model.resources();
    window.clear();
    let mut cursor = 0;
    while run.damaged > 0 && !run.tracker.is_settled() {
        while window.len() < n && cursor < ranked.len() {
            let u = ranked[cursor];
            cursor += 1;
            if run.remaining[u] > 0.0 {
                window.push(u);
            }
        }
        run.epoch(window);
        let remaining = &run.remaining;
        window.retain(|&u| remaining[u] > 0.0);
    }
    run.tracker
}
